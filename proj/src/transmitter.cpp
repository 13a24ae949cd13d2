#include "clipofdm/transmitter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "clipofdm/error.hpp"

namespace clipofdm {

namespace {

void require_positive_threshold(double t) {
  if (!(t > 0.0)) throw std::domain_error("clip threshold must be positive");
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace

ClipModel ClipModel::at(double t) {
  require_positive_threshold(t);
  return ClipModel{t};
}

double ClipModel::bussgang_gain() const { return clipofdm::bussgang_gain(threshold); }
double ClipModel::clipped_power() const { return clipofdm::clipped_power(threshold); }

double bussgang_gain(double threshold) {
  require_positive_threshold(threshold);
  if (std::isinf(threshold)) return 1.0;
  return std::erf(threshold / std::numbers::sqrt2);
}

double clipped_power(double threshold) {
  require_positive_threshold(threshold);
  if (std::isinf(threshold)) return 1.0;
  const double q = normal_tail(threshold);
  return 1.0 - 2.0 * q - 2.0 * threshold * normal_pdf(threshold) + 2.0 * threshold * threshold * q;
}

TxBlock generate_block(Rng& rng, const TransformPlan& plan, const Constellation& constellation) {
  const std::size_t n = plan.size();
  const std::size_t nbits = (n / 2 - 1) * static_cast<std::size_t>(constellation.bits_per_symbol());
  std::vector<Bit> bits(nbits);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < nbits; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<Bit>(word & 1u);
    word >>= 1;
  }
  auto symbols = constellation.modulate(bits);
  RealSpectrum x = pack_qam(symbols);
  TimeWaveform z = plan.forward(x);
  TimeWaveform s = z;
  return TxBlock{std::move(bits), std::move(symbols), std::move(x), std::move(z), std::move(s)};
}

void clip_in_place(std::span<double> w, const ClipModel& model) noexcept {
  if (!model.active()) return;
  for (double& v : w) v = model.apply(v);
}

TimeWaveform clip(const TimeWaveform& w, const ClipModel& model) {
  TimeWaveform out = w;
  clip_in_place(out.samples, model);
  return out;
}

void apply_clip(TxBlock& tx, const ClipModel& model) { tx.s = clip(tx.z, model); }

double crest_factor_db(const TimeWaveform& w) {
  const auto body = w.body();
  double peak = 0.0;
  double energy = 0.0;
  for (double v : body) {
    peak = std::max(peak, std::abs(v));
    energy += v * v;
  }
  if (body.empty() || energy == 0.0) throw std::domain_error("crest factor of a zero-power waveform");
  const double rms = std::sqrt(energy / static_cast<double>(body.size()));
  return 20.0 * std::log10(peak / rms);
}

TimeWaveform add_cp(const TimeWaveform& w, std::size_t ncp) {
  if (w.cp_len != 0) throw SizeError("waveform already carries a cyclic prefix");
  const std::size_t n = w.samples.size();
  if (ncp >= n) {
    throw SizeError("cyclic prefix length " + std::to_string(ncp) + " must be below block size " +
                    std::to_string(n));
  }
  TimeWaveform out;
  out.cp_len = ncp;
  out.samples.reserve(n + ncp);
  out.samples.insert(out.samples.end(), w.samples.end() - static_cast<std::ptrdiff_t>(ncp), w.samples.end());
  out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.end());
  return out;
}

TimeWaveform strip_cp(const TimeWaveform& w) {
  TimeWaveform out;
  const auto body = w.body();
  out.samples.assign(body.begin(), body.end());
  return out;
}

}  // namespace clipofdm
