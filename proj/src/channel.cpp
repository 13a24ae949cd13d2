#include "clipofdm/channel.hpp"

#include <cmath>
#include <string>

#include "clipofdm/error.hpp"

namespace clipofdm {

std::vector<double> generate_multipath(Rng& rng, std::size_t num_taps, double decay,
                                       std::size_t cp_len, bool normalize) {
  if (num_taps == 0) throw SizeError("channel needs at least one tap");
  if (num_taps > cp_len) {
    throw SizeError("channel length " + std::to_string(num_taps) + " exceeds cyclic prefix " +
                    std::to_string(cp_len));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> taps(num_taps);
  for (std::size_t k = 0; k < num_taps; ++k) {
    taps[k] = gauss(rng) * std::exp(-decay * static_cast<double>(k));
  }
  if (normalize) {
    double energy = 0.0;
    for (double h : taps) energy += h * h;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& h : taps) h *= scale;
  }
  return taps;
}

TimeWaveform apply_channel(const TimeWaveform& s, const ChannelModel& channel, Rng& rng) {
  const auto& h = channel.taps;
  if (h.empty()) throw SizeError("channel has no taps");
  if (h.size() - 1 > s.cp_len) {
    throw SizeError("cyclic prefix of " + std::to_string(s.cp_len) + " samples is too short for " +
                    std::to_string(h.size()) + " channel taps");
  }
  if (channel.noise_variance < 0.0) throw std::domain_error("noise variance must be >= 0");

  const std::size_t n = s.body_size();
  TimeWaveform y;
  y.samples.assign(n, 0.0);
  if (h.size() == 1) {
    const auto body = s.body();
    for (std::size_t i = 0; i < n; ++i) y.samples[i] = h[0] * body[i];
  } else {
    const double* src = s.samples.data() + s.cp_len;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t l = 0; l < h.size(); ++l) {
        acc += h[l] * src[static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(l)];
      }
      y.samples[i] = acc;
    }
  }
  if (channel.noise_variance > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(channel.noise_variance));
    for (double& v : y.samples) v += noise(rng);
  }
  return y;
}

double NoiseCalibration::noise_variance() const {
  const double eb = energy_per_block / bits_per_block;
  return eb / (2.0 * std::pow(10.0, ebno_db / 10.0));
}

NoiseCalibration make_noise_calibration(double ebno_db, std::size_t n,
                                        const Constellation& constellation, const ClipModel& clip,
                                        EnergyConvention convention) {
  if (!valid_block_size(n)) throw SizeError("invalid block size " + std::to_string(n));
  NoiseCalibration cal;
  cal.ebno_db = ebno_db;
  cal.convention = convention;
  cal.bits_per_block = static_cast<double>((n / 2 - 1) * static_cast<std::size_t>(constellation.bits_per_symbol()));
  const double power = convention == EnergyConvention::transmitted ? clip.clipped_power() : 1.0;
  cal.energy_per_block = static_cast<double>(n) * power;
  return cal;
}

double calibrate_noise(double ebno_db, std::size_t n, const Constellation& constellation,
                       const ClipModel& clip, EnergyConvention convention) {
  return make_noise_calibration(ebno_db, n, constellation, clip, convention).noise_variance();
}

}  // namespace clipofdm
