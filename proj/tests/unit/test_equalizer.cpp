#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "clipofdm/channel.hpp"
#include "clipofdm/equalizer.hpp"
#include "clipofdm/error.hpp"

using namespace clipofdm;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TxBlock clipped_block(std::size_t n, std::uint64_t seed, double t) {
  const TransformPlan plan(n);
  Rng rng(seed);
  TxBlock tx = generate_block(rng, plan, Constellation(4));
  apply_clip(tx, ClipModel::at(t));
  return tx;
}

}  // namespace

TEST_CASE("frequency response") {
  const std::vector<double> h{0.8, 0.6};
  const FreqResponse r(h, 8);
  REQUIRE(r.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    const double ph = -2.0 * std::numbers::pi * static_cast<double>(k) / 8.0;
    const std::complex<double> want = 0.8 + 0.6 * std::complex<double>(std::cos(ph), std::sin(ph));
    CHECK(std::abs(r[k] - want) < 1e-14);
    CHECK(std::abs(r[k] - std::conj(r[(8 - k) % 8])) < 1e-14);
  }
  CHECK_THROWS(FreqResponse(std::vector<double>(9, 1.0), 8));
}

TEST_CASE("identity response leaves y untouched") {
  const TxBlock tx = clipped_block(256, 1, 0.7);
  const ZfResult r = zf_preprocess(tx.s.samples, FreqResponse(std::vector<double>{1.0}, 256));
  CHECK(max_abs_diff(r.samples, tx.s.samples) < 1e-14);
  CHECK(r.floor_hits == 0);
  CHECK(r.noise_gain == doctest::Approx(1.0));
}

TEST_CASE("two-tap channel is inverted exactly") {
  const TxBlock tx = clipped_block(4096, 2, 0.7);
  const std::vector<double> h{0.8, 0.6};
  Rng rng(0);
  const TimeWaveform y = apply_channel(add_cp(tx.s, 64), ChannelModel{h, 0.0}, rng);
  const ZfResult r = zf_preprocess(y.body(), FreqResponse(h, 4096));
  CHECK(max_abs_diff(r.samples, tx.s.samples) < 1e-9);
}

TEST_CASE("pure delay is undone") {
  const TxBlock tx = clipped_block(512, 3, 0.8);
  const std::vector<double> h{0.0, 1.0};
  Rng rng(0);
  const TimeWaveform y = apply_channel(add_cp(tx.s, 4), ChannelModel{h, 0.0}, rng);
  CHECK(max_abs_diff(zf_preprocess(y.body(), FreqResponse(h, 512)).samples, tx.s.samples) < 1e-12);
}

TEST_CASE("random channels are inverted") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng hr(seed);
    const auto h = generate_multipath(hr);
    const FreqResponse resp(h, 4096);
    double hmax = 0.0, hmin = 1e300;
    for (auto v : resp.bins()) {
      hmax = std::max(hmax, std::abs(v));
      hmin = std::min(hmin, std::abs(v));
    }
    if (hmin < kZfFloorRatio * hmax) continue;
    const TxBlock tx = clipped_block(4096, seed + 50, 0.8);
    Rng rng(0);
    const TimeWaveform y = apply_channel(add_cp(tx.s, 64), ChannelModel{h, 0.0}, rng);
    const ZfResult r = zf_preprocess(y.body(), resp);
    CHECK(r.floor_hits == 0);
    CHECK(max_abs_diff(r.samples, tx.s.samples) < 1e-8);
  }
}

TEST_CASE("linearity") {
  Rng hr(9);
  const FreqResponse resp(generate_multipath(hr), 1024);
  const TxBlock a = clipped_block(1024, 1, 0.7);
  const TxBlock b = clipped_block(1024, 2, 0.7);
  std::vector<double> mix(1024);
  for (std::size_t i = 0; i < 1024; ++i) mix[i] = 2.0 * a.s.samples[i] - 0.5 * b.s.samples[i];
  const auto ra = zf_preprocess(a.s.samples, resp).samples;
  const auto rb = zf_preprocess(b.s.samples, resp).samples;
  const auto rm = zf_preprocess(mix, resp).samples;
  for (std::size_t i = 0; i < 1024; ++i) CHECK(std::abs(rm[i] - (2.0 * ra[i] - 0.5 * rb[i])) < 1e-9);
}

TEST_CASE("singular bins are floored and counted") {
  // h = [1, 1] has a zero at Nyquist.
  const FreqResponse resp(std::vector<double>{1.0, 1.0}, 64);
  std::vector<double> y(64, 0.0);
  y[3] = 1.0;
  const ZfResult r = zf_preprocess(y, resp);
  CHECK(r.floor_hits == 1);
  for (double v : r.samples) CHECK(std::isfinite(v));
}

TEST_CASE("noise after ZF has per-bin variance sigma^2 / |H_k|^2") {
  const std::size_t n = 256;
  Rng hr(4);
  const auto h = generate_multipath(hr, 8, 0.3, 8);
  const FreqResponse resp(h, n);
  const double sigma2 = 0.1;
  std::vector<double> power(n / 2 + 1, 0.0);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  Rng rng(6);
  std::normal_distribution<double> g(0.0, std::sqrt(sigma2));
  const int trials = 4000;
  double gain = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> w(n);
    for (double& v : w) v = g(rng);
    const ZfResult r = zf_preprocess(w, resp);
    gain = r.noise_gain;
    resp.dft().forward(r.samples, spec);
    for (std::size_t k = 0; k <= n / 2; ++k) power[k] += std::norm(spec[k]) / static_cast<double>(n);
  }
  double mean_inv = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean_inv += 1.0 / std::norm(resp[k]);
  CHECK(gain == doctest::Approx(mean_inv / static_cast<double>(n)).epsilon(1e-12));
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double want = sigma2 / std::norm(resp[k]);
    CHECK(power[k] / trials == doctest::Approx(want).epsilon(0.1));
  }
}

TEST_CASE("length mismatch") {
  const FreqResponse resp(std::vector<double>{1.0}, 64);
  CHECK_THROWS_AS(zf_preprocess(std::vector<double>(32), resp), SizeError);
}
