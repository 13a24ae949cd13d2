#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "clipofdm/constellation.hpp"
#include "clipofdm/transform.hpp"

namespace clipofdm {

using Rng = std::mt19937_64;

/// Memoryless Cartesian clipper f(z) = min(max(z, -T), T).
///
/// An infinite threshold disables clipping. Derived constants assume a
/// unit-variance Gaussian input.
struct ClipModel {
  double threshold = std::numeric_limits<double>::infinity();

  static ClipModel none() { return {}; }
  static ClipModel at(double t);

  bool active() const noexcept { return threshold < std::numeric_limits<double>::infinity(); }
  double apply(double v) const noexcept { return v > threshold ? threshold : (v < -threshold ? -threshold : v); }

  /// E[z f(z)] / E[z^2].
  double bussgang_gain() const;
  /// E[f(z)^2].
  double clipped_power() const;
};

/// alpha = erf(T / sqrt(2)); 1 for T = +inf. Throws for T <= 0.
double bussgang_gain(double threshold);

/// E[f(z)^2] = 1 - 2Q(T) - 2 T phi(T) + 2 T^2 Q(T); 1 for T = +inf.
double clipped_power(double threshold);

/// One transmitted block. `s` equals `z` until a clip is applied.
struct TxBlock {
  std::vector<Bit> bits;
  std::vector<std::complex<double>> symbols;
  RealSpectrum x;
  TimeWaveform z;
  TimeWaveform s;
};

/// Draws (N/2 - 1) log2(M) uniform bits, Gray-maps them, packs and
/// transforms. The block is returned unclipped.
TxBlock generate_block(Rng& rng, const TransformPlan& plan, const Constellation& constellation);

TimeWaveform clip(const TimeWaveform& w, const ClipModel& model);
void clip_in_place(std::span<double> w, const ClipModel& model) noexcept;

/// Replaces tx.s with f(tx.z).
void apply_clip(TxBlock& tx, const ClipModel& model);

/// 20 log10(max|w| / rms(w)) over the body. Throws on an all-zero body.
double crest_factor_db(const TimeWaveform& w);

/// Prepends the last `ncp` body samples. `w` must not already carry a prefix.
TimeWaveform add_cp(const TimeWaveform& w, std::size_t ncp);
TimeWaveform strip_cp(const TimeWaveform& w);

}  // namespace clipofdm
