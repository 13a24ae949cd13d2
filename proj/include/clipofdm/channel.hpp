#pragma once

#include <cstddef>
#include <vector>

#include "clipofdm/constellation.hpp"
#include "clipofdm/transform.hpp"
#include "clipofdm/transmitter.hpp"

namespace clipofdm {

/// Linear time-invariant channel plus real AWGN:
///   y_n = sum_l h_l s_{n-l} + w_n,  w_n ~ N(0, noise_variance).
struct ChannelModel {
  std::vector<double> taps{1.0};
  double noise_variance = 0.0;
};

/// Random tap vector h_k = g_k exp(-decay k), g_k ~ N(0,1), k < num_taps,
/// optionally scaled to unit energy. Throws when num_taps exceeds cp_len.
std::vector<double> generate_multipath(Rng& rng, std::size_t num_taps = 64, double decay = 0.05,
                                       std::size_t cp_len = 64, bool normalize = true);

/// Passes `s` through the channel and returns the N-sample body window.
/// Samples before the body come from the cyclic prefix, so a channel with
/// taps.size() - 1 <= s.cp_len acts as a cyclic convolution on the body.
TimeWaveform apply_channel(const TimeWaveform& s, const ChannelModel& channel, Rng& rng);

enum class EnergyConvention { transmitted, preclip };

/// How Eb/N0 maps to the per-sample noise variance.
///
/// Energy per block is N * E[f(z)^2] under `transmitted` and N under
/// `preclip`; the cyclic prefix is not counted.
struct NoiseCalibration {
  double ebno_db = 0.0;
  EnergyConvention convention = EnergyConvention::transmitted;
  double bits_per_block = 0.0;
  double energy_per_block = 0.0;

  /// sigma_w^2 = (E / B) / (2 * 10^(Eb/N0 / 10)).
  double noise_variance() const;
};

NoiseCalibration make_noise_calibration(double ebno_db, std::size_t n,
                                        const Constellation& constellation, const ClipModel& clip,
                                        EnergyConvention convention);

double calibrate_noise(double ebno_db, std::size_t n, const Constellation& constellation,
                       const ClipModel& clip, EnergyConvention convention);

}  // namespace clipofdm
