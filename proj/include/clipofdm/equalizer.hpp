#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "clipofdm/transform.hpp"

namespace clipofdm {

/// DFT of the zero-padded channel taps, all N bins.
class FreqResponse {
 public:
  FreqResponse(std::span<const double> taps, std::size_t n);

  std::size_t size() const noexcept { return bins_.size(); }
  std::span<const std::complex<double>> bins() const noexcept { return bins_; }
  const std::complex<double>& operator[](std::size_t k) const { return bins_[k]; }
  const RealDft& dft() const noexcept { return *dft_; }

 private:
  std::vector<std::complex<double>> bins_;
  std::shared_ptr<const RealDft> dft_;
};

struct ZfResult {
  std::vector<double> samples;
  /// Bins whose magnitude was raised to the singularity floor.
  std::size_t floor_hits = 0;
  /// mean_k 1/|H_k|^2 over the (floored) response: the factor by which the
  /// per-sample noise variance grows on average.
  double noise_gain = 1.0;
};

/// Bins below this fraction of max|H| are inverted at the floor magnitude.
inline constexpr double kZfFloorRatio = 1e-6;

/// y' = IDFT(DFT(y) / H).
ZfResult zf_preprocess(std::span<const double> y, const FreqResponse& response);

}  // namespace clipofdm
