#include "clipofdm/equalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clipofdm/error.hpp"

namespace clipofdm {

FreqResponse::FreqResponse(std::span<const double> taps, std::size_t n) {
  if (!valid_block_size(n)) throw SizeError("invalid block size " + std::to_string(n));
  if (taps.empty() || taps.size() > n) throw SizeError("channel taps must be non-empty and at most N long");
  std::vector<double> padded(n, 0.0);
  std::copy(taps.begin(), taps.end(), padded.begin());
  dft_ = std::make_shared<const RealDft>(n);
  std::vector<std::complex<double>> half(n / 2 + 1);
  dft_->forward(padded, half);
  bins_.resize(n);
  for (std::size_t k = 0; k <= n / 2; ++k) bins_[k] = half[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) bins_[k] = std::conj(half[n - k]);
}

ZfResult zf_preprocess(std::span<const double> y, const FreqResponse& response) {
  const std::size_t n = response.size();
  if (y.size() != n) {
    throw SizeError("received block has " + std::to_string(y.size()) + " samples, response has " +
                    std::to_string(n) + " bins");
  }
  double peak = 0.0;
  for (const auto& h : response.bins()) peak = std::max(peak, std::abs(h));
  if (peak == 0.0) throw std::domain_error("channel response is identically zero");
  const double floor = kZfFloorRatio * peak;

  ZfResult out;
  double inv_power_sum = 0.0;
  auto inverse_bin = [&](std::size_t k) {
    std::complex<double> h = response[k];
    const double mag = std::abs(h);
    if (mag < floor) {
      h = mag > 0.0 ? h * (floor / mag) : std::complex<double>(floor, 0.0);
      ++out.floor_hits;
    }
    return h;
  };

  const RealDft& dft = response.dft();
  std::vector<std::complex<double>> spec(n / 2 + 1);
  dft.forward(y, spec);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const auto h = inverse_bin(k);
    spec[k] /= h;
    const double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;  // conjugate mirror bin
    inv_power_sum += w / std::norm(h);
  }
  // Mirror bins share the magnitude of their partner; count their floor hits too.
  for (std::size_t k = n / 2 + 1; k < n; ++k) {
    if (std::abs(response[k]) < floor) ++out.floor_hits;
  }
  out.samples.resize(n);
  dft.inverse(spec, out.samples);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : out.samples) v *= inv_n;
  out.noise_gain = inv_power_sum * inv_n;
  return out;
}

}  // namespace clipofdm
