#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace clipofdm {

/// True when n is a power of two and at least 8 (the smallest block that
/// carries more than one data tone).
bool valid_block_size(std::size_t n) noexcept;

/// Frequency-domain coefficients of one real multicarrier block.
///
/// Slot k in [1, N/2) carries Re(xi_k); slot N/2 + k carries Im(xi_k).
/// Slots 0 (DC) and N/2 (Nyquist) are always zero; the constructor rejects
/// anything else.
class RealSpectrum {
 public:
  explicit RealSpectrum(std::size_t n);
  explicit RealSpectrum(std::vector<double> coeffs);

  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t k) const { return coeffs_[k]; }

 private:
  std::vector<double> coeffs_;
};

/// Real time-domain samples, optionally preceded by a cyclic prefix.
struct TimeWaveform {
  std::vector<double> samples;
  std::size_t cp_len = 0;

  std::size_t body_size() const noexcept { return samples.size() - cp_len; }
  std::span<const double> body() const noexcept {
    return std::span<const double>(samples).subspan(cp_len);
  }
};

/// The real N x N IDFT operator mapping packed QAM coefficients to samples:
///
///   column k,       0 <= k < N/2 :  sqrt(2/N) cos(2 pi n k / N)
///   column N/2 + m, 0 <= m < N/2 : -sqrt(2/N) sin(2 pi n m / N)
///
/// so that F x reproduces z_n = Re{ sqrt(2/N) sum_k xi_k exp(j 2 pi n k / N) }.
/// Column 0 is the DC cosine and column N/2 is identically zero; neither is
/// reachable from an admissible spectrum.
///
/// The plan is immutable and may be shared between threads.
class TransformPlan {
 public:
  enum class Mode { fast, dense };

  explicit TransformPlan(std::size_t n, Mode mode = Mode::fast);

  std::size_t size() const noexcept { return n_; }
  Mode mode() const noexcept { return mode_; }

  TimeWaveform forward(const RealSpectrum& x) const;

  /// F^T v restricted to the admissible subspace: slots 0 and N/2 are
  /// returned as zero.
  RealSpectrum adjoint(std::span<const double> v) const;
  RealSpectrum adjoint(const TimeWaveform& v) const { return adjoint(v.body()); }

  /// Raw-buffer variants for inner loops. `x[0]` and `x[N/2]` are ignored on
  /// input and written as zero on output.
  void forward(std::span<const double> x, std::span<double> z) const;
  void adjoint(std::span<const double> v, std::span<double> x) const;

 private:
  struct Impl;
  std::size_t n_;
  Mode mode_;
  std::shared_ptr<const Impl> impl_;
};

/// Dense N x N matrix of the operator above, row-major (entry (n, k) at
/// n * N + k). O(N^2) memory; used as a validation oracle.
std::vector<double> build_dense_matrix(std::size_t n);

/// Thin wrapper over a real-input DFT of length N (unnormalized,
/// X_k = sum_n x_n exp(-j 2 pi n k / N), k = 0..N/2) and its inverse.
class RealDft {
 public:
  explicit RealDft(std::size_t n);
  ~RealDft();
  RealDft(const RealDft&) = delete;
  RealDft& operator=(const RealDft&) = delete;

  std::size_t size() const noexcept { return n_; }

  /// in.size() == N, out.size() == N/2 + 1.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Inverse without the 1/N factor. `in` is treated as read-only.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

/// Places N/2 - 1 complex symbols into an admissible spectrum of size N.
RealSpectrum pack_qam(std::span<const std::complex<double>> symbols);
std::vector<std::complex<double>> unpack_qam(const RealSpectrum& x);

}  // namespace clipofdm
