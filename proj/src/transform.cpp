#include "clipofdm/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "clipofdm/error.hpp"

namespace clipofdm {

namespace {

// The FFTW planner is not re-entrant; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_block_size(std::size_t n) {
  if (!valid_block_size(n)) {
    throw SizeError("block size must be a power of two >= 8, got " + std::to_string(n));
  }
}

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw SizeError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                    std::to_string(got));
  }
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

bool valid_block_size(std::size_t n) noexcept { return n >= 8 && (n & (n - 1)) == 0; }

// ---------------------------------------------------------------------------
// RealSpectrum

RealSpectrum::RealSpectrum(std::size_t n) : coeffs_(n, 0.0) { require_block_size(n); }

RealSpectrum::RealSpectrum(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  require_block_size(coeffs_.size());
  if (coeffs_[0] != 0.0 || coeffs_[coeffs_.size() / 2] != 0.0) {
    throw SizeError("spectrum slots 0 and N/2 must be zero");
  }
}

// ---------------------------------------------------------------------------
// RealDft

struct RealDft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

RealDft::RealDft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  require_block_size(n);
  std::vector<double> real(n);
  std::vector<std::complex<double>> cplx(n / 2 + 1);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_1d(len, real.data(), as_fftw(cplx.data()), flags);
  plans_->c2r = fftw_plan_dft_c2r_1d(len, as_fftw(cplx.data()), real.data(),
                                     flags | FFTW_DESTROY_INPUT);
}

RealDft::~RealDft() {
  std::lock_guard lock(planner_mutex());
  if (plans_->r2c) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r) fftw_destroy_plan(plans_->c2r);
}

void RealDft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  require_length(in.size(), n_, "RealDft::forward input");
  require_length(out.size(), n_ / 2 + 1, "RealDft::forward output");
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()), as_fftw(out.data()));
}

void RealDft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  require_length(in.size(), n_ / 2 + 1, "RealDft::inverse input");
  require_length(out.size(), n_, "RealDft::inverse output");
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, as_fftw(scratch.data()), out.data());
}

// ---------------------------------------------------------------------------
// TransformPlan

struct TransformPlan::Impl {
  std::unique_ptr<RealDft> dft;  // fast mode
  std::vector<double> dense;     // dense mode
};

TransformPlan::TransformPlan(std::size_t n, Mode mode) : n_(n), mode_(mode) {
  require_block_size(n);
  auto impl = std::make_shared<Impl>();
  if (mode == Mode::fast) {
    impl->dft = std::make_unique<RealDft>(n);
  } else {
    impl->dense = build_dense_matrix(n);
  }
  impl_ = std::move(impl);
}

TimeWaveform TransformPlan::forward(const RealSpectrum& x) const {
  require_length(x.size(), n_, "forward");
  TimeWaveform z;
  z.samples.resize(n_);
  forward(x.coeffs(), z.samples);
  return z;
}

RealSpectrum TransformPlan::adjoint(std::span<const double> v) const {
  std::vector<double> x(n_);
  adjoint(v, x);
  return RealSpectrum(std::move(x));
}

void TransformPlan::forward(std::span<const double> x, std::span<double> z) const {
  require_length(x.size(), n_, "forward input");
  require_length(z.size(), n_, "forward output");
  const std::size_t half = n_ / 2;
  if (mode_ == Mode::dense) {
    const auto& f = impl_->dense;
    for (std::size_t n = 0; n < n_; ++n) {
      const double* row = f.data() + n * n_;
      double acc = 0.0;
      for (std::size_t k = 1; k < n_; ++k) {
        if (k != half) acc += row[k] * x[k];
      }
      z[n] = acc;
    }
    return;
  }
  // Hermitian half-spectrum X_k = xi_k / sqrt(2N); the unnormalized c2r
  // then yields 2 Re sum_k X_k e^{j...} = sqrt(2/N) Re sum_k xi_k e^{j...}.
  thread_local std::vector<std::complex<double>> spec;
  spec.assign(half + 1, {0.0, 0.0});
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n_));
  for (std::size_t k = 1; k < half; ++k) {
    spec[k] = {x[k] * scale, x[half + k] * scale};
  }
  impl_->dft->inverse(spec, z);
}

void TransformPlan::adjoint(std::span<const double> v, std::span<double> x) const {
  require_length(v.size(), n_, "adjoint input");
  require_length(x.size(), n_, "adjoint output");
  const std::size_t half = n_ / 2;
  if (mode_ == Mode::dense) {
    const auto& f = impl_->dense;
    for (std::size_t k = 0; k < n_; ++k) x[k] = 0.0;
    for (std::size_t n = 0; n < n_; ++n) {
      const double* row = f.data() + n * n_;
      for (std::size_t k = 1; k < n_; ++k) x[k] += row[k] * v[n];
    }
    x[0] = 0.0;
    x[half] = 0.0;
    return;
  }
  thread_local std::vector<std::complex<double>> spec;
  spec.resize(half + 1);
  impl_->dft->forward(v, spec);
  const double scale = std::sqrt(2.0 / static_cast<double>(n_));
  x[0] = 0.0;
  x[half] = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    x[k] = scale * spec[k].real();
    x[half + k] = scale * spec[k].imag();
  }
}

std::vector<double> build_dense_matrix(std::size_t n) {
  require_block_size(n);
  const std::size_t half = n / 2;
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::vector<double> f(n * n);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t k = 0; k < half; ++k) {
      // Reduce the phase index mod N before scaling to keep large-N entries exact.
      const double phase = w * static_cast<double>((row * k) % n);
      f[row * n + k] = scale * std::cos(phase);
      f[row * n + half + k] = -scale * std::sin(phase);
    }
  }
  return f;
}

RealSpectrum pack_qam(std::span<const std::complex<double>> symbols) {
  const std::size_t n = 2 * (symbols.size() + 1);
  if (!valid_block_size(n)) {
    throw SizeError("symbol count must be N/2 - 1 for a valid block size, got " +
                    std::to_string(symbols.size()));
  }
  const std::size_t half = n / 2;
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 1; k < half; ++k) {
    x[k] = symbols[k - 1].real();
    x[half + k] = symbols[k - 1].imag();
  }
  return RealSpectrum(std::move(x));
}

std::vector<std::complex<double>> unpack_qam(const RealSpectrum& x) {
  const std::size_t half = x.size() / 2;
  std::vector<std::complex<double>> symbols(half - 1);
  for (std::size_t k = 1; k < half; ++k) symbols[k - 1] = {x[k], x[half + k]};
  return symbols;
}

}  // namespace clipofdm
