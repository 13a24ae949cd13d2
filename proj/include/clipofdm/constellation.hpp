#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace clipofdm {

using Bit = std::uint8_t;

/// Square M-QAM with independent Gray-labelled PAM per real dimension.
///
/// Per-dimension levels are strictly increasing, symmetric about zero and have
/// unit mean power, e.g. [-1, +1] for 4-QAM and [-3, -1, 1, 3] / sqrt(5) for
/// 16-QAM. Level index i carries the Gray label i ^ (i >> 1), written most
/// significant bit first.
class Constellation {
 public:
  /// M must be 4 or 16.
  explicit Constellation(int order);

  int order() const noexcept { return order_; }
  std::span<const double> levels() const noexcept { return levels_; }
  int bits_per_dimension() const noexcept { return bits_per_dim_; }
  int bits_per_symbol() const noexcept { return 2 * bits_per_dim_; }

  /// Index of the level nearest to v (ties resolve to the lower index).
  std::size_t slice(double v) const noexcept;

  unsigned gray_label(std::size_t level_index) const noexcept;
  std::size_t level_from_label(unsigned label) const noexcept;

  /// Bits of one real dimension, MSB first, appended to `out`.
  void append_bits(std::size_t level_index, std::vector<Bit>& out) const;

  /// Maps bits to symbols: per symbol the real dimension's bits come first,
  /// then the imaginary dimension's; symbols in order. bits.size() must be a
  /// multiple of bits_per_symbol().
  std::vector<std::complex<double>> modulate(std::span<const Bit> bits) const;

  /// Hard decisions on a packed spectrum (slots 1..N/2-1 real, N/2+1..N-1
  /// imaginary) straight to bits in the same order modulate() consumes them.
  std::vector<Bit> decide_bits(std::span<const double> packed) const;

  /// Nearest-level value for each packed slot; slots 0 and N/2 stay zero.
  std::vector<double> decide_levels(std::span<const double> packed) const;

 private:
  int order_;
  int bits_per_dim_;
  std::vector<double> levels_;
};

/// Hamming distance between equal-length bit vectors.
std::size_t count_bit_errors(std::span<const Bit> a, std::span<const Bit> b);

}  // namespace clipofdm
