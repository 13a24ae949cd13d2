#include "clipofdm/constellation.hpp"

#include <cmath>
#include <string>

#include "clipofdm/error.hpp"

namespace clipofdm {

Constellation::Constellation(int order) : order_(order) {
  if (order == 4) {
    bits_per_dim_ = 1;
    levels_ = {-1.0, 1.0};
  } else if (order == 16) {
    bits_per_dim_ = 2;
    const double s = 1.0 / std::sqrt(5.0);
    levels_ = {-3.0 * s, -1.0 * s, 1.0 * s, 3.0 * s};
  } else {
    throw ConfigError("unsupported constellation order " + std::to_string(order) +
                      " (expected 4 or 16)");
  }
}

std::size_t Constellation::slice(double v) const noexcept {
  // Levels are uniformly spaced: decision boundaries at midpoints.
  std::size_t best = 0;
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    if (v > 0.5 * (levels_[i - 1] + levels_[i])) best = i;
  }
  return best;
}

unsigned Constellation::gray_label(std::size_t level_index) const noexcept {
  const auto i = static_cast<unsigned>(level_index);
  return i ^ (i >> 1);
}

std::size_t Constellation::level_from_label(unsigned label) const noexcept {
  unsigned i = label;
  for (unsigned shift = label >> 1; shift != 0; shift >>= 1) i ^= shift;
  return i;
}

void Constellation::append_bits(std::size_t level_index, std::vector<Bit>& out) const {
  const unsigned label = gray_label(level_index);
  for (int b = bits_per_dim_ - 1; b >= 0; --b) out.push_back(static_cast<Bit>((label >> b) & 1u));
}

std::vector<std::complex<double>> Constellation::modulate(std::span<const Bit> bits) const {
  const auto per_symbol = static_cast<std::size_t>(bits_per_symbol());
  if (bits.size() % per_symbol != 0) {
    throw SizeError("bit count " + std::to_string(bits.size()) + " is not a multiple of " +
                    std::to_string(per_symbol));
  }
  std::vector<std::complex<double>> symbols;
  symbols.reserve(bits.size() / per_symbol);
  std::size_t pos = 0;
  auto read_level = [&] {
    unsigned label = 0;
    for (int b = 0; b < bits_per_dim_; ++b) label = (label << 1) | (bits[pos++] & 1u);
    return levels_[level_from_label(label)];
  };
  while (pos < bits.size()) {
    const double re = read_level();
    const double im = read_level();
    symbols.emplace_back(re, im);
  }
  return symbols;
}

std::vector<Bit> Constellation::decide_bits(std::span<const double> packed) const {
  const std::size_t half = packed.size() / 2;
  std::vector<Bit> bits;
  bits.reserve((half - 1) * static_cast<std::size_t>(bits_per_symbol()));
  for (std::size_t k = 1; k < half; ++k) {
    append_bits(slice(packed[k]), bits);
    append_bits(slice(packed[half + k]), bits);
  }
  return bits;
}

std::vector<double> Constellation::decide_levels(std::span<const double> packed) const {
  const std::size_t half = packed.size() / 2;
  std::vector<double> out(packed.size(), 0.0);
  for (std::size_t k = 1; k < packed.size(); ++k) {
    if (k != half) out[k] = levels_[slice(packed[k])];
  }
  return out;
}

std::size_t count_bit_errors(std::span<const Bit> a, std::span<const Bit> b) {
  if (a.size() != b.size()) {
    throw SizeError("bit vectors differ in length: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < a.size(); ++i) errors += (a[i] != b[i]) ? 1 : 0;
  return errors;
}

}  // namespace clipofdm
