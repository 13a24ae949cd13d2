#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "clipofdm/channel.hpp"
#include "clipofdm/gamp.hpp"

namespace clipofdm {

enum class ReceiverKind { gamp, conventional, canceller, ideal_linear };
enum class ChannelKind { awgn, multipath };

/// Noise variance handed to GAMP after zero-forcing: the average post-ZF
/// variance sigma^2 mean(1/|H|^2), or the raw sigma^2.
enum class ZfNoiseModel { average, plain };

/// start:step:stop in dB, inclusive of stop.
struct EbnoGrid {
  double start = 0.0;
  double step = 1.0;
  double stop = 10.0;

  std::vector<double> points() const;
};

/// Full description of one Monte-Carlo experiment. Field names double as the
/// keys of the flat `key = value` config format.
struct SimConfig {
  std::size_t N = 4096;
  int M = 4;
  double T = 0.7;  ///< +inf means no clipping ("none")
  ChannelKind channel = ChannelKind::awgn;
  std::size_t channel_realizations = 50;
  std::size_t channel_taps = 64;
  double channel_decay = 0.05;
  bool normalize_channel = true;
  std::size_t n_cp = 64;
  EbnoGrid ebno{};
  std::vector<ReceiverKind> receivers{ReceiverKind::gamp, ReceiverKind::conventional,
                                      ReceiverKind::canceller, ReceiverKind::ideal_linear};
  std::uint64_t min_bit_errors = 100;
  std::uint64_t max_blocks = 10000;
  EnergyConvention energy_convention = EnergyConvention::transmitted;
  int t_max = 30;
  VarianceMode variance_mode = VarianceMode::scalar;
  MetricInput metric_input = MetricInput::hard;
  int early_stop = 2;  ///< stable-decision run length; 0 disables
  int canceller_iterations = 3;
  bool alpha_correction = true;
  ZfNoiseModel zf_noise = ZfNoiseModel::average;
  std::uint64_t seed = 1;
  unsigned workers = 0;  ///< 0 = one per hardware thread
  bool record_wall_time = false;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  ClipModel clip_model() const;
};

/// Applies one `key = value` setting. Unknown keys and malformed values throw
/// ConfigError.
void set_config_value(SimConfig& config, std::string_view key, std::string_view value);

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment, blank lines ignored. Starts from defaults.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const SimConfig& config);

EbnoGrid parse_ebno_grid(std::string_view text);
std::vector<ReceiverKind> parse_receivers(std::string_view text);

std::string_view to_string(ReceiverKind r);
std::string_view to_string(ChannelKind c);
std::string_view to_string(EnergyConvention e);
std::string_view to_string(VarianceMode v);
std::string_view to_string(MetricInput m);
std::string_view to_string(ZfNoiseModel z);
ReceiverKind parse_receiver(std::string_view text);

/// Shortest decimal form that round-trips, independent of locale.
std::string format_number(double v);
std::string format_threshold(double t);  ///< "none" for +inf

}  // namespace clipofdm
