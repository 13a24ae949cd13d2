#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "clipofdm/equalizer.hpp"
#include "clipofdm/sim_config.hpp"

namespace clipofdm {

/// One row of results: a (receiver, Eb/N0) point.
struct BerRecord {
  ReceiverKind receiver = ReceiverKind::conventional;
  double ebno_db = 0.0;
  std::size_t N = 0;
  int M = 0;
  double T = 0.0;
  ChannelKind channel = ChannelKind::awgn;
  std::uint64_t blocks = 0;
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0.0;
  double avg_iterations = 0.0;  ///< GAMP only
  std::uint64_t numerical_failures = 0;
  std::uint64_t zf_floor_hits = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;

  // Not part of the CSV schema.
  bool censored = false;  ///< zero errors when the block cap was reached
  std::uint64_t variance_violations = 0;
  double avg_converged_at = 0.0;  ///< GAMP: mean iteration at which the final decisions appeared
  std::size_t realizations_used = 0;
  double realization_spread = 0.0;  ///< std. dev. of per-realization BER (multipath)
};

/// Shared read-only state for one sweep: transform plan, constellation and
/// the channel realizations.
struct SweepContext {
  SimConfig config;
  TransformPlan plan;
  Constellation constellation;
  std::vector<std::vector<double>> channels;
  std::vector<FreqResponse> responses;

  explicit SweepContext(SimConfig c);
};

/// Counters from one simulated block.
struct BlockOutcome {
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
  int iterations = 0;
  int converged_at = 0;
  bool numerical_failure = false;
  std::uint64_t zf_floor_hits = 0;
  std::uint64_t variance_violations = 0;
  std::size_t realization = 0;
};

/// Deterministic per-block seed from (master seed, receiver, Eb/N0 index, block index).
std::uint64_t block_seed(std::uint64_t master, ReceiverKind receiver, std::size_t ebno_index,
                         std::uint64_t block_index);
std::uint64_t channel_seed(std::uint64_t master, std::size_t realization);

/// Noise variance for a point. The ideal-linear reference always uses the
/// unclipped energy.
double point_noise_variance(const SweepContext& ctx, ReceiverKind receiver, double ebno_db);

BlockOutcome simulate_block(const SweepContext& ctx, ReceiverKind receiver, std::size_t ebno_index,
                            std::uint64_t block_index);

/// Runs blocks until min_bit_errors (checked block by block, in block order)
/// or max_blocks. Multipath points run whole rounds of one block per
/// realization, block b using realization b mod count.
BerRecord simulate_point(const SweepContext& ctx, ReceiverKind receiver, std::size_t ebno_index);

using ProgressFn = std::function<void(const BerRecord&)>;

/// Every (receiver, Eb/N0) point in config order, receivers outermost.
std::vector<BerRecord> run_sweep(const SimConfig& config, const ProgressFn& progress = {});

/// Gray square-QAM bit error rate on AWGN.
///   M = 4:  Q(sqrt(2 Eb/N0))
///   M = 16: (3 Q(u) + 2 Q(3u) - Q(5u)) / 4,  u = sqrt(4 Eb / (5 N0))
double reference_ber(double ebno_db, int M);
std::vector<double> reference_curve(std::span<const double> ebno_db, int M);

/// Q(x) = P(N(0,1) > x).
double q_function(double x);

/// Eb/N0 where a BER curve crosses `target`, by linear interpolation of
/// log10(BER) between the first bracketing pair of points with nonzero BER.
std::optional<double> interpolate_crossing(std::span<const double> ebno_db, std::span<const double> ber,
                                           double target);

/// Closed-form self-check of the simulation chain: conventional receiver,
/// no clipping, AWGN, at an Eb/N0 where the reference BER is about 1e-2.
struct CalibrationResult {
  double ebno_db = 0.0;
  double measured_ber = 0.0;
  double reference_ber = 0.0;
  std::uint64_t bits = 0;
  double z_score = 0.0;
  bool passed = false;
};
CalibrationResult run_calibration(const SimConfig& config);

/// CSV with header
/// receiver,ebno_db,N,M,T,channel,blocks,bits,bit_errors,ber,avg_iterations,
/// numerical_failures,zf_floor_hits,wall_time_s,seed
void write_csv(std::span<const BerRecord> records, const std::filesystem::path& path);
std::vector<BerRecord> read_csv(const std::filesystem::path& path);

/// Config in loadable form plus code version and, when given, the calibration outcome.
void write_meta(const SimConfig& config, const std::filesystem::path& path,
                const std::optional<CalibrationResult>& calibration = std::nullopt);

inline constexpr const char* kCodeVersion = "clipofdm 1.0.0";

}  // namespace clipofdm
