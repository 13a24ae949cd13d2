#include "clipofdm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "clipofdm/baselines.hpp"
#include "clipofdm/error.hpp"

namespace clipofdm {

namespace {

// Blocks are simulated in fixed-size chunks so the stopping point does not
// depend on the worker count.
constexpr std::uint64_t kChunkBlocks = 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t receiver_tag(ReceiverKind r) { return static_cast<std::uint64_t>(r) + 1; }

unsigned worker_count(const SimConfig& c) {
  if (c.workers > 0) return c.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::uint64_t block_seed(std::uint64_t master, ReceiverKind receiver, std::size_t ebno_index,
                         std::uint64_t block_index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ receiver_tag(receiver));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ebno_index));
  return splitmix64(h ^ block_index);
}

std::uint64_t channel_seed(std::uint64_t master, std::size_t realization) {
  std::uint64_t h = splitmix64(master ^ 0x6368616e6e656cULL);  // "channel"
  return splitmix64(h ^ static_cast<std::uint64_t>(realization));
}

SweepContext::SweepContext(SimConfig c)
    : config(std::move(c)), plan(config.N), constellation(config.M) {
  config.validate();
  if (config.channel == ChannelKind::multipath) {
    for (std::size_t r = 0; r < config.channel_realizations; ++r) {
      Rng rng(channel_seed(config.seed, r));
      channels.push_back(generate_multipath(rng, config.channel_taps, config.channel_decay, config.n_cp,
                                            config.normalize_channel));
      responses.emplace_back(channels.back(), config.N);
    }
  }
}

double point_noise_variance(const SweepContext& ctx, ReceiverKind receiver, double ebno_db) {
  const ClipModel clip = receiver == ReceiverKind::ideal_linear ? ClipModel::none() : ctx.config.clip_model();
  return calibrate_noise(ebno_db, ctx.config.N, ctx.constellation, clip, ctx.config.energy_convention);
}

BlockOutcome simulate_block(const SweepContext& ctx, ReceiverKind receiver, std::size_t ebno_index,
                            std::uint64_t block_index) {
  const SimConfig& cfg = ctx.config;
  const auto grid = cfg.ebno.points();
  if (ebno_index >= grid.size()) throw ConfigError("Eb/N0 index out of range");
  const double sigma2 = point_noise_variance(ctx, receiver, grid[ebno_index]);
  const ClipModel clip = receiver == ReceiverKind::ideal_linear ? ClipModel::none() : cfg.clip_model();

  Rng rng(block_seed(cfg.seed, receiver, ebno_index, block_index));
  TxBlock tx = generate_block(rng, ctx.plan, ctx.constellation);
  apply_clip(tx, clip);

  BlockOutcome out;
  std::vector<double> y;
  double rx_noise = sigma2;
  if (cfg.channel == ChannelKind::multipath) {
    out.realization = static_cast<std::size_t>(block_index % ctx.channels.size());
    const ChannelModel ch{ctx.channels[out.realization], sigma2};
    const TimeWaveform received = apply_channel(add_cp(tx.s, cfg.n_cp), ch, rng);
    ZfResult zf = zf_preprocess(received.body(), ctx.responses[out.realization]);
    out.zf_floor_hits = zf.floor_hits;
    if (cfg.zf_noise == ZfNoiseModel::average) rx_noise = sigma2 * zf.noise_gain;
    y = std::move(zf.samples);
  } else {
    y = apply_channel(tx.s, ChannelModel{{1.0}, sigma2}, rng).samples;
  }

  std::vector<Bit> decided;
  switch (receiver) {
    case ReceiverKind::gamp: {
      GampConfig g;
      g.t_max = cfg.t_max;
      g.variance_mode = cfg.variance_mode;
      g.early_stop = cfg.early_stop > 0 ? EarlyStop::stable(cfg.early_stop) : EarlyStop::off();
      g.metric_input = cfg.metric_input;
      g.noise_variance = rx_noise;
      g.clip = clip;
      g.constellation = ctx.constellation;
      GampResult res = gamp_receive(y, g, ctx.plan);
      out.iterations = res.diagnostics.iterations_used;
      out.converged_at = res.diagnostics.converged_at;
      out.numerical_failure = res.diagnostics.numerical_failure;
      out.variance_violations = res.diagnostics.variance_violations;
      decided = std::move(res.bits);
      break;
    }
    case ReceiverKind::conventional:
    case ReceiverKind::ideal_linear:
      decided = conventional_receive(y, ctx.plan, ctx.constellation, clip, cfg.alpha_correction);
      break;
    case ReceiverKind::canceller: {
      CancellerConfig cc;
      cc.iterations = cfg.canceller_iterations;
      cc.clip = clip;
      cc.constellation = ctx.constellation;
      decided = bussgang_cancel(y, cc, ctx.plan).bits;
      break;
    }
  }
  out.bits = tx.bits.size();
  out.bit_errors = count_bit_errors(decided, tx.bits);
  return out;
}

BerRecord simulate_point(const SweepContext& ctx, ReceiverKind receiver, std::size_t ebno_index) {
  const SimConfig& cfg = ctx.config;
  const auto started = std::chrono::steady_clock::now();

  BerRecord rec;
  rec.receiver = receiver;
  rec.ebno_db = cfg.ebno.points().at(ebno_index);
  rec.N = cfg.N;
  rec.M = cfg.M;
  rec.T = receiver == ReceiverKind::ideal_linear ? std::numeric_limits<double>::infinity() : cfg.T;
  rec.channel = cfg.channel;
  rec.seed = cfg.seed;

  const bool multipath = cfg.channel == ChannelKind::multipath;
  const std::uint64_t min_blocks =
      multipath ? std::min<std::uint64_t>(cfg.channel_realizations, cfg.max_blocks) : 1;
  std::vector<std::uint64_t> real_bits(ctx.channels.size(), 0);
  std::vector<std::uint64_t> real_errors(ctx.channels.size(), 0);
  std::uint64_t iterations = 0;
  std::uint64_t converged_at = 0;

  const unsigned workers = worker_count(cfg);
  std::vector<BlockOutcome> chunk;
  bool done = false;
  for (std::uint64_t first = 0; !done && first < cfg.max_blocks; first += kChunkBlocks) {
    const std::uint64_t count = std::min(kChunkBlocks, cfg.max_blocks - first);
    chunk.assign(count, BlockOutcome{});
    if (workers <= 1) {
      for (std::uint64_t i = 0; i < count; ++i) chunk[i] = simulate_block(ctx, receiver, ebno_index, first + i);
    } else {
      std::atomic<std::uint64_t> next{0};
      std::vector<std::exception_ptr> errors(workers);
      {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::uint64_t>(workers, count); ++w) {
          pool.emplace_back([&, w] {
            try {
              for (std::uint64_t i = next++; i < count; i = next++) {
                chunk[i] = simulate_block(ctx, receiver, ebno_index, first + i);
              }
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
      }
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (const BlockOutcome& b : chunk) {
      ++rec.blocks;
      rec.bits += b.bits;
      rec.bit_errors += b.bit_errors;
      iterations += static_cast<std::uint64_t>(b.iterations);
      converged_at += static_cast<std::uint64_t>(b.converged_at);
      rec.numerical_failures += b.numerical_failure ? 1 : 0;
      rec.zf_floor_hits += b.zf_floor_hits;
      rec.variance_violations += b.variance_violations;
      if (multipath) {
        real_bits[b.realization] += b.bits;
        real_errors[b.realization] += b.bit_errors;
      }
      // Multipath points stop on whole rounds so every realization carries equal weight.
      const bool whole_round = !multipath || rec.blocks % ctx.channels.size() == 0;
      if (rec.blocks >= min_blocks && whole_round && rec.bit_errors >= cfg.min_bit_errors) {
        done = true;
        break;
      }
    }
  }

  rec.ber = rec.bits ? static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits) : 0.0;
  rec.censored = rec.bit_errors == 0;
  if (receiver == ReceiverKind::gamp && rec.blocks > 0) {
    rec.avg_iterations = static_cast<double>(iterations) / static_cast<double>(rec.blocks);
    rec.avg_converged_at = static_cast<double>(converged_at) / static_cast<double>(rec.blocks);
  }
  if (multipath) {
    std::vector<double> bers;
    for (std::size_t r = 0; r < real_bits.size(); ++r) {
      if (real_bits[r]) bers.push_back(static_cast<double>(real_errors[r]) / static_cast<double>(real_bits[r]));
    }
    rec.realizations_used = bers.size();
    if (!bers.empty()) {
      double mean = 0.0;
      for (double b : bers) mean += b;
      mean /= static_cast<double>(bers.size());
      double var = 0.0;
      for (double b : bers) var += (b - mean) * (b - mean);
      rec.realization_spread = std::sqrt(var / static_cast<double>(bers.size()));
    }
  }
  if (cfg.record_wall_time) {
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

std::vector<BerRecord> run_sweep(const SimConfig& config, const ProgressFn& progress) {
  const SweepContext ctx(config);
  const auto grid = config.ebno.points();
  std::vector<BerRecord> out;
  for (ReceiverKind r : config.receivers) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.push_back(simulate_point(ctx, r, i));
      if (progress) progress(out.back());
    }
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double reference_ber(double ebno_db, int M) {
  const double ebno = std::pow(10.0, ebno_db / 10.0);
  if (M == 4) return q_function(std::sqrt(2.0 * ebno));
  if (M == 16) {
    const double u = std::sqrt(0.8 * ebno);
    return (3.0 * q_function(u) + 2.0 * q_function(3.0 * u) - q_function(5.0 * u)) / 4.0;
  }
  throw ConfigError("reference curve supports M = 4 or 16, got " + std::to_string(M));
}

std::vector<double> reference_curve(std::span<const double> ebno_db, int M) {
  std::vector<double> out;
  out.reserve(ebno_db.size());
  for (double e : ebno_db) out.push_back(reference_ber(e, M));
  return out;
}

std::optional<double> interpolate_crossing(std::span<const double> ebno_db, std::span<const double> ber,
                                           double target) {
  if (ebno_db.size() != ber.size()) throw SizeError("interpolate_crossing: length mismatch");
  const double lt = std::log10(target);
  for (std::size_t i = 0; i + 1 < ber.size(); ++i) {
    if (ber[i] <= 0.0 || ber[i + 1] <= 0.0) continue;
    if (ber[i] >= target && ber[i + 1] <= target) {
      const double l0 = std::log10(ber[i]);
      const double l1 = std::log10(ber[i + 1]);
      if (l0 == l1) return ebno_db[i];
      return ebno_db[i] + (lt - l0) / (l1 - l0) * (ebno_db[i + 1] - ebno_db[i]);
    }
  }
  return std::nullopt;
}

CalibrationResult run_calibration(const SimConfig& config) {
  SimConfig c = config;
  c.T = std::numeric_limits<double>::infinity();
  c.channel = ChannelKind::awgn;
  c.receivers = {ReceiverKind::conventional};
  c.ebno = EbnoGrid{config.M == 4 ? 4.3 : 8.0, 1.0, config.M == 4 ? 4.3 : 8.0};
  c.min_bit_errors = 2000;
  c.max_blocks = 100000;
  const SweepContext ctx(c);
  const BerRecord rec = simulate_point(ctx, ReceiverKind::conventional, 0);

  CalibrationResult out;
  out.ebno_db = rec.ebno_db;
  out.measured_ber = rec.ber;
  // The two null tones carry no energy, so the per-bit energy actually sent
  // is (N - 2) / N of the nominal value.
  const double edge = 10.0 * std::log10(static_cast<double>(c.N - 2) / static_cast<double>(c.N));
  out.reference_ber = reference_ber(rec.ebno_db + edge, c.M);
  out.bits = rec.bits;
  const double sd = std::sqrt(out.reference_ber * (1.0 - out.reference_ber) / static_cast<double>(rec.bits));
  out.z_score = (out.measured_ber - out.reference_ber) / sd;
  out.passed = std::abs(out.z_score) <= 3.0;
  return out;
}

void write_csv(std::span<const BerRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "receiver,ebno_db,N,M,T,channel,blocks,bits,bit_errors,ber,avg_iterations,numerical_failures,"
         "zf_floor_hits,wall_time_s,seed\n";
  for (const BerRecord& r : records) {
    out << to_string(r.receiver) << ',' << format_number(r.ebno_db) << ',' << r.N << ',' << r.M << ','
        << format_threshold(r.T) << ',' << to_string(r.channel) << ',' << r.blocks << ',' << r.bits << ','
        << r.bit_errors << ',' << format_number(r.ber) << ',' << format_number(r.avg_iterations) << ','
        << r.numerical_failures << ',' << r.zf_floor_hits << ',' << format_number(r.wall_time_s) << ','
        << r.seed << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<BerRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<BerRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 15) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 15 columns");
    }
    SimConfig scratch;
    BerRecord r;
    r.receiver = parse_receiver(f[0]);
    r.ebno_db = std::stod(f[1]);
    r.N = std::stoull(f[2]);
    r.M = std::stoi(f[3]);
    set_config_value(scratch, "T", f[4]);
    r.T = scratch.T;
    set_config_value(scratch, "channel", f[5]);
    r.channel = scratch.channel;
    r.blocks = std::stoull(f[6]);
    r.bits = std::stoull(f[7]);
    r.bit_errors = std::stoull(f[8]);
    r.ber = std::stod(f[9]);
    r.avg_iterations = std::stod(f[10]);
    r.numerical_failures = std::stoull(f[11]);
    r.zf_floor_hits = std::stoull(f[12]);
    r.wall_time_s = std::stod(f[13]);
    r.seed = std::stoull(f[14]);
    r.censored = r.bit_errors == 0;
    out.push_back(r);
  }
  return out;
}

void write_meta(const SimConfig& config, const std::filesystem::path& path,
                const std::optional<CalibrationResult>& calibration) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# code_version: " << kCodeVersion << "\n";
  out << to_config_text(config);
  if (calibration) {
    out << "# calibration_ebno_db: " << format_number(calibration->ebno_db) << "\n"
        << "# calibration_measured_ber: " << format_number(calibration->measured_ber) << "\n"
        << "# calibration_reference_ber: " << format_number(calibration->reference_ber) << "\n"
        << "# calibration_bits: " << calibration->bits << "\n"
        << "# calibration_z_score: " << format_number(calibration->z_score) << "\n"
        << "# calibration_passed: " << (calibration->passed ? "true" : "false") << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace clipofdm
