// Monte-Carlo BER sweeps for clipped OFDM receivers.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "clipofdm/error.hpp"
#include "clipofdm/harness.hpp"

namespace {

using clipofdm::SimConfig;

void apply(SimConfig& cfg, const char* key, const std::optional<std::string>& value) {
  if (value) clipofdm::set_config_value(cfg, key, *value);
}

std::string modulation_order(const std::string& mod) {
  if (mod == "4qam" || mod == "4") return "4";
  if (mod == "16qam" || mod == "16") return "16";
  throw clipofdm::ConfigError("unknown modulation '" + mod + "' (expected 4qam or 16qam)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo BER simulation of clipped OFDM receivers"};

  std::optional<std::string> config_path, receiver, ebno, mod, clip, channel, blocks_max, min_errors, seed,
      variance_mode, energy, workers;
  std::string out = "ber.csv";
  bool skip_calibration = false;
  bool quiet = false;

  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--receiver", receiver, "comma-separated: gamp,conventional,canceller,ideal-linear");
  app.add_option("--ebno", ebno, "Eb/N0 grid start:step:stop in dB");
  app.add_option("--mod", mod, "4qam or 16qam");
  app.add_option("--clip", clip, "clipping threshold T, or none");
  app.add_option("--channel", channel, "awgn or multipath");
  app.add_option("--blocks-max", blocks_max, "block cap per point");
  app.add_option("--min-errors", min_errors, "bit errors needed per point");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--variance-mode", variance_mode, "scalar or exact");
  app.add_option("--energy", energy, "transmitted or preclip");
  app.add_option("--workers", workers, "worker threads, 0 for all cores");
  app.add_option("--out", out, "output CSV; metadata goes to <out>.meta");
  app.add_flag("--skip-calibration", skip_calibration, "skip the unclipped AWGN self-check");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);

  SimConfig cfg;
  try {
    if (config_path) cfg = clipofdm::load_config(*config_path);
    apply(cfg, "receivers", receiver);
    apply(cfg, "ebno", ebno);
    if (mod) clipofdm::set_config_value(cfg, "M", modulation_order(*mod));
    apply(cfg, "T", clip);
    apply(cfg, "channel", channel);
    apply(cfg, "max_blocks", blocks_max);
    apply(cfg, "min_bit_errors", min_errors);
    apply(cfg, "seed", seed);
    apply(cfg, "variance_mode", variance_mode);
    apply(cfg, "energy_convention", energy);
    apply(cfg, "workers", workers);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::optional<clipofdm::CalibrationResult> calibration;
    if (!skip_calibration) {
      calibration = clipofdm::run_calibration(cfg);
      if (!quiet) {
        std::fprintf(stderr, "calibration: Eb/N0 %.2f dB, measured %.4e, reference %.4e, z %.2f -> %s\n",
                     calibration->ebno_db, calibration->measured_ber, calibration->reference_ber,
                     calibration->z_score, calibration->passed ? "ok" : "MISMATCH");
      }
    }
    const auto records = clipofdm::run_sweep(cfg, [&](const clipofdm::BerRecord& r) {
      if (quiet) return;
      std::fprintf(stderr, "%-13s %6.2f dB  blocks %-7llu errors %-7llu ber %.3e\n",
                   std::string(clipofdm::to_string(r.receiver)).c_str(), r.ebno_db,
                   static_cast<unsigned long long>(r.blocks), static_cast<unsigned long long>(r.bit_errors),
                   r.ber);
    });
    clipofdm::write_csv(records, out);
    clipofdm::write_meta(cfg, out + ".meta", calibration);
    if (calibration && !calibration->passed) {
      std::cerr << "warning: calibration outside 3 sigma; results written but suspect\n";
      return 3;
    }
  } catch (const clipofdm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
