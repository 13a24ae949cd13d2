#include "clipofdm/sim_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clipofdm/error.hpp"

namespace clipofdm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "' (expected " +
                    std::string(expected) + ")");
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text, "a number");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text, "an integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  bad_value(key, text, "true or false");
}

}  // namespace

std::vector<double> EbnoGrid::points() const {
  std::vector<double> out;
  if (start == stop) return {start};
  if (!(step > 0.0) || stop < start) return out;
  const double slack = 1e-9 * step;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + slack) break;
    out.push_back(v);
  }
  return out;
}

ClipModel SimConfig::clip_model() const { return std::isinf(T) ? ClipModel::none() : ClipModel::at(T); }

void SimConfig::validate() const {
  if (!valid_block_size(N)) throw ConfigError("N must be a power of two >= 8");
  if (M != 4 && M != 16) throw ConfigError("M must be 4 or 16");
  if (!(T > 0.0)) throw ConfigError("T must be positive or 'none'");
  if (ebno.points().empty()) throw ConfigError("Eb/N0 grid is empty");
  if (receivers.empty()) throw ConfigError("no receivers selected");
  if (min_bit_errors < 1) throw ConfigError("min_bit_errors must be at least 1");
  if (max_blocks < 1) throw ConfigError("max_blocks must be at least 1");
  if (t_max < 1) throw ConfigError("t_max must be at least 1");
  if (early_stop != 0 && early_stop < 2) throw ConfigError("early_stop must be 0 (off) or >= 2");
  if (canceller_iterations < 1) throw ConfigError("canceller_iterations must be at least 1");
  if (n_cp >= N) throw ConfigError("n_cp must be below N");
  if (channel == ChannelKind::multipath) {
    if (channel_taps < 1 || channel_taps > n_cp) throw ConfigError("channel_taps must be in [1, n_cp]");
    if (channel_realizations < 1) throw ConfigError("channel_realizations must be at least 1");
  }
}

std::string_view to_string(ReceiverKind r) {
  switch (r) {
    case ReceiverKind::gamp: return "gamp";
    case ReceiverKind::conventional: return "conventional";
    case ReceiverKind::canceller: return "canceller";
    case ReceiverKind::ideal_linear: return "ideal-linear";
  }
  return "?";
}

std::string_view to_string(ChannelKind c) { return c == ChannelKind::awgn ? "awgn" : "multipath"; }
std::string_view to_string(EnergyConvention e) {
  return e == EnergyConvention::transmitted ? "transmitted" : "preclip";
}
std::string_view to_string(VarianceMode v) { return v == VarianceMode::scalar ? "scalar" : "exact"; }
std::string_view to_string(MetricInput m) { return m == MetricInput::hard ? "hard" : "soft"; }
std::string_view to_string(ZfNoiseModel z) { return z == ZfNoiseModel::average ? "average" : "plain"; }

ReceiverKind parse_receiver(std::string_view text) {
  text = trim(text);
  if (text == "gamp") return ReceiverKind::gamp;
  if (text == "conventional") return ReceiverKind::conventional;
  if (text == "canceller") return ReceiverKind::canceller;
  if (text == "ideal-linear" || text == "ideal_linear") return ReceiverKind::ideal_linear;
  throw ConfigError("unknown receiver '" + std::string(text) + "'");
}

std::vector<ReceiverKind> parse_receivers(std::string_view text) {
  std::vector<ReceiverKind> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.push_back(parse_receiver(item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("receiver list is empty");
  return out;
}

EbnoGrid parse_ebno_grid(std::string_view text) {
  text = trim(text);
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) {
    const double v = parse_double("ebno", text);
    return {v, 1.0, v};
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) bad_value("ebno", text, "start:step:stop");
  EbnoGrid g{parse_double("ebno", text.substr(0, c1)), parse_double("ebno", text.substr(c1 + 1, c2 - c1 - 1)),
             parse_double("ebno", text.substr(c2 + 1))};
  if (g.points().empty()) bad_value("ebno", text, "a non-empty start:step:stop grid");
  return g;
}

void set_config_value(SimConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "N") {
    c.N = parse_int<std::size_t>(key, value);
  } else if (key == "M") {
    c.M = parse_int<int>(key, value);
  } else if (key == "T") {
    c.T = (value == "none" || value == "inf") ? std::numeric_limits<double>::infinity()
                                             : parse_double(key, value);
  } else if (key == "channel") {
    if (value == "awgn") c.channel = ChannelKind::awgn;
    else if (value == "multipath") c.channel = ChannelKind::multipath;
    else bad_value(key, value, "awgn or multipath");
  } else if (key == "channel_realizations") {
    c.channel_realizations = parse_int<std::size_t>(key, value);
  } else if (key == "channel_taps") {
    c.channel_taps = parse_int<std::size_t>(key, value);
  } else if (key == "channel_decay") {
    c.channel_decay = parse_double(key, value);
  } else if (key == "normalize_channel") {
    c.normalize_channel = parse_bool(key, value);
  } else if (key == "n_cp") {
    c.n_cp = parse_int<std::size_t>(key, value);
  } else if (key == "ebno") {
    c.ebno = parse_ebno_grid(value);
  } else if (key == "receivers") {
    c.receivers = parse_receivers(value);
  } else if (key == "min_bit_errors") {
    c.min_bit_errors = parse_int<std::uint64_t>(key, value);
  } else if (key == "max_blocks") {
    c.max_blocks = parse_int<std::uint64_t>(key, value);
  } else if (key == "energy_convention") {
    if (value == "transmitted") c.energy_convention = EnergyConvention::transmitted;
    else if (value == "preclip") c.energy_convention = EnergyConvention::preclip;
    else bad_value(key, value, "transmitted or preclip");
  } else if (key == "t_max") {
    c.t_max = parse_int<int>(key, value);
  } else if (key == "variance_mode") {
    if (value == "scalar") c.variance_mode = VarianceMode::scalar;
    else if (value == "exact") c.variance_mode = VarianceMode::exact;
    else bad_value(key, value, "scalar or exact");
  } else if (key == "metric_input") {
    if (value == "hard") c.metric_input = MetricInput::hard;
    else if (value == "soft") c.metric_input = MetricInput::soft;
    else bad_value(key, value, "hard or soft");
  } else if (key == "early_stop") {
    c.early_stop = (value == "off") ? 0 : parse_int<int>(key, value);
  } else if (key == "canceller_iterations") {
    c.canceller_iterations = parse_int<int>(key, value);
  } else if (key == "alpha_correction") {
    c.alpha_correction = parse_bool(key, value);
  } else if (key == "zf_noise") {
    if (value == "average") c.zf_noise = ZfNoiseModel::average;
    else if (value == "plain") c.zf_noise = ZfNoiseModel::plain;
    else bad_value(key, value, "average or plain");
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "workers") {
    c.workers = parse_int<unsigned>(key, value);
  } else if (key == "record_wall_time") {
    c.record_wall_time = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

SimConfig parse_config(std::string_view text) {
  SimConfig c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_threshold(double t) { return std::isinf(t) ? "none" : format_number(t); }

std::string to_config_text(const SimConfig& c) {
  std::string receivers;
  for (std::size_t i = 0; i < c.receivers.size(); ++i) {
    if (i) receivers += ",";
    receivers += to_string(c.receivers[i]);
  }
  std::ostringstream o;
  o << "N = " << c.N << "\n"
    << "M = " << c.M << "\n"
    << "T = " << format_threshold(c.T) << "\n"
    << "channel = " << to_string(c.channel) << "\n"
    << "channel_realizations = " << c.channel_realizations << "\n"
    << "channel_taps = " << c.channel_taps << "\n"
    << "channel_decay = " << format_number(c.channel_decay) << "\n"
    << "normalize_channel = " << (c.normalize_channel ? "true" : "false") << "\n"
    << "n_cp = " << c.n_cp << "\n"
    << "ebno = " << format_number(c.ebno.start) << ":" << format_number(c.ebno.step) << ":"
    << format_number(c.ebno.stop) << "\n"
    << "receivers = " << receivers << "\n"
    << "min_bit_errors = " << c.min_bit_errors << "\n"
    << "max_blocks = " << c.max_blocks << "\n"
    << "energy_convention = " << to_string(c.energy_convention) << "\n"
    << "t_max = " << c.t_max << "\n"
    << "variance_mode = " << to_string(c.variance_mode) << "\n"
    << "metric_input = " << to_string(c.metric_input) << "\n"
    << "early_stop = " << c.early_stop << "\n"
    << "canceller_iterations = " << c.canceller_iterations << "\n"
    << "alpha_correction = " << (c.alpha_correction ? "true" : "false") << "\n"
    << "zf_noise = " << to_string(c.zf_noise) << "\n"
    << "seed = " << c.seed << "\n"
    << "workers = " << c.workers << "\n"
    << "record_wall_time = " << (c.record_wall_time ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace clipofdm
