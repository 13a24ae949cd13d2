#include "clipofdm/gamp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "clipofdm/error.hpp"
#include "clipofdm/truncated_normal.hpp"

namespace clipofdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kViolationTolerance = 1e-9;
constexpr double kCollapsedVariance = 1e-10;

double floored(double v) { return v > kVarianceFloor ? v : kVarianceFloor; }

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double e : v) acc += e;
  return acc / static_cast<double>(v.size());
}

// |F_{n,k}|^2 without the dense matrix: (2/N) cos^2 or (2/N) sin^2 of 2 pi (nk mod N) / N.
class SquaredMagnitudes {
 public:
  explicit SquaredMagnitudes(std::size_t n) : n_(n), cos2_(n) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
      cos2_[j] = 2.0 / static_cast<double>(n) * c * c;
    }
  }
  double operator()(std::size_t row, std::size_t col) const {
    const std::size_t half = n_ / 2;
    if (col < half) return cos2_[(row * col) % n_];
    const std::size_t m = col - half;
    if (m == 0) return 0.0;
    return 2.0 / static_cast<double>(n_) - cos2_[(row * m) % n_];
  }

 private:
  std::size_t n_;
  std::vector<double> cos2_;
};

const SquaredMagnitudes& squared_magnitudes(std::size_t n) {
  thread_local std::size_t cached_n = 0;
  thread_local std::unique_ptr<SquaredMagnitudes> table;
  if (cached_n != n) {
    table = std::make_unique<SquaredMagnitudes>(n);
    cached_n = n;
  }
  return *table;
}

bool is_null_slot(std::size_t k, std::size_t n) { return k == 0 || k == n / 2; }

}  // namespace

OutputMoments output_node_moments(double y, double p_hat, double mu_p, double noise_var,
                                  double threshold) {
  if (!std::isfinite(y) || !std::isfinite(p_hat) || !std::isfinite(mu_p) || !std::isfinite(noise_var) ||
      !(mu_p > 0.0) || !(noise_var > 0.0) || !(threshold > 0.0)) {
    throw NumericalError("output node moments need finite y, p_hat and positive variances");
  }
  const double sum_var = mu_p + noise_var;
  const double lin_mean = (y * mu_p + p_hat * noise_var) / sum_var;
  const double lin_var = mu_p * noise_var / sum_var;

  OutputMoments out;
  if (std::isinf(threshold)) {
    out.mean = lin_mean;
    out.unclamped_variance = lin_var;
  } else {
    const double t = threshold;
    const TruncatedMoments left = truncated_normal_moments(p_hat, mu_p, -kInf, -t);
    const TruncatedMoments mid = truncated_normal_moments(lin_mean, lin_var, -t, t);
    const TruncatedMoments right = truncated_normal_moments(p_hat, mu_p, t, kInf);

    const std::array<double, 3> log_w{
        -(y + t) * (y + t) / (2.0 * noise_var) + left.log_mass,
        0.5 * std::log(noise_var / sum_var) - (y - p_hat) * (y - p_hat) / (2.0 * sum_var) + mid.log_mass,
        -(y - t) * (y - t) / (2.0 * noise_var) + right.log_mass,
    };
    const std::array<const TruncatedMoments*, 3> parts{&left, &mid, &right};
    const double top = *std::max_element(log_w.begin(), log_w.end());
    if (!std::isfinite(top)) throw NumericalError("output node posterior has no mass");

    std::array<double, 3> w{};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      w[i] = std::exp(log_w[i] - top);
      total += w[i];
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      w[i] /= total;
      if (w[i] > 0.0) mean += w[i] * parts[i]->mean;
    }
    double var = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (w[i] == 0.0) continue;
      const double d = parts[i]->mean - mean;
      var += w[i] * (parts[i]->variance + d * d);
    }
    out.mean = mean;
    out.unclamped_variance = var;
  }
  out.variance = std::clamp(out.unclamped_variance, kVarianceFloor, std::max(mu_p, kVarianceFloor));
  return out;
}

InputMoments input_node_moments(double r_hat, double mu_r, std::span<const double> levels,
                                std::span<double> probs) {
  const std::size_t m = levels.size();
  double top = -kInf;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = levels[i] - r_hat;
    probs[i] = -d * d / (2.0 * mu_r);
    top = std::max(top, probs[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    probs[i] = std::exp(probs[i] - top);
    total += probs[i];
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    probs[i] /= total;
    mean += levels[i] * probs[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = levels[i] - mean;
    var += d * d * probs[i];
  }
  return {mean, var};
}

GampState GampState::initial(std::size_t n, std::size_t levels) {
  GampState s;
  s.x_hat.assign(n, 0.0);
  s.mu_x.assign(n, 1.0);
  s.p_hat.assign(n, 0.0);
  s.mu_p.assign(n, 0.0);
  s.z_hat.assign(n, 0.0);
  s.mu_z.assign(n, 0.0);
  s.s_hat.assign(n, 0.0);
  s.mu_s.assign(n, 0.0);
  s.r_hat.assign(n, 0.0);
  s.mu_r.assign(n, 0.0);
  s.fx.assign(n, 0.0);
  s.levels = levels;
  s.posterior.assign(n * levels, 0.0);
  return s;
}

void output_step(GampState& state, std::span<const double> y, const TransformPlan& plan,
                 const GampConfig& config) {
  const std::size_t n = state.size();
  if (y.size() != n || plan.size() != n) throw SizeError("output_step: block size mismatch");

  if (config.variance_mode == VarianceMode::scalar) {
    std::fill(state.mu_p.begin(), state.mu_p.end(), floored(mean_of(state.mu_x)));
  } else {
    const auto& f2 = squared_magnitudes(n);
    for (std::size_t row = 0; row < n; ++row) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += f2(row, k) * state.mu_x[k];
      state.mu_p[row] = floored(acc);
    }
  }

  const double threshold = config.clip.threshold;
  const double noise_var = floored(config.noise_variance);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu_p = state.mu_p[i];
    // s_hat still holds the previous iteration's residual here.
    const double p = state.fx[i] - mu_p * state.s_hat[i];
    state.p_hat[i] = p;
    const OutputMoments z = output_node_moments(y[i], p, mu_p, noise_var, threshold);
    if (z.unclamped_variance > mu_p * (1.0 + kViolationTolerance)) ++state.variance_violations;
    state.z_hat[i] = z.mean;
    state.mu_z[i] = z.variance;
    state.s_hat[i] = (z.mean - p) / mu_p;
    state.mu_s[i] = (1.0 - z.variance / mu_p) / mu_p;
  }
}

void input_step(GampState& state, const TransformPlan& plan, const GampConfig& config) {
  const std::size_t n = state.size();
  if (plan.size() != n) throw SizeError("input_step: block size mismatch");

  if (config.variance_mode == VarianceMode::scalar) {
    const double agg = mean_of(state.mu_s);
    if (!(agg > 0.0) || !std::isfinite(agg)) {
      throw NumericalError("residual variance aggregate is not positive at t=" + std::to_string(state.t));
    }
    std::fill(state.mu_r.begin(), state.mu_r.end(), floored(1.0 / agg));
  } else {
    const auto& f2 = squared_magnitudes(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (is_null_slot(k, n)) {
        state.mu_r[k] = 0.0;
        continue;
      }
      double acc = 0.0;
      for (std::size_t row = 0; row < n; ++row) acc += f2(row, k) * state.mu_s[row];
      if (!(acc > 0.0) || !std::isfinite(acc)) {
        throw NumericalError("residual variance aggregate is not positive at t=" + std::to_string(state.t));
      }
      state.mu_r[k] = floored(1.0 / acc);
    }
  }

  plan.adjoint(state.s_hat, state.r_hat);  // r_hat <- F^T s_hat
  const auto levels = config.constellation.levels();
  for (std::size_t k = 0; k < n; ++k) {
    auto probs = std::span<double>(state.posterior).subspan(k * state.levels, state.levels);
    if (is_null_slot(k, n)) {
      state.r_hat[k] = 0.0;
      state.x_hat[k] = 0.0;
      state.mu_x[k] = 0.0;
      std::fill(probs.begin(), probs.end(), 0.0);
      continue;
    }
    state.r_hat[k] = state.x_hat[k] + state.mu_r[k] * state.r_hat[k];
    const InputMoments x = input_node_moments(state.r_hat[k], state.mu_r[k], levels, probs);
    state.x_hat[k] = x.mean;
    state.mu_x[k] = floored(x.variance);
  }
  ++state.t;
  plan.forward(state.x_hat, state.fx);
}

namespace {

double metric_from_fx(std::span<const double> y, std::span<const double> fx, const ClipModel& clip) {
  double e = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - clip.apply(fx[i]);
    e += d * d;
  }
  return e;
}

}  // namespace

double euclidean_metric(std::span<const double> y, std::span<const double> x_hat,
                        const TransformPlan& plan, const ClipModel& clip) {
  if (y.size() != plan.size()) throw SizeError("euclidean_metric: block size mismatch");
  std::vector<double> fx(plan.size());
  plan.forward(x_hat, fx);
  return metric_from_fx(y, fx, clip);
}

GampResult gamp_receive(std::span<const double> y, const GampConfig& config,
                        const TransformPlan& plan) {
  if (config.t_max < 1) throw ConfigError("t_max must be at least 1");
  if (config.early_stop.enabled() && config.early_stop.stable_iterations < 2) {
    throw ConfigError("early stopping needs at least 2 stable iterations");
  }
  const std::size_t n = plan.size();
  if (y.size() != n) throw SizeError("received block length does not match the plan");

  const auto& constellation = config.constellation;
  GampState state = GampState::initial(n, constellation.levels().size());
  GampResult result;
  auto& diag = result.diagnostics;
  result.x_hat = state.x_hat;

  std::vector<double> sliced_fx(n);
  std::vector<double> previous_decisions;
  int stable_run = 1;
  for (int iter = 1; iter <= config.t_max; ++iter) {
    // Every input variance at the floor: the recursion can only divide
    // rounding noise by itself from here on.
    if (iter > 1 && mean_of(state.mu_x) <= kCollapsedVariance) {
      diag.collapsed = true;
      break;
    }
    try {
      output_step(state, y, plan, config);
      input_step(state, plan, config);
    } catch (const NumericalError&) {
      diag.numerical_failure = true;
      break;
    }
    diag.iterations_used = iter;
    std::vector<double> decisions = constellation.decide_levels(state.x_hat);
    double metric = 0.0;
    if (config.metric_input == MetricInput::soft) {
      metric = metric_from_fx(y, state.fx, config.clip);
    } else {
      plan.forward(decisions, sliced_fx);
      metric = metric_from_fx(y, sliced_fx, config.clip);
    }
    diag.metric_trace.push_back(metric);
    if (metric < diag.best_metric) {
      diag.best_metric = metric;
      diag.best_t = iter;
      result.x_hat = state.x_hat;
    }
    if (decisions == previous_decisions) {
      ++stable_run;
    } else {
      stable_run = 1;
      diag.converged_at = iter;
      previous_decisions = std::move(decisions);
    }
    if (config.early_stop.enabled() && stable_run >= config.early_stop.stable_iterations &&
        mean_of(state.mu_x) <= config.early_stop.max_mean_variance) {
      diag.stopped_early = iter < config.t_max;
      break;
    }
  }
  diag.variance_violations = state.variance_violations;
  result.bits = constellation.decide_bits(result.x_hat);
  return result;
}

}  // namespace clipofdm
