#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "clipofdm/constellation.hpp"
#include "clipofdm/transform.hpp"
#include "clipofdm/transmitter.hpp"

namespace clipofdm {

/// How the variance sums over |F_{n,k}|^2 are evaluated.
///   scalar: mu_p = mean(mu_x), mu_r = 1 / mean(mu_s)   O(N)
///   exact:  the full weighted sums                      O(N^2), for validation
enum class VarianceMode { scalar, exact };

/// Stop once `stable_iterations` consecutive iterates give identical hard
/// decisions and the mean input variance has dropped below
/// `max_mean_variance`. The first iterates often repeat the linear
/// receiver's decisions before the recursion starts moving, so stability
/// alone is not enough. Zero iterations disables.
struct EarlyStop {
  int stable_iterations = 0;
  double max_mean_variance = 1e-2;

  static EarlyStop off() { return {}; }
  static EarlyStop stable(int k = 2, double max_mean_variance = 1e-2) { return {k, max_mean_variance}; }
  bool enabled() const noexcept { return stable_iterations > 0; }
};

/// What the best-iterate metric is evaluated on: the sliced iterate, or the
/// soft posterior means. Soft means can fit the noise and tend to favor the
/// first, least converged iterate.
enum class MetricInput { hard, soft };

struct GampConfig {
  int t_max = 30;
  VarianceMode variance_mode = VarianceMode::scalar;
  EarlyStop early_stop = EarlyStop::off();
  MetricInput metric_input = MetricInput::hard;
  double noise_variance = 0.0;
  ClipModel clip;
  Constellation constellation{4};
};

/// Floor applied to every variance the recursion divides by.
inline constexpr double kVarianceFloor = 1e-12;

struct OutputMoments {
  double mean = 0.0;
  double variance = 0.0;            ///< clamped to [kVarianceFloor, mu_p]
  double unclamped_variance = 0.0;  ///< as computed, before clamping
};

/// Posterior mean and variance of z under
///   p(z | y) ~ exp(-(y - f(z))^2 / (2 noise_var)) exp(-(p_hat - z)^2 / (2 mu_p))
/// with f the clipper at `threshold` (may be +inf).
///
/// The density splits at +-T into a left saturation piece (constant
/// likelihood times the prior truncated to z < -T), the linear piece (product
/// Gaussian truncated to [-T, T]) and the mirrored right piece. Weights are
/// combined in the log domain.
OutputMoments output_node_moments(double y, double p_hat, double mu_p, double noise_var,
                                  double threshold);

struct InputMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Discrete posterior over the per-dimension levels given the pseudo-
/// observation r_hat ~ N(x, mu_r). `probs` receives P_m (same length as levels).
InputMoments input_node_moments(double r_hat, double mu_r, std::span<const double> levels,
                                std::span<double> probs);

/// Per-block message-passing state.
struct GampState {
  std::vector<double> x_hat, mu_x;  // input estimates
  std::vector<double> p_hat, mu_p;  // output-node linear estimates
  std::vector<double> z_hat, mu_z;  // output posterior moments
  std::vector<double> s_hat, mu_s;  // scaled residuals
  std::vector<double> r_hat, mu_r;  // input pseudo-observations
  std::vector<double> fx;           // F * x_hat for the current x_hat
  /// P_{m,k} stored row-per-slot: posterior[k * levels + m].
  std::vector<double> posterior;
  std::size_t levels = 0;
  int t = 1;
  /// Output nodes whose computed mu_z exceeded mu_p by more than 1e-9 relative.
  std::size_t variance_violations = 0;

  /// x_hat = 0, mu_x = 1, s_hat = 0, t = 1.
  static GampState initial(std::size_t n, std::size_t levels);
  std::size_t size() const noexcept { return x_hat.size(); }
};

/// Output-node half-iteration: mu_p, p_hat (with the Onsager term), z moments,
/// s_hat and mu_s.
void output_step(GampState& state, std::span<const double> y, const TransformPlan& plan,
                 const GampConfig& config);

/// Input-node half-iteration: mu_r, r_hat, then x_hat / mu_x / posterior for
/// t + 1. Advances t and refreshes fx. Throws NumericalError when the
/// aggregated residual variance is not positive.
void input_step(GampState& state, const TransformPlan& plan, const GampConfig& config);

/// sum_n (y_n - f([F x_hat]_n))^2
double euclidean_metric(std::span<const double> y, std::span<const double> x_hat,
                        const TransformPlan& plan, const ClipModel& clip);

struct GampDiagnostics {
  int iterations_used = 0;
  std::vector<double> metric_trace;  ///< metric of the iterate produced by each iteration
  int converged_at = 0;              ///< first iteration of the final run of identical decisions
  int best_t = 0;                    ///< 1-based iteration whose iterate was selected
  double best_metric = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  bool collapsed = false;  ///< stopped because every input variance reached the floor
  bool numerical_failure = false;
  std::size_t variance_violations = 0;
};

struct GampResult {
  std::vector<double> x_hat;  ///< soft estimate of the selected iterate
  std::vector<Bit> bits;      ///< hard decisions on x_hat
  GampDiagnostics diagnostics;
};

/// Full receiver: alternates output and input steps up to t_max times, tracks
/// the iterate minimizing euclidean_metric and slices it.
GampResult gamp_receive(std::span<const double> y, const GampConfig& config,
                        const TransformPlan& plan);

}  // namespace clipofdm
