#include "clipofdm/baselines.hpp"

#include "clipofdm/error.hpp"

namespace clipofdm {

std::vector<Bit> conventional_receive(std::span<const double> y, const TransformPlan& plan,
                                      const Constellation& constellation, const ClipModel& clip,
                                      bool alpha_correction) {
  std::vector<double> r(plan.size());
  plan.adjoint(y, r);
  if (alpha_correction) {
    const double inv_alpha = 1.0 / clip.bussgang_gain();
    for (double& v : r) v *= inv_alpha;
  }
  return constellation.decide_bits(r);
}

CancellerResult bussgang_cancel(std::span<const double> y, const CancellerConfig& config,
                                const TransformPlan& plan) {
  if (config.iterations < 1) throw ConfigError("canceller needs at least one iteration");
  const std::size_t n = plan.size();
  if (y.size() != n) throw SizeError("received block length does not match the plan");

  const double alpha = config.alpha();
  const double inv_alpha = 1.0 / alpha;
  CancellerResult out;
  out.estimate.resize(n);
  plan.adjoint(y, out.estimate);
  for (double& v : out.estimate) v *= inv_alpha;

  std::vector<double> cleaned(n);
  out.reconstructed.resize(n);
  for (int pass = 0; pass < config.iterations; ++pass) {
    const std::vector<double> decided = config.constellation.decide_levels(out.estimate);
    plan.forward(decided, out.reconstructed);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = out.reconstructed[i];
      cleaned[i] = y[i] - (config.clip.apply(z) - alpha * z);
    }
    plan.adjoint(cleaned, out.estimate);
    for (double& v : out.estimate) v *= inv_alpha;
  }
  out.bits = config.constellation.decide_bits(out.estimate);
  return out;
}

}  // namespace clipofdm
