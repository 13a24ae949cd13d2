#pragma once

#include <span>
#include <vector>

#include "clipofdm/constellation.hpp"
#include "clipofdm/transform.hpp"
#include "clipofdm/transmitter.hpp"

namespace clipofdm {

/// Matched-filter receiver: r = F^T y, optionally divided by the Bussgang
/// gain of `clip`, sliced per slot.
std::vector<Bit> conventional_receive(std::span<const double> y, const TransformPlan& plan,
                                      const Constellation& constellation, const ClipModel& clip,
                                      bool alpha_correction);

struct CancellerConfig {
  int iterations = 3;
  ClipModel clip;
  Constellation constellation{4};

  double alpha() const { return clip.bussgang_gain(); }
};

struct CancellerResult {
  std::vector<Bit> bits;
  /// z~ = F x~ from the final decision-directed pass (empty when no pass ran).
  std::vector<double> reconstructed;
  /// Frequency-domain estimate fed to the final slicer.
  std::vector<double> estimate;
};

/// Decision-directed Bussgang distortion canceller. Starting from
/// r = F^T y / alpha, each pass slices r to x~, rebuilds z~ = F x~, estimates
/// the distortion d~ = f(z~) - alpha z~ and re-forms r = F^T (y - d~) / alpha.
CancellerResult bussgang_cancel(std::span<const double> y, const CancellerConfig& config,
                                const TransformPlan& plan);

}  // namespace clipofdm
