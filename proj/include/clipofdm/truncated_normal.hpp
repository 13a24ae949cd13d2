#pragma once

namespace clipofdm {

/// Mass, mean and variance of N(mean, variance) restricted to [lo, hi].
struct TruncatedMoments {
  double log_mass = 0.0;  ///< log P(lo <= X <= hi)
  double mean = 0.0;
  double variance = 0.0;
};

/// Either bound may be infinite. Accurate to near machine precision in the far
/// tails and for intervals much narrower than the standard deviation: moments
/// are formed relative to the nearer interval edge, using continued fractions
/// of the Mills ratio for one-sided tails and Gauss-Legendre quadrature for
/// narrow intervals.
TruncatedMoments truncated_normal_moments(double mean, double variance, double lo, double hi);

/// Upper-tail functions of the standard normal at x >= 0:
///   mills = Q(x) / phi(x)
///   first = 1 - x * mills          (= E[X - x | X > x] * mills)
///   second = mills - x * first     (= E[(X - x)^2 | X > x] * mills)
/// computed without cancellation for large x.
struct TailFunctions {
  double mills = 0.0;
  double first = 0.0;
  double second = 0.0;
};
TailFunctions normal_tail_functions(double x);

/// log phi(x) for the standard normal density.
double log_normal_pdf(double x) noexcept;

}  // namespace clipofdm
