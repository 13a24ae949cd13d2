#include "clipofdm/truncated_normal.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace clipofdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this argument the Mills ratio is taken from erfc directly; the
// cancellation in 1 - xR stays under a factor of x^2.
constexpr double kDirectTailLimit = 4.0;
// Intervals whose log-density varies by less than this are integrated by
// quadrature instead of through differences of tail functions.
constexpr double kNarrowLogRange = 8.0;
constexpr int kQuadNodes = 32;

struct GaussLegendre {
  std::array<double, kQuadNodes> nodes{};
  std::array<double, kQuadNodes> weights{};

  GaussLegendre() {
    const int n = kQuadNodes;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

// 2 / (x + 3 / (x + 4 / (x + ...))), modified Lentz.
double mills_tail_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int j = 1; j < 5000; ++j) {
    const double a = j + 1.0;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(log_normal_pdf(x)); }

struct EdgeMoments {
  double log_mass;
  double offset;    // mean distance from the edge, standardized
  double variance;  // standardized
};

// Standard normal restricted to [a, a + width], a finite, via quadrature in
// u = x - a with weight exp(-a u - u^2 / 2).
EdgeMoments narrow_interval(double a, double width) {
  const auto& rule = gauss_legendre();
  const double half = 0.5 * width;
  std::array<double, kQuadNodes> u{};
  std::array<double, kQuadNodes> w{};
  double mass = 0.0;
  for (int i = 0; i < kQuadNodes; ++i) {
    u[i] = half * (1.0 + rule.nodes[i]);
    w[i] = rule.weights[i] * half * std::exp(-a * u[i] - 0.5 * u[i] * u[i]);
    mass += w[i];
  }
  double first = 0.0;
  for (int i = 0; i < kQuadNodes; ++i) first += w[i] * u[i];
  const double offset = first / mass;
  double second = 0.0;
  for (int i = 0; i < kQuadNodes; ++i) second += w[i] * (u[i] - offset) * (u[i] - offset);
  return {log_normal_pdf(a) + std::log(mass), offset, second / mass};
}

// Standard normal restricted to [a, b] with 0 <= a < b <= inf.
EdgeMoments tail_interval(double a, double b) {
  const TailFunctions ta = normal_tail_functions(a);
  double i0 = ta.mills;
  double i1 = ta.first;
  double i2 = ta.second;
  if (!std::isinf(b)) {
    const double width = b - a;
    const double rho = std::exp(-0.5 * width * (a + b));
    const TailFunctions tb = normal_tail_functions(b);
    i0 -= rho * tb.mills;
    i1 -= rho * (tb.first + width * tb.mills);
    i2 -= rho * (tb.second + width * (tb.first - a * tb.mills)) + width * rho;
  }
  const double offset = i1 / i0;
  return {log_normal_pdf(a) + std::log(i0), offset, i2 / i0 - offset * offset};
}

}  // namespace

double log_normal_pdf(double x) noexcept {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

TailFunctions normal_tail_functions(double x) {
  if (std::isinf(x)) return {0.0, 0.0, 0.0};
  if (x <= kDirectTailLimit) {
    const double mills = normal_tail(x) / normal_pdf(x);
    const double first = 1.0 - x * mills;
    return {mills, first, mills - x * first};
  }
  // R = 1/(x + e), e = 1/(x + E2), E2 = 2/(x + 3/(x + ...)):
  //   1 - xR = e R,  R - x(1 - xR) = R e E2.
  const double e2 = mills_tail_fraction(x);
  const double e = 1.0 / (x + e2);
  const double mills = 1.0 / (x + e);
  return {mills, e * mills, mills * e * e2};
}

TruncatedMoments truncated_normal_moments(double mean, double variance, double lo, double hi) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::domain_error("truncated normal needs a positive finite variance");
  }
  if (std::isnan(lo) || std::isnan(hi) || !(lo <= hi)) {
    throw std::domain_error("truncated normal needs lo <= hi");
  }
  if (lo == -kInf && hi == kInf) return {0.0, mean, variance};
  if (lo == hi) return {-kInf, lo, 0.0};

  const double sd = std::sqrt(variance);
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  double edge = lo;
  double dir = 1.0;
  // Work on the side where the interval's nearer edge is a finite lower bound.
  if (a + b < 0.0) {
    const double t = a;
    a = -b;
    b = -t;
    edge = hi;
    dir = -1.0;
  }
  const double width = b - a;

  EdgeMoments m{};
  if (a < 0.0) {
    if (width <= 1.0) {
      m = narrow_interval(a, width);
    } else {
      // The mode lies inside a wide interval: direct formulas are well conditioned.
      const double pa = normal_pdf(a);
      const double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
      const double mass = 1.0 - normal_tail(-a) - normal_tail(b);
      const double shift = (pa - pb) / mass;
      const double bpb = std::isinf(b) ? 0.0 : b * pb;
      const double var = 1.0 + (a * pa - bpb) / mass - shift * shift;
      return {std::log(mass), mean + dir * sd * shift, variance * std::max(var, 0.0)};
    }
  } else {
    const double log_range = std::isinf(width) ? kInf : width * (a + 0.5 * width);
    m = log_range <= kNarrowLogRange ? narrow_interval(a, width) : tail_interval(a, b);
  }
  return {m.log_mass, edge + dir * sd * m.offset, variance * std::max(m.variance, 0.0)};
}

}  // namespace clipofdm
