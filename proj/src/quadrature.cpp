#include "smilecal/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "smilecal/error.hpp"

namespace smilecal {

namespace {

GaussLegendre15 build_rule() {
  constexpr int n = 15;
  GaussLegendre15 rule{};
  for (int k = 0; k < n; ++k) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const auto& rule = gauss_legendre_15();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int k = 0; k < 15; ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return sum * half;
}

double refine(const std::function<double(double)>& f, double a, double b, double whole, double rel_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double split = left + right;
  if (std::abs(split - whole) <= rel_tol * std::abs(split) || std::abs(split - whole) < 1e-300) return split;
  if (depth <= 0) throw DomainError("adaptive quadrature did not converge");
  return refine(f, a, mid, left, rel_tol, depth - 1) + refine(f, mid, b, right, rel_tol, depth - 1);
}

}  // namespace

const GaussLegendre15& gauss_legendre_15() {
  static const GaussLegendre15 rule = build_rule();
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  return refine(f, a, b, panel(f, a, b), rel_tol, max_depth);
}

}  // namespace smilecal
