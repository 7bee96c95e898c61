#pragma once

#include <array>
#include <functional>

namespace smilecal {

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre15 {
  std::array<double, 15> nodes;
  std::array<double, 15> weights;
};

const GaussLegendre15& gauss_legendre_15();

/// Adaptive Gauss-Legendre quadrature: 15-point panels, recursive bisection until a
/// panel agrees with the sum of its halves to `rel_tol`. Throws DomainError when the
/// recursion depth is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                 int max_depth = 40);

}  // namespace smilecal
