#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "smilecal/rng.hpp"

namespace smilecal {

using Objective = std::function<double(std::span<const double>)>;

struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  /// Throws ConfigError unless lower < upper componentwise with finite entries.
  void validate() const;
  bool contains(std::span<const double> x) const;
  std::vector<double> clamp(std::span<const double> x) const;
  std::vector<double> midpoint() const;
};

struct SAConfig {
  double t0 = 10.0;
  double t_min = 0.01;
  double rho = 0.99;
  std::size_t n = 10;          // chain length per worker and level
  std::size_t workers = 16384; // logical chains per level
  std::uint64_t seed = 42;
  std::size_t threads = 0;     // physical threads, 0: default_thread_count()

  void validate() const;
};

struct OptResult {
  std::vector<double> x_best;
  double f_best = 0.0;
  std::size_t evals = 0;
  std::size_t nonfinite_evals = 0;
  std::size_t levels = 0;
  std::size_t iterations = 0;  // Nelder-Mead iterations
  bool converged = true;
  std::vector<double> level_best;  // best-ever value after each temperature level
};

/// ceil(ln(t_min / t0) / ln(rho)): the number of temperatures above t_min.
std::size_t temperature_levels(const SAConfig& cfg);

/// Moves one uniformly chosen coordinate k by U(-1,1) * (upper_k - lower_k) * min(1, T / t0),
/// reflected once at the bounds and clamped.
std::vector<double> compute_neighbour(std::span<const double> x, const BoxBounds& bounds, double temperature,
                                      double t0, CounterRng& rng);

/// Metropolis rule with the uniform draw supplied by the caller.
bool metropolis_accept(double delta, double temperature, double u);

/// Single chain: at each temperature `n` Metropolis steps, then T <- rho T.
/// Starts from `x0` or the box midpoint. Draws use the keys of worker 0.
OptResult sa_minimize(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                      std::optional<std::vector<double>> x0 = std::nullopt);

/// At each temperature `workers` chains of length n start from the shared incumbent;
/// the lowest chain endpoint (ties: lowest worker) seeds the next level. Draws are keyed
/// by (seed, level, worker), so the result does not depend on the thread count.
OptResult sa_minimize_parallel(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                               std::optional<std::vector<double>> x0 = std::nullopt);

struct NelderMeadConfig {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
};

/// Coefficients (1, 2, 0.5, 0.5); initial simplex x0 + step_k e_k. Converged when the
/// simplex diameter falls below tol or the spread of values below tol^2.
OptResult nelder_mead(const Objective& f, std::span<const double> x0, std::span<const double> step,
                      const NelderMeadConfig& cfg = {});
/// Initial steps of 5% of the box range per axis; the objective is evaluated unclamped.
OptResult nelder_mead(const Objective& f, std::span<const double> x0, const BoxBounds& bounds,
                      const NelderMeadConfig& cfg = {});

/// Parallel SA, then Nelder-Mead on f(clamp(x)) from the SA answer.
OptResult hybrid_minimize(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                          const NelderMeadConfig& nm = {}, std::optional<std::vector<double>> x0 = std::nullopt);

}  // namespace smilecal
