#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "smilecal/market_data.hpp"
#include "smilecal/model.hpp"
#include "smilecal/rng.hpp"

namespace smilecal {

struct McConfig {
  std::size_t n_paths = 100000;
  double dt = 1e-2;
  std::uint64_t seed = 42;
  bool antithetic = false;
  std::size_t threads = 0;  // 0: default_thread_count()

  void validate(const TenorStructure& tenor) const;
};

struct McPrice {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

/// z = L g with g drawn from `rng`. `g` and `z` must have L.rows() entries.
void correlated_normals(const Eigen::MatrixXd& lower, CounterRng& rng, std::span<double> g, std::span<double> z);
std::vector<double> correlated_normals(const Eigen::MatrixXd& lower, CounterRng& rng);

/// Forward curve snapshots of one path: F_j(T_k) for k = 0..horizon and j < active.
struct PathView {
  std::size_t active = 0;
  std::size_t horizon = 0;
  const double* snapshots = nullptr;  // row k holds the curve at T_k
  const TenorStructure* tenor = nullptr;

  double forward(std::size_t k, std::size_t j) const { return snapshots[k * active + j]; }
  double fixing(std::size_t j) const { return forward(j, j); }
  /// Spot numeraire at T_k: (1 / P(0,T_0)) prod_{j<k} (1 + tau_j F_j(T_j)), for k <= horizon + 1.
  double numeraire(std::size_t k) const;
};

using PathPayoff = std::function<void(const PathView&, std::span<double>)>;

/// Simulates to T_horizon with the first `active` forwards and returns the Monte Carlo
/// mean and standard error of each of the `outputs` values written by `payoff`.
/// Results are bit-identical for any thread count.
std::vector<McPrice> simulate_expectations(const ModelParams& model, const TenorStructure& tenor, std::size_t horizon,
                                           std::size_t active, std::size_t outputs, const PathPayoff& payoff,
                                           const McConfig& cfg);

struct CapletSpec {
  std::size_t index = 0;
  double strike = 0.0;
};

/// Payer swaption expiring at T_expiry on forwards expiry .. expiry + periods - 1.
struct SwaptionSpec {
  std::size_t expiry = 0;
  std::size_t periods = 0;
  double strike = 0.0;
};

std::vector<McPrice> price_caplets_mc(const ModelParams& model, const TenorStructure& tenor,
                                      std::span<const CapletSpec> caplets, const McConfig& cfg);
std::vector<McPrice> price_swaptions_mc(const ModelParams& model, const TenorStructure& tenor,
                                        std::span<const SwaptionSpec> swaptions, const McConfig& cfg);

McPrice price_caplet_mc(const ModelParams& model, const TenorStructure& tenor, std::size_t i, double strike,
                        const McConfig& cfg);
McPrice price_swaption_mc(const ModelParams& model, const TenorStructure& tenor, std::size_t expiry,
                          std::size_t periods, double strike, const McConfig& cfg);

/// E[1 / B(T_k)] for k = 0..horizon + 1; each should equal P(0, T_k).
std::vector<McPrice> price_deflated_bonds_mc(const ModelParams& model, const TenorStructure& tenor,
                                             std::size_t horizon, const McConfig& cfg);

/// Number of time steps on the grid from 0 to T_horizon.
std::size_t step_count(const TenorStructure& tenor, std::size_t horizon, double dt);

}  // namespace smilecal
