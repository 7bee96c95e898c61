#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smilecal/market_data.hpp"
#include "smilecal/model.hpp"
#include "smilecal/montecarlo.hpp"
#include "smilecal/optimizer.hpp"

namespace smilecal {

inline constexpr double kPenalty = 1e6;

struct CalibrationSpec {
  ModelKind model = ModelKind::hagan;
  TenorStructure tenor;
  SmileSurface caplets;
  SmileSurface swaptions;
  double beta = 0.5;
  SAConfig stage1;
  SAConfig stage2;
  NelderMeadConfig nm;
  NelderMeadConfig nm_stage2{1e-6, 200};
  McConfig mc{10000, 1e-2, 42, false, 0};
  std::size_t swaption_rows = 14;       // leading rows of the swaption surface
  double max_abs_moneyness = 0.4;       // swaption columns used in stage 2
  bool run_stage2 = true;
  bool separable = true;                // Hagan stage 1 smile by smile

  /// Throws ConfigError if the surfaces do not fit the tenor.
  void validate() const;
};

/// Volatility parameters x. Hagan: (phi, nu, alpha) per forward, blocked by kind.
/// M&M: (phi_1..M, alpha_1..M, nu). Rebonato: (phi_1..M, kappa_1..M, a, b, c, d, g_alpha, g_beta, g_gamma, g_delta).
BoxBounds volatility_bounds(ModelKind kind, std::size_t forwards);
ModelParams params_from_x(ModelKind kind, std::span<const double> x, std::size_t forwards, double beta,
                          const CorrelationParams& corr = {});
std::vector<double> x_from_params(const ModelParams& model);

/// Correlation parameters y: (eta1, lambda1, eta2, lambda2, lambda3), or (eta1, lambda1) for M&M.
BoxBounds correlation_bounds(ModelKind kind);
CorrelationParams corr_from_y(ModelKind kind, std::span<const double> y);
std::vector<double> y_from_corr(ModelKind kind, const CorrelationParams& corr);

/// Sum over the caplet grid of (model vol - market vol)^2, kPenalty per cell where the
/// expansion breaks down.
double caplet_cost(std::span<const double> x, const CalibrationSpec& spec);

struct SwaptionCell {
  std::string label;  // "expiry x length" in years, e.g. "0.5x1"
  std::size_t row = 0;
  double moneyness = 0.0;
  double market_vol = 0.0;
  SwaptionSpec instrument;
  double black_price = 0.0;  // fraction of notional
};

std::vector<SwaptionCell> swaption_cells(const CalibrationSpec& spec);

struct SwaptionEvaluation {
  double cost = 0.0;            // sum of squared differences in percent of notional
  std::vector<McPrice> prices;  // per cell, empty when the simulation aborted
  bool repaired = false;
  bool aborted = false;
};

/// Stage-2 objective for fixed volatility parameters. Uses spec.mc, including its seed,
/// so repeated calls with the same y are bit-identical.
SwaptionEvaluation evaluate_swaptions(std::span<const double> y, const ModelParams& frozen, const CalibrationSpec& spec,
                                      std::span<const SwaptionCell> cells);
double swaption_cost(std::span<const double> y, const ModelParams& frozen, const CalibrationSpec& spec);

double mre(std::span<const double> model_vols, std::span<const double> market_vols);
double mae(std::span<const double> model_prices, std::span<const double> market_prices);

struct CapletFitRow {
  std::size_t forward = 0;
  double moneyness = 0.0;
  double market_vol = 0.0;
  double model_vol = 0.0;  // NaN where the expansion failed
  double rel_error = 0.0;
};

struct SwaptionFitRow {
  std::string label;
  double moneyness = 0.0;
  double black = 0.0;      // percent of notional
  double mc = 0.0;         // percent of notional
  double mc_stderr = 0.0;  // percent of notional
  double abs_error = 0.0;
};

struct CalibrationReport {
  ModelKind model = ModelKind::hagan;
  double beta = 0.5;
  std::uint64_t seed = 0;
  ModelParams params;
  std::vector<CapletFitRow> caplet_fit;
  double caplet_cost = 0.0;
  double mre = 0.0;
  bool stage2_run = false;
  std::vector<SwaptionFitRow> swaption_fit;
  double swaption_cost = 0.0;
  double mae = 0.0;
  std::size_t stage1_evals = 0;
  std::size_t stage2_evals = 0;
  std::size_t stage1_levels = 0;
  std::size_t stage2_levels = 0;
  std::size_t failed_cells = 0;
  std::size_t psd_repairs = 0;
  std::size_t mc_aborts = 0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
};

std::vector<CapletFitRow> caplet_fit(const ModelParams& model, const CalibrationSpec& spec);

/// Stage 1 only: the calibrated volatility parameters with identity correlations.
OptResult calibrate_caplets(const CalibrationSpec& spec);

CalibrationReport calibrate(const CalibrationSpec& spec);

/// Fills the stage-2 part of `report` for its current parameters.
void fill_swaption_fit(CalibrationReport& report, const CalibrationSpec& spec);

}  // namespace smilecal
