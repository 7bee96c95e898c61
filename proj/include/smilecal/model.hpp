#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "smilecal/analytic.hpp"
#include "smilecal/market_data.hpp"

namespace smilecal {

enum class ModelKind { hagan, mm, rebonato };

std::string_view model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct CorrelationParams {
  double eta1 = 1.0;
  double lambda1 = 0.0;
  double eta2 = 1.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

double corr_rho(double ti, double tj, const CorrelationParams& p);
double corr_theta(double ti, double tj, const CorrelationParams& p);
/// sign(phi_ii) sqrt(|phi_ii phi_jj|) exp(-lambda3 (Ti-Tj)^+ - lambda3 (Tj-Ti)^+)
double corr_phi(double ti, double tj, double phi_ii, double phi_jj, const CorrelationParams& p);

struct HaganParams {
  std::vector<double> phi;    // rate-vol correlation per forward
  std::vector<double> nu;     // vol-of-vol per forward
  std::vector<double> alpha;  // V_i(0)
  double beta = 0.5;
  CorrelationParams corr;
};

/// Common lognormal volatility V(t) with V(0) = 1; only eta1/lambda1 of `corr` are used.
struct MMParams {
  std::vector<double> phi;
  std::vector<double> alpha;
  double nu = 0.0;
  double beta = 0.5;
  CorrelationParams corr;
};

struct RebonatoParams {
  std::vector<double> phi;
  std::vector<double> kappa;  // kappa_i(0)
  AbcdParams g;
  AbcdParams h;
  double beta = 0.5;
  CorrelationParams corr;
};

using ModelParams = std::variant<HaganParams, MMParams, RebonatoParams>;

ModelKind kind_of(const ModelParams& model);
std::size_t forward_count(const ModelParams& model);
double beta_of(const ModelParams& model);
const CorrelationParams& correlation_of(const ModelParams& model);
void set_correlation(ModelParams& model, const CorrelationParams& corr);
/// Throws DomainError if a parameter violates its invariant or the sizes disagree with `forwards`.
void validate(const ModelParams& model, std::size_t forwards);

/// SABR slice seen by the implied-volatility expansion for forward i.
SabrSlice effective_slice(const ModelParams& model, const TenorStructure& tenor, std::size_t i);

/// vols: V_i (Hagan), a single V (M&M) or kappa_i (Rebonato).
struct MarketState {
  double t = 0.0;
  std::vector<double> forwards;
  std::vector<double> vols;
};

MarketState initial_state(const ModelParams& model, const TenorStructure& tenor);

/// 0-based index of the first forward not yet fixed: smallest j with t < T_j.
/// Throws DomainError when t is at or beyond the last reset.
std::size_t first_unfixed_index(double t, const TenorStructure& tenor);

/// Number of Brownian drivers: 2M for Hagan/Rebonato, M + 1 for M&M.
std::size_t driver_count(const ModelParams& model);

/// Hagan/Rebonato: [rho phi; phi^T theta] (2M x 2M). M&M: [rho phi; phi^T 1].
Eigen::MatrixXd assemble_correlation(const ModelParams& model, const TenorStructure& tenor);

struct CorrelationFactor {
  Eigen::MatrixXd lower;     // L with L L^T = matrix
  Eigen::MatrixXd matrix;    // the input, or its repaired version
  bool repaired = false;
  double min_eigenvalue = 0.0;  // of the input, only computed when repair was needed
};

/// Cholesky; an indefinite input is repaired by clipping eigenvalues at 1e-10,
/// rescaling to unit diagonal and factorizing again.
CorrelationFactor factorize_correlation(const Eigen::MatrixXd& p);

struct Drifts {
  std::vector<double> forward;
  std::vector<double> vol;  // per forward (Hagan: mu^V, Rebonato: mu^kappa); empty for M&M
};

/// Spot-measure drifts at `state`. Fixed forwards (j < h(t)) get zero drift.
Drifts drifts(const MarketState& state, const ModelParams& model, const TenorStructure& tenor);

/// Precomputed stepping kernel over the first `active` forwards. The correlation
/// blocks are restricted accordingly; normals are laid out as
/// [z_F(0..active), z_V(0..active)] or [z_F(0..active), z_V] for M&M.
class Dynamics {
 public:
  Dynamics(const ModelParams& model, const TenorStructure& tenor, std::size_t active);

  std::size_t active() const { return active_; }
  std::size_t drivers() const { return kind_ == ModelKind::mm ? active_ + 1 : 2 * active_; }
  std::size_t vol_count() const { return kind_ == ModelKind::mm ? 1 : active_; }
  ModelKind kind() const { return kind_; }

  /// Indices of the drivers used, as rows/columns of assemble_correlation's matrix.
  std::vector<std::size_t> driver_indices(std::size_t forwards) const;

  /// mu_f[i] and (per-forward models) mu_v[i] for first <= i < active; other slots untouched.
  void drifts(double t, std::size_t first, const double* f, const double* v, double* mu_f, double* mu_v) const;

  /// Advances f and v in place from t to t + dt. `scratch` needs 2 * active doubles.
  void step(double t, double dt, std::size_t first, double* f, double* v, const double* z, double* scratch) const;

 private:
  double vol_level(std::size_t j, double t, const double* v) const;
  double cev(double f) const;  // max(f, 0)^beta

  ModelKind kind_;
  std::size_t active_;
  double beta_;
  std::vector<double> tau_;
  std::vector<double> maturity_;
  std::vector<double> rho_;    // active x active, row-major
  std::vector<double> phi_;    // active x active (Hagan/Rebonato)
  std::vector<double> nu_;     // Hagan per-forward vol-of-vol
  std::vector<double> alpha_;  // M&M loadings
  double common_nu_ = 0.0;
  AbcdParams g_;
  AbcdParams h_;
};

/// One time step: Euler for forwards with max(F,0)^beta, log-Euler for the volatility
/// factors. `z` holds correlated normals ordered like the correlation matrix.
/// Throws SimulationError on a non-finite state.
MarketState simulate_step(const MarketState& state, const ModelParams& model, const TenorStructure& tenor, double dt,
                          std::span<const double> z);

}  // namespace smilecal
