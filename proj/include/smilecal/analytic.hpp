#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "smilecal/market_data.hpp"

namespace smilecal {

/// SABR parameters of one forward as they enter the implied-volatility expansion.
struct SabrSlice {
  double alpha = 0.0;   // initial volatility level
  double beta = 0.5;    // CEV exponent in [0, 1]
  double phi = 0.0;     // rate-volatility correlation
  double nu = 0.0;      // volatility of volatility
  double f0 = 0.0;      // initial forward
  double expiry = 0.0;  // years

  void validate() const;
};

/// Second-order expansion of the implied volatility in x = ln(K/F0):
///
///   sigma = a0 * (1 - (1 - beta - phi*nu*w) x / 2
///                   + [(1-beta)^2 + (2 - 3 phi^2) nu^2 w^2 + 3((1-beta) - phi*nu*w)] x^2 / 12)
///
/// with a0 = alpha / F0^(1-beta) and w = 1 / a0. The expansion is a quadratic in x and
/// can turn non-positive far from the money; that is reported as a DomainError rather
/// than clamped.
double hagan_implied_vol(const SabrSlice& slice, double strike);

/// Same as hagan_implied_vol without throwing: nullopt for a non-positive strike or a
/// non-positive/non-finite result. Used on hot calibration paths.
std::optional<double> try_hagan_implied_vol(const SabrSlice& slice, double strike) noexcept;

double norm_cdf(double x);

/// Black caplet: df_pay * accrual * [f0 N(d1) - K N(d2)].
double black_caplet(double f0, double strike, double vol, double expiry, double accrual, double df_pay);

/// Black payer swaption: annuity * [S N(d1) - K N(d2)].
double black_swaption(double swap_rate, double strike, double vol, double expiry, double annuity);

struct SwapQuote {
  double rate = 0.0;
  double annuity = 0.0;
};

/// Forward swap over forwards first .. first + periods - 1 of the tenor grid, with a
/// fixed leg paying on the same dates: annuity = sum tau_k P(0, T_{k+1}).
SwapQuote forward_swap(const TenorStructure& tenor, std::size_t first, std::size_t periods);

/// Black volatility reproducing a caplet price, by bisection on [1e-6, 10].
/// Throws DomainError when the price is outside [intrinsic, df * accrual * f0).
double implied_vol_from_price(double price, double f0, double strike, double expiry, double accrual, double df);

/// Effective SABR alpha of forward `i` under the single-volatility-factor model:
/// alpha_i * exp(int_0^{T_i} M_i(s) ds) with the piecewise-constant
/// M_i(t) = -nu * sum_{j >= h(t)}^{i} tau_j phi_j alpha_j F_j^beta / (1 + tau_j F_j).
/// The integral is an exact sum over the reset intervals.
double mm_effective_alpha(std::size_t i, std::span<const double> alphas, std::span<const double> phis, double nu,
                          double beta, const TenorStructure& tenor);

/// (a + b tau) exp(-c tau) + d with tau the time to maturity.
struct AbcdParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double time_to_maturity) const;
};

double rebonato_g(double t, double maturity, const AbcdParams& g);
double rebonato_h(double t, double maturity, const AbcdParams& h);

/// int_0^t h(s)^2 ds for h(s) = abcd(maturity - s), in closed form.
double integrated_square(const AbcdParams& h, double maturity, double t);

struct EffectiveSabr {
  double alpha = 0.0;
  double nu = 0.0;
};

/// Effective (alpha, nu) of a forward with V(t) = kappa(t) g(t) and vol-of-vol h(t):
///   alpha = kappa0 sqrt(1/T int_0^T g^2 dt)
///   nu    = kappa0 / (alpha T) sqrt(2 int_0^T g(t)^2 hhat(t)^2 t dt),  hhat(t)^2 = 1/t int_0^t h^2.
/// Outer integrals use adaptive Gauss-Legendre at 1e-10; t hhat(t)^2 is integrated in
/// closed form, which also removes the t = 0 singularity.
EffectiveSabr rebonato_effective_params(double kappa0, const AbcdParams& g, const AbcdParams& h, double maturity);

}  // namespace smilecal
