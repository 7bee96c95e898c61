#include "smilecal/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "smilecal/error.hpp"
#include "smilecal/quadrature.hpp"

namespace smilecal {

void SabrSlice::validate() const {
  if (!(alpha > 0.0)) throw DomainError("SABR alpha must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("SABR beta must lie in [0,1]");
  if (!(std::abs(phi) <= 1.0)) throw DomainError("SABR correlation must lie in [-1,1]");
  if (!(nu >= 0.0)) throw DomainError("SABR vol-of-vol must be non-negative");
  if (!(f0 > 0.0)) throw DomainError("SABR forward must be positive");
  if (!(expiry > 0.0)) throw DomainError("SABR expiry must be positive");
}

std::optional<double> try_hagan_implied_vol(const SabrSlice& s, double strike) noexcept {
  if (!(strike > 0.0) || !(s.f0 > 0.0) || !(s.alpha > 0.0)) return std::nullopt;
  const double x = std::log(strike / s.f0);
  const double one_minus_beta = 1.0 - s.beta;
  const double level = s.alpha / std::pow(s.f0, one_minus_beta);
  const double w = 1.0 / level;
  const double pnw = s.phi * s.nu * w;
  const double quad = one_minus_beta * one_minus_beta + (2.0 - 3.0 * s.phi * s.phi) * s.nu * s.nu * w * w +
                      3.0 * (one_minus_beta - pnw);
  const double vol = level * (1.0 - 0.5 * (one_minus_beta - pnw) * x + quad * x * x / 12.0);
  if (!std::isfinite(vol) || !(vol > 0.0)) return std::nullopt;
  return vol;
}

double hagan_implied_vol(const SabrSlice& slice, double strike) {
  if (!(strike > 0.0)) throw DomainError("strike must be positive");
  slice.validate();
  const auto vol = try_hagan_implied_vol(slice, strike);
  if (!vol) throw DomainError("implied volatility expansion is non-positive at this strike");
  return *vol;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

namespace {

double black_call(double forward, double strike, double vol, double expiry) {
  const double sd = vol * std::sqrt(expiry);
  const double d1 = (std::log(forward / strike) + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  return forward * norm_cdf(d1) - strike * norm_cdf(d2);
}

}  // namespace

double black_caplet(double f0, double strike, double vol, double expiry, double accrual, double df_pay) {
  if (!(f0 > 0.0) || !(strike > 0.0) || !(vol > 0.0) || !(expiry > 0.0) || !(accrual > 0.0) || !(df_pay > 0.0)) {
    throw DomainError("black_caplet needs positive inputs");
  }
  return df_pay * accrual * black_call(f0, strike, vol, expiry);
}

double black_swaption(double swap_rate, double strike, double vol, double expiry, double annuity) {
  if (!(swap_rate > 0.0) || !(strike > 0.0) || !(vol > 0.0) || !(expiry > 0.0) || !(annuity > 0.0)) {
    throw DomainError("black_swaption needs positive inputs");
  }
  return annuity * black_call(swap_rate, strike, vol, expiry);
}

SwapQuote forward_swap(const TenorStructure& tenor, std::size_t first, std::size_t periods) {
  if (periods == 0 || first + periods > tenor.size()) throw DomainError("swap extends beyond the tenor grid");
  SwapQuote q;
  for (std::size_t k = first; k < first + periods; ++k) q.annuity += tenor.accruals[k] * tenor.discounts[k + 1];
  q.rate = (tenor.discounts[first] - tenor.discounts[first + periods]) / q.annuity;
  return q;
}

double implied_vol_from_price(double price, double f0, double strike, double expiry, double accrual, double df) {
  const double scale = df * accrual;
  const double intrinsic = scale * std::max(f0 - strike, 0.0);
  const double upper = scale * f0;
  if (!(price >= intrinsic) || !(price < upper)) throw DomainError("caplet price outside arbitrage bounds");

  double lo = 1e-6;
  double hi = 10.0;
  if (price <= black_caplet(f0, strike, lo, expiry, accrual, df)) return lo;
  if (price >= black_caplet(f0, strike, hi, expiry, accrual, df)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (black_caplet(f0, strike, mid, expiry, accrual, df) < price) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double mm_effective_alpha(std::size_t i, std::span<const double> alphas, std::span<const double> phis, double nu,
                          double beta, const TenorStructure& tenor) {
  if (i >= tenor.size() || i >= alphas.size() || i >= phis.size()) throw DomainError("forward index out of range");
  // Backward accumulation: on [T_{k-1}, T_k) the first unfixed forward is k, so the
  // integrand there is -nu * sum_{j=k}^{i} c_j.
  double tail = 0.0;
  double integral = 0.0;
  for (std::size_t k = i + 1; k-- > 0;) {
    const double tau = tenor.accruals[k];
    const double f = tenor.forwards[k];
    tail += tau * phis[k] * alphas[k] * std::pow(std::max(f, 0.0), beta) / (1.0 + tau * f);
    const double start = k == 0 ? 0.0 : tenor.times[k - 1];
    integral += (tenor.times[k] - start) * tail;
  }
  return alphas[i] * std::exp(-nu * integral);
}

double AbcdParams::operator()(double tau) const { return (a + b * tau) * std::exp(-c * tau) + d; }

double rebonato_g(double t, double maturity, const AbcdParams& g) { return g(maturity - t); }

double rebonato_h(double t, double maturity, const AbcdParams& h) { return h(maturity - t); }

namespace {

// int_0^span v^n exp(-k v) dv for n = 0, 1, 2.
std::array<double, 3> exp_moments(double k, double span) {
  const double x = k * span;
  std::array<double, 3> out{};
  if (std::abs(x) < 4.0) {
    for (int n = 0; n < 3; ++n) {
      double term = 1.0;  // (-x)^m / m!
      double sum = 0.0;
      for (int m = 0; m < 80; ++m) {
        const double contribution = term / (n + m + 1);
        sum += contribution;
        if (std::abs(contribution) < 1e-18 * std::abs(sum)) break;
        term *= -x / (m + 1);
      }
      out[n] = std::pow(span, n + 1) * sum;
    }
    return out;
  }
  const double e = std::exp(-x);
  out[0] = -std::expm1(-x) / k;
  out[1] = (out[0] - span * e) / k;
  out[2] = (2.0 * out[1] - span * span * e) / k;
  return out;
}

}  // namespace

double integrated_square(const AbcdParams& h, double maturity, double t) {
  if (t <= 0.0) return 0.0;
  // u = maturity - s runs over [start, start + t]; substitute u = start + v.
  const double start = maturity - t;
  const double c0 = h.a + h.b * start;
  const double q = h.b;
  const auto m2 = exp_moments(2.0 * h.c, t);
  const auto m1 = exp_moments(h.c, t);
  const double e1 = std::exp(-h.c * start);
  const double squared = e1 * e1 * (c0 * c0 * m2[0] + 2.0 * c0 * q * m2[1] + q * q * m2[2]);
  const double cross = 2.0 * h.d * e1 * (c0 * m1[0] + q * m1[1]);
  return squared + cross + h.d * h.d * t;
}

EffectiveSabr rebonato_effective_params(double kappa0, const AbcdParams& g, const AbcdParams& h, double maturity) {
  if (!(kappa0 > 0.0)) throw DomainError("kappa(0) must be positive");
  if (!(maturity > 0.0)) throw DomainError("maturity must be positive");

  const double g2 = integrated_square(g, maturity, maturity);
  if (!(g2 > 0.0)) throw DomainError("g vanishes on [0, T]");
  EffectiveSabr out;
  out.alpha = kappa0 * std::sqrt(g2 / maturity);

  const double mixed = integrate(
      [&](double t) {
        const double v = g(maturity - t);
        return v * v * integrated_square(h, maturity, t);
      },
      0.0, maturity);
  out.nu = kappa0 / (out.alpha * maturity) * std::sqrt(2.0 * std::max(mixed, 0.0));
  return out;
}

}  // namespace smilecal
