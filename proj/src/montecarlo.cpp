#include "smilecal/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smilecal/analytic.hpp"
#include "smilecal/error.hpp"
#include "smilecal/parallel.hpp"

namespace smilecal {

void McConfig::validate(const TenorStructure& tenor) const {
  if (n_paths < 2) throw ConfigError("n_paths must be at least 2");
  if (antithetic && n_paths % 2 != 0) throw ConfigError("antithetic sampling needs an even n_paths");
  const double min_tau = *std::min_element(tenor.accruals.begin(), tenor.accruals.end());
  if (!(dt > 0.0) || dt > min_tau) throw ConfigError("dt must lie in (0, min accrual]");
}

void correlated_normals(const Eigen::MatrixXd& lower, CounterRng& rng, std::span<double> g, std::span<double> z) {
  const auto n = static_cast<std::size_t>(lower.rows());
  for (std::size_t k = 0; k < n; ++k) g[k] = rng.normal();
  for (std::size_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c <= r; ++c) sum += lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * g[c];
    z[r] = sum;
  }
}

std::vector<double> correlated_normals(const Eigen::MatrixXd& lower, CounterRng& rng) {
  const auto n = static_cast<std::size_t>(lower.rows());
  std::vector<double> g(n);
  std::vector<double> z(n);
  correlated_normals(lower, rng, g, z);
  return z;
}

double PathView::numeraire(std::size_t k) const {
  double b = 1.0 / tenor->discounts[0];
  for (std::size_t j = 0; j < k; ++j) b *= 1.0 + tenor->accruals[j] * fixing(j);
  return b;
}

namespace {

struct Step {
  double t;
  double dt;
  std::size_t first;
  std::size_t lands_on;  // reset index reached at the end of the step, or npos
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);
constexpr std::size_t block_size = 512;

std::vector<Step> time_grid(const TenorStructure& tenor, std::size_t horizon, double dt) {
  std::vector<Step> steps;
  double start = 0.0;
  for (std::size_t k = 0; k <= horizon; ++k) {
    const double end = tenor.times[k];
    const double span = end - start;
    if (span > 0.0) {
      const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
      const double h = span / static_cast<double>(n);
      for (std::size_t s = 0; s < n; ++s) {
        const double t = start + h * static_cast<double>(s);
        steps.push_back({t, h, first_unfixed_index(t, tenor), npos});
      }
      steps.back().lands_on = k;
    } else if (!steps.empty()) {
      steps.back().lands_on = k;  // coincident reset dates share the landing step
    }
    start = end;
  }
  return steps;
}

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
};

Moments combine(const Moments& a, const Moments& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments out;
  out.n = a.n + b.n;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * b.n / out.n;
  out.m2 = a.m2 + b.m2 + delta * delta * a.n * b.n / out.n;
  return out;
}

// Pairwise reduction over blocks [lo, hi) for one output; the tree shape depends only
// on the block count.
Moments reduce(const std::vector<std::vector<Moments>>& blocks, std::size_t output, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo][output];
  const std::size_t mid = lo + (hi - lo) / 2;
  return combine(reduce(blocks, output, lo, mid), reduce(blocks, output, mid, hi));
}

Eigen::MatrixXd active_factor(const ModelParams& model, const TenorStructure& tenor, const Dynamics& dyn) {
  const auto full = factorize_correlation(assemble_correlation(model, tenor));
  const auto idx = dyn.driver_indices(forward_count(model));
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = full.matrix(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  return factorize_correlation(sub).lower;
}

}  // namespace

std::size_t step_count(const TenorStructure& tenor, std::size_t horizon, double dt) {
  return time_grid(tenor, horizon, dt).size();
}

std::vector<McPrice> simulate_expectations(const ModelParams& model, const TenorStructure& tenor, std::size_t horizon,
                                           std::size_t active, std::size_t outputs, const PathPayoff& payoff,
                                           const McConfig& cfg) {
  cfg.validate(tenor);
  validate(model, tenor.size());
  if (horizon >= active || active > tenor.size()) throw DomainError("simulation horizon outside the active forwards");
  if (outputs == 0) return {};

  const Dynamics dyn(model, tenor, active);
  const Eigen::MatrixXd lower = active_factor(model, tenor, dyn);
  const std::vector<Step> steps = time_grid(tenor, horizon, cfg.dt);
  const MarketState start = initial_state(model, tenor);
  const std::size_t drivers = dyn.drivers();
  const std::size_t vols = dyn.vol_count();

  const std::size_t samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  const std::size_t n_blocks = (samples + block_size - 1) / block_size;
  std::vector<std::vector<Moments>> blocks(n_blocks, std::vector<Moments>(outputs));

  parallel_for(
      n_blocks,
      [&](std::size_t b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(samples, lo + block_size);
        const std::size_t twins = cfg.antithetic ? 2 : 1;
        // Normals for every step of a sample are drawn once and replayed for the twin.
        std::vector<double> z_all(steps.size() * drivers);
        std::vector<double> g(drivers);
        std::vector<double> f(active);
        std::vector<double> v(vols);
        std::vector<double> scratch(2 * active);
        std::vector<double> snaps((horizon + 1) * active);
        std::vector<double> out(outputs);
        std::vector<double> values((hi - lo) * outputs, 0.0);
        PathView view{active, horizon, snaps.data(), &tenor};

        for (std::size_t s = lo; s < hi; ++s) {
          for (std::size_t k = 0; k < steps.size(); ++k) {
            CounterRng rng(cfg.seed, RngDomain::montecarlo, s, static_cast<std::uint32_t>(k));
            correlated_normals(lower, rng, g, std::span<double>(z_all.data() + k * drivers, drivers));
          }
          for (std::size_t twin = 0; twin < twins; ++twin) {
            if (twin == 1) {
              for (double& z : z_all) z = -z;
            }
            std::copy_n(start.forwards.begin(), active, f.begin());
            std::copy_n(start.vols.begin(), vols, v.begin());
            for (std::size_t k = 0; k < steps.size(); ++k) {
              const Step& st = steps[k];
              dyn.step(st.t, st.dt, st.first, f.data(), v.data(), z_all.data() + k * drivers, scratch.data());
              if (st.lands_on != npos) {
                for (std::size_t r = st.lands_on; r <= horizon && tenor.times[r] == tenor.times[st.lands_on]; ++r) {
                  std::copy(f.begin(), f.end(), snaps.begin() + static_cast<std::ptrdiff_t>(r * active));
                }
              }
            }
            std::fill(out.begin(), out.end(), 0.0);
            payoff(view, out);
            double* row = values.data() + (s - lo) * outputs;
            for (std::size_t o = 0; o < outputs; ++o) row[o] += out[o] / static_cast<double>(twins);
          }
        }

        for (std::size_t o = 0; o < outputs; ++o) {
          Moments m;
          m.n = static_cast<double>(hi - lo);
          double sum = 0.0;
          for (std::size_t s = 0; s < hi - lo; ++s) sum += values[s * outputs + o];
          m.mean = sum / m.n;
          for (std::size_t s = 0; s < hi - lo; ++s) {
            const double d = values[s * outputs + o] - m.mean;
            m.m2 += d * d;
          }
          blocks[b][o] = m;
        }
      },
      cfg.threads);

  std::vector<McPrice> prices(outputs);
  for (std::size_t o = 0; o < outputs; ++o) {
    const Moments m = reduce(blocks, o, 0, n_blocks);
    prices[o].value = m.mean;
    prices[o].std_error = m.n > 1.0 ? std::sqrt(m.m2 / (m.n - 1.0) / m.n) : 0.0;
    prices[o].n_paths = cfg.n_paths;
  }
  return prices;
}

std::vector<McPrice> price_caplets_mc(const ModelParams& model, const TenorStructure& tenor,
                                      std::span<const CapletSpec> caplets, const McConfig& cfg) {
  if (caplets.empty()) return {};
  std::size_t horizon = 0;
  for (const auto& c : caplets) {
    if (c.index >= tenor.size()) throw DomainError("caplet index out of range");
    horizon = std::max(horizon, c.index);
  }
  const std::vector<CapletSpec> specs(caplets.begin(), caplets.end());
  auto payoff = [&specs](const PathView& path, std::span<double> out) {
    for (std::size_t c = 0; c < specs.size(); ++c) {
      const std::size_t i = specs[c].index;
      const double intrinsic = std::max(path.fixing(i) - specs[c].strike, 0.0);
      out[c] = intrinsic > 0.0 ? path.tenor->accruals[i] * intrinsic / path.numeraire(i + 1) : 0.0;
    }
  };
  return simulate_expectations(model, tenor, horizon, horizon + 1, specs.size(), payoff, cfg);
}

std::vector<McPrice> price_swaptions_mc(const ModelParams& model, const TenorStructure& tenor,
                                        std::span<const SwaptionSpec> swaptions, const McConfig& cfg) {
  if (swaptions.empty()) return {};
  std::size_t horizon = 0;
  std::size_t active = 0;
  for (const auto& s : swaptions) {
    if (s.periods == 0 || s.expiry + s.periods > tenor.size()) throw DomainError("swaption extends beyond the tenor grid");
    horizon = std::max(horizon, s.expiry);
    active = std::max(active, s.expiry + s.periods);
  }
  const std::vector<SwaptionSpec> specs(swaptions.begin(), swaptions.end());
  auto payoff = [&specs](const PathView& path, std::span<double> out) {
    const auto& tau = path.tenor->accruals;
    for (std::size_t c = 0; c < specs.size(); ++c) {
      const auto& s = specs[c];
      double bond = 1.0;
      double annuity = 0.0;
      for (std::size_t k = s.expiry; k < s.expiry + s.periods; ++k) {
        bond /= 1.0 + tau[k] * path.forward(s.expiry, k);
        annuity += tau[k] * bond;
      }
      const double rate = (1.0 - bond) / annuity;
      out[c] = rate > s.strike ? annuity * (rate - s.strike) / path.numeraire(s.expiry) : 0.0;
    }
  };
  return simulate_expectations(model, tenor, horizon, active, specs.size(), payoff, cfg);
}

McPrice price_caplet_mc(const ModelParams& model, const TenorStructure& tenor, std::size_t i, double strike,
                        const McConfig& cfg) {
  const CapletSpec spec{i, strike};
  return price_caplets_mc(model, tenor, std::span(&spec, 1), cfg).front();
}

McPrice price_swaption_mc(const ModelParams& model, const TenorStructure& tenor, std::size_t expiry,
                          std::size_t periods, double strike, const McConfig& cfg) {
  const SwaptionSpec spec{expiry, periods, strike};
  return price_swaptions_mc(model, tenor, std::span(&spec, 1), cfg).front();
}

std::vector<McPrice> price_deflated_bonds_mc(const ModelParams& model, const TenorStructure& tenor,
                                             std::size_t horizon, const McConfig& cfg) {
  if (horizon >= tenor.size()) throw DomainError("bond horizon out of range");
  auto payoff = [horizon](const PathView& path, std::span<double> out) {
    for (std::size_t k = 0; k <= horizon + 1; ++k) out[k] = 1.0 / path.numeraire(k);
  };
  return simulate_expectations(model, tenor, horizon, horizon + 1, horizon + 2, payoff, cfg);
}

}  // namespace smilecal
