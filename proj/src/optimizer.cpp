#include "smilecal/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "smilecal/error.hpp"
#include "smilecal/parallel.hpp"

namespace smilecal {

void BoxBounds::validate() const {
  if (lower.size() != upper.size()) throw ConfigError("bounds have different dimensions");
  if (lower.empty()) throw ConfigError("bounds are empty");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(lower[k] < upper[k])) {
      throw ConfigError("bounds need finite lower < upper on every axis");
    }
  }
}

bool BoxBounds::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] >= lower[k] && x[k] <= upper[k])) return false;
  }
  return true;
}

std::vector<double> BoxBounds::clamp(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], lower[k], upper[k]);
  return out;
}

std::vector<double> BoxBounds::midpoint() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = 0.5 * (lower[k] + upper[k]);
  return out;
}

void SAConfig::validate() const {
  if (!(t_min > 0.0) || !(t0 > t_min)) throw ConfigError("annealing needs t0 > t_min > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("cooling factor must lie in (0,1)");
  if (n == 0) throw ConfigError("chain length must be at least 1");
  if (workers == 0) throw ConfigError("at least one worker is needed");
}

std::size_t temperature_levels(const SAConfig& cfg) {
  cfg.validate();
  const double exact = std::log(cfg.t_min / cfg.t0) / std::log(cfg.rho);
  return static_cast<std::size_t>(std::ceil(exact - 1e-9));
}

std::vector<double> compute_neighbour(std::span<const double> x, const BoxBounds& bounds, double temperature,
                                      double t0, CounterRng& rng) {
  const double scale = std::min(1.0, temperature / t0);
  std::vector<double> out(x.begin(), x.end());
  const auto k = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(x.size())), x.size() - 1);
  const double lo = bounds.lower[k];
  const double hi = bounds.upper[k];
  double y = x[k] + (2.0 * rng.uniform() - 1.0) * (hi - lo) * scale;
  if (y < lo) y = 2.0 * lo - y;
  if (y > hi) y = 2.0 * hi - y;
  out[k] = std::clamp(y, lo, hi);
  return out;
}

bool metropolis_accept(double delta, double temperature, double u) {
  if (delta < 0.0) return true;
  return u < std::exp(-delta / temperature);
}

namespace {

std::uint64_t chain_key(std::size_t level, std::size_t worker) {
  return (static_cast<std::uint64_t>(level) << 32) | static_cast<std::uint64_t>(worker);
}

struct Evaluator {
  const Objective& f;

  // Non-finite values become +inf so they are always rejected.
  double operator()(std::span<const double> x, std::size_t& nonfinite) const {
    const double v = f(x);
    if (std::isfinite(v)) return v;
    ++nonfinite;
    return std::numeric_limits<double>::infinity();
  }
};

std::vector<double> start_point(const BoxBounds& bounds, const std::optional<std::vector<double>>& x0) {
  if (!x0) return bounds.midpoint();
  if (x0->size() != bounds.size()) throw ConfigError("starting point has the wrong dimension");
  return bounds.clamp(*x0);
}

}  // namespace

OptResult sa_minimize(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                      std::optional<std::vector<double>> x0) {
  bounds.validate();
  const std::size_t levels = temperature_levels(cfg);
  const Evaluator eval{f};
  OptResult res;
  std::vector<double> x = start_point(bounds, x0);
  double fx = eval(x, res.nonfinite_evals);
  res.x_best = x;
  res.f_best = fx;

  double temperature = cfg.t0;
  for (std::size_t level = 0; level < levels; ++level) {
    CounterRng rng(cfg.seed, RngDomain::annealing, chain_key(level, 0), 0);
    for (std::size_t step = 0; step < cfg.n; ++step) {
      auto candidate = compute_neighbour(x, bounds, temperature, cfg.t0, rng);
      const double fc = eval(candidate, res.nonfinite_evals);
      ++res.evals;
      if (metropolis_accept(fc - fx, temperature, rng.uniform())) {
        x = std::move(candidate);
        fx = fc;
        if (fx < res.f_best) {
          res.f_best = fx;
          res.x_best = x;
        }
      }
    }
    res.level_best.push_back(res.f_best);
    temperature *= cfg.rho;
  }
  res.levels = levels;
  return res;
}

OptResult sa_minimize_parallel(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                               std::optional<std::vector<double>> x0) {
  bounds.validate();
  const std::size_t levels = temperature_levels(cfg);
  const Evaluator eval{f};
  OptResult res;
  std::vector<double> incumbent = start_point(bounds, x0);
  double f_incumbent = eval(incumbent, res.nonfinite_evals);
  res.x_best = incumbent;
  res.f_best = f_incumbent;

  struct Chain {
    std::vector<double> end;
    double f_end = 0.0;
    std::vector<double> best;
    double f_best = 0.0;
    std::size_t nonfinite = 0;
  };
  std::vector<Chain> chains(cfg.workers);

  double temperature = cfg.t0;
  for (std::size_t level = 0; level < levels; ++level) {
    parallel_for(
        cfg.workers,
        [&](std::size_t w) {
          Chain& c = chains[w];
          CounterRng rng(cfg.seed, RngDomain::annealing, chain_key(level, w), 0);
          c.end = incumbent;
          c.f_end = f_incumbent;
          c.best = incumbent;
          c.f_best = f_incumbent;
          c.nonfinite = 0;
          for (std::size_t step = 0; step < cfg.n; ++step) {
            auto candidate = compute_neighbour(c.end, bounds, temperature, cfg.t0, rng);
            const double fc = eval(candidate, c.nonfinite);
            if (metropolis_accept(fc - c.f_end, temperature, rng.uniform())) {
              c.end = std::move(candidate);
              c.f_end = fc;
              if (c.f_end < c.f_best) {
                c.f_best = c.f_end;
                c.best = c.end;
              }
            }
          }
        },
        cfg.threads);

    std::size_t winner = 0;
    for (std::size_t w = 0; w < cfg.workers; ++w) {
      const Chain& c = chains[w];
      res.nonfinite_evals += c.nonfinite;
      if (c.f_end < chains[winner].f_end) winner = w;
      if (c.f_best < res.f_best) {
        res.f_best = c.f_best;
        res.x_best = c.best;
      }
    }
    incumbent = chains[winner].end;
    f_incumbent = chains[winner].f_end;
    res.evals += cfg.workers * cfg.n;
    res.level_best.push_back(res.f_best);
    temperature *= cfg.rho;
  }
  res.levels = levels;
  return res;
}

OptResult nelder_mead(const Objective& f, std::span<const double> x0, std::span<const double> step,
                      const NelderMeadConfig& cfg) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw ConfigError("Nelder-Mead needs matching, non-empty x0 and steps");
  const Evaluator eval{f};
  OptResult res;

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> values(n + 1);
  for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += step[k];
  for (std::size_t v = 0; v <= n; ++v) {
    values[v] = eval(simplex[v], res.nonfinite_evals);
    ++res.evals;
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  std::vector<double> trial(n);
  auto point = [&](double coef, const std::vector<double>& worst) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (worst[k] - centroid[k]);
    return p;
  };

  res.converged = false;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t v = 0; v <= n; ++v) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) d2 += (simplex[v][k] - simplex[best][k]) * (simplex[v][k] - simplex[best][k]);
      diameter = std::max(diameter, std::sqrt(d2));
    }
    const double spread = values[worst] - values[best];
    if (diameter < cfg.tol || spread < cfg.tol * cfg.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.max_iter) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v][k] / static_cast<double>(n);
    }

    auto reflected = point(-1.0, simplex[worst]);
    const double fr = eval(reflected, res.nonfinite_evals);
    ++res.evals;
    if (fr < values[best]) {
      auto expanded = point(-2.0, simplex[worst]);
      const double fe = eval(expanded, res.nonfinite_evals);
      ++res.evals;
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = std::move(reflected);
      values[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst vertex, inside otherwise.
    const bool outside = fr < values[worst];
    auto contracted = point(outside ? -0.5 : 0.5, simplex[worst]);
    const double fc = eval(contracted, res.nonfinite_evals);
    ++res.evals;
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = fc;
      continue;
    }
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == best) continue;
      for (std::size_t k = 0; k < n; ++k) simplex[v][k] = simplex[best][k] + 0.5 * (simplex[v][k] - simplex[best][k]);
      values[v] = eval(simplex[v], res.nonfinite_evals);
      ++res.evals;
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  res.x_best = simplex[best];
  res.f_best = values[best];
  return res;
}

OptResult nelder_mead(const Objective& f, std::span<const double> x0, const BoxBounds& bounds,
                      const NelderMeadConfig& cfg) {
  bounds.validate();
  std::vector<double> step(bounds.size());
  for (std::size_t k = 0; k < step.size(); ++k) step[k] = 0.05 * (bounds.upper[k] - bounds.lower[k]);
  return nelder_mead(f, x0, step, cfg);
}

OptResult hybrid_minimize(const Objective& f, const BoxBounds& bounds, const SAConfig& cfg,
                          const NelderMeadConfig& nm, std::optional<std::vector<double>> x0) {
  OptResult sa = sa_minimize_parallel(f, bounds, cfg, std::move(x0));
  const Objective clamped = [&](std::span<const double> x) { return f(bounds.clamp(x)); };
  OptResult local = nelder_mead(clamped, sa.x_best, bounds, nm);
  // One restart from the first answer.
  OptResult again = nelder_mead(clamped, local.x_best, bounds, nm);

  OptResult res = sa;
  res.evals = sa.evals + local.evals + again.evals;
  res.nonfinite_evals = sa.nonfinite_evals + local.nonfinite_evals + again.nonfinite_evals;
  res.iterations = local.iterations + again.iterations;
  res.converged = again.converged;
  if (again.f_best < res.f_best) {
    res.x_best = bounds.clamp(again.x_best);
    res.f_best = again.f_best;
  }
  return res;
}

}  // namespace smilecal
