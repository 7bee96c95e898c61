#include "smilecal/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "smilecal/analytic.hpp"
#include "smilecal/error.hpp"

namespace smilecal {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string years_label(double years) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", years);
  return buf;
}

std::optional<std::size_t> tenor_index(const TenorStructure& tenor, const Date& date) {
  for (std::size_t k = 0; k < tenor.dates.size(); ++k) {
    if (tenor.dates[k] == date) return k;
  }
  return std::nullopt;
}

// Squared vol errors over one smile; kPenalty for each cell where the expansion fails.
double smile_cost(const SabrSlice& slice, const SmileSurface& surface, std::size_t row) {
  double cost = 0.0;
  const auto& vols = surface.rows[row].vols;
  for (std::size_t k = 0; k < surface.moneyness.size(); ++k) {
    const auto vol = try_hagan_implied_vol(slice, slice.f0 * std::exp(surface.moneyness[k]));
    if (!vol) {
      cost += kPenalty;
      continue;
    }
    const double d = *vol - vols[k];
    cost += d * d;
  }
  return cost;
}

}  // namespace

void CalibrationSpec::validate() const {
  tenor.validate();
  if (caplets.rows.size() != tenor.size()) {
    throw ConfigError("caplet surface has " + std::to_string(caplets.rows.size()) + " rows but the tenor has " +
                      std::to_string(tenor.size()) + " forwards");
  }
  for (std::size_t i = 0; i < caplets.rows.size(); ++i) {
    if (caplets.rows[i].expiry != tenor.dates[i]) {
      throw ConfigError("caplet row " + caplets.rows[i].label + " does not match reset date " + format_date(tenor.dates[i]));
    }
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0,1]");
  stage1.validate();
  if (run_stage2) {
    stage2.validate();
    mc.validate(tenor);
    if (swaption_rows > swaptions.rows.size()) throw ConfigError("fewer swaption rows than requested");
  }
}

BoxBounds volatility_bounds(ModelKind kind, std::size_t m) {
  BoxBounds b;
  auto add = [&b](std::size_t count, double lo, double hi) {
    b.lower.insert(b.lower.end(), count, lo);
    b.upper.insert(b.upper.end(), count, hi);
  };
  switch (kind) {
    case ModelKind::hagan:
      add(m, -1.0, 1.0);
      add(m, 1e-6, 2.0);
      add(m, 1e-6, 1.0);
      break;
    case ModelKind::mm:
      add(m, -1.0, 1.0);
      add(m, 1e-6, 1.0);
      add(1, 1e-6, 2.0);
      break;
    case ModelKind::rebonato:
      add(m, -1.0, 1.0);
      add(m, 1e-4, 0.1);
      b.lower.insert(b.lower.end(), {0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.0});
      b.upper.insert(b.upper.end(), {50.0, 100.0, 10.0, 50.0, 5.0, 50.0, 10.0, 2.0});
      break;
  }
  return b;
}

ModelParams params_from_x(ModelKind kind, std::span<const double> x, std::size_t m, double beta,
                          const CorrelationParams& corr) {
  const std::size_t want = volatility_bounds(kind, m).size();
  if (x.size() != want) throw DomainError("volatility vector has the wrong dimension");
  auto slice = [&x, m](std::size_t block) { return std::vector<double>(x.begin() + block * m, x.begin() + (block + 1) * m); };
  switch (kind) {
    case ModelKind::hagan:
      return HaganParams{slice(0), slice(1), slice(2), beta, corr};
    case ModelKind::mm:
      return MMParams{slice(0), slice(1), x[2 * m], beta, corr};
    case ModelKind::rebonato: {
      const double* t = x.data() + 2 * m;
      return RebonatoParams{slice(0), slice(1), {t[0], t[1], t[2], t[3]}, {t[4], t[5], t[6], t[7]}, beta, corr};
    }
  }
  throw DomainError("unknown model");
}

std::vector<double> x_from_params(const ModelParams& model) {
  std::vector<double> x;
  auto append = [&x](const std::vector<double>& v) { x.insert(x.end(), v.begin(), v.end()); };
  if (const auto* m = std::get_if<HaganParams>(&model)) {
    append(m->phi);
    append(m->nu);
    append(m->alpha);
  } else if (const auto* m = std::get_if<MMParams>(&model)) {
    append(m->phi);
    append(m->alpha);
    x.push_back(m->nu);
  } else {
    const auto& r = std::get<RebonatoParams>(model);
    append(r.phi);
    append(r.kappa);
    x.insert(x.end(), {r.g.a, r.g.b, r.g.c, r.g.d, r.h.a, r.h.b, r.h.c, r.h.d});
  }
  return x;
}

BoxBounds correlation_bounds(ModelKind kind) {
  if (kind == ModelKind::mm) return {{0.0, 0.0}, {1.0, 10.0}};
  return {{0.0, 0.0, 0.0, 0.0, 0.0}, {1.0, 10.0, 1.0, 10.0, 10.0}};
}

CorrelationParams corr_from_y(ModelKind kind, std::span<const double> y) {
  CorrelationParams c;
  if (kind == ModelKind::mm) {
    if (y.size() != 2) throw DomainError("M&M correlation vector needs 2 entries");
    c.eta1 = y[0];
    c.lambda1 = y[1];
    return c;
  }
  if (y.size() != 5) throw DomainError("correlation vector needs 5 entries");
  c = {y[0], y[1], y[2], y[3], y[4]};
  return c;
}

std::vector<double> y_from_corr(ModelKind kind, const CorrelationParams& c) {
  if (kind == ModelKind::mm) return {c.eta1, c.lambda1};
  return {c.eta1, c.lambda1, c.eta2, c.lambda2, c.lambda3};
}

double caplet_cost(std::span<const double> x, const CalibrationSpec& spec) {
  const std::size_t m = spec.tenor.size();
  const ModelParams model = params_from_x(spec.model, x, m, spec.beta);
  double cost = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    SabrSlice slice;
    try {
      slice = effective_slice(model, spec.tenor, i);
    } catch (const DomainError&) {
      cost += kPenalty * static_cast<double>(spec.caplets.moneyness.size());
      continue;
    }
    cost += smile_cost(slice, spec.caplets, i);
  }
  return cost;
}

std::vector<SwaptionCell> swaption_cells(const CalibrationSpec& spec) {
  std::vector<std::size_t> columns;
  for (std::size_t k = 0; k < spec.swaptions.moneyness.size(); ++k) {
    if (std::abs(spec.swaptions.moneyness[k]) <= spec.max_abs_moneyness + 1e-12) columns.push_back(k);
  }
  const std::size_t rows = std::min(spec.swaption_rows, spec.swaptions.rows.size());
  std::vector<SwaptionCell> cells;
  for (std::size_t r = 0; r < rows; ++r) {
    const SmileRow& row = spec.swaptions.rows[r];
    const auto expiry = tenor_index(spec.tenor, row.expiry);
    if (!expiry) throw ConfigError("swaption expiry " + format_date(row.expiry) + " is not a reset date");
    const auto months = static_cast<int>(std::lround(row.length_years * 12.0));
    const auto end = tenor_index(spec.tenor, add_months(row.expiry, months));
    if (!end || *end <= *expiry) throw ConfigError("swaption " + row.label + " does not end on a tenor date");
    const std::size_t periods = *end - *expiry;
    if (*expiry + periods > spec.tenor.size()) throw ConfigError("swaption " + row.label + " extends beyond the tenor");

    const SwapQuote q = forward_swap(spec.tenor, *expiry, periods);
    const double expiry_years = static_cast<double>(std::lround(spec.tenor.reset_time(*expiry) * 12.0)) / 12.0;
    const std::string label = years_label(expiry_years) + "x" + years_label(row.length_years);
    for (std::size_t k : columns) {
      SwaptionCell cell;
      cell.label = label;
      cell.row = r;
      cell.moneyness = spec.swaptions.moneyness[k];
      cell.market_vol = row.vols[k];
      cell.instrument = {*expiry, periods, q.rate * std::exp(cell.moneyness)};
      cell.black_price =
          black_swaption(q.rate, cell.instrument.strike, cell.market_vol, spec.tenor.reset_time(*expiry), q.annuity);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

SwaptionEvaluation evaluate_swaptions(std::span<const double> y, const ModelParams& frozen, const CalibrationSpec& spec,
                                      std::span<const SwaptionCell> cells) {
  SwaptionEvaluation out;
  ModelParams model = frozen;
  set_correlation(model, corr_from_y(spec.model, y));
  std::vector<SwaptionSpec> instruments;
  instruments.reserve(cells.size());
  for (const auto& c : cells) instruments.push_back(c.instrument);
  try {
    out.repaired = factorize_correlation(assemble_correlation(model, spec.tenor)).repaired;
    out.prices = price_swaptions_mc(model, spec.tenor, instruments, spec.mc);
  } catch (const SimulationError&) {
    out.aborted = true;
  } catch (const DomainError&) {
    out.aborted = true;
  }
  if (out.aborted) {
    out.prices.clear();
    out.cost = kPenalty;
    return out;
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double d = 100.0 * (cells[k].black_price - out.prices[k].value);
    out.cost += d * d;
  }
  return out;
}

double swaption_cost(std::span<const double> y, const ModelParams& frozen, const CalibrationSpec& spec) {
  const auto cells = swaption_cells(spec);
  return evaluate_swaptions(y, frozen, spec, cells).cost;
}

double mre(std::span<const double> model_vols, std::span<const double> market_vols) {
  if (model_vols.size() != market_vols.size()) throw DomainError("mre needs grids of equal shape");
  if (model_vols.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < model_vols.size(); ++k) sum += std::abs(model_vols[k] - market_vols[k]) / market_vols[k];
  return sum / static_cast<double>(model_vols.size());
}

double mae(std::span<const double> model_prices, std::span<const double> market_prices) {
  if (model_prices.size() != market_prices.size()) throw DomainError("mae needs grids of equal shape");
  if (model_prices.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < model_prices.size(); ++k) sum += std::abs(model_prices[k] - market_prices[k]);
  return sum / static_cast<double>(model_prices.size());
}

std::vector<CapletFitRow> caplet_fit(const ModelParams& model, const CalibrationSpec& spec) {
  std::vector<CapletFitRow> rows;
  for (std::size_t i = 0; i < spec.tenor.size(); ++i) {
    std::optional<SabrSlice> slice;
    try {
      slice = effective_slice(model, spec.tenor, i);
    } catch (const DomainError&) {
    }
    for (std::size_t k = 0; k < spec.caplets.moneyness.size(); ++k) {
      CapletFitRow r;
      r.forward = i;
      r.moneyness = spec.caplets.moneyness[k];
      r.market_vol = spec.caplets.rows[i].vols[k];
      r.model_vol = kNan;
      r.rel_error = kNan;
      if (slice) {
        if (const auto vol = try_hagan_implied_vol(*slice, slice->f0 * std::exp(r.moneyness))) {
          r.model_vol = *vol;
          r.rel_error = std::abs(*vol - r.market_vol) / r.market_vol;
        }
      }
      rows.push_back(r);
    }
  }
  return rows;
}

OptResult calibrate_caplets(const CalibrationSpec& spec) {
  const std::size_t m = spec.tenor.size();
  const BoxBounds bounds = volatility_bounds(spec.model, m);
  if (spec.model != ModelKind::hagan || !spec.separable) {
    const Objective f = [&spec](std::span<const double> x) { return caplet_cost(x, spec); };
    return hybrid_minimize(f, bounds, spec.stage1, spec.nm);
  }

  // Hagan smiles decouple: x_i = (phi_i, nu_i, alpha_i) only enters smile i.
  OptResult joint;
  joint.x_best.assign(3 * m, 0.0);
  joint.f_best = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const BoxBounds local{{bounds.lower[i], bounds.lower[m + i], bounds.lower[2 * m + i]},
                          {bounds.upper[i], bounds.upper[m + i], bounds.upper[2 * m + i]}};
    const Objective f = [&spec, i](std::span<const double> x) {
      SabrSlice s;
      s.phi = x[0];
      s.nu = x[1];
      s.alpha = x[2];
      s.beta = spec.beta;
      s.f0 = spec.tenor.forwards[i];
      s.expiry = spec.tenor.reset_time(i);
      return smile_cost(s, spec.caplets, i);
    };
    SAConfig cfg = spec.stage1;
    cfg.seed = spec.stage1.seed + i;
    const OptResult r = hybrid_minimize(f, local, cfg, spec.nm);
    joint.x_best[i] = r.x_best[0];
    joint.x_best[m + i] = r.x_best[1];
    joint.x_best[2 * m + i] = r.x_best[2];
    joint.f_best += r.f_best;
    joint.evals += r.evals;
    joint.nonfinite_evals += r.nonfinite_evals;
    joint.iterations += r.iterations;
    joint.levels = r.levels;
    joint.converged = joint.converged && r.converged;
  }
  return joint;
}

void fill_swaption_fit(CalibrationReport& report, const CalibrationSpec& spec) {
  const auto cells = swaption_cells(spec);
  const auto eval = evaluate_swaptions(y_from_corr(spec.model, correlation_of(report.params)), report.params, spec, cells);
  report.swaption_fit.clear();
  report.swaption_cost = eval.cost;
  if (eval.aborted) {
    ++report.mc_aborts;
    report.mae = kNan;
    return;
  }
  std::vector<double> black;
  std::vector<double> mc;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    SwaptionFitRow r;
    r.label = cells[k].label;
    r.moneyness = cells[k].moneyness;
    r.black = 100.0 * cells[k].black_price;
    r.mc = 100.0 * eval.prices[k].value;
    r.mc_stderr = 100.0 * eval.prices[k].std_error;
    r.abs_error = std::abs(r.black - r.mc);
    black.push_back(r.black);
    mc.push_back(r.mc);
    report.swaption_fit.push_back(std::move(r));
  }
  report.mae = mae(mc, black);
}

CalibrationReport calibrate(const CalibrationSpec& spec) {
  spec.validate();
  using Clock = std::chrono::steady_clock;
  CalibrationReport report;
  report.model = spec.model;
  report.beta = spec.beta;
  report.seed = spec.stage1.seed;

  const auto t1 = Clock::now();
  OptResult stage1;
  try {
    stage1 = calibrate_caplets(spec);
  } catch (const Error& e) {
    throw Error(std::string("stage 1 (caplets): ") + e.what());
  }
  report.stage1_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
  report.stage1_evals = stage1.evals;
  report.stage1_levels = stage1.levels;
  report.params = params_from_x(spec.model, stage1.x_best, spec.tenor.size(), spec.beta);
  report.caplet_cost = caplet_cost(stage1.x_best, spec);
  report.caplet_fit = caplet_fit(report.params, spec);
  std::vector<double> model_vols;
  std::vector<double> market_vols;
  for (const auto& r : report.caplet_fit) {
    if (std::isnan(r.model_vol)) {
      ++report.failed_cells;
      continue;
    }
    model_vols.push_back(r.model_vol);
    market_vols.push_back(r.market_vol);
  }
  report.mre = report.failed_cells > 0 ? kNan : mre(model_vols, market_vols);

  if (!spec.run_stage2) return report;

  const auto t2 = Clock::now();
  try {
    const auto cells = swaption_cells(spec);
    const ModelParams frozen = report.params;
    std::atomic<std::size_t> repairs{0};
    std::atomic<std::size_t> aborts{0};
    const Objective f = [&](std::span<const double> y) {
      const auto eval = evaluate_swaptions(y, frozen, spec, cells);
      if (eval.repaired) ++repairs;
      if (eval.aborted) ++aborts;
      return eval.cost;
    };
    const BoxBounds bounds = correlation_bounds(spec.model);
    const OptResult stage2 = hybrid_minimize(f, bounds, spec.stage2, spec.nm_stage2);
    set_correlation(report.params, corr_from_y(spec.model, stage2.x_best));
    report.stage2_evals = stage2.evals;
    report.stage2_levels = stage2.levels;
    report.psd_repairs = repairs;
    report.mc_aborts = aborts;
  } catch (const Error& e) {
    throw Error(std::string("stage 2 (swaptions): ") + e.what());
  }
  report.stage2_run = true;
  fill_swaption_fit(report, spec);
  report.stage2_seconds = std::chrono::duration<double>(Clock::now() - t2).count();
  return report;
}

}  // namespace smilecal
