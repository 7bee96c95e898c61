#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "smilecal/analytic.hpp"
#include "smilecal/calibration.hpp"
#include "smilecal/error.hpp"

using namespace smilecal;

namespace {

CalibrationSpec desk_spec(ModelKind kind) {
  CalibrationSpec s;
  s.model = kind;
  s.tenor = testdata::tenor();
  s.caplets = testdata::caplets();
  s.swaptions = testdata::swaptions();
  s.stage1.t0 = 1.0;
  s.stage1.t_min = 1e-3;
  s.stage1.rho = 0.8;
  s.stage1.n = 10;
  s.stage1.workers = 16;
  s.stage1.threads = 1;
  s.mc.n_paths = 400;
  s.mc.threads = 1;
  return s;
}

HaganParams truth(std::size_t m) {
  HaganParams h;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(m);
    h.phi.push_back(-0.6 + 0.3 * u);
    h.nu.push_back(1.2 - 0.6 * u);
    h.alpha.push_back(0.09 - 0.02 * u);
  }
  return h;
}

// Replaces the caplet quotes with the model's own implied volatilities.
void self_generate(CalibrationSpec& spec, const ModelParams& model) {
  for (std::size_t i = 0; i < spec.tenor.size(); ++i) {
    const SabrSlice s = effective_slice(model, spec.tenor, i);
    for (std::size_t k = 0; k < spec.caplets.moneyness.size(); ++k) {
      spec.caplets.rows[i].vols[k] = hagan_implied_vol(s, s.f0 * std::exp(spec.caplets.moneyness[k]));
    }
  }
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("parameter vectors") {
  CHECK(volatility_bounds(ModelKind::hagan, 13).size() == 39);
  CHECK(volatility_bounds(ModelKind::mm, 13).size() == 27);
  CHECK(volatility_bounds(ModelKind::rebonato, 13).size() == 34);
  CHECK(correlation_bounds(ModelKind::mm).size() == 2);
  CHECK(correlation_bounds(ModelKind::hagan).size() == 5);
  for (auto kind : {ModelKind::hagan, ModelKind::mm, ModelKind::rebonato}) {
    const auto b = volatility_bounds(kind, 4);
    const auto x = b.midpoint();
    CHECK(x_from_params(params_from_x(kind, x, 4, 0.5)) == x);
    const auto yb = correlation_bounds(kind);
    const auto y = yb.midpoint();
    CHECK(y_from_corr(kind, corr_from_y(kind, y)) == y);
  }
  CHECK_THROWS_AS(params_from_x(ModelKind::hagan, std::vector<double>(5, 0.1), 4, 0.5), DomainError);
}

TEST_CASE("error measures") {
  const std::vector<double> model{0.11, 0.18, 0.3};
  const std::vector<double> market{0.1, 0.2, 0.3};
  CHECK(mre(model, market) == doctest::Approx((0.1 + 0.1 + 0.0) / 3.0).epsilon(1e-14));
  CHECK(mae(model, market) == doctest::Approx(0.03 / 3.0).epsilon(1e-14));
  CHECK(mre(std::vector<double>{}, std::vector<double>{}) == 0.0);
  CHECK_THROWS_AS(mae(model, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("caplet cost vanishes on self-generated quotes") {
  CalibrationSpec spec = desk_spec(ModelKind::hagan);
  const ModelParams model = truth(13);
  self_generate(spec, model);
  CHECK(caplet_cost(x_from_params(model), spec) < 1e-28);

  MMParams mm{std::vector<double>(13, -0.3), std::vector<double>(13, 0.1), 0.5, 0.5, {}};
  CalibrationSpec mspec = desk_spec(ModelKind::mm);
  self_generate(mspec, ModelParams{mm});
  CHECK(caplet_cost(x_from_params(ModelParams{mm}), mspec) < 1e-28);
}

TEST_CASE("caplet cost equals a direct re-summation") {
  const CalibrationSpec spec = desk_spec(ModelKind::hagan);
  const ModelParams model = truth(13);
  double sum = 0.0;
  for (const auto& r : caplet_fit(model, spec)) {
    REQUIRE_FALSE(std::isnan(r.model_vol));
    sum += (r.model_vol - r.market_vol) * (r.model_vol - r.market_vol);
  }
  CHECK(caplet_cost(x_from_params(model), spec) == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("expansion breakdown costs a penalty per cell") {
  const CalibrationSpec spec = desk_spec(ModelKind::hagan);
  HaganParams h = truth(13);
  h.phi[4] = 1.0;
  h.nu[4] = 2.0;
  h.alpha[4] = 1e-6;
  const auto fit = caplet_fit(ModelParams{h}, spec);
  std::size_t failed = 0;
  for (const auto& r : fit) failed += std::isnan(r.model_vol) ? 1 : 0;
  REQUIRE(failed > 0);
  const double cost = caplet_cost(x_from_params(ModelParams{h}), spec);
  CHECK(cost >= kPenalty * static_cast<double>(failed));
  CHECK(cost < kPenalty * static_cast<double>(failed + 1));
}

TEST_CASE("stage 1 recovers the parameters that generated the quotes") {
  CalibrationSpec spec = desk_spec(ModelKind::hagan);
  const HaganParams h = truth(13);
  self_generate(spec, ModelParams{h});
  const auto r = calibrate_caplets(spec);
  CHECK(r.f_best < 1e-12);
  const auto x = x_from_params(ModelParams{h});
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(r.x_best[k] == doctest::Approx(x[k]).epsilon(1e-4));
}

TEST_CASE("smile-by-smile and joint Hagan fits agree") {
  CalibrationSpec spec = desk_spec(ModelKind::hagan);
  const auto separate = calibrate_caplets(spec);
  spec.separable = false;
  spec.stage1.workers = 32;
  const auto joint = calibrate_caplets(spec);
  CHECK(separate.f_best == doctest::Approx(caplet_cost(separate.x_best, spec)).epsilon(1e-12));
  CHECK(separate.f_best <= joint.f_best * (1.0 + 1e-6) + 1e-12);
}

TEST_CASE("swaption cells") {
  const CalibrationSpec spec = desk_spec(ModelKind::hagan);
  const auto cells = swaption_cells(spec);
  REQUIRE(cells.size() == 70);
  CHECK(cells.front().label == "0.5x1");
  CHECK(cells.front().moneyness == doctest::Approx(-0.4));
  CHECK(cells.front().instrument.expiry == 0);
  CHECK(cells.front().instrument.periods == 2);
  std::size_t atm = 0;
  for (const auto& c : cells) {
    CHECK(std::abs(c.moneyness) <= 0.4 + 1e-12);
    CHECK(c.black_price > 0.0);
    CHECK(c.instrument.expiry + c.instrument.periods <= 13);
    if (c.moneyness == 0.0) ++atm;
  }
  CHECK(atm == 14);
}

TEST_CASE("swaption cost is reproducible and re-sums") {
  const CalibrationSpec spec = desk_spec(ModelKind::hagan);
  HaganParams h = truth(13);
  const ModelParams frozen = h;
  const std::vector<double> y{0.814904, 3.378797, 0.975928, 3.777324, 0.013940};
  const double a = swaption_cost(y, frozen, spec);
  CHECK(a == swaption_cost(y, frozen, spec));
  const auto cells = swaption_cells(spec);
  const auto eval = evaluate_swaptions(y, frozen, spec, cells);
  REQUIRE_FALSE(eval.aborted);
  double sum = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double d = 100.0 * (cells[k].black_price - eval.prices[k].value);
    sum += d * d;
  }
  CHECK(eval.cost == doctest::Approx(sum).epsilon(1e-14));
  CHECK(a == eval.cost);
}

TEST_CASE("report stages") {
  CalibrationSpec spec = desk_spec(ModelKind::hagan);
  spec.run_stage2 = false;
  const auto report = calibrate(spec);
  CHECK_FALSE(report.stage2_run);
  CHECK(report.caplet_fit.size() == 13 * 9);
  CHECK(report.failed_cells == 0);
  CHECK(report.mre > 0.0);
  CHECK(report.mre < 0.05);
  CHECK(report.stage1_evals > 0);

  CalibrationSpec broken = desk_spec(ModelKind::hagan);
  broken.caplets.rows.pop_back();
  CHECK_THROWS_AS(calibrate(broken), ConfigError);
}

}
