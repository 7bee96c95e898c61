#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "common.hpp"
#include "smilecal/error.hpp"
#include "smilecal/report_io.hpp"

using namespace smilecal;

namespace {

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

CalibrationReport sample_report() {
  CalibrationReport r;
  r.model = ModelKind::mm;
  r.beta = 0.5;
  r.seed = 42;
  r.params = MMParams{{-0.3, -0.25}, {0.1, 0.0999999999999999}, 0.61, 0.5, {0.779175, 2.722489, 1.0, 0.0, 0.0}};
  r.caplet_fit = {{0, -0.4, 0.9726, 1.0061, 0.0344}, {1, 0.0, 0.5, std::nan(""), std::nan("")}};
  r.caplet_cost = 0.12;
  r.mre = std::nan("");
  r.failed_cells = 1;
  r.stage2_run = true;
  r.swaption_fit = {{"0.5x1", -0.4, 0.4866, 0.4842, 0.001, 0.0024}};
  r.swaption_cost = 3.5;
  r.mae = 0.0024;
  r.stage1_evals = 100;
  r.stage1_seconds = 1.5;
  return r;
}

}  // namespace

TEST_SUITE("report_io") {

TEST_CASE("parameter files round-trip exactly") {
  const std::vector<ModelParams> models{
      HaganParams{{-0.4712, 0.1}, {1.0, 0.3}, {0.0847, 1e-6}, 0.5, {0.814904, 3.378797, 0.975928, 3.777324, 0.013940}},
      MMParams{{-0.3, -0.25}, {0.1, 0.1 / 3.0}, 0.61, 0.7, {0.779175, 2.722489, 1.0, 0.0, 0.0}},
      RebonatoParams{{-0.2, -0.1, 0.0}, {0.0021, 0.003, 0.004}, {3.7789, 44.7668, 0.3076, 25.3412},
                     {0.0010, 19.5812, 6.2339, 0.5533}, 0.5, {0.650997, 3.617546, 0.999, 0.380984, 0.001}}};
  for (const auto& m : models) {
    const auto back = parse_params_csv(format_params_csv(m));
    CHECK(kind_of(back) == kind_of(m));
    CHECK(x_from_params(back) == x_from_params(m));
    CHECK(beta_of(back) == beta_of(m));
    const auto& c0 = correlation_of(m);
    const auto& c1 = correlation_of(back);
    CHECK(c1.eta1 == c0.eta1);
    CHECK(c1.lambda1 == c0.lambda1);
    if (kind_of(m) != ModelKind::mm) {
      CHECK(c1.eta2 == c0.eta2);
      CHECK(c1.lambda2 == c0.lambda2);
      CHECK(c1.lambda3 == c0.lambda3);
    }
  }
  CHECK_THROWS_AS(parse_params_csv("model,heston\n"), ParseError);
  CHECK_THROWS_AS(parse_params_csv("model,hagan\nbeta,0.5\n"), ParseError);
}

TEST_CASE("fit tables round-trip") {
  const auto r = sample_report();
  const auto caps = parse_caplet_fit_csv(format_caplet_fit_csv(r.caplet_fit));
  REQUIRE(caps.size() == 2);
  CHECK(caps[0].forward == 0);
  CHECK(caps[0].moneyness == doctest::Approx(-0.4));
  CHECK(caps[0].market_vol == doctest::Approx(0.9726));
  CHECK(caps[0].model_vol == doctest::Approx(1.0061));
  CHECK(std::isnan(caps[1].model_vol));
  const auto sw = parse_swaption_fit_csv(format_swaption_fit_csv(r.swaption_fit));
  REQUIRE(sw.size() == 1);
  CHECK(sw[0].label == "0.5x1");
  CHECK(sw[0].mc == doctest::Approx(0.4842));
  CHECK(sw[0].mc_stderr == doctest::Approx(0.001));
}

TEST_CASE("reference fit fixtures parse") {
  for (const char* model : {"hagan", "mm", "rebonato"}) {
    const auto caps = parse_caplet_fit_csv(slurp(testdata::fixture(std::string(model) + "_caplet_fit.csv")));
    CHECK(caps.size() > 0);
    for (const auto& c : caps) {
      CHECK(c.forward < 13);
      CHECK(c.market_vol > 0.0);
      CHECK(c.model_vol > 0.0);
    }
    const auto sw = parse_swaption_fit_csv(slurp(testdata::fixture(std::string(model) + "_swaption_fit.csv")));
    CHECK(sw.size() > 0);
    for (const auto& s : sw) CHECK(std::abs(std::abs(s.black - s.mc) - s.abs_error) < 5e-4);
  }
}

TEST_CASE("summary schema") {
  const auto r = sample_report();
  CalibrationSpec spec;
  spec.model = ModelKind::mm;
  const auto j = nlohmann::json::parse(format_summary_json(r, spec));
  CHECK(j["schema_version"] == kSummarySchemaVersion);
  CHECK(j["model"] == "mm");
  CHECK(j["seed"] == 42);
  CHECK(j["forwards"] == 2);
  CHECK(j["stage1"]["mre"].is_null());
  CHECK(j["stage1"]["failed_cells"] == 1);
  CHECK(j["stage1"]["evals"] == 100);
  CHECK(j["stage2"]["run"] == true);
  CHECK(j["stage2"]["mae_pct"] == doctest::Approx(0.0024));
  CHECK(j["correlation"]["eta1"] == doctest::Approx(0.779175));
  CHECK(format_summary_json(r, spec).find("seconds") == std::string::npos);

  const auto t = nlohmann::json::parse(format_timings_json(r, 4));
  CHECK(t["threads"] == 4);
  CHECK(t["stage1_seconds"] == doctest::Approx(1.5));
}

TEST_CASE("summary matches the golden file") {
  CalibrationSpec spec;
  spec.model = ModelKind::mm;
  const std::string text = format_summary_json(sample_report(), spec);
  CHECK(text == slurp(testdata::fixture("summary_golden.json")));
}

TEST_CASE("bench table") {
  const std::vector<BenchRow> rows{{1, 20000, 2.0, 10000.0, 1.0}, {2, 20000, 1.1, 20000.0 / 1.1, 2.0 / 1.1}};
  const auto back = parse_bench_csv(format_bench_csv(rows));
  REQUIRE(back.size() == 2);
  CHECK(back[1].workers == 2);
  CHECK(back[1].speedup == doctest::Approx(2.0 / 1.1));
}

}
