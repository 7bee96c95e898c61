#include "smilecal/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "csv.hpp"
#include "smilecal/error.hpp"

namespace smilecal {

namespace {

using csv::content_lines;
using csv::parse_number;
using csv::split_fields;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Percent-scaled values: 15 digits so 0.7229 prints as 72.29.
std::string scaled(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", 100.0 * v);
  return buf;
}

std::string pct(double moneyness) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", 100.0 * moneyness);
  return buf;
}

std::string forward_label(std::size_t i) { return "F" + std::to_string(i + 1); }

std::size_t parse_forward_label(std::string_view s, std::size_t line) {
  if (s.size() < 2 || s.front() != 'F') throw ParseError("line " + std::to_string(line) + ": bad forward label");
  const double n = parse_number(s.substr(1), line);
  if (n < 1.0 || n != std::floor(n)) throw ParseError("line " + std::to_string(line) + ": bad forward label");
  return static_cast<std::size_t>(n) - 1;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string_view>>& lines, std::string_view header) {
  if (lines.empty() || lines.front().second != header) {
    throw ParseError("expected header '" + std::string(header) + "'");
  }
}

std::vector<std::string_view> fields_of(std::string_view line, std::size_t count, std::size_t number) {
  auto f = split_fields(line);
  if (f.size() != count) {
    throw ParseError("line " + std::to_string(number) + ": expected " + std::to_string(count) + " fields");
  }
  return f;
}

nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string format_params_csv(const ModelParams& model) {
  std::string out;
  auto scalar = [&out](std::string_view key, const std::string& value) {
    out.append(key).append(",").append(value).append("\n");
  };
  scalar("model", std::string(model_name(kind_of(model))));
  scalar("beta", num(beta_of(model)));
  const auto& c = correlation_of(model);
  scalar("eta1", num(c.eta1));
  scalar("lambda1", num(c.lambda1));
  scalar("eta2", num(c.eta2));
  scalar("lambda2", num(c.lambda2));
  scalar("lambda3", num(c.lambda3));

  if (const auto* m = std::get_if<HaganParams>(&model)) {
    out += "\nforward,phi,nu,alpha\n";
    for (std::size_t i = 0; i < m->phi.size(); ++i) {
      out += forward_label(i) + "," + num(m->phi[i]) + "," + num(m->nu[i]) + "," + num(m->alpha[i]) + "\n";
    }
  } else if (const auto* m = std::get_if<MMParams>(&model)) {
    scalar("nu", num(m->nu));
    out += "\nforward,phi,alpha\n";
    for (std::size_t i = 0; i < m->phi.size(); ++i) {
      out += forward_label(i) + "," + num(m->phi[i]) + "," + num(m->alpha[i]) + "\n";
    }
  } else {
    const auto& r = std::get<RebonatoParams>(model);
    scalar("g_a", num(r.g.a));
    scalar("g_b", num(r.g.b));
    scalar("g_c", num(r.g.c));
    scalar("g_d", num(r.g.d));
    scalar("h_alpha", num(r.h.a));
    scalar("h_beta", num(r.h.b));
    scalar("h_gamma", num(r.h.c));
    scalar("h_delta", num(r.h.d));
    out += "\nforward,phi,kappa\n";
    for (std::size_t i = 0; i < r.phi.size(); ++i) {
      out += forward_label(i) + "," + num(r.phi[i]) + "," + num(r.kappa[i]) + "\n";
    }
  }
  return out;
}

ModelParams parse_params_csv(std::string_view text) {
  const auto lines = content_lines(text);
  std::map<std::string, double, std::less<>> scalars;
  std::string model_text;
  std::size_t k = 0;
  for (; k < lines.size(); ++k) {
    const auto [number, line] = lines[k];
    if (line.starts_with("forward,")) break;
    const auto f = fields_of(line, 2, number);
    if (f[0] == "model") {
      model_text = std::string(f[1]);
    } else {
      scalars[std::string(f[0])] = parse_number(f[1], number);
    }
  }
  if (model_text.empty()) throw ParseError("params file has no model row");
  if (k == lines.size()) throw ParseError("params file has no per-forward table");
  auto get = [&scalars](std::string_view key) {
    const auto it = scalars.find(key);
    if (it == scalars.end()) throw ParseError("params file is missing '" + std::string(key) + "'");
    return it->second;
  };

  const ModelKind kind = parse_model_kind(model_text);
  const std::string_view header = lines[k].second;
  const std::size_t columns = kind == ModelKind::hagan ? 4 : 3;
  std::vector<std::vector<double>> cols(columns - 1);
  for (std::size_t r = k + 1; r < lines.size(); ++r) {
    const auto [number, line] = lines[r];
    const auto f = fields_of(line, columns, number);
    if (parse_forward_label(f[0], number) != r - k - 1) throw ParseError("line " + std::to_string(number) + ": forwards out of order");
    for (std::size_t c = 1; c < columns; ++c) cols[c - 1].push_back(parse_number(f[c], number));
  }

  CorrelationParams corr{get("eta1"), get("lambda1"), get("eta2"), get("lambda2"), get("lambda3")};
  const double beta = get("beta");
  ModelParams model;
  switch (kind) {
    case ModelKind::hagan:
      if (header != "forward,phi,nu,alpha") throw ParseError("unexpected Hagan table header");
      model = HaganParams{cols[0], cols[1], cols[2], beta, corr};
      break;
    case ModelKind::mm:
      if (header != "forward,phi,alpha") throw ParseError("unexpected M&M table header");
      model = MMParams{cols[0], cols[1], get("nu"), beta, corr};
      break;
    case ModelKind::rebonato:
      if (header != "forward,phi,kappa") throw ParseError("unexpected Rebonato table header");
      model = RebonatoParams{cols[0],
                             cols[1],
                             {get("g_a"), get("g_b"), get("g_c"), get("g_d")},
                             {get("h_alpha"), get("h_beta"), get("h_gamma"), get("h_delta")},
                             beta,
                             corr};
      break;
  }
  validate(model, forward_count(model));
  return model;
}

std::string format_caplet_fit_csv(const std::vector<CapletFitRow>& rows) {
  std::string out = "forward,moneyness_pct,market_vol_pct,model_vol_pct,rel_error\n";
  for (const auto& r : rows) {
    out += forward_label(r.forward) + "," + pct(r.moneyness) + "," + scaled(r.market_vol) + "," +
           scaled(r.model_vol) + "," + num(r.rel_error) + "\n";
  }
  return out;
}

std::vector<CapletFitRow> parse_caplet_fit_csv(std::string_view text) {
  const auto lines = content_lines(text);
  expect_header(lines, "forward,moneyness_pct,market_vol_pct,model_vol_pct,rel_error");
  std::vector<CapletFitRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [number, line] = lines[k];
    const auto f = fields_of(line, 5, number);
    CapletFitRow r;
    r.forward = parse_forward_label(f[0], number);
    r.moneyness = parse_number(f[1], number) / 100.0;
    r.market_vol = parse_number(f[2], number) / 100.0;
    r.model_vol = parse_number(f[3], number) / 100.0;
    r.rel_error = parse_number(f[4], number);
    rows.push_back(r);
  }
  return rows;
}

std::string format_swaption_fit_csv(const std::vector<SwaptionFitRow>& rows) {
  std::string out = "swaption,moneyness_pct,black_pct,mc_pct,mc_stderr_pct,abs_error_pct\n";
  for (const auto& r : rows) {
    out += r.label + "," + pct(r.moneyness) + "," + num(r.black) + "," + num(r.mc) + "," + num(r.mc_stderr) + "," +
           num(r.abs_error) + "\n";
  }
  return out;
}

std::vector<SwaptionFitRow> parse_swaption_fit_csv(std::string_view text) {
  const auto lines = content_lines(text);
  // The five-column layout has no standard-error column.
  const bool with_stderr = !lines.empty() && lines.front().second.find("mc_stderr_pct") != std::string_view::npos;
  expect_header(lines, with_stderr ? "swaption,moneyness_pct,black_pct,mc_pct,mc_stderr_pct,abs_error_pct"
                                   : "swaption,moneyness_pct,black_pct,mc_pct,abs_error_pct");
  const std::size_t count = with_stderr ? 6 : 5;
  std::vector<SwaptionFitRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [number, line] = lines[k];
    const auto f = fields_of(line, count, number);
    SwaptionFitRow r;
    r.label = std::string(f[0]);
    r.moneyness = parse_number(f[1], number) / 100.0;
    r.black = parse_number(f[2], number);
    r.mc = parse_number(f[3], number);
    r.mc_stderr = with_stderr ? parse_number(f[4], number) : std::numeric_limits<double>::quiet_NaN();
    r.abs_error = parse_number(f[count - 1], number);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_summary_json(const CalibrationReport& report, const CalibrationSpec& spec) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["model"] = std::string(model_name(report.model));
  j["beta"] = report.beta;
  j["seed"] = report.seed;
  j["forwards"] = forward_count(report.params);

  auto& s1 = j["stage1"];
  s1["cost"] = number_or_null(report.caplet_cost);
  s1["mre"] = number_or_null(report.mre);
  s1["cells"] = report.caplet_fit.size();
  s1["failed_cells"] = report.failed_cells;
  s1["evals"] = report.stage1_evals;
  s1["levels"] = report.stage1_levels;
  s1["sa"] = {{"t0", spec.stage1.t0},
              {"t_min", spec.stage1.t_min},
              {"rho", spec.stage1.rho},
              {"n", spec.stage1.n},
              {"workers", spec.stage1.workers}};

  auto& s2 = j["stage2"];
  s2["run"] = report.stage2_run;
  s2["cost"] = report.stage2_run ? number_or_null(report.swaption_cost) : nullptr;
  s2["mae_pct"] = report.stage2_run ? number_or_null(report.mae) : nullptr;
  s2["cells"] = report.swaption_fit.size();
  s2["evals"] = report.stage2_evals;
  s2["levels"] = report.stage2_levels;
  s2["psd_repairs"] = report.psd_repairs;
  s2["mc_aborts"] = report.mc_aborts;
  s2["mc"] = {{"n_paths", spec.mc.n_paths}, {"dt", spec.mc.dt}, {"antithetic", spec.mc.antithetic}};
  s2["sa"] = {{"t0", spec.stage2.t0},
              {"t_min", spec.stage2.t_min},
              {"rho", spec.stage2.rho},
              {"n", spec.stage2.n},
              {"workers", spec.stage2.workers}};

  const auto& c = correlation_of(report.params);
  j["correlation"] = {{"eta1", c.eta1}, {"lambda1", c.lambda1}, {"eta2", c.eta2}, {"lambda2", c.lambda2},
                      {"lambda3", c.lambda3}};
  return j.dump(2) + "\n";
}

std::string format_timings_json(const CalibrationReport& report, std::size_t threads) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["threads"] = threads;
  j["stage1_seconds"] = report.stage1_seconds;
  j["stage2_seconds"] = report.stage2_seconds;
  return j.dump(2) + "\n";
}

std::string format_bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "workers,paths,seconds,paths_per_second,speedup\n";
  for (const auto& r : rows) {
    out += std::to_string(r.workers) + "," + std::to_string(r.paths) + "," + num(r.seconds) + "," +
           num(r.paths_per_second) + "," + num(r.speedup) + "\n";
  }
  return out;
}

std::vector<BenchRow> parse_bench_csv(std::string_view text) {
  const auto lines = content_lines(text);
  expect_header(lines, "workers,paths,seconds,paths_per_second,speedup");
  std::vector<BenchRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [number, line] = lines[k];
    const auto f = fields_of(line, 5, number);
    BenchRow r;
    r.workers = static_cast<std::size_t>(parse_number(f[0], number));
    r.paths = static_cast<std::size_t>(parse_number(f[1], number));
    r.seconds = parse_number(f[2], number);
    r.paths_per_second = parse_number(f[3], number);
    r.speedup = parse_number(f[4], number);
    rows.push_back(r);
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace smilecal
