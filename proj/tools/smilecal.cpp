#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "smilecal/analytic.hpp"
#include "smilecal/calibration.hpp"
#include "smilecal/error.hpp"
#include "smilecal/market_data.hpp"
#include "smilecal/montecarlo.hpp"
#include "smilecal/parallel.hpp"
#include "smilecal/report_io.hpp"

namespace fs = std::filesystem;
using namespace smilecal;

namespace {

struct DataPaths {
  std::string curve = "data/curve.csv";
  std::string caplets = "data/caplet_smiles.csv";
  std::string swaptions = "data/swaption_smiles.csv";
};

struct Market {
  DiscountCurve curve;
  SmileSurface caplets;
  TenorStructure tenor;
};

Market load_market(const DataPaths& paths) {
  DiscountCurve curve = load_discount_curve(paths.curve);
  for (const auto& w : curve.warnings()) std::cerr << "warning: " << w << "\n";
  SmileSurface caplets = load_smile_surface(paths.caplets, SmileKind::caplet);
  TenorStructure tenor = tenor_from_caplets(curve, caplets);
  return {std::move(curve), std::move(caplets), std::move(tenor)};
}

void add_data_options(CLI::App& cmd, DataPaths& paths, bool swaptions) {
  cmd.add_option("--curve", paths.curve, "Discount curve CSV")->capture_default_str();
  cmd.add_option("--caplets", paths.caplets, "Caplet smile CSV")->capture_default_str();
  if (swaptions) cmd.add_option("--swaptions", paths.swaptions, "Swaption smile CSV")->capture_default_str();
}

std::string machine_spec(std::size_t threads) {
  std::string cpu = "unknown";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.starts_with("model name")) {
      cpu = line.substr(line.find(':') + 2);
      break;
    }
  }
  return "# cpu: " + cpu + "\n# hardware_threads: " + std::to_string(std::thread::hardware_concurrency()) +
         "\n# pool_limit: " + std::to_string(threads) + "\n";
}

// Hagan model with ATM-matched levels; the fixed workload for timing runs.
HaganParams bench_model(const Market& market) {
  HaganParams h;
  const auto atm = market.caplets.column(0.0);
  for (std::size_t i = 0; i < market.tenor.size(); ++i) {
    const double vol = atm ? market.caplets.rows[i].vols[*atm] : 0.5;
    h.phi.push_back(-0.3);
    h.nu.push_back(0.5);
    h.alpha.push_back(vol * std::sqrt(market.tenor.forwards[i]));
  }
  h.beta = 0.5;
  h.corr = {0.814904, 3.378797, 0.975928, 3.777324, 0.013940};
  return h;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SABR/LIBOR market model calibration and pricing"};
  app.require_subcommand(1);

  DataPaths paths;
  std::string model = "hagan";
  double beta = 0.5;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::size_t threads = 0;
  std::size_t n_paths = 10000;
  double dt = 1e-2;
  bool antithetic = false;

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Two-stage calibration to caplet and swaption smiles");
  add_data_options(*cal, paths, true);
  SAConfig sa1;
  SAConfig sa2{1.0, 1e-3, 0.7, 4, 4, 42, 1};
  std::size_t swaption_rows = 14;
  double max_moneyness = 40.0;
  bool skip_swaptions = false;
  bool joint = false;
  cal->add_option("--model", model, "hagan, mm or rebonato")->capture_default_str();
  cal->add_option("--beta", beta, "CEV exponent")->capture_default_str();
  cal->add_option("--seed", seed, "Seed for annealing and Monte Carlo")->capture_default_str();
  cal->add_option("--out", out_dir, "Output directory")->capture_default_str();
  cal->add_option("--t0", sa1.t0, "Stage-1 initial temperature")->capture_default_str();
  cal->add_option("--t-min", sa1.t_min, "Stage-1 final temperature")->capture_default_str();
  cal->add_option("--rho", sa1.rho, "Stage-1 cooling factor")->capture_default_str();
  cal->add_option("--chain", sa1.n, "Stage-1 chain length per worker")->capture_default_str();
  cal->add_option("--workers", sa1.workers, "Stage-1 logical chains")->capture_default_str();
  cal->add_option("--stage2-t0", sa2.t0, "Stage-2 initial temperature")->capture_default_str();
  cal->add_option("--stage2-t-min", sa2.t_min, "Stage-2 final temperature")->capture_default_str();
  cal->add_option("--stage2-rho", sa2.rho, "Stage-2 cooling factor")->capture_default_str();
  cal->add_option("--stage2-chain", sa2.n, "Stage-2 chain length per worker")->capture_default_str();
  cal->add_option("--stage2-workers", sa2.workers, "Stage-2 logical chains")->capture_default_str();
  cal->add_option("--paths", n_paths, "Monte Carlo paths for stage 2")->capture_default_str();
  cal->add_option("--dt", dt, "Monte Carlo time step (years)")->capture_default_str();
  cal->add_flag("--antithetic", antithetic, "Antithetic Monte Carlo");
  cal->add_option("--swaption-rows", swaption_rows, "Leading swaption rows used in stage 2")->capture_default_str();
  cal->add_option("--max-moneyness", max_moneyness, "Largest |moneyness| in percent for stage 2")->capture_default_str();
  cal->add_flag("--skip-swaptions", skip_swaptions, "Run stage 1 only");
  cal->add_flag("--joint", joint, "Calibrate Hagan smiles jointly instead of one by one");
  cal->add_option("--threads", threads, "Worker threads (default: SMILECAL_THREADS or core count)");

  // price
  auto* price = app.add_subcommand("price", "Monte Carlo prices from a params file");
  add_data_options(*price, paths, false);
  std::string params_path = "out/params.csv";
  std::vector<std::size_t> caplet_ids;
  std::vector<std::string> swaption_ids;
  std::vector<double> moneyness{0.0};
  price->add_option("--params", params_path, "params.csv from calibrate")->capture_default_str();
  price->add_option("--caplet", caplet_ids, "Forward number (1-based), repeatable")->delimiter(',');
  price->add_option("--swaption", swaption_ids, "Swaption as EXPIRYxLENGTH in years, e.g. 0.5x1, repeatable")->delimiter(',');
  price->add_option("--moneyness", moneyness, "Log-moneyness in percent, repeatable")->delimiter(',')->capture_default_str();
  price->add_option("--paths", n_paths, "Monte Carlo paths")->capture_default_str();
  price->add_option("--dt", dt, "Time step (years)")->capture_default_str();
  price->add_option("--seed", seed, "Seed")->capture_default_str();
  price->add_flag("--antithetic", antithetic, "Antithetic Monte Carlo");
  price->add_option("--threads", threads, "Worker threads");

  // report
  auto* report = app.add_subcommand("report", "Fit tables for a params file");
  add_data_options(*report, paths, true);
  report->add_option("--params", params_path, "params.csv")->capture_default_str();
  report->add_option("--out", out_dir, "Output directory")->capture_default_str();
  report->add_option("--paths", n_paths, "Monte Carlo paths for the swaption table")->capture_default_str();
  report->add_option("--dt", dt, "Time step (years)")->capture_default_str();
  report->add_option("--seed", seed, "Seed")->capture_default_str();
  report->add_option("--swaption-rows", swaption_rows, "Leading swaption rows")->capture_default_str();
  report->add_option("--max-moneyness", max_moneyness, "Largest |moneyness| in percent")->capture_default_str();
  report->add_flag("--skip-swaptions", skip_swaptions, "Caplet table only");
  report->add_option("--threads", threads, "Worker threads");

  // bench
  auto* bench = app.add_subcommand("bench", "Thread scaling of Monte Carlo caplet pricing");
  add_data_options(*bench, paths, false);
  std::vector<std::size_t> worker_list{1, 2, 4, 8};
  std::size_t bench_paths = 20000;
  std::string bench_out;
  bench->add_option("--workers", worker_list, "Thread counts to time")->delimiter(',')->capture_default_str();
  bench->add_option("--paths", bench_paths, "Paths per run")->capture_default_str();
  bench->add_option("--dt", dt, "Time step (years)")->capture_default_str();
  bench->add_option("--seed", seed, "Seed")->capture_default_str();
  bench->add_option("--out", bench_out, "Also write the CSV to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads == 0) threads = default_thread_count();

    if (*cal) {
      Market market = load_market(paths);
      CalibrationSpec spec;
      spec.model = parse_model_kind(model);
      spec.tenor = market.tenor;
      spec.caplets = market.caplets;
      spec.run_stage2 = !skip_swaptions;
      if (spec.run_stage2) spec.swaptions = load_smile_surface(paths.swaptions, SmileKind::swaption);
      spec.beta = beta;
      sa1.seed = seed;
      sa1.threads = threads;
      sa2.seed = seed;
      spec.stage1 = sa1;
      spec.stage2 = sa2;
      spec.mc = McConfig{n_paths, dt, seed, antithetic, threads};
      spec.swaption_rows = swaption_rows;
      spec.max_abs_moneyness = max_moneyness / 100.0;
      spec.separable = !joint;

      const CalibrationReport rep = calibrate(spec);
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      write_text_file(dir / "params.csv", format_params_csv(rep.params));
      write_text_file(dir / "caplet_fit.csv", format_caplet_fit_csv(rep.caplet_fit));
      if (rep.stage2_run) write_text_file(dir / "swaption_fit.csv", format_swaption_fit_csv(rep.swaption_fit));
      write_text_file(dir / "summary.json", format_summary_json(rep, spec));
      write_text_file(dir / "timings.json", format_timings_json(rep, threads));
      std::printf("model %s  MRE %.4e  stage-1 %.1f s", std::string(model_name(rep.model)).c_str(), rep.mre,
                  rep.stage1_seconds);
      if (rep.stage2_run) std::printf("  MAE %.4e %%  stage-2 %.1f s", rep.mae, rep.stage2_seconds);
      std::printf("\nwrote %s\n", dir.string().c_str());
      return 0;
    }

    if (*price) {
      Market market = load_market(paths);
      const ModelParams params = parse_params_csv(read_text_file(params_path));
      validate(params, market.tenor.size());
      const McConfig mc{n_paths, dt, seed, antithetic, threads};
      if (caplet_ids.empty() && swaption_ids.empty()) {
        for (std::size_t i = 1; i <= market.tenor.size(); ++i) caplet_ids.push_back(i);
      }
      std::vector<CapletSpec> caplets;
      std::vector<std::string> names;
      for (std::size_t id : caplet_ids) {
        if (id == 0 || id > market.tenor.size()) throw ConfigError("caplet number out of range: " + std::to_string(id));
        for (double m : moneyness) {
          caplets.push_back({id - 1, strike_from_moneyness(market.tenor.forwards[id - 1], m / 100.0)});
          char label[64];
          std::snprintf(label, sizeof label, "caplet F%zu m=%g%%", id, m);
          names.emplace_back(label);
        }
      }
      std::vector<SwaptionSpec> swaptions;
      for (const auto& label : swaption_ids) {
        const auto x = label.find('x');
        if (x == std::string::npos) throw ConfigError("swaption must look like 0.5x1: " + label);
        const double expiry_years = std::stod(label.substr(0, x));
        const double length_years = std::stod(label.substr(x + 1));
        std::size_t e = market.tenor.size();
        for (std::size_t k = 0; k < market.tenor.size(); ++k) {
          if (std::abs(market.tenor.reset_time(k) - expiry_years) < 1.0 / 24.0) e = k;
        }
        const auto periods = static_cast<std::size_t>(std::lround(length_years * 2.0));
        if (e == market.tenor.size() || periods == 0 || e + periods > market.tenor.size()) {
          throw ConfigError("swaption " + label + " does not fit the tenor grid");
        }
        const SwapQuote q = forward_swap(market.tenor, e, periods);
        for (double m : moneyness) {
          swaptions.push_back({e, periods, q.rate * std::exp(m / 100.0)});
        }
      }
      const auto start = std::chrono::steady_clock::now();
      const auto cap_prices = price_caplets_mc(params, market.tenor, caplets, mc);
      const auto swp_prices = price_swaptions_mc(params, market.tenor, swaptions, mc);
      const double wall = seconds_since(start);
      for (std::size_t k = 0; k < cap_prices.size(); ++k) {
        std::printf("%s  %.6e +- %.2e\n", names[k].c_str(), cap_prices[k].value, cap_prices[k].std_error);
      }
      std::size_t k = 0;
      for (const auto& label : swaption_ids) {
        for (double m : moneyness) {
          std::printf("swaption %s m=%g%%  %.6e +- %.2e\n", label.c_str(), m, swp_prices[k].value,
                      swp_prices[k].std_error);
          ++k;
        }
      }
      std::printf("paths %zu  dt %g  threads %zu  wall %.3f s\n", n_paths, dt, threads, wall);
      return 0;
    }

    if (*report) {
      Market market = load_market(paths);
      CalibrationSpec spec;
      spec.tenor = market.tenor;
      spec.caplets = market.caplets;
      CalibrationReport rep;
      rep.params = parse_params_csv(read_text_file(params_path));
      validate(rep.params, market.tenor.size());
      spec.model = rep.model = kind_of(rep.params);
      spec.beta = rep.beta = beta_of(rep.params);
      rep.seed = seed;
      rep.caplet_fit = caplet_fit(rep.params, spec);
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      write_text_file(dir / "caplet_fit.csv", format_caplet_fit_csv(rep.caplet_fit));
      if (!skip_swaptions) {
        spec.swaptions = load_smile_surface(paths.swaptions, SmileKind::swaption);
        spec.mc = McConfig{n_paths, dt, seed, false, threads};
        spec.swaption_rows = swaption_rows;
        spec.max_abs_moneyness = max_moneyness / 100.0;
        fill_swaption_fit(rep, spec);
        write_text_file(dir / "swaption_fit.csv", format_swaption_fit_csv(rep.swaption_fit));
      }
      std::printf("wrote %s\n", dir.string().c_str());
      return 0;
    }

    if (*bench) {
      Market market = load_market(paths);
      const ModelParams params = bench_model(market);
      std::vector<CapletSpec> caplets;
      for (std::size_t i = 0; i < market.tenor.size(); ++i) caplets.push_back({i, market.tenor.forwards[i]});
      std::vector<BenchRow> rows;
      double base = 0.0;
      for (std::size_t w : worker_list) {
        if (w == 0) throw ConfigError("worker counts must be positive");
        const McConfig mc{bench_paths, dt, seed, false, w};
        const auto start = std::chrono::steady_clock::now();
        price_caplets_mc(params, market.tenor, caplets, mc);
        BenchRow r;
        r.workers = w;
        r.paths = bench_paths;
        r.seconds = seconds_since(start);
        r.paths_per_second = static_cast<double>(bench_paths) / r.seconds;
        if (rows.empty()) base = r.paths_per_second;
        r.speedup = r.paths_per_second / base;
        rows.push_back(r);
      }
      const std::string text = machine_spec(default_thread_count()) + format_bench_csv(rows);
      std::cout << text;
      if (!bench_out.empty()) write_text_file(bench_out, text);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
