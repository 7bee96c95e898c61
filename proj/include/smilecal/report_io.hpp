#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "smilecal/calibration.hpp"
#include "smilecal/model.hpp"

namespace smilecal {

inline constexpr int kSummarySchemaVersion = 1;

/// Scalar `key,value` rows, a blank line, then one row per forward.
std::string format_params_csv(const ModelParams& model);
ModelParams parse_params_csv(std::string_view text);

std::string format_caplet_fit_csv(const std::vector<CapletFitRow>& rows);
std::vector<CapletFitRow> parse_caplet_fit_csv(std::string_view text);

std::string format_swaption_fit_csv(const std::vector<SwaptionFitRow>& rows);
std::vector<SwaptionFitRow> parse_swaption_fit_csv(std::string_view text);

/// Deterministic for a fixed seed: contains no timings.
std::string format_summary_json(const CalibrationReport& report, const CalibrationSpec& spec);
std::string format_timings_json(const CalibrationReport& report, std::size_t threads);

struct BenchRow {
  std::size_t workers = 0;
  std::size_t paths = 0;
  double seconds = 0.0;
  double paths_per_second = 0.0;
  double speedup = 0.0;
};

std::string format_bench_csv(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_bench_csv(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace smilecal
