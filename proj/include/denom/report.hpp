#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "denom/features.hpp"

namespace denom {

struct WindowInput {
  int window = 1;
  std::vector<FeatureVector> rows;
};

struct AnalysisOptions {
  std::optional<int> from_year;  // interval labels; inferred from data if absent
  std::optional<int> to_year;
  bool pooled_ttest = false;     // Student's pooled variant instead of Welch
};

// Builds the full analysis report: cohort block, per-window correlation /
// group-stats / t-test / scatter blocks, and the ablation model blocks
// (fitted on the first window's table). Throws DegenerateDataError when a
// window has fewer than 3 changed rows.
nlohmann::json build_report(std::span<const WindowInput> windows, const AnalysisOptions& options);

// Writes the JSON report plus flat per-block CSVs next to it
// (<stem>.cohort.csv, <stem>.correlations.csv, <stem>.group_stats.csv,
// <stem>.t_tests.csv, <stem>.linear_d.csv, <stem>.logistic_change.csv,
// <stem>.scatter_d.csv).
void write_report(const nlohmann::json& report, const std::filesystem::path& json_path);

}  // namespace denom
