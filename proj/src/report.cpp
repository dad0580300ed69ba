#include "denom/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "denom/error.hpp"
#include "denom/models.hpp"
#include "denom/stats.hpp"
#include "denom/text.hpp"

namespace denom {
namespace {

using nlohmann::json;

struct SplitColumns {
  std::vector<double> changed;
  std::vector<double> unchanged;
  std::vector<double> lags;  // aligned with changed
};

SplitColumns split_by_change(std::span<const FeatureVector> rows, std::size_t feature) {
  SplitColumns split;
  for (const auto& row : rows) {
    const double value = feature_value(row, feature);
    if (row.change) {
      split.changed.push_back(value);
      split.lags.push_back(static_cast<double>(*row.lag));
    } else {
      split.unchanged.push_back(value);
    }
  }
  return split;
}

json group_stats_json(std::span<const double> values) {
  json j;
  j["n"] = values.size();
  if (values.empty()) return j;
  if (values.size() == 1) {
    j["mean"] = values.front();
    return j;
  }
  const MeanStd ms = mean_std(values);
  j["mean"] = ms.mean;
  j["std"] = ms.std;
  j["stderr"] = ms.std / std::sqrt(static_cast<double>(values.size()));
  return j;
}

json window_block(const WindowInput& input, bool pooled) {
  json block;
  block["window"] = input.window;

  json correlations = json::array();
  json group_stats = json::array();
  json t_tests = json::array();
  json scatter = json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const std::string name(kFeatureNames[f]);
    const SplitColumns split = split_by_change(input.rows, f);

    json corr;
    corr["feature"] = name;
    corr["n"] = split.changed.size();
    try {
      const CorrelationResult result = pearson(split.changed, split.lags);
      corr["r"] = result.r;
      corr["p"] = result.p_two_tailed;
      corr["status"] = "ok";
    } catch (const DegenerateDataError& e) {
      corr["status"] = "degenerate";
      corr["reason"] = e.what();
    }
    correlations.push_back(std::move(corr));

    json stats;
    stats["feature"] = name;
    stats["changed"] = group_stats_json(split.changed);
    stats["unchanged"] = group_stats_json(split.unchanged);
    group_stats.push_back(std::move(stats));

    json ttest;
    ttest["feature"] = name;
    ttest["variant"] = pooled ? "pooled" : "welch";
    try {
      const TTestResult result =
          pooled ? pooled_t(split.changed, split.unchanged) : welch_t(split.changed, split.unchanged);
      ttest["t"] = result.t;
      ttest["df"] = result.df;
      ttest["p"] = result.p_two_tailed;
      ttest["status"] = "ok";
    } catch (const DegenerateDataError& e) {
      ttest["status"] = "degenerate";
      ttest["reason"] = e.what();
    }
    t_tests.push_back(std::move(ttest));

    json cloud;
    cloud["feature"] = name;
    json points = json::array();
    for (std::size_t i = 0; i < split.changed.size(); ++i) {
      points.push_back({split.changed[i], split.lags[i]});
    }
    cloud["points"] = std::move(points);
    scatter.push_back(std::move(cloud));
  }
  block["correlations_vs_d"] = std::move(correlations);
  block["group_stats"] = std::move(group_stats);
  block["t_tests"] = std::move(t_tests);
  block["scatter_vs_d"] = std::move(scatter);
  return block;
}

json fit_to_json(const FitResult& fit) {
  json j;
  j["mask"] = fit.mask.names();
  j["status"] = "ok";
  j["intercept"] = fit.intercept;
  json weights, scaling;
  const auto names = fit.mask.names();
  for (std::size_t slot = 0; slot < names.size(); ++slot) {
    weights[names[slot]] = fit.weights[slot];
    scaling[names[slot]] = {{"mean", fit.scaling[slot].mean}, {"std", fit.scaling[slot].std}};
  }
  j["weights"] = std::move(weights);
  j["scaling"] = std::move(scaling);
  j["diagnostics"] = {{"iterations", fit.diagnostics.iterations},
                      {"converged", fit.diagnostics.converged},
                      {"final_objective", fit.diagnostics.final_objective}};
  return j;
}

json model_blocks(std::span<const FeatureVector> rows, Target target) {
  json out = json::array();
  for (const auto& mask : ablation_masks(target)) {
    const ModelSpec spec{target, mask};
    try {
      const FitResult fit =
          target == Target::D ? fit_linear(rows, spec) : fit_logistic(rows, spec);
      out.push_back(fit_to_json(fit));
    } catch (const Error& e) {
      json j;
      j["mask"] = mask.names();
      j["status"] = "skipped";
      j["reason"] = e.what();
      out.push_back(std::move(j));
    }
  }
  return out;
}

void check_windows_consistent(std::span<const WindowInput> windows) {
  if (windows.empty()) throw Error("analysis needs at least one window table");
  const auto& first = windows.front();
  for (const auto& input : windows) {
    if (input.rows.size() != first.rows.size()) {
      throw FormatError("window tables disagree on row count");
    }
    for (std::size_t i = 0; i < input.rows.size(); ++i) {
      const auto& a = first.rows[i];
      const auto& b = input.rows[i];
      if (a.word != b.word || a.change != b.change || a.lag != b.lag) {
        throw FormatError("window tables disagree on rows (word `" + b.word + "`)");
      }
    }
  }
}

}  // namespace

json build_report(std::span<const WindowInput> windows, const AnalysisOptions& options) {
  check_windows_consistent(windows);
  const auto& rows = windows.front().rows;

  std::size_t n_changed = 0;
  for (const auto& row : rows) n_changed += row.change ? 1 : 0;
  if (n_changed < 3) {
    throw DegenerateDataError("fewer than 3 changed rows; correlations undefined");
  }

  int inferred_from = std::numeric_limits<int>::max();
  int inferred_to = std::numeric_limits<int>::min();
  for (const auto& row : rows) {
    inferred_to = std::max(inferred_to, row.ref_year);
    if (row.lag) inferred_from = std::min(inferred_from, row.ref_year - *row.lag);
  }

  json report;
  report["format_version"] = 1;
  report["interval"] = {
      {"from_year", options.from_year.value_or(inferred_from)},
      {"to_year", options.to_year.value_or(inferred_to)},
      {"source", options.from_year && options.to_year ? "flags" : "inferred"},
  };
  report["cohort"] = {{"n_rows", rows.size()}, {"n_changed", n_changed}};

  json window_blocks = json::array();
  for (const auto& input : windows) window_blocks.push_back(window_block(input, options.pooled_ttest));
  report["windows"] = std::move(window_blocks);

  report["models"] = {
      {"window", windows.front().window},
      {"linear_d", model_blocks(rows, Target::D)},
      {"logistic_change", model_blocks(rows, Target::Change)},
  };
  return report;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write report csv: " + path.string());
  return out;
}

std::string num(const json& j, const char* key) {
  if (!j.contains(key)) return "";
  return format_g17(j[key].get<double>());
}

void write_model_csv(const json& blocks, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "mask_index,status,intercept,length,accum_freq,recent_freq,sense_count,iterations,"
         "converged,final_objective,reason\n";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& block = blocks[i];
    const std::string status = block["status"].get<std::string>();
    out << i << ',' << status << ',';
    if (status == "ok") {
      out << format_g17(block["intercept"].get<double>());
      for (const auto name : kFeatureNames) {
        out << ',';
        if (block["weights"].contains(std::string(name))) {
          out << format_g17(block["weights"][std::string(name)].get<double>());
        }
      }
      const auto& diag = block["diagnostics"];
      out << ',' << diag["iterations"].get<int>() << ',' << (diag["converged"].get<bool>() ? 1 : 0)
          << ',' << format_g17(diag["final_objective"].get<double>()) << ',';
    } else {
      out << ",,,,,,,," << block["reason"].get<std::string>();
    }
    out << '\n';
  }
}

}  // namespace

void write_report(const json& report, const std::filesystem::path& json_path) {
  {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw FormatError("cannot write report: " + json_path.string());
    out << report.dump(2) << '\n';
    if (!out.flush()) throw FormatError("failed writing report: " + json_path.string());
  }

  std::filesystem::path stem = json_path;
  stem.replace_extension();
  const auto sibling = [&](const char* suffix) {
    std::filesystem::path p = stem;
    p += suffix;
    return p;
  };

  {
    auto out = open_csv(sibling(".cohort.csv"));
    out << "from_year,to_year,n_rows,n_changed\n";
    out << report["interval"]["from_year"].get<int>() << ','
        << report["interval"]["to_year"].get<int>() << ','
        << report["cohort"]["n_rows"].get<std::size_t>() << ','
        << report["cohort"]["n_changed"].get<std::size_t>() << '\n';
  }
  {
    auto corr = open_csv(sibling(".correlations.csv"));
    corr << "window,feature,n,r,p,status\n";
    auto stats = open_csv(sibling(".group_stats.csv"));
    stats << "window,feature,group,n,mean,std,stderr\n";
    auto tests = open_csv(sibling(".t_tests.csv"));
    tests << "window,feature,variant,t,df,p,status\n";
    auto scatter = open_csv(sibling(".scatter_d.csv"));
    scatter << "window,feature,x,d\n";
    for (const auto& block : report["windows"]) {
      const int window = block["window"].get<int>();
      for (const auto& entry : block["correlations_vs_d"]) {
        corr << window << ',' << entry["feature"].get<std::string>() << ','
             << entry["n"].get<std::size_t>() << ',' << num(entry, "r") << ',' << num(entry, "p")
             << ',' << entry["status"].get<std::string>() << '\n';
      }
      for (const auto& entry : block["group_stats"]) {
        for (const char* group : {"changed", "unchanged"}) {
          const auto& g = entry[group];
          stats << window << ',' << entry["feature"].get<std::string>() << ',' << group << ','
                << g["n"].get<std::size_t>() << ',' << num(g, "mean") << ',' << num(g, "std") << ','
                << num(g, "stderr") << '\n';
        }
      }
      for (const auto& entry : block["t_tests"]) {
        tests << window << ',' << entry["feature"].get<std::string>() << ','
              << entry["variant"].get<std::string>() << ',' << num(entry, "t") << ','
              << num(entry, "df") << ',' << num(entry, "p") << ','
              << entry["status"].get<std::string>() << '\n';
      }
      for (const auto& entry : block["scatter_vs_d"]) {
        for (const auto& point : entry["points"]) {
          scatter << window << ',' << entry["feature"].get<std::string>() << ','
                  << format_g17(point[0].get<double>()) << ','
                  << format_g17(point[1].get<double>()) << '\n';
        }
      }
    }
  }
  write_model_csv(report["models"]["linear_d"], sibling(".linear_d.csv"));
  write_model_csv(report["models"]["logistic_change"], sibling(".logistic_change.csv"));
}

}  // namespace denom
