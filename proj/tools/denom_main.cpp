#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "denom/error.hpp"
#include "denom/features.hpp"
#include "denom/lexicon.hpp"
#include "denom/models.hpp"
#include "denom/ngram.hpp"
#include "denom/report.hpp"
#include "denom/synth.hpp"
#include "denom/text.hpp"

namespace {

namespace fs = std::filesystem;
using namespace denom;

struct IngestArgs {
  std::vector<std::string> ngrams;
  std::string totals;
  std::string lexicon;
  std::string out;
};

void run_ingest(const IngestArgs& args) {
  const auto entries = load_lexicon(args.lexicon);
  const auto vocabulary = lexicon_vocabulary(entries);
  std::vector<fs::path> paths(args.ngrams.begin(), args.ngrams.end());
  const auto result = ingest_files(paths, vocabulary);
  const auto totals = load_totals(args.totals);
  save_index(result.index, totals, args.out);
  std::cout << "skipped " << result.stats.skipped << " malformed line(s) out of "
            << result.stats.lines << "\n";
}

struct FeaturesArgs {
  std::string index;
  std::string lexicon;
  int from_year = 0;
  int to_year = 0;
  int window = 1;
  std::string out;
};

void run_features(const FeaturesArgs& args) {
  if (args.from_year >= args.to_year) throw Error("--from must be earlier than --to");
  if (args.window < 1) throw Error("--window must be >= 1");
  const auto loaded = load_index(args.index);
  const auto entries = load_lexicon(args.lexicon);
  const auto outcomes = derive_outcomes(entries, args.from_year, args.to_year);
  const auto table = build_feature_table(loaded.index, loaded.totals, outcomes, entries,
                                         args.from_year, args.to_year, args.window);
  write_feature_csv(table.rows, fs::path(args.out));
  if (table.dropped_rows > 0) {
    std::cout << "dropped " << table.dropped_rows
              << " row(s) with undefined relative frequency\n";
  }
}

struct AnalyzeArgs {
  std::vector<std::string> features;
  std::string windows;
  int from_year = 0;
  int to_year = 0;
  bool have_from = false;
  bool have_to = false;
  bool pooled = false;
  std::string out;
};

void run_analyze(const AnalyzeArgs& args) {
  std::vector<int> windows;
  if (!args.windows.empty()) {
    for (const auto field : split(args.windows, ',')) {
      const auto value = parse_int(field);
      if (!value || *value < 1) throw Error("--windows must be a comma list of positive integers");
      windows.push_back(static_cast<int>(*value));
    }
  } else if (args.features.size() == 3) {
    windows = {1, 2, 3};
  } else {
    for (std::size_t i = 0; i < args.features.size(); ++i) windows.push_back(static_cast<int>(i + 1));
  }
  if (windows.size() != args.features.size()) {
    throw Error("--windows must list one window per --features file");
  }

  std::vector<WindowInput> inputs;
  for (std::size_t i = 0; i < args.features.size(); ++i) {
    inputs.push_back(WindowInput{windows[i], read_feature_csv(args.features[i])});
  }

  AnalysisOptions options;
  if (args.have_from) options.from_year = args.from_year;
  if (args.have_to) options.to_year = args.to_year;
  options.pooled_ttest = args.pooled;
  const auto report = build_report(inputs, options);
  write_report(report, args.out);
}

struct FitArgs {
  std::string features;
  std::string target;
  std::string exclude;
  bool ablation = false;
  std::string out;
};

fs::path ablation_path(const fs::path& base, std::size_t index) {
  fs::path path = base;
  const std::string extension = path.extension().string();
  path.replace_extension();
  path += ".mask" + std::to_string(index) + extension;
  return path;
}

void run_fit(const FitArgs& args) {
  const auto rows = read_feature_csv(args.features);
  Target target;
  if (args.target == "d") {
    target = Target::D;
  } else if (args.target == "change") {
    target = Target::Change;
  } else {
    throw Error("--target must be `d` or `change`");
  }

  if (args.ablation) {
    const auto fits = ablation_run(rows, target);
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const auto path = ablation_path(args.out, i);
      save_model(fits[i], path);
      std::cout << path.string() << '\n';
    }
    return;
  }

  FeatureMask mask = FeatureMask::all();
  if (!args.exclude.empty()) {
    for (const auto name : split(args.exclude, ',')) {
      const auto idx = feature_index(name);
      if (!idx) throw Error("--exclude: unknown feature `" + std::string(name) + "`");
      mask.included[*idx] = false;
    }
    if (mask.count() == 0) throw Error("--exclude removed every feature");
  }
  const ModelSpec spec{target, mask};
  const FitResult fit = target == Target::D ? fit_linear(rows, spec) : fit_logistic(rows, spec);
  save_model(fit, args.out);
  if (!fit.diagnostics.converged) {
    std::cout << "warning: fit did not converge within "
              << fit.diagnostics.iterations << " iterations (diagnostics embedded)\n";
  }
}

struct PredictArgs {
  std::string model;
  std::string features;
  std::string out;
};

void run_predict(const PredictArgs& args) {
  const auto fit = load_model(args.model);
  const auto rows = read_feature_csv(args.features);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw FormatError("cannot write predictions: " + args.out);
  out << "word,prediction\n";
  for (const auto& row : rows) {
    out << row.word << ',' << format_g17(predict(fit, row)) << '\n';
  }
  if (!out.flush()) throw FormatError("failed writing predictions: " + args.out);
}

struct SynthArgs {
  std::uint64_t seed = 1;
  int n_words = 0;
  std::string spec_path;
  std::string out_dir;
};

void run_synth(const SynthArgs& args) {
  PlantSpec spec = args.spec_path.empty() ? default_plant_spec() : load_plant_spec(args.spec_path);
  spec.seed = args.seed;
  spec.n_words = args.n_words;
  const auto result = generate(spec, args.out_dir);
  std::cout << result.lexicon_path.string() << '\n'
            << result.ngrams_path.string() << '\n'
            << result.totals_path.string() << '\n'
            << result.truth_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"denominalization study pipeline: ingest diachronic 1-gram frequencies, "
               "derive noun-to-verb conversion outcomes, extract word features, and run "
               "the correlation / t-test / regression battery"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "build a word-by-year index from n-gram files");
  ingest->add_option("--ngrams", ingest_args.ngrams, "n-gram file(s)")->required();
  ingest->add_option("--totals", ingest_args.totals, "year totals file")->required();
  ingest->add_option("--lexicon", ingest_args.lexicon, "lexicon CSV (vocabulary filter)")->required();
  ingest->add_option("--out", ingest_args.out, "output index file")->required();
  ingest->callback([&] { run_ingest(ingest_args); });

  FeaturesArgs features_args;
  auto* features = app.add_subcommand("features", "compute the per-noun feature table");
  features->add_option("--index", features_args.index, "serialized index file")->required();
  features->add_option("--lexicon", features_args.lexicon, "lexicon CSV")->required();
  features->add_option("--from", features_args.from_year, "interval start year")->required();
  features->add_option("--to", features_args.to_year, "interval end year")->required();
  features->add_option("--window", features_args.window, "recent-frequency window (years)")->required();
  features->add_option("--out", features_args.out, "output feature CSV")->required();
  features->callback([&] { run_features(features_args); });

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "correlations, group stats, t-tests and model blocks");
  analyze->add_option("--features", analyze_args.features, "feature CSV(s), one per window")->required();
  analyze->add_option("--windows", analyze_args.windows, "comma list of window labels");
  auto* from_opt = analyze->add_option("--from", analyze_args.from_year, "interval start label");
  auto* to_opt = analyze->add_option("--to", analyze_args.to_year, "interval end label");
  analyze->add_flag("--pooled", analyze_args.pooled, "Student's pooled t-test instead of Welch");
  analyze->add_option("--out", analyze_args.out, "output report JSON (flat CSVs written next to it)")
      ->required();
  analyze->callback([&] {
    analyze_args.have_from = from_opt->count() > 0;
    analyze_args.have_to = to_opt->count() > 0;
    run_analyze(analyze_args);
  });

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "train the d / change regression models");
  fit->add_option("--features", fit_args.features, "feature CSV")->required();
  fit->add_option("--target", fit_args.target, "d or change")->required();
  auto* exclude_opt = fit->add_option("--exclude", fit_args.exclude, "comma list of features to drop");
  fit->add_flag("--ablation", fit_args.ablation, "run the five-mask ablation sequence")
      ->excludes(exclude_opt);
  fit->add_option("--out", fit_args.out, "output model file (stem for --ablation)")->required();
  fit->callback([&] { run_fit(fit_args); });

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "apply a trained model to a feature table");
  predict->add_option("--model", predict_args.model, "model file")->required();
  predict->add_option("--features", predict_args.features, "feature CSV")->required();
  predict->add_option("--out", predict_args.out, "output predictions CSV")->required();
  predict->callback([&] { run_predict(predict_args); });

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted effects");
  synth->add_option("--seed", synth_args.seed, "generator seed")->required();
  synth->add_option("--n", synth_args.n_words, "number of words")->required();
  synth->add_option("--spec", synth_args.spec_path, "plant spec JSON (defaults to the flagship plant)");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->callback([&] { run_synth(synth_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
