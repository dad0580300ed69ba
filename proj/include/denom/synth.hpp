#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "denom/features.hpp"
#include "denom/models.hpp"

namespace denom {

// Linear predictor in standardized units, canonical feature order.
struct PlantWeights {
  double intercept = 0.0;
  std::array<double, kFeatureCount> w{0.0, 0.0, 0.0, 0.0};
};

// Everything the generator needs. Feature distributions are chosen for
// identifiability, not linguistic realism: lengths uniform 3..12, per-word
// relative-frequency levels log-normal, extra noun senses Poisson-spread,
// emergence years uniform over a band of the interval.
struct PlantSpec {
  int n_words = 1000;
  int from_year = 1500;
  int to_year = 2000;
  PlantWeights change_model;
  PlantWeights d_model;
  double noise_std_d = 5.0;
  std::uint64_t seed = 1;
  int window = 1;

  double emergence_lo_frac = 0.0;   // emergence ~ uniform over
  double emergence_hi_frac = 0.6;   //   [from + lo*span, from + hi*span]
  double log10_level_mean = -5.0;   // log10 of the per-word frequency level
  double log10_level_std = 0.5;
  double year_jitter_std = 0.1;     // lognormal sigma on per-year level
  double extra_senses_mean = 2.0;   // Poisson mean of additional noun senses
};

PlantSpec load_plant_spec(const std::filesystem::path& path);
void save_plant_spec(const PlantSpec& spec, const std::filesystem::path& path);

// The flagship plant: sign pattern with negative length / negative recent
// frequency on change and positive recent frequency / sense count on d.
PlantSpec default_plant_spec();

struct GroundTruthRow {
  std::string word;
  double true_change_prob = 0.0;
  bool change = false;
  std::optional<int> lag;
};

// True models plus the standardization (over all words, features at the
// interval end) in which their weights are expressed.
struct PlantTruth {
  PlantWeights change_model;
  PlantWeights d_model;
  std::array<Standardization, kFeatureCount> scaling;
};

struct SynthResult {
  std::filesystem::path lexicon_path;
  std::filesystem::path ngrams_path;
  std::filesystem::path totals_path;
  std::filesystem::path truth_path;
  std::vector<GroundTruthRow> truth_rows;
  PlantTruth truth;
  // Feature table at the final reference years (spec.window); the pipeline
  // run over the emitted files must reproduce it.
  std::vector<FeatureVector> feature_table;
};

// Deterministic given spec.seed: same spec => byte-identical files. Throws
// InfeasibleSpecError when more than half of the sampled lags fall outside
// the interval, and DegenerateDataError for n_words < 10.
SynthResult generate(const PlantSpec& spec, const std::filesystem::path& out_dir);

struct WeightCheck {
  std::string feature;  // "(intercept)" or a canonical feature name
  double expected = 0.0;
  double recovered = 0.0;
  double deviation = 0.0;
  bool sign_ok = false;
};

struct GroundTruthReport {
  bool structural_ok = false;
  std::string error;  // set when structural_ok is false
  std::vector<WeightCheck> checks;
  double max_deviation = 0.0;
  bool signs_ok = false;  // every check with |expected| >= sign_min agrees
};

// Re-expresses the recovered fit in the plant's standardization units and
// compares weight by weight. Weights whose |expected| < sign_min are ignored
// by the sign verdict. expected_mask guards against comparing the wrong fit.
GroundTruthReport ground_truth_check(const FitResult& recovered, const PlantTruth& truth,
                                     const FeatureMask& expected_mask, double sign_min = 0.5);

}  // namespace denom
