#include "denom/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "denom/error.hpp"
#include "denom/rng.hpp"
#include "denom/text.hpp"

namespace denom {
namespace {

constexpr long long kYearTotal = 1'000'000'000;  // constant totals denominator

struct PlantedWord {
  std::string name;
  int emergence = 0;
  std::vector<int> extra_sense_years;
  std::map<int, long long> counts;  // zero-count years omitted
  double true_change_prob = 0.0;
  bool change = false;
  int lag = 0;  // valid when change
};

void append_number(std::string& out, long long value) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  out.append(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.flush()) throw FormatError("failed writing file: " + path.string());
}

void validate(const PlantSpec& spec) {
  if (spec.n_words < 10) throw DegenerateDataError("plant needs n_words >= 10");
  if (spec.from_year >= spec.to_year) throw Error("plant interval must satisfy from < to");
  if (spec.window < 1) throw Error("plant window must be >= 1");
  if (spec.emergence_lo_frac < 0.0 || spec.emergence_hi_frac > 1.0 ||
      spec.emergence_lo_frac > spec.emergence_hi_frac) {
    throw Error("plant emergence band must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(spec.noise_std_d >= 0.0)) throw Error("plant noise_std_d must be non-negative");
}

nlohmann::json weights_to_json(const PlantWeights& weights) {
  nlohmann::json j;
  j["intercept"] = weights.intercept;
  for (std::size_t f = 0; f < kFeatureCount; ++f) j[std::string(kFeatureNames[f])] = weights.w[f];
  return j;
}

PlantWeights weights_from_json(const nlohmann::json& j, const std::string& where) {
  PlantWeights weights;
  for (const auto& [key, value] : j.items()) {
    if (key == "intercept") {
      weights.intercept = value.get<double>();
      continue;
    }
    const auto idx = feature_index(key);
    if (!idx) throw FormatError(where + ": unknown weight key `" + key + "`");
    weights.w[*idx] = value.get<double>();
  }
  return weights;
}

}  // namespace

PlantSpec default_plant_spec() {
  PlantSpec spec;
  spec.change_model.intercept = -1.2;
  spec.change_model.w = {-0.9, 0.0, -1.4, 0.0};  // length, accum, recent, sense
  spec.d_model.intercept = 120.0;
  spec.d_model.w = {0.0, 0.0, 20.0, 30.0};
  spec.noise_std_d = 8.0;
  return spec;
}

PlantSpec load_plant_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open plant spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  PlantSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_words") spec.n_words = value.get<int>();
      else if (key == "from_year") spec.from_year = value.get<int>();
      else if (key == "to_year") spec.to_year = value.get<int>();
      else if (key == "change") spec.change_model = weights_from_json(value, "change");
      else if (key == "d") spec.d_model = weights_from_json(value, "d");
      else if (key == "noise_std_d") spec.noise_std_d = value.get<double>();
      else if (key == "seed") spec.seed = value.get<std::uint64_t>();
      else if (key == "window") spec.window = value.get<int>();
      else if (key == "emergence_band") {
        spec.emergence_lo_frac = value.at(0).get<double>();
        spec.emergence_hi_frac = value.at(1).get<double>();
      }
      else if (key == "log10_level_mean") spec.log10_level_mean = value.get<double>();
      else if (key == "log10_level_std") spec.log10_level_std = value.get<double>();
      else if (key == "year_jitter_std") spec.year_jitter_std = value.get<double>();
      else if (key == "extra_senses_mean") spec.extra_senses_mean = value.get<double>();
      else throw FormatError(path.string() + ": unknown plant-spec key `" + key + "`");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return spec;
}

void save_plant_spec(const PlantSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j;
  j["n_words"] = spec.n_words;
  j["from_year"] = spec.from_year;
  j["to_year"] = spec.to_year;
  j["change"] = weights_to_json(spec.change_model);
  j["d"] = weights_to_json(spec.d_model);
  j["noise_std_d"] = spec.noise_std_d;
  j["seed"] = spec.seed;
  j["window"] = spec.window;
  j["emergence_band"] = {spec.emergence_lo_frac, spec.emergence_hi_frac};
  j["log10_level_mean"] = spec.log10_level_mean;
  j["log10_level_std"] = spec.log10_level_std;
  j["year_jitter_std"] = spec.year_jitter_std;
  j["extra_senses_mean"] = spec.extra_senses_mean;
  write_text_file(path, j.dump(2) + "\n");
}

SynthResult generate(const PlantSpec& spec, const std::filesystem::path& out_dir) {
  validate(spec);
  std::filesystem::create_directories(out_dir);
  SplitMix64 rng(spec.seed);

  const int span = spec.to_year - spec.from_year;
  const int e_lo = spec.from_year + static_cast<int>(std::lround(spec.emergence_lo_frac * span));
  const int e_hi = std::min(spec.to_year - 2,
                            spec.from_year + static_cast<int>(std::lround(spec.emergence_hi_frac * span)));

  // Phase 1: per-word draws, in a fixed order so the stream is reproducible:
  // name letters, emergence year, frequency level, extra senses, yearly jitters.
  std::vector<PlantedWord> words(static_cast<std::size_t>(spec.n_words));
  std::set<std::string> names_seen;
  for (auto& word : words) {
    do {
      const int len = rng.next_int(3, 12);
      std::string name;
      name.reserve(static_cast<std::size_t>(len));
      for (int i = 0; i < len; ++i) name.push_back(static_cast<char>('a' + rng.next_int(0, 25)));
      word.name = std::move(name);
    } while (!names_seen.insert(word.name).second);

    word.emergence = rng.next_int(e_lo, e_hi);
    const double level = std::pow(10.0, spec.log10_level_mean + spec.log10_level_std * rng.next_normal());

    const int n_extra = rng.next_poisson(spec.extra_senses_mean);
    for (int i = 0; i < n_extra; ++i) {
      word.extra_sense_years.push_back(rng.next_int(word.emergence + 1, spec.to_year));
    }
    std::sort(word.extra_sense_years.begin(), word.extra_sense_years.end());

    const double sigma = spec.year_jitter_std;
    for (int year = word.emergence; year < spec.to_year; ++year) {
      // mean-one lognormal jitter on the word's stationary level
      const double jitter = std::exp(sigma * rng.next_normal() - 0.5 * sigma * sigma);
      const long long count = std::llround(level * jitter * static_cast<double>(kYearTotal));
      if (count > 0) word.counts.emplace_hint(word.counts.end(), year, count);
    }
  }

  YearTotals totals;
  for (int year = spec.from_year; year <= spec.to_year; ++year) totals.totals[year] = kYearTotal;

  // Phase 2: features at the interval end (independent of change/d), then the
  // plant's standardization, then label and lag draws.
  std::array<std::vector<double>, kFeatureCount> raw;
  for (auto& column : raw) column.reserve(words.size());
  for (const auto& word : words) {
    YearSeries series{word.counts};
    raw[0].push_back(static_cast<double>(word_length(word.name)));
    raw[1].push_back(accumulated_frequency(series, totals, spec.from_year, spec.to_year));
    raw[2].push_back(recent_frequency(series, totals, spec.to_year, spec.window));
    int senses = 1;  // the emerging noun sense
    for (const int year : word.extra_sense_years) {
      if (year < spec.to_year) ++senses;
    }
    raw[3].push_back(static_cast<double>(senses));
  }

  PlantTruth truth;
  truth.change_model = spec.change_model;
  truth.d_model = spec.d_model;
  std::array<std::vector<double>, kFeatureCount> z;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    auto standardized = standardize(raw[f]);
    z[f] = std::move(standardized.zscores);
    truth.scaling[f] = standardized.scaling;
  }

  std::size_t n_changed = 0;
  std::size_t n_clipped = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto& word = words[i];
    double eta = spec.change_model.intercept;
    for (std::size_t f = 0; f < kFeatureCount; ++f) eta += spec.change_model.w[f] * z[f][i];
    word.true_change_prob = sigmoid(eta);
    word.change = rng.next_unit() < word.true_change_prob;
    if (!word.change) continue;
    ++n_changed;
    double d = spec.d_model.intercept;
    for (std::size_t f = 0; f < kFeatureCount; ++f) d += spec.d_model.w[f] * z[f][i];
    d += spec.noise_std_d * rng.next_normal();
    const long long sampled = std::llround(d);
    const long long max_lag = spec.to_year - word.emergence;
    if (sampled < 1 || sampled > max_lag) ++n_clipped;
    word.lag = static_cast<int>(std::clamp(sampled, 1LL, max_lag));
  }
  if (n_changed > 0 && 2 * n_clipped > n_changed) {
    throw InfeasibleSpecError("more than half of the sampled lags fall outside the interval");
  }

  // Emission, word-sorted everywhere.
  std::vector<std::size_t> order(words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return words[a].name < words[b].name; });

  SynthResult result;
  result.lexicon_path = out_dir / "lexicon.csv";
  result.ngrams_path = out_dir / "ngrams.tsv";
  result.totals_path = out_dir / "totals.tsv";
  result.truth_path = out_dir / "truth.csv";

  std::string lexicon = "word,pos,start_year\n";
  std::string ngrams;
  std::string truth_csv = "word,true_change_prob,change,d\n";
  std::vector<SenseEntry> senses;
  for (const std::size_t i : order) {
    const auto& word = words[i];

    std::vector<int> noun_years{word.emergence};
    noun_years.insert(noun_years.end(), word.extra_sense_years.begin(),
                      word.extra_sense_years.end());
    for (const int year : noun_years) {
      lexicon += word.name;
      lexicon += ",noun,";
      append_number(lexicon, year);
      lexicon += '\n';
      senses.push_back(SenseEntry{word.name, Pos::Noun, year});
    }
    if (word.change) {
      lexicon += word.name;
      lexicon += ",verb,";
      append_number(lexicon, word.emergence + word.lag);
      lexicon += '\n';
      senses.push_back(SenseEntry{word.name, Pos::Verb, word.emergence + word.lag});
    }

    for (const auto& [year, count] : word.counts) {
      ngrams += word.name;
      ngrams += "_NOUN\t";
      append_number(ngrams, year);
      ngrams += '\t';
      append_number(ngrams, count);
      ngrams += "\t1\n";
    }

    truth_csv += word.name;
    truth_csv += ',';
    truth_csv += format_g17(word.true_change_prob);
    truth_csv += ',';
    truth_csv += word.change ? '1' : '0';
    truth_csv += ',';
    if (word.change) append_number(truth_csv, word.lag);
    truth_csv += '\n';

    result.truth_rows.push_back(GroundTruthRow{
        word.name, word.true_change_prob, word.change,
        word.change ? std::optional<int>(word.lag) : std::nullopt});
  }

  std::string totals_tsv;
  for (const auto& [year, total] : totals.totals) {
    append_number(totals_tsv, year);
    totals_tsv += '\t';
    append_number(totals_tsv, total);
    totals_tsv += "\t0\t0\n";
  }

  write_text_file(result.lexicon_path, lexicon);
  write_text_file(result.ngrams_path, ngrams);
  write_text_file(result.totals_path, totals_tsv);
  write_text_file(result.truth_path, truth_csv);

  // The reference feature table, computed through the library itself over the
  // in-memory data: the pipeline run over the emitted files must match it.
  WordYearIndex index;
  for (const auto& word : words) {
    if (!word.counts.empty()) index.series[IndexKey{word.name, Pos::Noun}] = YearSeries{word.counts};
  }
  const auto outcomes = derive_outcomes(senses, spec.from_year, spec.to_year);
  if (outcomes.size() != words.size()) {
    throw Error("plant internal error: generated words fell out of the cohort");
  }
  result.feature_table = build_feature_table(index, totals, outcomes, senses, spec.from_year,
                                             spec.to_year, spec.window)
                             .rows;
  result.truth = truth;
  return result;
}

GroundTruthReport ground_truth_check(const FitResult& recovered, const PlantTruth& truth,
                                     const FeatureMask& expected_mask, double sign_min) {
  GroundTruthReport report;
  if (recovered.mask != expected_mask) {
    report.error = "recovered fit mask does not match the expected mask";
    return report;
  }
  if (!recovered.diagnostics.converged) {
    report.error = "recovered fit did not converge";
    return report;
  }
  report.structural_ok = true;

  const PlantWeights& expected =
      recovered.target == Target::Change ? truth.change_model : truth.d_model;

  // Re-express the recovered model in the plant's standardization units:
  // raw weight w/s, then scaled by the plant's std; intercepts follow.
  double intercept_raw = recovered.intercept;
  std::array<double, kFeatureCount> w_in_truth_units{0.0, 0.0, 0.0, 0.0};
  double intercept_in_truth_units = 0.0;
  std::size_t slot = 0;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!recovered.mask.included[f]) continue;
    const double w_raw = recovered.weights[slot] / recovered.scaling[slot].std;
    intercept_raw -= recovered.weights[slot] * recovered.scaling[slot].mean /
                     recovered.scaling[slot].std;
    w_in_truth_units[f] = w_raw * truth.scaling[f].std;
    intercept_in_truth_units += w_raw * truth.scaling[f].mean;
    ++slot;
  }
  intercept_in_truth_units += intercept_raw;

  const auto add_check = [&](const std::string& name, double want, double got) {
    WeightCheck check;
    check.feature = name;
    check.expected = want;
    check.recovered = got;
    check.deviation = std::fabs(got - want);
    check.sign_ok = want == 0.0 || (want > 0.0) == (got > 0.0);
    report.max_deviation = std::max(report.max_deviation, check.deviation);
    report.checks.push_back(check);
  };
  add_check("(intercept)", expected.intercept, intercept_in_truth_units);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!recovered.mask.included[f]) continue;
    add_check(std::string(kFeatureNames[f]), expected.w[f], w_in_truth_units[f]);
  }

  report.signs_ok = true;
  for (const auto& check : report.checks) {
    if (std::fabs(check.expected) >= sign_min && !check.sign_ok) report.signs_ok = false;
  }
  return report;
}

}  // namespace denom
