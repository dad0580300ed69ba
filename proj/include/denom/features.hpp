#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "denom/lexicon.hpp"
#include "denom/ngram.hpp"

namespace denom {

// Canonical feature order used by masks, model files and report blocks.
inline constexpr std::array<std::string_view, 4> kFeatureNames = {
    "length", "accum_freq", "recent_freq", "sense_count"};
inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureVector {
  std::string word;
  int ref_year = 0;
  int length = 0;
  double accum_freq = 0.0;
  double recent_freq = 0.0;
  int sense_count = 0;
  bool change = false;
  std::optional<int> lag;  // d, present iff change
};

double feature_value(const FeatureVector& row, std::size_t feature);

// Count of alphabetic characters; hyphens and apostrophes do not count.
// Throws Error on an empty word.
int word_length(std::string_view word);

// Verb-first year for changed words, interval end otherwise.
int reference_year(const LexemeOutcome& outcome, int to_year);

// Sum of yearly relative frequencies over [from_year, ref_year - 1].
double accumulated_frequency(const YearSeries& series, const YearTotals& totals,
                             int from_year, int ref_year);

// Same sum over the window [ref_year - window, ref_year - 1]; window >= 1.
double recent_frequency(const YearSeries& series, const YearTotals& totals,
                        int ref_year, int window);

// Noun senses attested strictly before ref_year.
int sense_count(std::span<const SenseEntry> entries_for_word, int ref_year);

struct FeatureTable {
  std::vector<FeatureVector> rows;    // sorted by word
  std::size_t dropped_rows = 0;       // undefined-denominator casualties
};

FeatureTable build_feature_table(const WordYearIndex& index, const YearTotals& totals,
                                 std::span<const LexemeOutcome> outcomes,
                                 std::span<const SenseEntry> lexicon,
                                 int from_year, int to_year, int window);

// Header `word,ref_year,length,accum_freq,recent_freq,sense_count,change,d`;
// d empty for unchanged rows; reals as %.17g.
void write_feature_csv(std::span<const FeatureVector> rows, std::ostream& out);
void write_feature_csv(std::span<const FeatureVector> rows, const std::filesystem::path& path);
std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path);

}  // namespace denom
