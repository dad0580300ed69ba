#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "denom/ngram.hpp"

namespace denom {

// One dated sense of a word (historical-thesaurus style record).
struct SenseEntry {
  std::string word;
  Pos pos = Pos::Other;
  int start_year = 0;
};

// Derived per-noun record. change and d are functions of verb_first_year:
// change == verb_first_year.has_value(), d == verb_first_year - emergence.
struct LexemeOutcome {
  std::string word;
  int noun_emergence_year = 0;
  std::optional<int> verb_first_year;

  bool changed() const { return verb_first_year.has_value(); }
  std::optional<int> lag() const {
    if (!verb_first_year) return std::nullopt;
    return *verb_first_year - noun_emergence_year;
  }
};

// CSV with header `word,pos,start_year`; POS labels case-insensitive, unknown
// labels map to Pos::Other. Throws FormatError on a missing/rearranged header
// or a non-integer year: lexicon files are small and curated, so fail loudly.
std::vector<SenseEntry> load_lexicon(const std::filesystem::path& path);

std::set<std::string> lexicon_vocabulary(std::span<const SenseEntry> entries);

// Outcome for one word's senses within [from_year, to_year], or nullopt when
// the word is excluded: no noun sense, noun emergence outside the interval,
// or a verb sense strictly before the noun emergence (not denominalization).
// A verb sense after to_year does not count as change within the window.
std::optional<LexemeOutcome> derive_outcome(std::span<const SenseEntry> entries_for_word,
                                            int from_year, int to_year);

// Groups entries by word and derives every non-excluded outcome, sorted by word.
std::vector<LexemeOutcome> derive_outcomes(std::span<const SenseEntry> entries,
                                           int from_year, int to_year);

struct CohortCounts {
  std::size_t emerged = 0;
  std::size_t changed = 0;
};

CohortCounts cohort_counts(std::span<const LexemeOutcome> outcomes);

}  // namespace denom
