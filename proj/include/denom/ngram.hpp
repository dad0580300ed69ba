#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace denom {

enum class Pos { Noun, Verb, Other };

std::string_view pos_name(Pos pos);

// One line of a POS-tagged 1-gram frequency file.
// Legal years are [1000, 2100]; counts are non-negative. The source data does
// not guarantee match_count >= volume_count, so nothing is assumed there.
struct NgramRecord {
  std::string token;  // lemma with the _POS suffix already stripped
  Pos pos = Pos::Other;
  int year = 0;
  long long match_count = 0;
  long long volume_count = 0;
};

// Sparse year -> raw occurrence count map for one (word, pos).
struct YearSeries {
  std::map<int, long long> counts;

  long long count_at(int year) const {
    const auto it = counts.find(year);
    return it == counts.end() ? 0 : it->second;
  }

  bool operator==(const YearSeries&) const = default;
};

// Per-year total corpus counts; an absent year is total 0.
struct YearTotals {
  std::map<int, long long> totals;

  long long total_at(int year) const {
    const auto it = totals.find(year);
    return it == totals.end() ? 0 : it->second;
  }
};

struct IndexKey {
  std::string word;
  Pos pos;
  auto operator<=>(const IndexKey&) const = default;
};

// Immutable after build; sorted iteration by (word, pos) is part of the
// serialization contract. Safe for unrestricted concurrent reads.
struct WordYearIndex {
  std::map<IndexKey, YearSeries> series;

  const YearSeries* find(const std::string& word, Pos pos) const {
    const auto it = series.find(IndexKey{word, pos});
    return it == series.end() ? nullptr : &it->second;
  }
};

struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t skipped = 0;
  std::uint64_t kept = 0;
};

// Parses one `token_POS<TAB>year<TAB>match_count<TAB>volume_count` line.
// Returns nullopt for malformed lines (wrong field count, non-integer
// numerics, out-of-range year, negative counts, empty lemma); only _NOUN and
// _VERB suffixes are recognized, anything else is Pos::Other.
std::optional<NgramRecord> parse_ngram_line(std::string_view line);

// Streaming accumulator: keeps only NOUN/VERB records whose token is in the
// vocabulary, summing duplicate (word, pos, year) counts. Memory stays
// proportional to |vocabulary| x distinct years.
class IndexBuilder {
 public:
  explicit IndexBuilder(const std::set<std::string>* vocabulary) : vocabulary_(vocabulary) {}

  void add(const NgramRecord& record);
  void add_line(std::string_view line);
  void merge_from(IndexBuilder&& other);

  WordYearIndex take_index() { return std::move(index_); }
  const IngestStats& stats() const { return stats_; }

 private:
  const std::set<std::string>* vocabulary_;
  WordYearIndex index_;
  IngestStats stats_;
};

WordYearIndex build_index(std::span<const NgramRecord> records,
                          const std::set<std::string>& vocabulary);

struct IngestResult {
  WordYearIndex index;
  IngestStats stats;
};

// Parses the given n-gram files, one worker thread per file (capped at the
// hardware concurrency), and merges the partial indexes by count addition.
IngestResult ingest_files(const std::vector<std::filesystem::path>& paths,
                          const std::set<std::string>& vocabulary,
                          unsigned max_threads = 0);

// count(year) / total(year); 0 when count is 0; throws
// UndefinedDenominatorError when count > 0 with total 0.
double relative_frequency(const YearSeries& series, const YearTotals& totals, int year);

// Sum of relative_frequency over years in [lo, hi), iterating the sparse
// series in ascending year order.
double sum_relative_frequency(const YearSeries& series, const YearTotals& totals, int lo, int hi);

// `year<TAB>total<TAB>page_count<TAB>volume_count`; only the first two fields
// are used. Throws FormatError on unreadable files or malformed lines.
YearTotals load_totals(const std::filesystem::path& path);

// Flat `word<TAB>pos<TAB>year<TAB>count` file sorted by (word, pos, year).
// Year totals are bundled as leading pseudo-rows with word `*`, pos `TOTAL`,
// so the file is self-contained for downstream feature extraction.
void save_index(const WordYearIndex& index, const YearTotals& totals,
                const std::filesystem::path& path);

struct LoadedIndex {
  WordYearIndex index;
  YearTotals totals;
};

LoadedIndex load_index(const std::filesystem::path& path);

}  // namespace denom
