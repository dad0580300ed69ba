#include "denom/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "denom/error.hpp"
#include "denom/text.hpp"

namespace denom {

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  return std::nullopt;
}

double feature_value(const FeatureVector& row, std::size_t feature) {
  switch (feature) {
    case 0: return static_cast<double>(row.length);
    case 1: return row.accum_freq;
    case 2: return row.recent_freq;
    case 3: return static_cast<double>(row.sense_count);
  }
  throw Error("feature index out of range");
}

int word_length(std::string_view word) {
  if (word.empty()) throw Error("word_length of empty word");
  return alpha_length(word);
}

int reference_year(const LexemeOutcome& outcome, int to_year) {
  return outcome.changed() ? *outcome.verb_first_year : to_year;
}

double accumulated_frequency(const YearSeries& series, const YearTotals& totals,
                             int from_year, int ref_year) {
  return sum_relative_frequency(series, totals, from_year, ref_year);
}

double recent_frequency(const YearSeries& series, const YearTotals& totals,
                        int ref_year, int window) {
  if (window < 1) throw Error("recent_frequency window must be >= 1");
  return sum_relative_frequency(series, totals, ref_year - window, ref_year);
}

int sense_count(std::span<const SenseEntry> entries_for_word, int ref_year) {
  int n = 0;
  for (const auto& entry : entries_for_word) {
    if (entry.pos == Pos::Noun && entry.start_year < ref_year) ++n;
  }
  return n;
}

FeatureTable build_feature_table(const WordYearIndex& index, const YearTotals& totals,
                                 std::span<const LexemeOutcome> outcomes,
                                 std::span<const SenseEntry> lexicon,
                                 int from_year, int to_year, int window) {
  std::map<std::string, std::vector<SenseEntry>> senses_by_word;
  for (const auto& entry : lexicon) senses_by_word[entry.word].push_back(entry);

  static const YearSeries kEmptySeries;

  FeatureTable table;
  for (const auto& outcome : outcomes) {
    const int ref = reference_year(outcome, to_year);
    const YearSeries* series = index.find(outcome.word, Pos::Noun);
    if (!series) series = &kEmptySeries;

    FeatureVector row;
    row.word = outcome.word;
    row.ref_year = ref;
    row.length = word_length(outcome.word);
    try {
      row.accum_freq = accumulated_frequency(*series, totals, from_year, ref);
      row.recent_freq = recent_frequency(*series, totals, ref, window);
    } catch (const UndefinedDenominatorError&) {
      ++table.dropped_rows;
      continue;
    }
    const auto senses = senses_by_word.find(outcome.word);
    row.sense_count =
        senses == senses_by_word.end() ? 0 : sense_count(senses->second, ref);
    row.change = outcome.changed();
    row.lag = outcome.lag();
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const FeatureVector& a, const FeatureVector& b) { return a.word < b.word; });
  return table;
}

static constexpr std::string_view kFeatureCsvHeader =
    "word,ref_year,length,accum_freq,recent_freq,sense_count,change,d";

void write_feature_csv(std::span<const FeatureVector> rows, std::ostream& out) {
  out << kFeatureCsvHeader << '\n';
  for (const auto& row : rows) {
    out << row.word << ',' << row.ref_year << ',' << row.length << ','
        << format_g17(row.accum_freq) << ',' << format_g17(row.recent_freq) << ','
        << row.sense_count << ',' << (row.change ? 1 : 0) << ',';
    if (row.lag) out << *row.lag;
    out << '\n';
  }
}

void write_feature_csv(std::span<const FeatureVector> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write feature table: " + path.string());
  write_feature_csv(rows, out);
  if (!out.flush()) throw FormatError("failed writing feature table: " + path.string());
}

std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open feature table: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty feature table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kFeatureCsvHeader) {
    throw FormatError(path.string() + ": unexpected feature-table header `" + line + "`");
  }

  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const auto fail = [&](const char* what) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 8) fail("expected 8 fields");
    FeatureVector row;
    row.word = std::string(fields[0]);
    const auto ref = parse_int(fields[1]);
    const auto length = parse_int(fields[2]);
    const auto accum = parse_double(fields[3]);
    const auto recent = parse_double(fields[4]);
    const auto senses = parse_int(fields[5]);
    const auto change = parse_int(fields[6]);
    if (row.word.empty() || !ref || !length || !accum || !recent || !senses || !change ||
        (*change != 0 && *change != 1)) {
      fail("malformed row");
    }
    row.ref_year = static_cast<int>(*ref);
    row.length = static_cast<int>(*length);
    row.accum_freq = *accum;
    row.recent_freq = *recent;
    row.sense_count = static_cast<int>(*senses);
    row.change = *change == 1;
    if (row.change) {
      const auto lag = parse_int(fields[7]);
      if (!lag || *lag < 0) fail("changed row without a valid d");
      row.lag = static_cast<int>(*lag);
    } else if (!fields[7].empty()) {
      fail("unchanged row with a d value");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace denom
