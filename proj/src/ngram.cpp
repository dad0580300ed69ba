#include "denom/ngram.hpp"

#include <fstream>
#include <future>
#include <thread>

#include "denom/error.hpp"
#include "denom/text.hpp"

namespace denom {
namespace {

constexpr int kMinYear = 1000;
constexpr int kMaxYear = 2100;

// Splits a `lemma_POS` token. Only _NOUN/_VERB are recognized; any other
// token is kept verbatim with Pos::Other.
std::pair<std::string_view, Pos> split_pos_suffix(std::string_view token) {
  if (token.ends_with("_NOUN")) return {token.substr(0, token.size() - 5), Pos::Noun};
  if (token.ends_with("_VERB")) return {token.substr(0, token.size() - 5), Pos::Verb};
  return {token, Pos::Other};
}

}  // namespace

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<NgramRecord> parse_ngram_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split(line, '\t');
  if (fields.size() != 4) return std::nullopt;

  const auto [lemma, pos] = split_pos_suffix(fields[0]);
  if (lemma.empty()) return std::nullopt;

  const auto year = parse_int(fields[1]);
  const auto match_count = parse_int(fields[2]);
  const auto volume_count = parse_int(fields[3]);
  if (!year || !match_count || !volume_count) return std::nullopt;
  if (*year < kMinYear || *year > kMaxYear) return std::nullopt;
  if (*match_count < 0 || *volume_count < 0) return std::nullopt;

  return NgramRecord{std::string(lemma), pos, static_cast<int>(*year), *match_count,
                     *volume_count};
}

void IndexBuilder::add(const NgramRecord& record) {
  ++stats_.lines;
  if (record.pos == Pos::Other) return;
  if (vocabulary_ && !vocabulary_->contains(record.token)) return;
  ++stats_.kept;
  index_.series[IndexKey{record.token, record.pos}].counts[record.year] += record.match_count;
}

void IndexBuilder::add_line(std::string_view line) {
  if (const auto record = parse_ngram_line(line)) {
    add(*record);
  } else {
    ++stats_.lines;
    ++stats_.skipped;
  }
}

void IndexBuilder::merge_from(IndexBuilder&& other) {
  for (auto& [key, series] : other.index_.series) {
    auto& mine = index_.series[key];
    if (mine.counts.empty()) {
      mine.counts = std::move(series.counts);
    } else {
      for (const auto& [year, count] : series.counts) mine.counts[year] += count;
    }
  }
  stats_.lines += other.stats_.lines;
  stats_.skipped += other.stats_.skipped;
  stats_.kept += other.stats_.kept;
}

WordYearIndex build_index(std::span<const NgramRecord> records,
                          const std::set<std::string>& vocabulary) {
  IndexBuilder builder(&vocabulary);
  for (const auto& record : records) builder.add(record);
  return builder.take_index();
}

namespace {

IndexBuilder ingest_one_file(const std::filesystem::path& path,
                             const std::set<std::string>& vocabulary) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open n-gram file: " + path.string());
  IndexBuilder builder(&vocabulary);
  std::string line;
  while (std::getline(in, line)) builder.add_line(line);
  return builder;
}

}  // namespace

IngestResult ingest_files(const std::vector<std::filesystem::path>& paths,
                          const std::set<std::string>& vocabulary, unsigned max_threads) {
  if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());

  IndexBuilder merged(&vocabulary);
  std::vector<std::future<IndexBuilder>> batch;
  const auto drain = [&] {
    for (auto& fut : batch) merged.merge_from(fut.get());
    batch.clear();
  };
  for (const auto& path : paths) {
    if (paths.size() == 1) {
      merged.merge_from(ingest_one_file(path, vocabulary));
      break;
    }
    batch.push_back(std::async(std::launch::async, ingest_one_file, path, std::cref(vocabulary)));
    if (batch.size() >= max_threads) drain();
  }
  drain();
  return IngestResult{merged.take_index(), merged.stats()};
}

double relative_frequency(const YearSeries& series, const YearTotals& totals, int year) {
  const long long count = series.count_at(year);
  if (count == 0) return 0.0;
  const long long total = totals.total_at(year);
  if (total == 0) {
    throw UndefinedDenominatorError("count " + std::to_string(count) + " over zero total in year " +
                                    std::to_string(year));
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

double sum_relative_frequency(const YearSeries& series, const YearTotals& totals, int lo, int hi) {
  double sum = 0.0;
  const auto end = series.counts.lower_bound(hi);
  for (auto it = series.counts.lower_bound(lo); it != end; ++it) {
    sum += relative_frequency(series, totals, it->first);
  }
  return sum;
}

YearTotals load_totals(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open totals file: " + path.string());
  YearTotals totals;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 2) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected at least 2 fields");
    }
    const auto year = parse_int(fields[0]);
    const auto total = parse_int(fields[1]);
    if (!year || !total || *total < 0) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed totals line");
    }
    totals.totals[static_cast<int>(*year)] += *total;
  }
  return totals;
}

void save_index(const WordYearIndex& index, const YearTotals& totals,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write index file: " + path.string());
  for (const auto& [year, total] : totals.totals) {
    out << "*\tTOTAL\t" << year << '\t' << total << '\n';
  }
  for (const auto& [key, series] : index.series) {
    for (const auto& [year, count] : series.counts) {
      out << key.word << '\t' << pos_name(key.pos) << '\t' << year << '\t' << count << '\n';
    }
  }
  if (!out.flush()) throw FormatError("failed writing index file: " + path.string());
}

LoadedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open index file: " + path.string());
  LoadedIndex loaded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto fail = [&](const char* what) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 4) fail("expected 4 tab-separated fields");
    const auto year = parse_int(fields[2]);
    const auto count = parse_int(fields[3]);
    if (!year || !count || *count < 0) fail("malformed year or count");
    if (fields[0] == "*" && fields[1] == "TOTAL") {
      loaded.totals.totals[static_cast<int>(*year)] = *count;
      continue;
    }
    Pos pos;
    if (fields[1] == "NOUN") {
      pos = Pos::Noun;
    } else if (fields[1] == "VERB") {
      pos = Pos::Verb;
    } else {
      fail("unknown pos tag");
      continue;
    }
    loaded.index.series[IndexKey{std::string(fields[0]), pos}].counts[static_cast<int>(*year)] +=
        *count;
  }
  return loaded;
}

}  // namespace denom
