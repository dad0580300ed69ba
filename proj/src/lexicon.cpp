#include "denom/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "denom/error.hpp"
#include "denom/text.hpp"

namespace denom {

std::vector<SenseEntry> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open lexicon file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty lexicon file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "word,pos,start_year") {
    throw FormatError(path.string() + ": expected header `word,pos,start_year`, got `" + line + "`");
  }

  std::vector<SenseEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3 || fields[0].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected `word,pos,start_year`");
    }
    const auto year = parse_int(fields[2]);
    if (!year) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-integer start_year");
    }
    if (*year < 1000 || *year > 2100) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": start_year outside [1000, 2100]");
    }
    const std::string pos_label = to_lower(fields[1]);
    Pos pos = Pos::Other;
    if (pos_label == "noun") pos = Pos::Noun;
    if (pos_label == "verb") pos = Pos::Verb;
    entries.push_back(SenseEntry{std::string(fields[0]), pos, static_cast<int>(*year)});
  }
  return entries;
}

std::set<std::string> lexicon_vocabulary(std::span<const SenseEntry> entries) {
  std::set<std::string> words;
  for (const auto& entry : entries) words.insert(entry.word);
  return words;
}

std::optional<LexemeOutcome> derive_outcome(std::span<const SenseEntry> entries_for_word,
                                            int from_year, int to_year) {
  std::optional<int> noun_emergence;
  std::optional<int> earliest_verb;
  for (const auto& entry : entries_for_word) {
    if (entry.pos == Pos::Noun) {
      if (!noun_emergence || entry.start_year < *noun_emergence) noun_emergence = entry.start_year;
    } else if (entry.pos == Pos::Verb) {
      if (!earliest_verb || entry.start_year < *earliest_verb) earliest_verb = entry.start_year;
    }
  }
  if (!noun_emergence) return std::nullopt;
  if (*noun_emergence < from_year || *noun_emergence > to_year) return std::nullopt;
  // A verb attested before the noun is conversion in the other direction.
  if (earliest_verb && *earliest_verb < *noun_emergence) return std::nullopt;

  LexemeOutcome outcome;
  outcome.word = entries_for_word.front().word;
  outcome.noun_emergence_year = *noun_emergence;
  if (earliest_verb && *earliest_verb <= to_year) outcome.verb_first_year = *earliest_verb;
  return outcome;
}

std::vector<LexemeOutcome> derive_outcomes(std::span<const SenseEntry> entries,
                                           int from_year, int to_year) {
  std::map<std::string, std::vector<SenseEntry>> by_word;
  for (const auto& entry : entries) by_word[entry.word].push_back(entry);

  std::vector<LexemeOutcome> outcomes;
  for (const auto& [word, senses] : by_word) {
    if (auto outcome = derive_outcome(senses, from_year, to_year)) {
      outcome->word = word;
      outcomes.push_back(std::move(*outcome));
    }
  }
  return outcomes;  // by_word is a std::map, so outcomes are word-sorted
}

CohortCounts cohort_counts(std::span<const LexemeOutcome> outcomes) {
  CohortCounts counts;
  counts.emerged = outcomes.size();
  counts.changed = static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.changed(); }));
  return counts;
}

}  // namespace denom
