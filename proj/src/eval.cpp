#include "dtrn/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "dtrn/error.hpp"

namespace dtrn {

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Lexicon Lexicon::from_words(std::vector<std::string> words, std::string name) {
  Lexicon lexicon;
  lexicon.name = std::move(name);
  std::unordered_set<std::string> seen;
  for (std::string& word : words) {
    std::string folded = to_lower(word);
    if (folded.empty()) continue;
    if (seen.insert(folded).second) lexicon.words.push_back(std::move(folded));
  }
  return lexicon;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open lexicon");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return from_words(std::move(words), path);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> previous(n + 1), current(n + 1);
  for (std::size_t j = 0; j <= n; ++j) previous[j] = j;
  for (std::size_t i = 0; i < a.size(); ++i) {
    current[0] = i + 1;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t substitute = previous[j] + (a[i] == b[j] ? 0 : 1);
      current[j + 1] = std::min({current[j] + 1, previous[j + 1] + 1, substitute});
    }
    std::swap(previous, current);
  }
  return previous[n];
}

LexiconMatch lexicon_decode(const std::string& raw, const Lexicon& lexicon) {
  if (lexicon.words.empty()) throw ValidationError("lexicon_decode: empty lexicon");
  const std::string folded = to_lower(raw);
  LexiconMatch best{lexicon.words[0], edit_distance(folded, lexicon.words[0])};
  for (std::size_t i = 1; i < lexicon.words.size(); ++i) {
    const std::size_t d = edit_distance(folded, lexicon.words[i]);
    if (d < best.distance) best = LexiconMatch{lexicon.words[i], d};
  }
  return best;
}

EvalReport evaluate(const std::vector<EvalSample>& samples, const EvalOptions& options) {
  if (samples.empty()) throw ValidationError("evaluate: empty dataset");

  EvalReport report;
  for (const EvalSample& sample : samples) {
    if (sample.errored) {
      ++report.errored;
      continue;
    }
    const std::string truth = to_lower(sample.ground_truth);
    if (options.skip_short_and_nonalnum) {
      const bool alnum = std::all_of(truth.begin(), truth.end(), [](unsigned char c) {
        return std::isalnum(c) != 0;
      });
      if (truth.size() < 3 || !alnum) continue;
    }

    EvalRecord record;
    record.ground_truth = truth;
    record.raw_decode = to_lower(sample.raw_decode);
    if (sample.lexicon != nullptr) {
      const LexiconMatch match = lexicon_decode(record.raw_decode, *sample.lexicon);
      record.corrected = match.word;
      record.distance = match.distance;
    } else {
      record.corrected = record.raw_decode;
      record.distance = 0;
    }
    record.match = record.corrected == truth;
    ++report.total;
    if (record.match) ++report.correct;
    report.records.push_back(std::move(record));
  }

  if (report.total == 0) {
    throw ValidationError("evaluate: no scorable samples (all errored or filtered)");
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  for (const EvalRecord& r : report.records) {
    os << r.ground_truth << '\t' << r.raw_decode << '\t' << r.corrected << '\t' << r.distance
       << '\t' << (r.match ? 1 : 0) << '\n';
  }
  char summary[32];
  std::snprintf(summary, sizeof(summary), "accuracy %.4f\n", report.accuracy);
  os << summary;
  return os.str();
}

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open report for writing");
  out << format_report(report);
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace dtrn
