#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dtrn {

// Ordered list of unique lowercase words; order is preserved from the
// source file and breaks ties in lexicon_decode.
struct Lexicon {
  std::string name;
  std::vector<std::string> words;

  static Lexicon from_words(std::vector<std::string> words, std::string name = "");
  static Lexicon load(const std::string& path);

  std::size_t size() const { return words.size(); }
};

// Levenshtein distance with unit insert/delete/substitute costs.
std::size_t edit_distance(const std::string& a, const std::string& b);

struct LexiconMatch {
  std::string word;
  std::size_t distance;
};

// The lexicon word nearest to `raw`; ties go to the earliest entry.
LexiconMatch lexicon_decode(const std::string& raw, const Lexicon& lexicon);

// One decoded sample ready for scoring. `errored` marks samples whose
// image could not be produced (excluded from the accuracy denominator).
struct EvalSample {
  std::string ground_truth;
  std::string raw_decode;
  const Lexicon* lexicon = nullptr;  // optional, not owned
  bool errored = false;
};

struct EvalRecord {
  std::string ground_truth;
  std::string raw_decode;
  std::string corrected;
  std::size_t distance = 0;
  bool match = false;
};

struct EvalReport {
  std::size_t total = 0;    // scored samples
  std::size_t correct = 0;
  std::size_t errored = 0;  // excluded samples
  double accuracy = 0.0;    // correct / total
  std::vector<EvalRecord> records;  // input order, scored samples only
};

struct EvalOptions {
  // The cited protocol's filter: skip ground truths shorter than 3
  // characters or containing non-alphanumerics. Off by default.
  bool skip_short_and_nonalnum = false;
};

// Scores decodes against ground truth, case-insensitively; applies
// lexicon correction where a lexicon is present. Deterministic in input
// order. An empty dataset is rejected.
EvalReport evaluate(const std::vector<EvalSample>& samples, const EvalOptions& options = {});

// Tab-separated lines "ground_truth raw corrected distance match" plus a
// final "accuracy <4 decimals>" summary line.
std::string format_report(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& path);

}  // namespace dtrn
