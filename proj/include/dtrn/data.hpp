#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtrn/image.hpp"

namespace dtrn {

// One dataset line: image path (relative to the manifest), its label over
// the 36-char alphabet, and an optional per-sample lexicon path.
struct ManifestEntry {
  std::string image_path;
  std::string label;  // folded to lowercase at load
  std::optional<std::string> lexicon_path;
};

// Parses "image_path<TAB>label[<TAB>lexicon_path]" lines; '#' lines are
// comments. Labels are case-folded and validated; errors carry the line
// number.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Configuration of the synthetic corpus generator. Identical configs
// produce byte-identical corpora.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::string word_source;          // provenance tag written nowhere, kept for logs
  std::vector<std::string> words;   // alphabet-only, folded at use
  std::size_t samples_per_word = 0;
  double noise_sigma = 0.05;        // additive Gaussian, in [0, 0.3]
  double contrast_min = 0.5;        // ink/background separation range
  double contrast_max = 0.9;
  std::size_t glyph_jitter = 1;     // per-glyph horizontal jitter, pixels
  std::size_t spacing_min = 1;      // inter-glyph gap range, pixels
  std::size_t spacing_max = 3;
};

struct SynthSummary {
  std::size_t word_images = 0;
  std::size_t char_crops = 0;
  std::size_t min_width = 0;
  std::size_t max_width = 0;
  std::string words_manifest;  // paths of the written manifests
  std::string chars_manifest;
};

// Renders samples_per_word images per word from the built-in glyph font
// into out_dir/words/NNNNNN.pgm plus per-character 32x32 crops into
// out_dir/chars/NNNNNN.pgm, and writes words.tsv / chars.tsv manifests.
// Every generated word is CTC-feasible: T = W - 31 >= K + repeats.
SynthSummary synth_generate(const SynthConfig& config, const std::string& out_dir);

// The embedded 16x24 bitmap font covering exactly the 36-class alphabet.
// Rows are bit-packed, bit 15 leftmost.
std::span<const std::uint16_t> glyph_bitmap(char c);  // 24 rows
constexpr std::size_t kGlyphWidth = 16;
constexpr std::size_t kGlyphHeight = 24;

}  // namespace dtrn
