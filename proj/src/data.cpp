#include "dtrn/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtrn/alphabet.hpp"
#include "dtrn/error.hpp"
#include "dtrn/tensor.hpp"

namespace fs = std::filesystem;

namespace dtrn {

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open manifest");

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path + ":" + std::to_string(line_number);
    if (fields.size() < 2 || fields.size() > 3) {
      throw IoError(where + ": expected 'image_path<TAB>label[<TAB>lexicon_path]', got " +
                    std::to_string(fields.size()) + " fields");
    }
    if (fields[0].empty()) throw IoError(where + ": empty image path");

    ManifestEntry entry;
    entry.image_path = fields[0];
    try {
      entry.label = Alphabet::fold(fields[1]);
    } catch (const ValidationError& e) {
      throw IoError(where + ": " + e.what());
    }
    if (entry.label.empty()) throw IoError(where + ": empty label");
    if (fields.size() == 3 && !fields[2].empty()) entry.lexicon_path = fields[2];
    entries.push_back(std::move(entry));
  }
  return entries;
}

namespace {

constexpr std::size_t kCanvasHeight = 32;
constexpr std::size_t kMargin = 2;

// A glyph scaled to the canvas height: round(16 * 32/24) = 21 columns.
Image scaled_glyph(char c) {
  Image art(kGlyphHeight, kGlyphWidth);
  const auto rows = glyph_bitmap(c);
  for (std::size_t y = 0; y < kGlyphHeight; ++y) {
    for (std::size_t x = 0; x < kGlyphWidth; ++x) {
      art.at(y, x) = (rows[y] >> (15 - x)) & 1u ? 1.0 : 0.0;
    }
  }
  const auto out_w = static_cast<std::size_t>(std::llround(
      static_cast<double>(kGlyphWidth) * static_cast<double>(kCanvasHeight) /
      static_cast<double>(kGlyphHeight)));
  return resize_bilinear(art, kCanvasHeight, out_w);
}

const Image& glyph_alpha(char c) {
  static const std::array<Image, Alphabet::kNumChars> cache = [] {
    std::array<Image, Alphabet::kNumChars> images;
    for (int i = 0; i < Alphabet::kNumChars; ++i) images[i] = scaled_glyph(Alphabet::char_at(i));
    return images;
  }();
  return cache[static_cast<std::size_t>(*Alphabet::index_of(c))];
}

void blit(Image& canvas, const Image& alpha, std::size_t x0, double ink) {
  for (std::size_t y = 0; y < alpha.height; ++y) {
    for (std::size_t x = 0; x < alpha.width; ++x) {
      if (x0 + x >= canvas.width) continue;
      double& pixel = canvas.at(y, x0 + x);
      const double a = alpha.at(y, x);
      pixel = pixel * (1.0 - a) + ink * a;
    }
  }
}

void add_noise(Image& canvas, double sigma, Rng& rng) {
  if (sigma <= 0) return;
  for (double& p : canvas.pixels) {
    p = std::clamp(p + sigma * rng.gaussian(), 0.0, 1.0);
  }
}

std::string numbered_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu.pgm", index);
  return buf;
}

std::size_t adjacent_repeats(const std::string& word) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (word[i] == word[i - 1]) ++repeats;
  }
  return repeats;
}

void check_config(const SynthConfig& config) {
  if (config.words.empty()) throw ValidationError("synth: empty word list");
  if (config.samples_per_word == 0) throw ValidationError("synth: samples_per_word must be > 0");
  if (config.noise_sigma < 0 || config.noise_sigma > 0.3) {
    throw ValidationError("synth: noise sigma must lie in [0, 0.3]");
  }
  if (config.contrast_min < 0 || config.contrast_max > 1 ||
      config.contrast_min > config.contrast_max) {
    throw ValidationError("synth: contrast range must satisfy 0 <= min <= max <= 1");
  }
  if (config.spacing_min > config.spacing_max) {
    throw ValidationError("synth: spacing range must satisfy min <= max");
  }
}

}  // namespace

SynthSummary synth_generate(const SynthConfig& config, const std::string& out_dir) {
  check_config(config);
  std::vector<std::string> words;
  words.reserve(config.words.size());
  for (const std::string& w : config.words) {
    words.push_back(Alphabet::fold(w));
    if (words.back().empty()) throw ValidationError("synth: empty word in list");
  }

  fs::create_directories(fs::path(out_dir) / "words");
  fs::create_directories(fs::path(out_dir) / "chars");

  constexpr double kBackground = 0.9;
  Rng rng(config.seed);
  std::ostringstream words_tsv;
  std::ostringstream chars_tsv;
  SynthSummary summary;
  summary.min_width = SIZE_MAX;

  std::size_t word_index = 0;
  std::size_t char_index = 0;
  for (const std::string& word : words) {
    for (std::size_t sample = 0; sample < config.samples_per_word; ++sample) {
      const double contrast = rng.uniform(config.contrast_min, config.contrast_max);
      const double ink = std::clamp(kBackground - contrast, 0.0, 1.0);

      // Lay out glyph positions left to right with jittered gaps.
      std::vector<std::size_t> positions;
      std::size_t pen = kMargin;
      for (std::size_t i = 0; i < word.size(); ++i) {
        long long pos = static_cast<long long>(pen);
        if (config.glyph_jitter > 0) {
          const auto span = 2 * config.glyph_jitter + 1;
          pos += static_cast<long long>(rng.uniform_int(span)) -
                 static_cast<long long>(config.glyph_jitter);
        }
        pos = std::max<long long>(pos, 0);
        positions.push_back(static_cast<std::size_t>(pos));
        std::size_t spacing = config.spacing_min;
        if (config.spacing_max > config.spacing_min) {
          spacing += rng.uniform_int(config.spacing_max - config.spacing_min + 1);
        }
        pen = static_cast<std::size_t>(pos) + glyph_alpha(word[i]).width + spacing;
      }
      std::size_t width =
          positions.back() + glyph_alpha(word.back()).width + kMargin;
      // CTC feasibility: T = W - 31 must cover the label and its repeats.
      const std::size_t required = 31 + word.size() + adjacent_repeats(word);
      width = std::max({width, kCanvasHeight, required});

      Image canvas(kCanvasHeight, width, kBackground);
      for (std::size_t i = 0; i < word.size(); ++i) {
        blit(canvas, glyph_alpha(word[i]), positions[i], ink);
      }
      add_noise(canvas, config.noise_sigma, rng);

      const std::string name = numbered_name(word_index++);
      write_pgm(canvas, (fs::path(out_dir) / "words" / name).string());
      words_tsv << "words/" << name << '\t' << word << '\n';
      summary.min_width = std::min(summary.min_width, width);
      summary.max_width = std::max(summary.max_width, width);

      // One 32x32 crop per character instance, fresh contrast and noise.
      for (char c : word) {
        const double crop_contrast = rng.uniform(config.contrast_min, config.contrast_max);
        const double crop_ink = std::clamp(kBackground - crop_contrast, 0.0, 1.0);
        const Image& alpha = glyph_alpha(c);
        Image crop(kCanvasHeight, kCanvasHeight, kBackground);
        long long x0 = static_cast<long long>((kCanvasHeight - alpha.width) / 2);
        if (config.glyph_jitter > 0) {
          const auto span = 2 * config.glyph_jitter + 1;
          x0 += static_cast<long long>(rng.uniform_int(span)) -
                static_cast<long long>(config.glyph_jitter);
        }
        // Keep at least two pixels of side margin.
        x0 = std::clamp<long long>(x0, 2,
                                   static_cast<long long>(kCanvasHeight - alpha.width - 2));
        blit(crop, alpha, static_cast<std::size_t>(x0), crop_ink);
        add_noise(crop, config.noise_sigma, rng);

        const std::string crop_name = numbered_name(char_index++);
        write_pgm(crop, (fs::path(out_dir) / "chars" / crop_name).string());
        chars_tsv << "chars/" << crop_name << '\t' << c << '\n';
      }
    }
  }

  summary.word_images = word_index;
  summary.char_crops = char_index;
  summary.words_manifest = (fs::path(out_dir) / "words.tsv").string();
  summary.chars_manifest = (fs::path(out_dir) / "chars.tsv").string();

  for (const auto& [path, text] :
       {std::pair{summary.words_manifest, words_tsv.str()},
        std::pair{summary.chars_manifest, chars_tsv.str()}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot write manifest");
    out << text;
    if (!out) throw IoError(path + ": write failed");
  }
  return summary;
}

}  // namespace dtrn
