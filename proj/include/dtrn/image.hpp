#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dtrn {

// Grayscale raster, pixels in [0,1], row-major.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, double value = 0.0)
      : height(h), width(w), pixels(h * w, value) {}

  double& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  double mean() const;
};

// A cropped word image after ingestion: exactly 32 rows, width >= 32,
// pixels clamped to [0,1].
struct WordImage {
  static constexpr std::size_t kHeight = 32;
  std::size_t width = 0;
  std::vector<double> pixels;  // kHeight x width, row-major

  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

// Binary PGM ("P5") reader: maxval <= 255, '#' comments allowed between
// header fields, pixels scaled to [0,1]. Distinct parse errors for bad
// magic, malformed header and truncated payload.
Image read_pgm(const std::string& path);

// Binary P5, maxval 255, values rounded half-up from [0,1].
void write_pgm(const Image& image, const std::string& path);

// Bilinear resample to height 32 keeping aspect ratio: width becomes
// round(W*32/H). Results narrower than 32 are right-padded with the
// image's mean intensity. Identity for inputs already 32 rows tall.
WordImage normalize_image(const Image& raster);

// Bilinear resample to an arbitrary size (half-pixel-center convention,
// edges clamped). Used by normalize_image and the synthetic generator.
Image resize_bilinear(const Image& source, std::size_t out_h, std::size_t out_w);

}  // namespace dtrn
