#include "dtrn/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dtrn/error.hpp"

namespace dtrn {

double Image::mean() const {
  if (pixels.empty()) return 0.0;
  double sum = 0;
  for (double p : pixels) sum += p;
  return sum / static_cast<double>(pixels.size());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
std::string next_pgm_token(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) throw IoError(path + ": truncated PGM header");
  std::string token;
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return token;
}

std::size_t parse_pgm_number(const std::string& token, const std::string& path,
                             const char* field) {
  std::size_t value = 0;
  for (char c : token) {
    if (c < '0' || c > '9') {
      throw IoError(path + ": malformed PGM " + field + " '" + token + "'");
    }
    value = value * 10 + static_cast<std::size_t>(c - '0');
    if (value > 1'000'000'000) throw IoError(path + ": PGM " + std::string(field) + " too large");
  }
  return value;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw IoError(path + ": not a binary PGM (missing P5 magic)");
  }

  const std::size_t width = parse_pgm_number(next_pgm_token(in, path), path, "width");
  const std::size_t height = parse_pgm_number(next_pgm_token(in, path), path, "height");
  const std::size_t maxval = parse_pgm_number(next_pgm_token(in, path), path, "maxval");
  if (width == 0 || height == 0) throw IoError(path + ": PGM dimensions must be positive");
  if (maxval == 0 || maxval > 255) {
    throw IoError(path + ": PGM maxval " + std::to_string(maxval) + " outside [1, 255]");
  }
  // The header ends with exactly one whitespace byte before the payload;
  // next_pgm_token already consumed it.

  std::vector<unsigned char> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError(path + ": truncated PGM payload (expected " + std::to_string(raw.size()) +
                  " bytes, got " + std::to_string(in.gcount()) + ")");
  }

  Image image(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    image.pixels[i] = std::min(1.0, static_cast<double>(raw[i]) * scale);
  }
  return image;
}

void write_pgm(const Image& image, const std::string& path) {
  if (image.height == 0 || image.width == 0) {
    throw ValidationError("write_pgm: image dimensions must be positive");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double clamped = std::clamp(image.pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::floor(clamped * 255.0 + 0.5));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError(path + ": write failed");
}

Image resize_bilinear(const Image& source, std::size_t out_h, std::size_t out_w) {
  if (source.height == 0 || source.width == 0) {
    throw ValidationError("resize_bilinear: zero-dimension input");
  }
  if (out_h == 0 || out_w == 0) throw ValidationError("resize_bilinear: zero-dimension output");
  if (out_h == source.height && out_w == source.width) return source;

  Image out(out_h, out_w);
  const double sy = static_cast<double>(source.height) / static_cast<double>(out_h);
  const double sx = static_cast<double>(source.width) / static_cast<double>(out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    // Half-pixel centers; identity when the scale is 1.
    double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(source.height - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, source.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(source.width - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, source.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = source.at(y0, x0) * (1 - wx) + source.at(y0, x1) * wx;
      const double bottom = source.at(y1, x0) * (1 - wx) + source.at(y1, x1) * wx;
      out.at(y, x) = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

WordImage normalize_image(const Image& raster) {
  if (raster.height == 0 || raster.width == 0) {
    throw ValidationError("normalize_image: zero-dimension input");
  }
  const std::size_t target_h = WordImage::kHeight;
  const std::size_t scaled_w = static_cast<std::size_t>(std::llround(
      static_cast<double>(raster.width) * static_cast<double>(target_h) /
      static_cast<double>(raster.height)));
  const std::size_t resampled_w = std::max<std::size_t>(scaled_w, 1);

  Image resized = resize_bilinear(raster, target_h, resampled_w);

  WordImage word;
  word.width = std::max<std::size_t>(resampled_w, target_h);
  word.pixels.assign(target_h * word.width, 0.0);
  const double pad = resized.mean();
  for (std::size_t y = 0; y < target_h; ++y) {
    for (std::size_t x = 0; x < word.width; ++x) {
      const double v = x < resampled_w ? resized.at(y, x) : pad;
      word.pixels[y * word.width + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return word;
}

}  // namespace dtrn
