#include "xrel/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/core.h>

#include "xrel/errors.hpp"
#include "xrel/io.hpp"
#include "xrel/rng.hpp"

namespace xrel {

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
  validate(*this);
  data.assign(static_cast<std::size_t>(w) * h * c, 0);
}

void validate(const Image& img) {
  if (img.width <= 0 || img.height <= 0)
    throw ValidationError(fmt::format("image dimensions must be positive, got {}x{}", img.width, img.height));
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError(fmt::format("image must have 1 or 3 channels, got {}", img.channels));
  const std::size_t expected = static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (!img.data.empty() && img.data.size() != expected)
    throw ValidationError(fmt::format("image data holds {} bytes, expected {}", img.data.size(), expected));
}

std::string encode_pnm(const Image& img) {
  validate(img);
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
    throw ValidationError("image has no pixel data");
  std::string out = fmt::format("{}\n{} {}\n255\n", img.channels == 1 ? "P5" : "P6", img.width, img.height);
  out.append(img.data.begin(), img.data.end());
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& s) : s_(s) {}

  void skip_space_and_comments() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int number(const char* what) {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      value = value * 10 + (s_[pos_++] - '0');
      if (value > 1'000'000) throw InputError(fmt::format("PNM {} too large", what));
      ++digits;
    }
    if (!digits) throw InputError(fmt::format("PNM header: expected {}", what));
    return static_cast<int>(value);
  }

  std::size_t pos_ = 0;

 private:
  const std::string& s_;
};

}  // namespace

Image decode_pnm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw InputError("not a binary PGM/PPM (P5/P6) image");
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader hr(bytes);
  hr.pos_ = 2;
  const int w = hr.number("width");
  const int h = hr.number("height");
  const int maxval = hr.number("maxval");
  if (maxval != 255) throw InputError(fmt::format("PNM maxval {} unsupported (expected 255)", maxval));
  if (hr.pos_ >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[hr.pos_])))
    throw InputError("PNM header must end with a single whitespace byte");
  ++hr.pos_;
  if (w <= 0 || h <= 0) throw InputError("PNM dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - hr.pos_ < n)
    throw InputError(fmt::format("PNM raster truncated: {} of {} bytes", bytes.size() - hr.pos_, n));
  Image img(w, h, channels);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(hr.pos_),
            bytes.begin() + static_cast<std::ptrdiff_t>(hr.pos_ + n), img.data.begin());
  return img;
}

Image read_pnm(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const IoError& e) {
    throw InputError(e.what());
  }
  try {
    return decode_pnm(bytes);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_pnm(const std::filesystem::path& path, const Image& img) { write_text_file(path, encode_pnm(img)); }

Image synthetic_image(int width, int height, int channels, std::uint64_t seed) {
  Image img(width, height, channels);
  Xoshiro256 rng(derive_seed(seed, 0x1A6E));
  constexpr double kPi = 3.14159265358979323846;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
        double p = 128.0 + 70.0 * std::sin(2 * kPi * (u * (2 + c) + v * 1.5)) +
                   40.0 * std::cos(2 * kPi * v * (3 + c)) * (u - 0.5) * 2;
        if ((x / 8 + y / 8 + c) % 2 == 0) p += 25.0;
        p += static_cast<double>(rng.bits(5)) - 16.0;
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(p), 0L, 255L));
      }
  return img;
}

}  // namespace xrel
