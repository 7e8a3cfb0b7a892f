#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace xrel {

/// Row-major interleaved 8-bit image with 1 or 3 channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c);

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Throws ValidationError on non-positive dimensions, a channel count other
/// than 1 or 3, or a data size that does not match.
void validate(const Image& img);

/// Binary P5 (1 channel) or P6 (3 channels) with maxval 255.
std::string encode_pnm(const Image& img);
/// Throws InputError on malformed data.
Image decode_pnm(const std::string& bytes);

Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

/// Deterministic test image: smooth gradients, stripes and seeded texture.
Image synthetic_image(int width, int height, int channels, std::uint64_t seed);

}  // namespace xrel
