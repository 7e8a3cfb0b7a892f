#include <filesystem>

#include <gtest/gtest.h>

#include "xrel/errors.hpp"
#include "xrel/image.hpp"

namespace xrel {
namespace {

TEST(Pnm, EncodesExactLayout) {
  Image g(3, 2, 1);
  for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = static_cast<std::uint8_t>(i * 40);
  const std::string bytes = encode_pnm(g);
  EXPECT_EQ(bytes.substr(0, 11), "P5\n3 2\n255\n");
  EXPECT_EQ(bytes.size(), 11u + 6u);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[11 + 5]), 200);
  EXPECT_EQ(decode_pnm(bytes), g);
}

TEST(Pnm, ColorRoundTripThroughFile) {
  const Image img = synthetic_image(17, 9, 3, 5);
  const auto path = std::filesystem::temp_directory_path() / "xrel_image_test.ppm";
  write_pnm(path, img);
  EXPECT_EQ(read_pnm(path), img);
  std::filesystem::remove(path);
}

TEST(Pnm, HeaderComments) {
  std::string bytes = "P5\n# made by hand\n2 1 # trailing\n255\n";
  bytes += '\x01';
  bytes += '\x02';
  const Image img = decode_pnm(bytes);
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.data[1], 2);
}

TEST(Pnm, Rejections) {
  EXPECT_THROW(decode_pnm("P2\n1 1\n255\n1"), InputError);
  EXPECT_THROW(decode_pnm("P5\n1 1\n65535\n\x01\x01"), InputError);
  EXPECT_THROW(decode_pnm("P5\n4 4\n255\n\x01"), InputError);
  EXPECT_THROW(decode_pnm("P5\nx 4\n255\n"), InputError);
  EXPECT_THROW(read_pnm("/nonexistent/file.pgm"), InputError);
}

TEST(Image, Validation) {
  EXPECT_THROW(Image(0, 4, 1), ValidationError);
  EXPECT_THROW(Image(4, 4, 2), ValidationError);
  EXPECT_EQ(synthetic_image(8, 8, 1, 3), synthetic_image(8, 8, 1, 3));
  EXPECT_NE(synthetic_image(8, 8, 1, 3), synthetic_image(8, 8, 1, 4));
}

}  // namespace
}  // namespace xrel
