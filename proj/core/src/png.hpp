#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace quizforge::png {

struct Rgb {
  std::uint8_t r, g, b;
};

// zlib stream using fixed Huffman codes and greedy LZ77. Self-contained so
// the bytes do not depend on which zlib build is installed.
std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> data);

// 8-bit palette PNG, no ancillary chunks. `pixels` holds width*height
// palette indices, row-major.
std::vector<std::uint8_t> encode_indexed(int width, int height, std::span<const Rgb> palette,
                                         std::span<const std::uint8_t> pixels);

}  // namespace quizforge::png
