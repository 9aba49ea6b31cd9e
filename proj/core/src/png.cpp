#include "png.hpp"

#include <zlib.h>

#include <algorithm>
#include <stdexcept>
#include <string_view>

namespace quizforge::png {
namespace {

constexpr int kWindow = 32768;
constexpr int kMinMatch = 3;
constexpr int kMaxMatch = 258;
constexpr int kMaxChain = 64;
constexpr int kHashBits = 15;

constexpr std::array<int, 29> kLengthBase = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,  15,  17,  19,  23, 27,
                                             31, 35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr std::array<int, 29> kLengthExtra = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                              2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr std::array<int, 30> kDistBase = {1,   2,   3,   4,   5,   7,    9,    13,   17,   25,   33,   49,   65,    97,    129,
                                           193, 257, 385, 513, 769, 1025, 1537, 2049, 3073, 4097, 6145, 8193, 12289, 16385, 24577};
constexpr std::array<int, 30> kDistExtra = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5,  6,
                                            6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

class BitWriter {
 public:
  void bits(std::uint32_t value, int count) {
    for (int i = 0; i < count; ++i) push((value >> i) & 1u);
  }
  // Huffman codes go out most significant bit first.
  void code(std::uint32_t value, int count) {
    for (int i = count - 1; i >= 0; --i) push((value >> i) & 1u);
  }
  std::vector<std::uint8_t> finish() {
    if (nbits_ > 0) out_.push_back(cur_);
    return std::move(out_);
  }

 private:
  void push(std::uint32_t bit) {
    cur_ = static_cast<std::uint8_t>(cur_ | (bit << nbits_));
    if (++nbits_ == 8) {
      out_.push_back(cur_);
      cur_ = 0;
      nbits_ = 0;
    }
  }
  std::vector<std::uint8_t> out_;
  std::uint8_t cur_ = 0;
  int nbits_ = 0;
};

void put_literal(BitWriter& w, int sym) {
  if (sym < 144) {
    w.code(0x30u + static_cast<std::uint32_t>(sym), 8);
  } else if (sym < 256) {
    w.code(0x190u + static_cast<std::uint32_t>(sym - 144), 9);
  } else if (sym < 280) {
    w.code(static_cast<std::uint32_t>(sym - 256), 7);
  } else {
    w.code(0xC0u + static_cast<std::uint32_t>(sym - 280), 8);
  }
}

void put_match(BitWriter& w, int length, int distance) {
  int li = 28;
  while (kLengthBase[static_cast<std::size_t>(li)] > length) --li;
  put_literal(w, 257 + li);
  w.bits(static_cast<std::uint32_t>(length - kLengthBase[static_cast<std::size_t>(li)]), kLengthExtra[static_cast<std::size_t>(li)]);
  int di = 29;
  while (kDistBase[static_cast<std::size_t>(di)] > distance) --di;
  w.code(static_cast<std::uint32_t>(di), 5);
  w.bits(static_cast<std::uint32_t>(distance - kDistBase[static_cast<std::size_t>(di)]), kDistExtra[static_cast<std::size_t>(di)]);
}

std::uint32_t hash3(const std::uint8_t* p) {
  const std::uint32_t v = (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | p[2];
  return (v * 2654435761u) >> (32 - kHashBits);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, std::string_view type, std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type.begin(), type.end());
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> data) {
  BitWriter w;
  w.bits(1, 1);  // final block
  w.bits(1, 2);  // fixed Huffman codes
  const int n = static_cast<int>(data.size());
  std::vector<int> head(1u << kHashBits, -1);
  std::vector<int> prev(kWindow, -1);
  auto insert = [&](int pos) {
    if (pos + kMinMatch > n) return;
    const std::uint32_t h = hash3(data.data() + pos);
    prev[static_cast<std::size_t>(pos % kWindow)] = head[h];
    head[h] = pos;
  };
  int pos = 0;
  while (pos < n) {
    int best_len = 0;
    int best_dist = 0;
    if (pos + kMinMatch <= n) {
      int cand = head[hash3(data.data() + pos)];
      const int limit = std::min(kMaxMatch, n - pos);
      for (int chain = 0; cand >= 0 && pos - cand <= kWindow - 1 && chain < kMaxChain; ++chain) {
        int len = 0;
        while (len < limit && data[static_cast<std::size_t>(cand + len)] == data[static_cast<std::size_t>(pos + len)]) ++len;
        if (len > best_len) {
          best_len = len;
          best_dist = pos - cand;
          if (len == limit) break;
        }
        const int next = prev[static_cast<std::size_t>(cand % kWindow)];
        if (next >= cand) break;
        cand = next;
      }
    }
    if (best_len >= kMinMatch) {
      put_match(w, best_len, best_dist);
      for (int i = 0; i < best_len; ++i) insert(pos + i);
      pos += best_len;
    } else {
      put_literal(w, data[static_cast<std::size_t>(pos)]);
      insert(pos);
      ++pos;
    }
  }
  put_literal(w, 256);

  std::vector<std::uint8_t> out = {0x78, 0x01};
  const std::vector<std::uint8_t> body = w.finish();
  out.insert(out.end(), body.begin(), body.end());
  const uLong adler = adler32(1L, data.data(), static_cast<uInt>(data.size()));
  put_u32(out, static_cast<std::uint32_t>(adler));
  return out;
}

std::vector<std::uint8_t> encode_indexed(int width, int height, std::span<const Rgb> palette,
                                         std::span<const std::uint8_t> pixels) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("png: empty image");
  if (palette.empty() || palette.size() > 256) throw std::invalid_argument("png: palette must have 1..256 entries");
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("png: pixel buffer does not match dimensions");
  }
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.insert(ihdr.end(), {8, 3, 0, 0, 0});  // depth 8, palette, deflate, filter 0, no interlace
  put_chunk(out, "IHDR", ihdr);

  std::vector<std::uint8_t> plte;
  for (const Rgb& c : palette) plte.insert(plte.end(), {c.r, c.g, c.b});
  put_chunk(out, "PLTE", plte);

  std::vector<std::uint8_t> raw;
  raw.reserve(pixels.size() + static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const auto row = pixels.subspan(static_cast<std::size_t>(y) * static_cast<std::size_t>(width), static_cast<std::size_t>(width));
    raw.insert(raw.end(), row.begin(), row.end());
  }
  put_chunk(out, "IDAT", zlib_compress(raw));
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace quizforge::png
