#pragma once

#include <cstdint>

namespace quizforge {

// Counter-based stream: output k is the SplitMix64 finaliser applied to
// key + (k + 1) * 0x9E3779B97F4A7C15, with the key hashed from
// (master seed, instance index). Results are identical on every platform
// for the integer draws; variates built on libm (normal, gamma) are as
// portable as the platform's log/sqrt.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double next_uniform();
  // Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  double normal();                 // standard normal by inverse CDF
  double gamma(double shape);      // unit scale, shape > 0
  bool bernoulli(double p);

  // Independent child stream, keyed by `tag`; does not advance this one.
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  bool operator==(const RngStream&) const = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t instance_index);

std::uint64_t splitmix64(std::uint64_t x);

// Wichura's AS241 inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);

}  // namespace quizforge
