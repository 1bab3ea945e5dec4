#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

#include <boost/random/normal_distribution.hpp>

namespace wfi {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key; the 128-bit counter is split into a 64-bit
/// stream identifier (experiment, replicate) and a 64-bit block index. Two
/// generators with the same seed but different stream ids never share a
/// block, so replicate r of experiment e always sees the same numbers no
/// matter which worker thread runs it.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed = 0, std::uint32_t experiment = 0,
                  std::uint32_t replicate = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_{replicate, experiment} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) {
      refill();
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  void refill() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32),
                                           stream_[0], stream_[1]};
    const auto out = block(ctr, key_);
    ++counter_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
};

using Rng = Philox;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal sampler (ziggurat).
class NormalSource {
 public:
  double operator()(Rng& rng) { return dist_(rng); }

 private:
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

/// Mixes a label into a 32-bit experiment id (FNV-1a), so that named
/// sub-experiments get disjoint streams without a central registry.
inline std::uint32_t experiment_id(std::string_view label, std::uint32_t salt = 0) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ salt;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return static_cast<std::uint32_t>(h ^ (h >> 32));
}

}  // namespace wfi
