#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ftlab {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Output contract, so that seeds are portable across implementations:
// stream(key) produces 32-bit words b(0)[0..3], b(1)[0..3], ... where
// b(n) = philox4x32_10(counter = {lo32(n), hi32(n), 0, 0},
//                      key     = {lo32(key), hi32(key)}),
// and uniform doubles are built from consecutive word pairs as
// ((hi << 32 | lo) >> 11) * 2^-53, giving values in [0, 1).
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

// A single deterministic stream of uniforms keyed by a 64-bit seed.
// Independent streams come from distinct keys (e.g. seed + trial index).
class RandomStream {
 public:
  explicit RandomStream(uint64_t key)
      : key_{static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)} {}

  uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = Philox4x32::block({static_cast<uint32_t>(block_index_),
                                static_cast<uint32_t>(block_index_ >> 32), 0u, 0u},
                               key_);
      ++block_index_;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(next_double() * static_cast<double>(n)) % n;
  }

  // Bernoulli(p).
  bool next_bernoulli(double p) { return next_double() < p; }

  // Number of failures before visiting the next success in a Bernoulli(p)
  // scan; used to skip over non-firing sites without drawing one uniform
  // per site. Returns a huge value when p == 0.
  uint64_t next_geometric_skip(double p) {
    if (p <= 0.0) return UINT64_MAX;
    if (p >= 1.0) return 0;
    const double u = 1.0 - next_double();  // u in (0, 1]
    return static_cast<uint64_t>(std::log(u) / std::log1p(-p));
  }

  uint64_t block_index() const { return block_index_; }

 private:
  std::array<uint32_t, 2> key_;
  uint64_t block_index_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace ftlab
