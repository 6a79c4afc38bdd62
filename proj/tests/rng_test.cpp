#include "ftlab/rng.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace ftlab;

// Known-answer vectors from the Random123 reference distribution.
TEST(Philox, KnownAnswerVectors) {
  const auto r0 = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r0[0], 0x6627e8d5u);
  EXPECT_EQ(r0[1], 0xe169c58du);
  EXPECT_EQ(r0[2], 0xbc57ac4cu);
  EXPECT_EQ(r0[3], 0x9b00dbd8u);

  const auto r1 = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r1[0], 0x408f276du);
  EXPECT_EQ(r1[1], 0x41c83b0eu);
  EXPECT_EQ(r1[2], 0xa20bc7c6u);
  EXPECT_EQ(r1[3], 0x6d5451fdu);

  const auto r2 = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                    {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r2[0], 0xd16cfe09u);
  EXPECT_EQ(r2[1], 0x94fdccebu);
  EXPECT_EQ(r2[2], 0x5001e420u);
  EXPECT_EQ(r2[3], 0x24126ea1u);
}

TEST(RandomStream, DeterministicPerKey) {
  RandomStream a(42), b(42), c(43);
  std::vector<uint32_t> va, vb, vc;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a.next_u32());
    vb.push_back(b.next_u32());
    vc.push_back(c.next_u32());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}

TEST(RandomStream, DoublesInUnitInterval) {
  RandomStream s(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = s.next_double();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 0.01);
  EXPECT_GT(hi, 0.99);
}

TEST(RandomStream, GeometricSkipEdgeCases) {
  RandomStream s(1);
  EXPECT_EQ(s.next_geometric_skip(0.0), UINT64_MAX);
  EXPECT_EQ(s.next_geometric_skip(1.0), 0u);
}

// The skip-sampled scan must fire each position with probability p: compare
// the firing fraction over many scans against the binomial expectation.
TEST(RandomStream, GeometricSkipMatchesBernoulliRate) {
  RandomStream s(99);
  const double p = 0.03;
  const uint64_t n = 200;
  long fires = 0;
  const int scans = 3000;
  for (int scan = 0; scan < scans; ++scan) {
    uint64_t pos = s.next_geometric_skip(p);
    while (pos < n) {
      ++fires;
      const uint64_t gap = s.next_geometric_skip(p);
      if (gap >= n - pos) break;
      pos += 1 + gap;
    }
  }
  const double rate = static_cast<double>(fires) / static_cast<double>(n * scans);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n * scans));
  EXPECT_NEAR(rate, p, 6.0 * sigma);
}
