#include <gtest/gtest.h>

#include <set>
#include <vector>

#include <wfi/parallel.hpp>
#include <wfi/rng.hpp>

namespace {

using Block = std::array<std::uint32_t, 4>;

TEST(Philox, KnownAnswerZero) {
  const Block out = wfi::Philox::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const Block out =
      wfi::Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const Block out =
      wfi::Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, SameStreamSameNumbers) {
  wfi::Rng a(42, 3, 7);
  wfi::Rng b(42, 3, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Philox, DistinctStreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint32_t e = 0; e < 4; ++e) {
    for (std::uint32_t r = 0; r < 4; ++r) {
      wfi::Rng g(42, e, r);
      firsts.insert(g());
    }
  }
  EXPECT_EQ(firsts.size(), 16u);
}

TEST(Philox, UniformInUnitInterval) {
  wfi::Rng g(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = wfi::uniform01(g);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Philox, NormalMoments) {
  wfi::Rng g(2);
  wfi::NormalSource normal;
  double s1 = 0.0;
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = normal(g);
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  auto run = [](unsigned threads) {
    std::vector<std::uint64_t> out(257);
    wfi::parallel_for(out.size(), threads, [&](std::size_t i) {
      wfi::Rng g(9, 1, static_cast<std::uint32_t>(i));
      out[i] = g() ^ g();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(8));
  EXPECT_EQ(run(1), run(0));
}

TEST(ExperimentId, LabelsSeparate) {
  EXPECT_NE(wfi::experiment_id("a"), wfi::experiment_id("b"));
  EXPECT_EQ(wfi::experiment_id("rate"), wfi::experiment_id("rate"));
  EXPECT_NE(wfi::experiment_id("rate", 0), wfi::experiment_id("rate", 1));
}

}  // namespace
