#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybridcdn/abr.hpp"

using namespace hybridcdn;

namespace {

std::vector<double> sizes(const Ladder& l) {
  std::vector<double> s;
  for (const auto& r : l) s.push_back(static_cast<double>(segment_bytes(r, 2.0)));
  return s;
}

PlayerState state(double buffer_s, double tput = 0.0) {
  PlayerState p;
  p.buffer_s = buffer_s;
  p.throughput_est_bps = tput;
  return p;
}

}  // namespace

TEST(Bola, UtilitiesStartAtZeroAndIncrease) {
  const auto u = bola_utilities(sizes(default_ladder()));
  EXPECT_EQ(u[0], 0.0);
  for (std::size_t i = 1; i < u.size(); ++i) EXPECT_GT(u[i], u[i - 1]);
  EXPECT_NEAR(u[4], std::log(1054750.0 / 22250.0), 1e-12);
}

TEST(Bola, EmptyBufferPicksLowestRung) {
  EXPECT_EQ(bola_choose(state(0.0), default_ladder(), {}), 0);
}

TEST(Bola, SingleRungLadder) {
  const Ladder l = {default_ladder()[2]};
  Ladder one = l;
  one[0].rung_index = 0;
  for (double b : {0.0, 5.0, 50.0}) EXPECT_EQ(bola_choose(state(b), one, {}), 0);
}

TEST(Bola, HandEnumeratedScores) {
  const auto s = sizes(default_ladder());
  const auto u = bola_utilities(s);
  const BolaParams p;
  for (double q : {0.0, 2.0, 4.5, 5.0, 6.0, 7.0, 8.0, 12.0}) {
    int best = 0;
    for (int m = 1; m < 5; ++m)
      if ((p.v * (u[m] + p.gamma_p) - q) / s[m] > (p.v * (u[best] + p.gamma_p) - q) / s[best]) best = m;
    EXPECT_EQ(bola_choose_sizes(q, s, p), best) << q;
  }
}

TEST(Bola, NonDecreasingInBuffer) {
  const auto s = sizes(default_ladder());
  int prev = 0;
  for (double q = 0.0; q <= 25.0; q += 0.01) {
    const int r = bola_choose_sizes(q, s, {});
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_EQ(prev, 4);
}

TEST(Bola, ScaleInvariant) {
  const auto s = sizes(default_ladder());
  for (double c : {0.001, 0.5, 3.0, 1000.0}) {
    std::vector<double> scaled;
    for (double x : s) scaled.push_back(x * c);
    for (double q = 0.0; q <= 25.0; q += 0.25) EXPECT_EQ(bola_choose_sizes(q, scaled, {}), bola_choose_sizes(q, s, {}));
  }
}

TEST(Hybrid, FullBufferFastLinkTopRung) {
  EXPECT_EQ(hybrid_choose(state(50.0, 10e6), default_ladder(), 0.9), 4);
}

TEST(Hybrid, ThroughputCapsChoice) {
  EXPECT_EQ(hybrid_choose(state(50.0, 1e6), default_ladder(), 0.9), 2);
  EXPECT_EQ(hybrid_choose(state(50.0, 50e3), default_ladder(), 0.9), 0);
  EXPECT_EQ(hybrid_choose(state(50.0, 0.0), default_ladder(), 0.9), 0);
}

TEST(Hybrid, NeverMoreThanOneAboveBola) {
  // 5 buffered segments: BOLA picks rung 1, so the cap is rung 2.
  EXPECT_EQ(bola_choose(state(10.0), default_ladder(), {}), 1);
  EXPECT_EQ(hybrid_choose(state(10.0, 10e6), default_ladder(), 0.9), 2);
}

TEST(Hybrid, LowBufferDemotes) {
  // Under two segments BOLA is at rung 0 so the capped pick is rung 1 and
  // demotion brings it down one.
  EXPECT_EQ(hybrid_choose(state(1.0, 10e6), default_ladder(), 0.9), 0);
  EXPECT_EQ(hybrid_choose(state(4.0, 10e6), default_ladder(), 0.9), 1);
}

TEST(Choosers, AlwaysValidRung) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> buf(0.0, 100.0), tp(1.0, 1e9);
  for (int i = 0; i < 5000; ++i) {
    const auto s = state(buf(rng), tp(rng));
    const int b = bola_choose(s, default_ladder(), {});
    const int h = hybrid_choose(s, default_ladder(), 0.9);
    EXPECT_GE(b, 0);
    EXPECT_LT(b, 5);
    EXPECT_GE(h, 0);
    EXPECT_LT(h, 5);
  }
}

TEST(Throughput, HarmonicMeanOverWindow) {
  ThroughputEstimator est(3);
  EXPECT_EQ(est.estimate_bps(), 0.0);
  est.add(1e6, 1.0);
  est.add(2e6, 1.0);
  est.add(4e6, 1.0);
  EXPECT_NEAR(est.estimate_bps(), 3.0 / (1.0 / 1e6 + 1.0 / 2e6 + 1.0 / 4e6), 1e-6);
  est.add(4e6, 2.0);
  EXPECT_EQ(est.samples(), 3u);
  EXPECT_NEAR(est.estimate_bps(), 3.0 / (1.0 / 2e6 + 1.0 / 4e6 + 1.0 / 2e6), 1e-6);
}

TEST(Abr, NamesRoundTrip) {
  EXPECT_EQ(parse_abr("bola"), AbrKind::Bola);
  EXPECT_EQ(parse_abr("hybrid-proxy"), AbrKind::HybridProxy);
  EXPECT_EQ(to_string(AbrKind::HybridProxy), "hybrid-proxy");
  EXPECT_THROW(parse_abr("squad"), std::invalid_argument);
}
