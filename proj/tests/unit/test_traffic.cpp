#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wrrnoc/traffic.hpp"

using namespace wrrnoc;

namespace {

// Gap SCV of a batch-Bernoulli stream, sampled cycle by cycle with a
// generator unrelated to the library's.
double sampled_gap_scv(double rate, double p, std::size_t gaps_wanted) {
  std::mt19937 gen(12345);
  std::bernoulli_distribution start(rate * (1.0 - p));
  std::bernoulli_distribution more(p);
  long long last = -1;
  double s1 = 0, s2 = 0;
  std::size_t n = 0;
  for (long long c = 0; n < gaps_wanted; ++c) {
    if (!start(gen)) continue;
    int k = 1;
    while (more(gen)) ++k;
    for (int i = 0; i < k && n < gaps_wanted; ++i) {
      if (last >= 0) {
        const double g = static_cast<double>(c - last);
        s1 += g;
        s2 += g * g;
        ++n;
      }
      last = c;
    }
  }
  const double mean = s1 / static_cast<double>(n);
  return (s2 / static_cast<double>(n) - mean * mean) / (mean * mean);
}

}  // namespace

TEST(ScvFromBurst, BernoulliFloor) {
  EXPECT_NEAR(scv_from_burst({0.5, 0.0}).scv, 0.5, 1e-12);
  EXPECT_NEAR(scv_from_burst({0.1, 0.0}).scv, 0.9, 1e-12);
  EXPECT_DOUBLE_EQ(scv_from_burst({0.1, 0.0}).rate, 0.1);
}

TEST(ScvFromBurst, MatchesMonteCarlo) {
  const double closed = scv_from_burst({0.1, 0.3}).scv;
  const double sampled = sampled_gap_scv(0.1, 0.3, 10'000'000);
  EXPECT_NEAR(sampled, closed, 0.01 * closed);
}

TEST(ScvFromBurst, MonteCarloAcrossGrid) {
  for (double rate : {0.05, 0.3, 0.6})
    for (double p : {0.0, 0.2, 0.5}) {
      const double closed = scv_from_burst({rate, p}).scv;
      EXPECT_NEAR(sampled_gap_scv(rate, p, 2'000'000), closed, 0.02 * closed) << rate << " " << p;
    }
}

TEST(ScvFromBurst, RejectsBadInput) {
  EXPECT_THROW(scv_from_burst({-0.1, 0.0}), InvalidArgument);
  EXPECT_THROW(scv_from_burst({1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(scv_from_burst({0.1, 1.0}), InvalidArgument);
}

TEST(BurstFromScv, InvertsClosedForm) {
  for (double rate : {0.05, 0.2, 0.5})
    for (double p : {0.0, 0.1, 0.3, 0.7}) {
      const auto a = scv_from_burst({rate, p});
      EXPECT_NEAR(burst_from_scv(a).p_burst, p, 1e-12);
    }
  EXPECT_THROW(burst_from_scv({0.5, 0.3}), InvalidArgument);  // below 1 - rate
}

TEST(SampleTrace, ZeroRateIsEmpty) {
  EXPECT_TRUE(sample_trace({0.0, 0.4}, 1000, 3).arrival_cycles.empty());
  EXPECT_THROW(sample_trace({0.1, 0.0}, 0, 3), InvalidArgument);
}

TEST(SampleTrace, BernoulliRateWithinBinomialBound) {
  const auto m = trace_moments(sample_trace({0.5, 0.0}, 1'000'000, 42), 1'000'000);
  // 4 sigma of Binomial(1e6, 0.5) / 1e6 is 0.002.
  EXPECT_GE(m.rate, 0.498);
  EXPECT_LE(m.rate, 0.502);
}

TEST(SampleTrace, BurstyRateAndScvSelfConsistent) {
  const GGeoSpec g{0.1, 0.3};
  const auto m = trace_moments(sample_trace(g, 1'000'000, 7), 1'000'000);
  EXPECT_NEAR(m.rate, 0.1, 0.001);
  const double scv = scv_from_burst(g).scv;
  EXPECT_NEAR(m.gap_scv, scv, 0.02 * scv);
}

TEST(SampleTrace, RateConvergesAcrossGrid) {
  for (double rate : {0.02, 0.25, 0.7})
    for (double p : {0.0, 0.4, 0.8}) {
      const auto m = trace_moments(sample_trace({rate, p}, 1'000'000, 11), 1'000'000);
      EXPECT_NEAR(m.rate, rate, 0.01 * rate + 3.0 * std::sqrt(rate / (1 - p) / 1e6)) << rate << " " << p;
    }
}

TEST(SampleTrace, SeedDeterminism) {
  const auto a = sample_trace({0.2, 0.3}, 50'000, 9);
  const auto b = sample_trace({0.2, 0.3}, 50'000, 9);
  const auto c = sample_trace({0.2, 0.3}, 50'000, 10);
  EXPECT_EQ(a.arrival_cycles, b.arrival_cycles);
  EXPECT_NE(a.arrival_cycles, c.arrival_cycles);
}

TEST(MergeArrivals, Examples) {
  const std::vector<ArrivalSpec> same{{0.2, 1.7}, {0.2, 1.7}};
  EXPECT_NEAR(merge_arrivals(same).rate, 0.4, 1e-12);
  EXPECT_NEAR(merge_arrivals(same).scv, 1.7, 1e-12);

  const std::vector<ArrivalSpec> mixed{{0.1, 1.0}, {0.3, 2.0}};
  EXPECT_NEAR(merge_arrivals(mixed).rate, 0.4, 1e-12);
  EXPECT_NEAR(merge_arrivals(mixed).scv, (0.1 * 1.0 + 0.3 * 2.0) / 0.4, 1e-12);
  EXPECT_NEAR(merge_arrivals(mixed).scv, 1.75, 1e-12);

  const std::vector<ArrivalSpec> single{{0.25, 0.75}};
  EXPECT_DOUBLE_EQ(merge_arrivals(single).rate, 0.25);
  EXPECT_DOUBLE_EQ(merge_arrivals(single).scv, 0.75);

  EXPECT_THROW(merge_arrivals(std::vector<ArrivalSpec>{}), InvalidArgument);
}

TEST(MergeArrivals, AssociativeAndBounded) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> r(0.01, 0.3), c(0.1, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ArrivalSpec a{r(gen), c(gen)}, b{r(gen), c(gen)}, d{r(gen), c(gen)};
    const std::vector<ArrivalSpec> ab{a, b}, bd{b, d}, all{a, b, d};
    const std::vector<ArrivalSpec> left{merge_arrivals(ab), d}, right{a, merge_arrivals(bd)};
    const auto m = merge_arrivals(all);
    EXPECT_NEAR(merge_arrivals(left).scv, m.scv, 1e-12);
    EXPECT_NEAR(merge_arrivals(right).scv, m.scv, 1e-12);
    EXPECT_NEAR(merge_arrivals(left).rate, m.rate, 1e-15);
    EXPECT_GE(m.scv, std::min({a.scv, b.scv, d.scv}) - 1e-12);
    EXPECT_LE(m.scv, std::max({a.scv, b.scv, d.scv}) + 1e-12);
  }
}

TEST(SplitArrivals, ThinningMoments) {
  const auto s = split_arrivals({0.4, 2.0}, 0.25);
  EXPECT_NEAR(s.rate, 0.1, 1e-12);
  EXPECT_NEAR(s.scv, 0.25 * 2.0 + 0.75, 1e-12);
  EXPECT_THROW(split_arrivals({0.4, 2.0}, 1.5), InvalidArgument);
}
