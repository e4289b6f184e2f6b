#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "wrrnoc/arbiter_analysis.hpp"

using namespace wrrnoc;

namespace {

std::vector<TrafficClassSpec> classes(std::initializer_list<double> rates, double scv = 1.0) {
  std::vector<TrafficClassSpec> out;
  for (double r : rates) out.push_back({{r, scv}, 1});
  return out;
}

// Smaller root of a x^2 - x + c = 0.
double small_root(double a, double c) { return (1.0 - std::sqrt(1.0 - 4.0 * a * c)) / (2.0 * a); }

// Maximum-entropy total occupancy, written out independently.
double me_oracle(const std::vector<double>& l, const std::vector<double>& u,
                 const std::vector<double>& ca, const std::vector<double>& cs) {
  double lsum = 0, usum = 0, first = 0, inner = 0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    lsum += l[k];
    usum += u[k];
    first += u[k] * (ca[k] - 1);
    inner += u[k] * u[k] * (ca[k] + cs[k]) / l[k];
  }
  return 0.5 * (first + lsum * inner / (1 - usum));
}

// Discrete-time unit-service queue fed by independent batch-Bernoulli
// streams; returns the mean number of packets waiting (not in service).
double queue_oracle(const std::vector<double>& rates, const std::vector<double>& scvs,
                    long cycles) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> start, more;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double p = 1.0 - 2.0 / (scvs[i] + rates[i] + 1.0);
    more.push_back(p);
    start.push_back(rates[i] * (1.0 - p));
  }
  double wait_sum = 0, served = 0;
  std::deque<long> fifo;
  for (long c = 0; c < cycles; ++c) {
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (u(gen) >= start[i]) continue;
      fifo.push_back(c);
      while (u(gen) < more[i]) fifo.push_back(c);
    }
    if (!fifo.empty()) {
      wait_sum += static_cast<double>(c - fifo.front());
      served += 1;
      fifo.pop_front();
    }
  }
  double total = 0;
  for (double r : rates) total += r;
  return total * wait_sum / served;  // Little's law
}

}  // namespace

TEST(RrEffectiveService, ZeroLoadIsRawService) {
  const auto t = rr_effective_service(classes({0.0, 0.0}), {1.0, 0.0});
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t[0].mean, 1.0);
  EXPECT_DOUBLE_EQ(t[1].mean, 1.0);
}

TEST(RrEffectiveService, TwoClassQuadraticRoot) {
  const double expect = small_root(0.0625, 1.0);
  EXPECT_NEAR(expect, (1 - std::sqrt(0.75)) / 0.125, 1e-15);
  const auto t = rr_effective_service(classes({0.25, 0.25}), {1.0, 0.0});
  EXPECT_NEAR(t[0].mean, expect, 1e-9);
  EXPECT_NEAR(t[1].mean, expect, 1e-9);
  EXPECT_NEAR(t[0].mean, 1.0718, 1e-4);
}

TEST(RrEffectiveService, ThreeClassQuadraticRoot) {
  const double expect = small_root(0.08, 1.0);
  const auto t = rr_effective_service(classes({0.2, 0.2, 0.2}), {1.0, 0.0});
  for (const auto& e : t) {
    EXPECT_NEAR(e.mean, expect, 1e-9);
    // substitution into the fixed-point relation
    EXPECT_NEAR(1.0 + (0.2 * e.mean) * 2 * (0.2 * e.mean), e.mean, 1e-9);
  }
  EXPECT_NEAR(t[0].mean, 1.0961, 1e-4);
}

TEST(RrEffectiveService, RejectsWeightsAndSaturation) {
  auto c = classes({0.1, 0.1});
  c[0].weight = 2;
  EXPECT_THROW(rr_effective_service(c, {1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(rr_effective_service(classes({0.6, 0.5}), {1.0, 0.0}), SaturatedError);
}

TEST(WrrEffectiveService, ZeroLoad) {
  auto c = classes({0.0, 0.0});
  c[0].weight = 2;
  const auto t = wrr_effective_service(c, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(t[0].batch_mean, 2.0);
  EXPECT_DOUBLE_EQ(t[1].batch_mean, 1.0);
  EXPECT_DOUBLE_EQ(t[0].mean, 1.0);
  EXPECT_DOUBLE_EQ(t[1].mean, 1.0);
}

TEST(WrrEffectiveService, UnitWeightsMatchRoundRobin) {
  const auto c = classes({0.25, 0.25});
  const auto w = wrr_effective_service(c, {1.0, 0.0});
  const auto r = rr_effective_service(c, {1.0, 0.0});
  EXPECT_EQ(w[0].mean, r[0].mean);
  EXPECT_EQ(w[1].mean, r[1].mean);
}

TEST(WrrEffectiveService, WeightedFixedPoint) {
  auto c = classes({0.2, 0.2});
  c[0].weight = 2;
  const auto t = wrr_effective_service(c, {1.0, 0.0});
  // class 0: x = 2 + (1/2)(0.2x)(0.2x)
  const double x0 = small_root(0.02, 2.0);
  EXPECT_NEAR(t[0].batch_mean, x0, 1e-9);
  EXPECT_LT(std::abs(2 + 0.5 * (0.2 * t[0].batch_mean) * (0.2 * t[0].batch_mean) - t[0].batch_mean), 1e-6);
  EXPECT_NEAR(t[0].mean, x0 / 2, 1e-9);
  // class 1: x = 1 + (0.2x)(1.5 * 0.2x), H(2) = 1.5
  const double x1 = small_root(0.06, 1.0);
  EXPECT_NEAR(t[1].batch_mean, x1, 1e-9);
}

TEST(WrrEffectiveService, IterationBoundsAndTolerance) {
  auto c = classes({0.3, 0.3, 0.2});
  c[0].weight = 3;
  SolverOptions opt;
  const auto t = wrr_effective_service(c, {1.0, 0.0}, opt);
  for (const auto& e : t) {
    EXPECT_GE(e.iterations, 0);
    EXPECT_LE(e.iterations, opt.max_iterations);
  }
  SolverOptions bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(wrr_effective_service(c, {1.0, 0.0}, bad), InvalidArgument);
}

TEST(MeOccupancy, SingleClass) {
  const double n = me_total_occupancy(classes({0.5}), {1.0, 0.0});
  EXPECT_NEAR(n, 0.25, 1e-12);
  EXPECT_NEAR(n, 0.5 * 0.5 / (2 * 0.5), 1e-12);
}

TEST(MeOccupancy, EmptySystem) {
  EXPECT_EQ(me_total_occupancy(classes({0.0, 0.0, 0.0}), {1.0, 0.0}), 0.0);
}

TEST(MeOccupancy, TwoClass) {
  const double n = me_total_occupancy(classes({0.2, 0.2}), {1.0, 0.0});
  EXPECT_NEAR(n, 2 * 0.5 * (0.08 / 0.6), 1e-12);
  EXPECT_NEAR(n, me_oracle({0.2, 0.2}, {0.2, 0.2}, {1, 1}, {0, 0}), 1e-12);
}

TEST(MeOccupancy, MatchesQueueSimulation) {
  const double one = me_total_occupancy(classes({0.5}), {1.0, 0.0});
  EXPECT_NEAR(queue_oracle({0.5}, {1.0}, 4'000'000), one, 0.05 * one);
  const double two = me_total_occupancy(classes({0.2, 0.2}), {1.0, 0.0});
  EXPECT_NEAR(queue_oracle({0.2, 0.2}, {1.0, 1.0}, 4'000'000), two, 0.05 * two);
}

TEST(RrResidual, SingleClass) {
  EffectiveService e{1.0, 1.0, 0.0, 0.5, 0.0};
  EXPECT_NEAR(rr_residual(classes({0.5}), std::vector{e}, 0.25), 0.25, 1e-12);
}

TEST(RrResidual, ZeroNumerator) {
  const auto c = classes({0.2, 0.3});
  std::vector<EffectiveService> e{{1.2, 1.2, 0, 0.24, 0.2}, {1.1, 1.1, 0, 0.33, 0.1}};
  const double n = 0.2 * 0.2 + 0.3 * 0.1;
  EXPECT_NEAR(rr_residual(c, e, n), 0.0, 1e-15);
  bool neg = false;
  EXPECT_EQ(rr_residual(c, e, n - 0.01, &neg), 0.0);
  EXPECT_TRUE(neg);
}

TEST(RrResidual, LittleRoundTrip) {
  const auto c = classes({0.25, 0.25});
  const double th = small_root(0.0625, 1.0);
  const double n = me_total_occupancy(c, {1.0, 0.0});
  std::vector<EffectiveService> e(2, EffectiveService{th, th, 0.0, 0.25 * th, th - 1.0});
  const double r = rr_residual(c, e, n);
  double back = 0;
  for (int i = 0; i < 2; ++i) back += 0.25 * (r / (1 - 0.25 * th) + (th - 1.0));
  EXPECT_NEAR(back, n, 1e-12);
}

TEST(RrScv, DeterministicSingleClass) {
  EffectiveService e{1.0, 1.0, 0.0, 0.5, 0.0};
  EXPECT_NEAR(rr_scv({{0.5, 1.0}, 1}, e, 0.25), 0.0, 1e-12);
}

TEST(RrScv, ClampsNegative) {
  EffectiveService e{1.0, 1.0, 0.0, 0.5, 0.0};
  bool clamped = false;
  EXPECT_EQ(rr_scv({{0.5, 3.0}, 1}, e, 0.0, &clamped), 0.0);
  EXPECT_TRUE(clamped);
}

TEST(RrScv, SymmetricClassesAgree) {
  const auto sol = solve_arbiter(classes({0.25, 0.25}), {1.0, 0.0}, ArbitrationMode::RoundRobin);
  EXPECT_DOUBLE_EQ(sol.per_class[0].service.scv, sol.per_class[1].service.scv);
  EXPECT_DOUBLE_EQ(sol.per_class[0].waiting, sol.per_class[1].waiting);
}

TEST(WrrScv, DegenerateUpperBounds) {
  const auto c = classes({0.2, 0.2});
  std::vector<EffectiveService> e(2, EffectiveService{1.1, 1.1, 0, 0.22, 0.1});
  const auto fit = wrr_scv(c, e, std::vector<double>{0.0, 0.0}, 0.1);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.alpha, 0.0);
  EXPECT_EQ(fit.scv[0], 0.0);
  EXPECT_EQ(fit.scv[1], 0.0);
}

TEST(WrrScv, BackSubstitutionReproducesOccupancy) {
  auto c = classes({0.2, 0.2});
  c[0].weight = 3;
  const auto sol = solve_arbiter(c, {1.0, 0.0});
  const auto rr = solve_arbiter(c, {1.0, 0.0}, ArbitrationMode::RoundRobin);
  ASSERT_FALSE(sol.diagnostics.degenerate_alpha);
  // The linear solve itself, before clamping.
  const double a = sol.diagnostics.unclamped_alpha;
  std::vector<double> l, u, ca, cs;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double w = c[k].weight;
    l.push_back(c[k].arrival.rate);
    u.push_back(sol.per_class[k].service.utilization);
    ca.push_back(c[k].arrival.scv);
    cs.push_back(a * rr.per_class[k].service.scv / (w * w));
  }
  EXPECT_NEAR(me_oracle(l, u, ca, cs), sol.n_sum, 1e-9);
  EXPECT_NEAR(sol.n_sum, rr.n_sum, 1e-15);
  EXPECT_DOUBLE_EQ(sol.alpha, std::clamp(a, 0.0, 1.0));
  EXPECT_EQ(sol.diagnostics.alpha_clamped, a < 0.0 || a > 1.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double w = c[k].weight;
    EXPECT_NEAR(sol.per_class[k].service.scv, sol.alpha * rr.per_class[k].service.scv / (w * w), 1e-15);
  }
}

TEST(WrrScv, InteriorAlphaReproducesOccupancy) {
  // Light, smooth traffic: the fitted alpha lands inside [0, 1].
  auto c = classes({0.05, 0.05}, 0.8);
  c[0].weight = 3;
  const auto sol = solve_arbiter(c, {1.0, 0.0});
  ASSERT_FALSE(sol.diagnostics.alpha_clamped);
  std::vector<double> l, u, ca, cs;
  for (std::size_t k = 0; k < c.size(); ++k) {
    l.push_back(c[k].arrival.rate);
    u.push_back(sol.per_class[k].service.utilization);
    ca.push_back(c[k].arrival.scv);
    cs.push_back(sol.per_class[k].service.scv);
  }
  EXPECT_GT(sol.alpha, 0.0);
  EXPECT_LT(sol.alpha, 1.0);
  EXPECT_NEAR(me_oracle(l, u, ca, cs), sol.n_sum, 1e-9);
}

TEST(WaitingTime, Examples) {
  EXPECT_DOUBLE_EQ(waiting_time({{0.0, 1.0}, 1}, {1.3, 1.3, 0.0, 0.0, 0.3}), 0.3);
  EffectiveService e{1.0, 1.0, 0.0, 0.5, 0.0};
  EXPECT_NEAR(waiting_time({{0.5, 1.0}, 1}, e), 0.5, 1e-12);
  EXPECT_NEAR(waiting_time({{0.5, 1.0}, 1}, e), 0.25 / 0.5, 1e-12);
}

TEST(DepartureScv, Limits) {
  EffectiveService idle{1, 1, 0.7, 0.0, 0};
  EXPECT_DOUBLE_EQ(departure_scv({{0.0, 1.6}, 1}, idle), 1.6);
  EffectiveService full{1, 1, 0.7, 1.0, 0};
  EXPECT_NEAR(departure_scv({{0.9, 1.6}, 1}, full), 0.7, 1e-12);
  EffectiveService half{1, 1, 0.0, 0.5, 0};
  EXPECT_NEAR(departure_scv({{0.5, 1.0}, 1}, half), 0.75, 1e-12);
}

TEST(SolveArbiter, SingleClass) {
  const auto sol = solve_arbiter(classes({0.5}), {1.0, 0.0});
  EXPECT_NEAR(sol.per_class[0].waiting, 0.5, 1e-12);
  EXPECT_NEAR(sol.n_sum, 0.25, 1e-12);
  EXPECT_NEAR(sol.merged_departure_scv, 0.75, 1e-12);
}

TEST(SolveArbiter, AllZeroRates) {
  auto c = classes({0.0, 0.0});
  c[0].arrival.scv = 0.5;
  c[1].arrival.scv = 1.5;
  const auto sol = solve_arbiter(c, {1.0, 0.0});
  EXPECT_EQ(sol.n_sum, 0.0);
  EXPECT_EQ(sol.per_class[0].waiting, 0.0);
  EXPECT_EQ(sol.per_class[1].waiting, 0.0);
  EXPECT_DOUBLE_EQ(sol.merged_departure_scv, 1.0);
}

TEST(SolveArbiter, HigherWeightDoesNotHurtItsClass) {
  for (double l : {0.1, 0.2, 0.3}) {
    auto c = classes({l, l});
    const auto rr = solve_arbiter(c, {1.0, 0.0});
    c[0].weight = 3;
    const auto wrr = solve_arbiter(c, {1.0, 0.0});
    EXPECT_LE(wrr.per_class[0].waiting, rr.per_class[0].waiting + 1e-12) << l;
  }
}

TEST(SolveArbiter, WeightedModeWithUnitWeightsIsRoundRobin) {
  const auto c = classes({0.3, 0.1, 0.2}, 1.4);
  const auto a = solve_arbiter(c, {1.0, 0.3}, ArbitrationMode::Weighted);
  const auto b = solve_arbiter(c, {1.0, 0.3}, ArbitrationMode::RoundRobin);
  EXPECT_EQ(a.alpha, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(a.per_class[i].waiting, b.per_class[i].waiting);
    EXPECT_EQ(a.per_class[i].service.scv, b.per_class[i].service.scv);
  }
}

TEST(SolveArbiter, SaturationAndValidation) {
  EXPECT_THROW(solve_arbiter(classes({0.6, 0.5}), {1.0, 0.0}), SaturatedError);
  EXPECT_THROW(solve_arbiter(classes({-0.1}), {1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(solve_arbiter(classes({0.1}), {0.0, 0.0}), InvalidArgument);
  try {
    solve_arbiter(classes({0.3, 0.8}), {1.0, 0.0});
    FAIL();
  } catch (const SaturatedError& e) {
    EXPECT_GE(e.site().utilization, 1.0);
  }
}

TEST(SolveArbiter, OutputRanges) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> r(0.0, 0.3), c(0.2, 3.0);
  std::uniform_int_distribution<int> w(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TrafficClassSpec> cl(3);
    for (auto& x : cl) x = {{r(gen), c(gen)}, w(gen)};
    try {
      const auto sol = solve_arbiter(cl, {1.0, 0.0});
      EXPECT_GE(sol.n_sum, 0.0);
      EXPECT_GE(sol.residual, 0.0);
      EXPECT_GE(sol.merged_departure_scv, 0.0);
      for (const auto& pc : sol.per_class) {
        EXPECT_GE(pc.service.scv, 0.0);
        EXPECT_GE(pc.service.delta, 0.0);
        EXPECT_GE(pc.service.utilization, 0.0);
        EXPECT_LT(pc.service.utilization, 1.0);
        EXPECT_GE(pc.waiting, pc.service.delta);
      }
    } catch (const SaturatedError&) {
    }
  }
}

TEST(SolveArbiter, LittleIdentitySingleClass) {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) {
        const double l = 0.05 + 0.09 * i;
        const double ca = 0.1 + 0.3 * j;
        const double cs = 0.2 * k;
        const auto sol = solve_arbiter(classes({l}, ca), {1.0, cs});
        EXPECT_NEAR(l * sol.per_class[0].waiting, sol.n_sum, 1e-12) << l << " " << ca << " " << cs;
      }
}
