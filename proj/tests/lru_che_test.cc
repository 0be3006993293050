#include "hitrate/lru_che.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hitrate/errors.h"

namespace hitrate {
namespace {

// Independent oracle: per-item sums and plain bisection on t.
long double brute_m(const std::vector<double>& w, long double t, std::size_t skip = ~0ull) {
  long double m = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != skip) m += -std::expm1(-static_cast<long double>(w[i]) * t);
  }
  return m;
}

double brute_t_c(const std::vector<double>& w, double c, std::size_t skip = ~0ull) {
  long double lo = 0.0L, hi = 1.0L;
  while (brute_m(w, hi, skip) < c) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (brute_m(w, mid, skip) < c ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

std::vector<double> weights(const PopularityLaw& law) {
  std::vector<double> w;
  for (std::uint64_t r = 1; r <= law.population(); ++r) w.push_back(law.weight(r));
  return w;
}

TEST(CharacteristicTime, MatchesBisectionOracle) {
  struct Case {
    PopularityLaw law;
    double capacity;
  };
  const Case cases[] = {{PopularityLaw::zipf(0.8, 10000), 100},
                        {PopularityLaw::zipf(0.8, 10000), 1000},
                        {PopularityLaw::zipf(1.2, 10000), 5000},
                        {PopularityLaw::geometric(0.9, 100), 4},
                        {PopularityLaw::geometric(0.9, 100), 64},
                        {PopularityLaw::explicit_weights({5, 0.1, 3, 3, 0.5, 8}), 2.5}};
  for (const auto& [law, c] : cases) {
    const double oracle = brute_t_c(weights(law), c);
    const auto sol = solve_characteristic_time(law, c, CapacityUnit::kItems, {}, {}, 1e-9);
    EXPECT_NEAR(sol.t_c, oracle, 1e-8 * oracle) << law.describe() << " C " << c;
    EXPECT_LE(sol.t_lo, sol.t_c);
    EXPECT_GE(sol.t_hi, sol.t_c);
    EXPECT_LT(std::fabs(sol.residual), 1e-8 * c);
  }
}

TEST(CharacteristicTime, SpecExamples) {
  // N = 1, q = 1 cannot hold a fractional cache of 0.5 except at t = ln 2.
  EXPECT_NEAR(solve_characteristic_time(PopularityLaw::uniform(1), 0.5).t_c, std::log(2.0),
              1e-15);
  // Uniform: t_C = -ln(1 - C/N) / q.
  EXPECT_NEAR(solve_characteristic_time(PopularityLaw::uniform(100), 50).t_c, std::log(2.0),
              1e-15);
}

TEST(CharacteristicTime, UniformHitRateIsExact) {
  for (std::uint64_t n : {10ull, 100ull, 12345ull}) {
    const auto law = PopularityLaw::uniform(n);
    for (double c : {1.0, 0.5 * n, n - 1.0}) {
      const auto sol = solve_characteristic_time(law, c);
      const std::uint64_t ranks[] = {1, n};
      const auto p = lru_hit_profile(law, sol, ranks);
      for (double h : p.hit) EXPECT_NEAR(h, c / n, 1e-12);
      EXPECT_NEAR(p.overall, c / n, 1e-12);
    }
  }
}

TEST(CharacteristicTime, SaturationAndDomain) {
  const auto law = PopularityLaw::zipf(0.8, 100);
  EXPECT_THROW(solve_characteristic_time(law, 100), CapacitySaturated);
  EXPECT_THROW(solve_characteristic_time(law, 150), CapacitySaturated);
  EXPECT_THROW(solve_characteristic_time(law, 0), DomainError);
  EXPECT_THROW(solve_characteristic_time(law, -1), DomainError);
  try {
    solve_characteristic_time(law, 120);
  } catch (const CapacitySaturated& e) {
    EXPECT_EQ(e.capacity(), 120);
    EXPECT_EQ(e.catalogue(), 100);
  }
}

TEST(CharacteristicTime, IncreasesWithCapacity) {
  const WeightSpectrum s(PopularityLaw::zipf(0.8, 10000));
  double prev = 0.0;
  for (double c = 1; c < 10000; c *= 1.7) {
    const double t = solve_characteristic_time(s, c).t_c;
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(CharacteristicTime, ScalesInverselyWithWeights) {
  const auto a = PopularityLaw::explicit_weights({4, 2, 1, 1});
  const auto b = PopularityLaw::explicit_weights({40, 20, 10, 10});
  EXPECT_NEAR(solve_characteristic_time(a, 2).t_c, 10 * solve_characteristic_time(b, 2).t_c,
              1e-12);
}

TEST(CharacteristicTime, ExcludingOneItem) {
  const auto law = PopularityLaw::zipf(0.8, 1000);
  const auto w = weights(law);
  for (std::uint64_t rank : {1ull, 10ull, 1000ull}) {
    const double oracle = brute_t_c(w, 100, rank - 1);
    const double t = solve_characteristic_time_excluding(law, 100, rank, {}, 1e-9).t_c;
    EXPECT_NEAR(t, oracle, 1e-8 * oracle);
    EXPECT_GT(t, solve_characteristic_time(law, 100).t_c);
  }
}

TEST(CharacteristicTime, VariableSizesMatchChunkExpansion) {
  // An object of size s is the same as s chunks of its weight.
  const auto law = PopularityLaw::explicit_weights({3.0, 1.0, 0.5});
  const double sizes[] = {2.0, 1.0, 4.0};
  const auto chunks = PopularityLaw::explicit_weights({3.0, 3.0, 1.0, 0.5, 0.5, 0.5, 0.5});
  const double c = 3.5;
  const double sized = solve_characteristic_time(law, c, CapacityUnit::kChunks, sizes).t_c;
  EXPECT_NEAR(sized, solve_characteristic_time(chunks, c).t_c, 1e-12);
  EXPECT_NEAR(sized, brute_t_c({3.0, 3.0, 1.0, 0.5, 0.5, 0.5, 0.5}, c), 1e-9);
}

TEST(Occupancy, VarianceIdentity) {
  for (const auto& law : {PopularityLaw::zipf(0.8, 10000), PopularityLaw::geometric(0.9, 100),
                          PopularityLaw::uniform(50),
                          PopularityLaw::explicit_weights({1, 7, 0.3, 2})}) {
    const WeightSpectrum s(law);
    for (double t : {0.01, 1.0, 37.0, 1e3, 1e5}) {
      const double lhs = occupancy_variance(s, t);
      const double rhs = mean_occupancy(s, 2 * t) - mean_occupancy(s, t);
      // m(2t) - m(t) cancels near saturation; allow its rounding on top.
      const double rounding = 8 * std::numeric_limits<double>::epsilon() * s.item_count();
      EXPECT_NEAR(lhs, rhs, 1e-12 * lhs + rounding) << law.describe() << " t " << t;
    }
  }
}

TEST(Occupancy, MatchesPerItemSums) {
  const auto law = PopularityLaw::zipf(0.8, 200000);
  const WeightSpectrum s(law, 1e-6);
  const auto w = weights(law);
  for (double t : {1.0, 100.0, 10000.0}) {
    const double exact = static_cast<double>(brute_m(w, t));
    EXPECT_NEAR(mean_occupancy(s, t), exact, 1e-7 * exact);
  }
}

TEST(Occupancy, SlopeIsDerivative) {
  const WeightSpectrum s(PopularityLaw::zipf(1.2, 5000));
  const double t = 50.0, h = 1e-4;
  const double fd = (mean_occupancy(s, t + h) - mean_occupancy(s, t - h)) / (2 * h);
  EXPECT_NEAR(occupancy_slope(s, t), fd, 1e-6 * fd);
}

TEST(HitProfile, FollowsCheFormula) {
  const auto law = PopularityLaw::zipf(0.8, 10000);
  const WeightSpectrum s(law);
  const auto sol = solve_characteristic_time(s, 1000);
  const std::uint64_t ranks[] = {1, 10, 100, 1000};
  const auto p = lru_hit_profile(law, s, sol, ranks);
  ASSERT_EQ(p.hit.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(p.hit[i], -std::expm1(-law.weight(ranks[i]) * sol.t_c));
    if (i) EXPECT_LT(p.hit[i], p.hit[i - 1]);
  }
  EXPECT_GT(p.overall, 1000.0 / 10000.0);
  EXPECT_LT(p.overall, 1.0);
}

TEST(HitProfile, SumOfHitRatesIsCapacity) {
  const auto law = PopularityLaw::geometric(0.9, 100);
  const auto sol = solve_characteristic_time(law, 16);
  double total = 0.0;
  for (std::uint64_t r = 1; r <= 100; ++r) total += -std::expm1(-law.weight(r) * sol.t_c);
  EXPECT_NEAR(total, 16.0, 1e-8);
}

TEST(HitProfile, SaturatedIsOne) {
  const auto law = PopularityLaw::zipf(0.8, 10);
  const std::uint64_t ranks[] = {1, 10};
  const auto p = saturated_profile(law, ranks);
  EXPECT_EQ(p.overall, 1.0);
  for (double h : p.hit) EXPECT_EQ(h, 1.0);
}

}  // namespace
}  // namespace hitrate
