#pragma once

// Random replacement (equivalently FIFO) hit rates. Item n hits with
// probability h(n) = q(n) tau / (S - q(n) + q(n) tau), S the total weight,
// where the dimensionless constant tau solves sum_n h(n) = C.

#include <cstdint>
#include <span>

#include "hitrate/hit_profile.h"
#include "hitrate/lru_che.h"
#include "hitrate/popularity.h"
#include "hitrate/spectrum.h"

namespace hitrate {

struct RandomSolution {
  double tau = 0.0;
  // sum_n h(n) - C.
  double residual = 0.0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  int iterations = 0;
  double capacity = 0.0;
};

// Expected number of cached items, sum_n h(n; tau).
double random_occupancy(const WeightSpectrum& spectrum, double tau);

RandomSolution solve_random_fixed_point(const WeightSpectrum& spectrum,
                                        double capacity,
                                        const SolverOptions& options = {});
RandomSolution solve_random_fixed_point(const PopularityLaw& law, double capacity,
                                        const SolverOptions& options = {},
                                        double epsilon = kDefaultEpsilon);

HitProfile random_hit_profile(const PopularityLaw& law,
                              const WeightSpectrum& spectrum,
                              const RandomSolution& solution,
                              std::span<const std::uint64_t> ranks);
HitProfile random_hit_profile(const PopularityLaw& law,
                              const RandomSolution& solution,
                              std::span<const std::uint64_t> ranks,
                              double epsilon = kDefaultEpsilon);

}  // namespace hitrate
