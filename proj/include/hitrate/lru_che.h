#pragma once

// LRU hit rates from the characteristic time t_C: the root of
//   sum_n theta(n) (1 - exp(-q(n) t)) = C,
// after which object n hits with probability 1 - exp(-q(n) t_C).

#include <cstdint>
#include <span>

#include "hitrate/hit_profile.h"
#include "hitrate/popularity.h"
#include "hitrate/spectrum.h"

namespace hitrate {

enum class CapacityUnit { kItems, kChunks };

const char* to_string(CapacityUnit unit);

struct SolverOptions {
  // Stop when |residual| <= max(relative_tolerance * C, absolute_tolerance).
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  int max_iterations = 200;
  // Warm start for sweeps; ignored unless positive.
  double initial_guess = 0.0;
};

struct CheSolution {
  double t_c = 0.0;
  // m(t_C) - C.
  double residual = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int iterations = 0;
  double capacity = 0.0;
  CapacityUnit units = CapacityUnit::kItems;
};

// m(t): expected number of distinct items (or their total size) requested in
// a window of length t.
double mean_occupancy(const WeightSpectrum& spectrum, double t);
double mean_occupancy(const PopularityLaw& law, double t,
                      double epsilon = kDefaultEpsilon);

// sigma^2(t) = sum_n e^{-q t} (1 - e^{-q t}), the variance of that count.
double occupancy_variance(const WeightSpectrum& spectrum, double t);
double occupancy_variance(const PopularityLaw& law, double t,
                          double epsilon = kDefaultEpsilon);

// dm/dt.
double occupancy_slope(const WeightSpectrum& spectrum, double t);

// Throws CapacitySaturated when C reaches the catalogue size and DomainError
// for C <= 0.
CheSolution solve_characteristic_time(const WeightSpectrum& spectrum,
                                      double capacity,
                                      CapacityUnit units = CapacityUnit::kItems,
                                      const SolverOptions& options = {});
CheSolution solve_characteristic_time(const PopularityLaw& law, double capacity,
                                      CapacityUnit units = CapacityUnit::kItems,
                                      std::span<const double> sizes = {},
                                      const SolverOptions& options = {},
                                      double epsilon = kDefaultEpsilon);

// t_C(n): the same equation with the item at `rank` left out of the sum.
CheSolution solve_characteristic_time_excluding(
    const WeightSpectrum& spectrum, double capacity, double excluded_weight,
    double excluded_size = 1.0, const SolverOptions& options = {});
CheSolution solve_characteristic_time_excluding(
    const PopularityLaw& law, double capacity, std::uint64_t rank,
    const SolverOptions& options = {}, double epsilon = kDefaultEpsilon);

// Hit rates at `ranks` plus the request-weighted overall hit rate.
HitProfile lru_hit_profile(const PopularityLaw& law,
                           const WeightSpectrum& spectrum,
                           const CheSolution& solution,
                           std::span<const std::uint64_t> ranks);
HitProfile lru_hit_profile(const PopularityLaw& law, const CheSolution& solution,
                           std::span<const std::uint64_t> ranks,
                           double epsilon = kDefaultEpsilon);

// Profile for a capacity holding everything: h = 1 at every rank.
HitProfile saturated_profile(const PopularityLaw& law,
                             std::span<const std::uint64_t> ranks);

}  // namespace hitrate
