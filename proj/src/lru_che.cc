#include "hitrate/lru_che.h"

#include <cmath>
#include <string>

#include "hitrate/errors.h"
#include "root_finding.h"

namespace hitrate {

namespace {

struct Occupancy {
  double mean;
  double slope;  // dm/dt
};

Occupancy occupancy(const WeightSpectrum& spectrum, double t) {
  const auto w = spectrum.weights();
  const auto size = spectrum.sizes();
  long double mean = 0.0L;
  long double slope = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double em1 = std::expm1(-w[i] * t);
    mean -= size[i] * em1;
    slope += size[i] * w[i] * (1.0 + em1);
  }
  return {static_cast<double>(mean), static_cast<double>(slope)};
}

double tolerance_for(double capacity, const SolverOptions& options) {
  return std::max(options.relative_tolerance * capacity, options.absolute_tolerance);
}

void check_capacity(double capacity, double catalogue) {
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw DomainError("capacity must be positive, got " + std::to_string(capacity));
  }
  if (capacity >= catalogue) throw CapacitySaturated(capacity, catalogue);
}

// Solves m(t) - excluded(t) = C. `excluded_weight` 0 means nothing excluded.
CheSolution solve(const WeightSpectrum& spectrum, double capacity,
                  CapacityUnit units, double excluded_weight,
                  double excluded_size, const SolverOptions& options) {
  const double catalogue =
      spectrum.size_total() - (excluded_weight > 0.0 ? excluded_size : 0.0);
  check_capacity(capacity, catalogue);

  CheSolution sol;
  sol.capacity = capacity;
  sol.units = units;

  // Total size-weighted request rate bounds m(t) <= rate * t.
  double rate = 0.0;
  {
    const auto w = spectrum.weights();
    const auto size = spectrum.sizes();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) acc += size[i] * w[i];
    rate = static_cast<double>(acc) - excluded_weight * excluded_size;
  }

  auto eval = [&](double t) {
    Occupancy o = occupancy(spectrum, t);
    if (excluded_weight > 0.0) {
      const double em1 = std::expm1(-excluded_weight * t);
      o.mean += excluded_size * em1;
      o.slope -= excluded_size * excluded_weight * (1.0 + em1);
    }
    return internal::Evaluation{o.mean - capacity, t * o.slope};
  };

  if (spectrum.uniform() && excluded_weight == 0.0) {
    const double t = -std::log1p(-capacity / spectrum.size_total()) /
                     spectrum.max_weight();
    const auto e = eval(t);
    sol.t_c = sol.t_lo = sol.t_hi = t;
    sol.residual = e.value;
    sol.iterations = 1;
    return sol;
  }

  const double below = capacity / rate;
  const double start = options.initial_guess > 0.0 ? options.initial_guess : below;
  const auto report =
      internal::solve_increasing(eval, start, below, tolerance_for(capacity, options),
                                 options.max_iterations);
  sol.t_c = report.x;
  sol.residual = report.residual;
  sol.t_lo = report.lo;
  sol.t_hi = report.hi;
  sol.iterations = report.iterations;
  return sol;
}

}  // namespace

const char* to_string(CapacityUnit unit) {
  return unit == CapacityUnit::kItems ? "items" : "chunks";
}

double mean_occupancy(const WeightSpectrum& spectrum, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  return occupancy(spectrum, t).mean;
}

double mean_occupancy(const PopularityLaw& law, double t, double epsilon) {
  return mean_occupancy(WeightSpectrum(law, epsilon), t);
}

double occupancy_slope(const WeightSpectrum& spectrum, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  return occupancy(spectrum, t).slope;
}

double occupancy_variance(const WeightSpectrum& spectrum, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  long double var = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double em1 = std::expm1(-w[i] * t);
    var -= c[i] * (1.0 + em1) * em1;
  }
  return static_cast<double>(var);
}

double occupancy_variance(const PopularityLaw& law, double t, double epsilon) {
  return occupancy_variance(WeightSpectrum(law, epsilon), t);
}

CheSolution solve_characteristic_time(const WeightSpectrum& spectrum,
                                      double capacity, CapacityUnit units,
                                      const SolverOptions& options) {
  return solve(spectrum, capacity, units, 0.0, 0.0, options);
}

CheSolution solve_characteristic_time(const PopularityLaw& law, double capacity,
                                      CapacityUnit units,
                                      std::span<const double> sizes,
                                      const SolverOptions& options,
                                      double epsilon) {
  if (sizes.empty()) {
    return solve_characteristic_time(WeightSpectrum(law, epsilon), capacity, units,
                                     options);
  }
  return solve_characteristic_time(WeightSpectrum(law, sizes), capacity, units,
                                   options);
}

CheSolution solve_characteristic_time_excluding(const WeightSpectrum& spectrum,
                                                double capacity,
                                                double excluded_weight,
                                                double excluded_size,
                                                const SolverOptions& options) {
  if (!(excluded_weight > 0.0)) throw DomainError("excluded weight must be positive");
  return solve(spectrum, capacity, CapacityUnit::kItems, excluded_weight,
               excluded_size, options);
}

CheSolution solve_characteristic_time_excluding(const PopularityLaw& law,
                                                double capacity, std::uint64_t rank,
                                                const SolverOptions& options,
                                                double epsilon) {
  const double q = law.weight(rank);
  return solve_characteristic_time_excluding(WeightSpectrum(law, epsilon), capacity,
                                             q, 1.0, options);
}

HitProfile lru_hit_profile(const PopularityLaw& law, const WeightSpectrum& spectrum,
                           const CheSolution& solution,
                           std::span<const std::uint64_t> ranks) {
  HitProfile p;
  p.model = HitProfile::Model::kCharacteristicTime;
  p.population = law.population();
  p.parameter = solution.t_c;
  p.total_mass = spectrum.mass();
  for (std::uint64_t r : ranks) {
    p.ranks.push_back(r);
    p.hit.push_back(p.hit_for_weight(law.weight(r)));
  }
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  long double hits = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    hits -= c[i] * w[i] * std::expm1(-w[i] * solution.t_c);
  }
  p.overall = static_cast<double>(hits) / spectrum.mass();
  return p;
}

HitProfile lru_hit_profile(const PopularityLaw& law, const CheSolution& solution,
                           std::span<const std::uint64_t> ranks, double epsilon) {
  return lru_hit_profile(law, WeightSpectrum(law, epsilon), solution, ranks);
}

HitProfile saturated_profile(const PopularityLaw& law,
                             std::span<const std::uint64_t> ranks) {
  HitProfile p;
  p.model = HitProfile::Model::kSaturated;
  p.population = law.population();
  p.total_mass = law.mass();
  p.ranks.assign(ranks.begin(), ranks.end());
  p.hit.assign(ranks.size(), 1.0);
  p.overall = 1.0;
  return p;
}

}  // namespace hitrate
