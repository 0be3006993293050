#include "hitrate/random_replacement.h"

#include <cmath>
#include <string>

#include "hitrate/errors.h"
#include "root_finding.h"

namespace hitrate {

namespace {

struct Occupancy {
  double mean;
  double log_slope;  // tau * d/dtau
};

Occupancy occupancy(const WeightSpectrum& spectrum, double tau) {
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  const double total = spectrum.mass();
  long double mean = 0.0L;
  long double slope = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double rest = total - w[i];
    const double gain = w[i] * tau;
    const double denom = rest + gain;
    const double h = gain / denom;
    mean += c[i] * h;
    slope += c[i] * h * (rest / denom);
  }
  return {static_cast<double>(mean), static_cast<double>(slope)};
}

void check(const WeightSpectrum& spectrum, double capacity) {
  if (spectrum.has_sizes()) {
    throw DomainError("random replacement fixed point is defined for unit sizes");
  }
  if (spectrum.item_count() < 2.0) {
    throw DomainError("random replacement needs at least two items");
  }
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw DomainError("capacity must be positive, got " + std::to_string(capacity));
  }
  if (capacity >= spectrum.item_count()) {
    throw CapacitySaturated(capacity, spectrum.item_count());
  }
}

}  // namespace

double random_occupancy(const WeightSpectrum& spectrum, double tau) {
  if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
  return occupancy(spectrum, tau).mean;
}

RandomSolution solve_random_fixed_point(const WeightSpectrum& spectrum,
                                        double capacity,
                                        const SolverOptions& options) {
  check(spectrum, capacity);
  RandomSolution sol;
  sol.capacity = capacity;
  const double n = spectrum.item_count();
  // Exact for equal weights: h = tau / (N - 1 + tau) = C / N.
  const double symmetric = capacity * (n - 1.0) / (n - capacity);
  auto eval = [&](double tau) {
    const Occupancy o = occupancy(spectrum, tau);
    return internal::Evaluation{o.mean - capacity, o.log_slope};
  };
  if (spectrum.uniform()) {
    sol.tau = sol.tau_lo = sol.tau_hi = symmetric;
    sol.residual = eval(symmetric).value;
    sol.iterations = 1;
    return sol;
  }
  const double start = options.initial_guess > 0.0 ? options.initial_guess : symmetric;
  const double tolerance =
      std::max(options.relative_tolerance * capacity, options.absolute_tolerance);
  const auto report =
      internal::solve_increasing(eval, start, 0.0, tolerance, options.max_iterations);
  sol.tau = report.x;
  sol.residual = report.residual;
  sol.tau_lo = report.lo;
  sol.tau_hi = report.hi;
  sol.iterations = report.iterations;
  return sol;
}

RandomSolution solve_random_fixed_point(const PopularityLaw& law, double capacity,
                                        const SolverOptions& options,
                                        double epsilon) {
  return solve_random_fixed_point(WeightSpectrum(law, epsilon), capacity, options);
}

HitProfile random_hit_profile(const PopularityLaw& law,
                              const WeightSpectrum& spectrum,
                              const RandomSolution& solution,
                              std::span<const std::uint64_t> ranks) {
  HitProfile p;
  p.model = HitProfile::Model::kRandomFixedPoint;
  p.population = law.population();
  p.parameter = solution.tau;
  p.total_mass = spectrum.mass();
  for (std::uint64_t r : ranks) {
    p.ranks.push_back(r);
    p.hit.push_back(p.hit_for_weight(law.weight(r)));
  }
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  long double hits = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    hits += c[i] * w[i] * p.hit_for_weight(w[i]);
  }
  p.overall = static_cast<double>(hits) / spectrum.mass();
  return p;
}

HitProfile random_hit_profile(const PopularityLaw& law,
                              const RandomSolution& solution,
                              std::span<const std::uint64_t> ranks,
                              double epsilon) {
  return random_hit_profile(law, WeightSpectrum(law, epsilon), solution, ranks);
}

}  // namespace hitrate
