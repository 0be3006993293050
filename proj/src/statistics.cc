#include "hitrate/statistics.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "hitrate/errors.h"
#include "summation.h"

namespace hitrate {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double kolmogorov_distance_to_normal(std::span<const std::uint64_t> histogram,
                                     double mean, double sd) {
  if (!(sd > 0.0)) throw DomainError("standard deviation must be positive");
  std::uint64_t total = 0;
  for (auto c : histogram) total += c;
  if (total == 0) throw DomainError("empty histogram");
  const double n = static_cast<double>(total);
  double below = 0.0;  // F_n just before the current value
  double worst = 0.0;
  std::uint64_t seen = 0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    if (histogram[k] == 0) continue;
    const double phi = normal_cdf((static_cast<double>(k) - mean) / sd);
    seen += histogram[k];
    const double at = static_cast<double>(seen) / n;
    worst = std::max({worst, std::fabs(below - phi), std::fabs(at - phi)});
    below = at;
  }
  return worst;
}

double kolmogorov_distance_to_normal(std::vector<double> samples, double mean,
                                     double sd) {
  if (!(sd > 0.0)) throw DomainError("standard deviation must be positive");
  if (samples.empty()) throw DomainError("no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double phi = normal_cdf((samples[i] - mean) / sd);
    worst = std::max({worst, std::fabs(static_cast<double>(i) / n - phi),
                      std::fabs(static_cast<double>(i + 1) / n - phi)});
  }
  return worst;
}

double dkw_margin(std::uint64_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("bad DKW arguments");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double lilliefors_critical_1pct(std::uint64_t n) {
  if (n < 30) throw DomainError("asymptotic Lilliefors value needs n >= 30");
  return 1.031 / std::sqrt(static_cast<double>(n));
}

SampleMoments moments(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("need at least two samples");
  internal::CompensatedSum sum;
  for (double x : samples) sum += x;
  const double mean = sum.value() / static_cast<double>(samples.size());
  internal::CompensatedSum sq;
  for (double x : samples) sq += (x - mean) * (x - mean);
  return {mean, sq.value() / static_cast<double>(samples.size() - 1)};
}

}  // namespace hitrate
