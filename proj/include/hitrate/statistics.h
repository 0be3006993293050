#pragma once

// Goodness-of-fit helpers for comparing Monte-Carlo samples with normal
// approximations.

#include <cstdint>
#include <span>
#include <vector>

namespace hitrate {

double normal_cdf(double x);
// Two-sided standard normal quantile for confidence level `level`, e.g.
// 0.95 -> 1.95996.
double normal_quantile(double p);

// sup_x |F_n(x) - Phi((x - mean) / sd)| for integer-valued samples given as a
// histogram (histogram[k] = number of samples equal to k).
double kolmogorov_distance_to_normal(std::span<const std::uint64_t> histogram,
                                     double mean, double sd);

// The same for real-valued samples (any order).
double kolmogorov_distance_to_normal(std::vector<double> samples, double mean,
                                     double sd);

// Dvoretzky-Kiefer-Wolfowitz: with probability 1 - alpha the empirical CDF
// of n samples is within this distance of the true CDF.
double dkw_margin(std::uint64_t n, double alpha);

// Asymptotic 1% critical value of the Kolmogorov statistic when the normal's
// mean and deviation are estimated from the same sample (Lilliefors).
double lilliefors_critical_1pct(std::uint64_t n);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};
SampleMoments moments(std::span<const double> samples);

}  // namespace hitrate
