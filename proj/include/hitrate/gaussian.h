#pragma once

// Gaussian view of the number X(t) of distinct items requested in a window
// of length t, and the large-catalogue asymptotics for Zipf laws.

#include <cstdint>

#include "hitrate/popularity.h"
#include "hitrate/spectrum.h"

namespace hitrate {

// Upper bound on the constant of the Berry-Esseen inequality for sums of
// independent, non-identically distributed variables.
inline constexpr double kBerryEsseenConstant = 0.56;

// K / sigma(t): bound on sup_x |P((X(t) - m(t)) / sigma(t) <= x) - Phi(x)|.
// Throws DomainError when sigma(t) = 0.
double berry_esseen_bound(const WeightSpectrum& spectrum, double t);
double berry_esseen_bound(const PopularityLaw& law, double t,
                          double epsilon = kDefaultEpsilon);

struct QuadratureOptions {
  double absolute_tolerance = 1e-8;
  unsigned max_depth = 18;
};

// Hit rate of an item with request weight q when X(u) is taken Gaussian:
//   h = 1 - 1/2 int_0^inf erfc((C - m(u)) / (sqrt(2) sigma(u))) q e^{-q u} du.
// Integrated in v = q u over [0, 40]. Throws AccuracyError (carrying the
// estimate) when the subdivision limit is reached first.
double erfc_hit_rate(const WeightSpectrum& spectrum, double capacity, double q,
                     const QuadratureOptions& options = {});
double erfc_hit_rate(const PopularityLaw& law, double capacity, double q,
                     double epsilon = kDefaultEpsilon);

// |erfc_hit_rate - (1 - exp(-q t_C))|: the error of replacing erfc by a step
// at t_C.
double step_function_gap(const WeightSpectrum& spectrum, double capacity, double q,
                         const QuadratureOptions& options = {});
double step_function_gap(const PopularityLaw& law, double capacity, double q,
                         double epsilon = kDefaultEpsilon);

// psi_alpha(beta) = 1 - int_0^1 exp(-beta / x^alpha) dx, the limit of
// m(beta N^alpha) / N for Zipf(alpha).
double psi(double alpha, double beta);
// d psi / d beta = int_0^1 x^-alpha exp(-beta / x^alpha) dx.
double psi_derivative(double alpha, double beta);
// Inverse of psi in beta; delta must lie in (0, 1).
double psi_inverse(double alpha, double delta);

struct ZipfAsymptotics {
  double alpha = 0.0;
  double delta = 0.0;
  std::uint64_t population = 0;
  double psi_inv_delta = 0.0;
  // psi^-1(delta) N^alpha, the leading term of t_C for C = delta N.
  double tc_scale = 0.0;
  // N^(alpha - 1/2) sqrt(psi(2 psi^-1(delta)) - delta) / psi'(psi^-1(delta)),
  // the standard deviation scale of T_C.
  double tc_fluctuation_scale = 0.0;
};

ZipfAsymptotics zipf_asymptotics(double alpha, std::uint64_t population,
                                 double delta);
double tc_asymptotic(double alpha, std::uint64_t population, double delta);
double tc_fluctuation(double alpha, std::uint64_t population, double delta);

struct GeometricAsymptotics {
  double mean_estimate;    // ln t / ln(1/rho)
  double variance_plateau; // ln 2 / ln(1/rho)
};

// Leading behaviour of m(t) and sigma^2(t) for q(n) = rho^n, t > 1.
GeometricAsymptotics geometric_asymptotics(double rho, double t);

}  // namespace hitrate
