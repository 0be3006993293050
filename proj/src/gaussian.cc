#include "hitrate/gaussian.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "hitrate/errors.h"
#include "hitrate/lru_che.h"
#include "root_finding.h"

namespace hitrate {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

// Adaptive Gauss-Kronrod over [a, b]; the integrands here have L1 norm of
// order one, so the relative goal doubles as an absolute one.
template <typename F>
double integrate(F&& f, double a, double b, double tolerance, unsigned max_depth,
                 const char* what) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = Kronrod::integrate(f, a, b, max_depth, tolerance, &error, &l1);
  if (error > tolerance * std::max(1.0, l1)) {
    throw AccuracyError(std::string(what) + ": quadrature error " +
                            std::to_string(error) + " above target",
                        value, error);
  }
  return value;
}

constexpr double kPsiTolerance = 1e-14;
constexpr unsigned kPsiDepth = 20;

// x = e^-s maps (0, 1] to [0, inf); the boundary layer near
// x = beta^(1/alpha) lands at s = -ln(beta) / alpha.
double psi_knee(double alpha, double beta) {
  return std::max(0.0, -std::log(beta) / alpha);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("zipf exponent must be positive");
  }
}

}  // namespace

double berry_esseen_bound(const WeightSpectrum& spectrum, double t) {
  const double var = occupancy_variance(spectrum, t);
  if (!(var > 0.0)) throw DomainError("sigma(t) = 0: Berry-Esseen bound undefined");
  return kBerryEsseenConstant / std::sqrt(var);
}

double berry_esseen_bound(const PopularityLaw& law, double t, double epsilon) {
  return berry_esseen_bound(WeightSpectrum(law, epsilon), t);
}

double erfc_hit_rate(const WeightSpectrum& spectrum, double capacity, double q,
                     const QuadratureOptions& options) {
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("q must be positive");
  if (!(capacity > 0.0 && capacity < spectrum.item_count())) {
    throw DomainError("erfc hit rate needs 0 < C < N");
  }
  constexpr double kUpper = 40.0;
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  auto integrand = [&](double v) {
    const double u = v / q;
    long double mean = 0.0L;
    long double var = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double em1 = std::expm1(-w[i] * u);
      mean -= c[i] * em1;
      var -= c[i] * (1.0 + em1) * em1;
    }
    const double gap = capacity - static_cast<double>(mean);
    const double sigma = std::sqrt(static_cast<double>(std::max(var, 0.0L)));
    double tail;  // P(X(u) > C) under the Gaussian model
    if (sigma > 0.0) {
      tail = 0.5 * std::erfc(gap / (std::numbers::sqrt2 * sigma));
    } else {
      tail = gap > 0.0 ? 0.0 : (gap < 0.0 ? 1.0 : 0.5);
    }
    return tail * std::exp(-v);
  };
  const double knee =
      std::min(kUpper, q * solve_characteristic_time(spectrum, capacity).t_c);
  const double integral =
      integrate(integrand, 0.0, knee, options.absolute_tolerance, options.max_depth,
                "erfc hit rate") +
      integrate(integrand, knee, kUpper, options.absolute_tolerance,
                options.max_depth, "erfc hit rate");
  return 1.0 - integral;
}

double erfc_hit_rate(const PopularityLaw& law, double capacity, double q,
                     double epsilon) {
  return erfc_hit_rate(WeightSpectrum(law, epsilon), capacity, q);
}

double step_function_gap(const WeightSpectrum& spectrum, double capacity, double q,
                         const QuadratureOptions& options) {
  const double gaussian = erfc_hit_rate(spectrum, capacity, q, options);
  const double t_c = solve_characteristic_time(spectrum, capacity).t_c;
  return std::fabs(gaussian + std::expm1(-q * t_c));
}

double step_function_gap(const PopularityLaw& law, double capacity, double q,
                         double epsilon) {
  return step_function_gap(WeightSpectrum(law, epsilon), capacity, q);
}

double psi(double alpha, double beta) {
  check_alpha(alpha);
  if (!(beta >= 0.0)) throw DomainError("psi needs beta >= 0");
  if (beta == 0.0) return 0.0;
  if (std::isinf(beta)) return 1.0;
  auto f = [&](double s) { return -std::expm1(-beta * std::exp(alpha * s)) * std::exp(-s); };
  const double knee = psi_knee(alpha, beta);
  // Past knee + span the factor 1 - exp(-beta e^{alpha s}) is 1 to double
  // precision and the rest of the integral is e^-s exactly.
  const double span = (std::log(40.0) + 1.0) / alpha;
  const double end = knee + span;
  return integrate(f, 0.0, knee, kPsiTolerance, kPsiDepth, "psi") +
         integrate(f, knee, end, kPsiTolerance, kPsiDepth, "psi") + std::exp(-end);
}

double psi_derivative(double alpha, double beta) {
  check_alpha(alpha);
  if (!(beta > 0.0)) throw DomainError("psi derivative needs beta > 0");
  auto f = [&](double s) { return std::exp((alpha - 1.0) * s - beta * std::exp(alpha * s)); };
  const double knee = psi_knee(alpha, beta);
  const double end = knee + (std::log(60.0) + 1.0) / alpha;
  return integrate(f, 0.0, knee, kPsiTolerance, kPsiDepth, "psi derivative") +
         integrate(f, knee, end, kPsiTolerance, kPsiDepth, "psi derivative");
}

double psi_inverse(double alpha, double delta) {
  check_alpha(alpha);
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("psi inverse needs delta in (0, 1), got " + std::to_string(delta));
  }
  auto eval = [&](double beta) {
    return internal::Evaluation{psi(alpha, beta) - delta,
                                beta * psi_derivative(alpha, beta)};
  };
  return internal::solve_increasing(eval, 1.0, 0.0, 1e-14, 400).x;
}

ZipfAsymptotics zipf_asymptotics(double alpha, std::uint64_t population,
                                 double delta) {
  if (population == 0) throw DomainError("population must be positive");
  ZipfAsymptotics z;
  z.alpha = alpha;
  z.delta = delta;
  z.population = population;
  z.psi_inv_delta = psi_inverse(alpha, delta);
  const double n = static_cast<double>(population);
  z.tc_scale = z.psi_inv_delta * std::pow(n, alpha);
  const double spread = psi(alpha, 2.0 * z.psi_inv_delta) - delta;
  z.tc_fluctuation_scale = std::pow(n, alpha - 0.5) * std::sqrt(spread) /
                           psi_derivative(alpha, z.psi_inv_delta);
  return z;
}

double tc_asymptotic(double alpha, std::uint64_t population, double delta) {
  return psi_inverse(alpha, delta) * std::pow(static_cast<double>(population), alpha);
}

double tc_fluctuation(double alpha, std::uint64_t population, double delta) {
  return zipf_asymptotics(alpha, population, delta).tc_fluctuation_scale;
}

GeometricAsymptotics geometric_asymptotics(double rho, double t) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  if (!(t > 1.0)) throw DomainError("geometric asymptotics need t > 1");
  const double scale = -std::log(rho);
  return {std::log(t) / scale, std::numbers::ln2 / scale};
}

}  // namespace hitrate
