#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hitrate::internal {

struct RootReport {
  double x = 0.0;
  double residual = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

struct Evaluation {
  double value;      // g(x), increasing in x
  double log_slope;  // x * g'(x) = dg / d(log x)
};

// Root of an increasing function on (0, inf), searched in log x by Newton
// steps kept inside the current bracket, with bisection fallback. `start`
// must be positive; `known_below` (0 if unknown) is a point with g < 0.
// Returns a bracket lo <= x <= hi with g(lo) <= 0 <= g(hi).
template <typename Eval>
RootReport solve_increasing(Eval&& eval, double start, double known_below,
                            double tolerance, int max_iterations) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kMaxLogStep = 4.0;
  double lo = known_below > 0.0 ? std::log(known_below) : -kInf;
  double hi = kInf;
  double s = std::log(start);
  RootReport report;
  Evaluation e{};
  int it = 0;
  for (; it < max_iterations; ++it) {
    e = eval(std::exp(s));
    if (e.value <= 0.0) lo = std::max(lo, s);
    if (e.value >= 0.0) hi = std::min(hi, s);
    if (std::fabs(e.value) <= tolerance) break;
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo <= 4 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::fabs(s))) {
      break;
    }
    double next = s;
    if (e.log_slope > 0.0 && std::isfinite(e.log_slope)) {
      next = s - e.value / e.log_slope;
    } else {
      next = e.value < 0.0 ? s + kMaxLogStep : s - kMaxLogStep;
    }
    if (!std::isfinite(hi)) next = std::min(next, s + kMaxLogStep);
    if (!std::isfinite(lo)) next = std::max(next, s - kMaxLogStep);
    if (std::isfinite(lo) && std::isfinite(hi) && !(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    s = next;
  }
  if (it == max_iterations) throw std::runtime_error("root finder did not converge");
  report.iterations = it + 1;
  report.x = std::exp(s);
  report.residual = e.value;

  // Close the bracket on whichever side Newton never visited.
  double step = std::max(2.0 * std::fabs(e.value) / std::max(e.log_slope, 1e-300),
                         8 * std::numeric_limits<double>::epsilon());
  for (int k = 0; !std::isfinite(hi) && k < 200; ++k, step *= 2.0) {
    ++report.iterations;
    if (eval(std::exp(s + step)).value >= 0.0) hi = s + step;
  }
  step = std::max(2.0 * std::fabs(e.value) / std::max(e.log_slope, 1e-300),
                  8 * std::numeric_limits<double>::epsilon());
  for (int k = 0; !std::isfinite(lo) && k < 200; ++k, step *= 2.0) {
    ++report.iterations;
    if (eval(std::exp(s - step)).value <= 0.0) lo = s - step;
  }
  report.lo = std::exp(lo);
  report.hi = std::exp(hi);
  return report;
}

}  // namespace hitrate::internal
