#pragma once

#include <stdexcept>
#include <string>

namespace hitrate {

// Argument outside the mathematical domain of an operation (rank out of
// range, delta outside (0,1), mismatched rank universes, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed configuration: traffic shares, scenario fields, simulator config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested capacity holds the whole catalogue. Every hit rate is 1 and
// the characteristic equation has no finite root.
class CapacitySaturated : public std::runtime_error {
 public:
  CapacitySaturated(double capacity, double catalogue)
      : std::runtime_error("capacity " + std::to_string(capacity) +
                           " saturates a catalogue of " +
                           std::to_string(catalogue)),
        capacity_(capacity),
        catalogue_(catalogue) {}

  double capacity() const { return capacity_; }
  double catalogue() const { return catalogue_; }

 private:
  double capacity_;
  double catalogue_;
};

// Adaptive quadrature hit its subdivision limit before reaching the target.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}

  double estimate() const { return estimate_; }
  double error_bound() const { return error_; }

 private:
  double estimate_;
  double error_;
};

}  // namespace hitrate
