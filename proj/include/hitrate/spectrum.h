#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hitrate/popularity.h"

namespace hitrate {

// The multiset of request weights of a law, grouped by rank segment. Every
// analytic quantity in this library is a sum over items of a function of
// the item's weight, so it is evaluated once per group, scaled by the number
// of items the group stands for.
//
// Explicit laws are kept item by item (exact). Parametric laws use the
// rank segmentation at `epsilon` with a midpoint representative weight.
class WeightSpectrum {
 public:
  // A range of groups whose weights are nonincreasing when `sorted`.
  struct Run {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool sorted = false;
  };

  explicit WeightSpectrum(const PopularityLaw& law,
                          double epsilon = kDefaultEpsilon);

  // Item-by-item spectrum with per-item sizes theta(n), for capacities in
  // size units. Requires sizes.size() == law.population().
  WeightSpectrum(const PopularityLaw& law, std::span<const double> sizes);

  std::size_t groups() const { return weight_.size(); }
  std::span<const double> weights() const { return weight_; }
  std::span<const double> counts() const { return count_; }
  // Capacity consumed by each group: counts() unless sizes were given.
  std::span<const double> sizes() const {
    return size_.empty() ? std::span<const double>(count_)
                         : std::span<const double>(size_);
  }
  bool has_sizes() const { return !size_.empty(); }
  const std::vector<Run>& runs() const { return runs_; }

  double item_count() const { return item_count_; }
  double size_total() const { return size_total_; }
  double mass() const { return mass_; }
  double max_weight() const { return max_weight_; }
  double epsilon() const { return epsilon_; }
  // Exactly equal weights everywhere: uniform laws, where closed forms apply.
  bool uniform() const { return uniform_; }

 private:
  void finish();

  std::vector<double> weight_;
  std::vector<double> count_;
  std::vector<double> size_;
  std::vector<Run> runs_;
  double item_count_ = 0.0;
  double size_total_ = 0.0;
  double mass_ = 0.0;
  double max_weight_ = 0.0;
  double epsilon_ = 0.0;
  bool uniform_ = false;
};

// Sum of the `budget` largest weights of the spectrum.
double top_mass(const WeightSpectrum& spectrum, double budget);

}  // namespace hitrate
