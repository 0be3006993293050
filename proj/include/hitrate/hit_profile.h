#pragma once

#include <cstdint>
#include <vector>

namespace hitrate {

// Hit rates over a rank universe. Analytic profiles are closed-form functions
// of an item's request weight; simulated profiles are tabulated per rank.
struct HitProfile {
  enum class Model {
    kCharacteristicTime,  // h = 1 - exp(-q t_C)
    kRandomFixedPoint,    // h = q tau / (S - q + q tau)
    kTabulated,           // h read from `tabulated`, indexed by rank - 1
    kSaturated,           // h = 1 everywhere
  };

  Model model = Model::kTabulated;
  std::uint64_t population = 0;
  // t_C for kCharacteristicTime, tau_C for kRandomFixedPoint.
  double parameter = 0.0;
  // Total request weight S of the law the profile was solved on.
  double total_mass = 0.0;
  std::vector<double> tabulated;

  // Evaluation points and their hit rates.
  std::vector<std::uint64_t> ranks;
  std::vector<double> hit;
  // Request-weighted mean hit rate over the whole universe.
  double overall = 0.0;

  // Hit rate of an item whose request weight is `q`. Not meaningful for
  // tabulated profiles.
  double hit_for_weight(double q) const;

  // Hit rate of the item at `rank` with request weight `q`.
  double hit_at(std::uint64_t rank, double q) const;

  bool tabulated_only() const { return model == Model::kTabulated; }
};

}  // namespace hitrate
