#include "hitrate/hit_profile.h"

#include <cmath>
#include <string>

#include "hitrate/errors.h"

namespace hitrate {

double HitProfile::hit_for_weight(double q) const {
  switch (model) {
    case Model::kCharacteristicTime:
      return -std::expm1(-q * parameter);
    case Model::kRandomFixedPoint: {
      const double gain = q * parameter;
      return gain / (total_mass - q + gain);
    }
    case Model::kSaturated:
      return 1.0;
    case Model::kTabulated:
      break;
  }
  throw DomainError("tabulated hit profile cannot be evaluated by weight");
}

double HitProfile::hit_at(std::uint64_t rank, double q) const {
  if (model != Model::kTabulated) return hit_for_weight(q);
  if (rank < 1 || rank > tabulated.size()) {
    throw DomainError("rank " + std::to_string(rank) + " outside tabulated profile");
  }
  return tabulated[rank - 1];
}

}  // namespace hitrate
