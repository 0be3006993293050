#include "hitrate/spectrum.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hitrate/errors.h"
#include "summation.h"

namespace hitrate {

namespace {

bool tabulated(const PopularityLaw& law) {
  return law.kind() == LawKind::kExplicit ||
         (law.kind() == LawKind::kFiltered &&
          law.hits().model == HitProfile::Model::kTabulated);
}

}  // namespace

WeightSpectrum::WeightSpectrum(const PopularityLaw& law, double epsilon)
    : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("grouping tolerance must be positive");
  if (tabulated(law)) {
    const std::uint64_t n = law.population();
    weight_.reserve(n);
    for (std::uint64_t r = 1; r <= n; ++r) weight_.push_back(law.weight(r));
    count_.assign(n, 1.0);
  } else {
    for_each_segment(law, epsilon, [this](const Segment& s) {
      weight_.push_back(s.q_rep);
      count_.push_back(static_cast<double>(s.last - s.first + 1));
    });
  }
  finish();
}

WeightSpectrum::WeightSpectrum(const PopularityLaw& law,
                               std::span<const double> sizes)
    : epsilon_(0.0) {
  const std::uint64_t n = law.population();
  if (sizes.size() != n) {
    throw DomainError("size vector length " + std::to_string(sizes.size()) +
                      " differs from population " + std::to_string(n));
  }
  weight_.reserve(n);
  for (std::uint64_t r = 1; r <= n; ++r) {
    const double theta = sizes[r - 1];
    if (!(theta > 0.0) || !std::isfinite(theta)) {
      throw DomainError("object sizes must be positive");
    }
    weight_.push_back(law.weight(r));
  }
  count_.assign(n, 1.0);
  size_.assign(sizes.begin(), sizes.end());
  finish();
}

void WeightSpectrum::finish() {
  internal::CompensatedSum items, total_size, mass;
  const auto sz = sizes();
  for (std::size_t i = 0; i < weight_.size(); ++i) {
    items += count_[i];
    total_size += sz[i];
    mass += count_[i] * weight_[i];
  }
  item_count_ = items.value();
  size_total_ = total_size.value();
  mass_ = mass.value();
  max_weight_ = weight_.empty() ? 0.0
                                : *std::max_element(weight_.begin(), weight_.end());
  uniform_ = !weight_.empty() &&
             std::all_of(weight_.begin(), weight_.end(),
                         [&](double w) { return w == weight_.front(); });
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= weight_.size(); ++i) {
    if (i == weight_.size() || weight_[i] > weight_[i - 1]) {
      runs_.push_back(Run{begin, i, true});
      begin = i;
    }
  }
}

double top_mass(const WeightSpectrum& spectrum, double budget) {
  if (!(budget >= 0.0)) throw DomainError("budget must be nonnegative");
  if (budget > spectrum.item_count() * (1.0 + 1e-12)) {
    throw DomainError("budget exceeds the population");
  }
  const auto w = spectrum.weights();
  const auto c = spectrum.counts();
  const auto& runs = spectrum.runs();
  internal::CompensatedSum mass;
  double remaining = budget;

  constexpr std::size_t kMaxMergeRuns = 16;
  if (runs.size() > kMaxMergeRuns) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    for (std::size_t i : order) {
      if (remaining <= 0.0) break;
      const double take = std::min(c[i], remaining);
      mass += take * w[i];
      remaining -= take;
    }
    return mass.value();
  }

  // k-way merge of the sorted runs; ties go to the earlier run.
  std::vector<std::size_t> head(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) head[r] = runs[r].begin;
  while (remaining > 0.0) {
    std::size_t best = runs.size();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (head[r] == runs[r].end) continue;
      if (best == runs.size() || w[head[r]] > w[head[best]]) best = r;
    }
    if (best == runs.size()) break;
    const std::size_t i = head[best]++;
    const double take = std::min(c[i], remaining);
    mass += take * w[i];
    remaining -= take;
  }
  return mass.value();
}

double sorted_top_mass(const PopularityLaw& law, double budget, double epsilon) {
  if (!(budget >= 0.0) || budget > static_cast<double>(law.population())) {
    throw DomainError("budget must lie in [0, population]");
  }
  return top_mass(WeightSpectrum(law, epsilon), budget);
}

}  // namespace hitrate
