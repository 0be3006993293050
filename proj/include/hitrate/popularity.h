#pragma once

// Popularity laws: unnormalized per-item request weights q(n) over ranks
// 1..N, with parametric kinds that are never materialized so catalogues of
// 10^11 objects (10^12 chunks) stay tractable.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hitrate/hit_profile.h"

namespace hitrate {

// Default grouping tolerance: within one rank segment the largest weight is
// at most (1 + epsilon) times the smallest.
inline constexpr double kDefaultEpsilon = 1e-6;

enum class LawKind { kZipf, kGeometric, kUniform, kExplicit, kMixture, kFiltered };

const char* to_string(LawKind kind);

namespace detail {
struct LawNode;
}

struct MixtureComponent;

// Immutable, cheap to copy (shared state). Safe to read concurrently.
class PopularityLaw {
 public:
  // q(n) = 1 / n^alpha.
  static PopularityLaw zipf(double alpha, std::uint64_t population);
  // q(n) = rho^n.
  static PopularityLaw geometric(double rho, std::uint64_t population);
  // q(n) = 1.
  static PopularityLaw uniform(std::uint64_t population);
  // Arbitrary positive weights, rank n has weights[n - 1]. Order is free.
  static PopularityLaw explicit_weights(std::vector<double> weights);
  // Disjoint union of component universes. Component i contributes
  // population_i * chunks_per_item_i ranks and total mass share_i; every
  // chunk of one item carries the same weight.
  static PopularityLaw mixture(std::vector<MixtureComponent> components);
  // q'(n) = q(n) (1 - h(n)). Items whose hit rate is exactly 1 are dropped
  // from the universe (tabulated profiles only; model profiles keep h < 1).
  static PopularityLaw filtered(PopularityLaw base, HitProfile hits);

  LawKind kind() const;
  std::uint64_t population() const;

  // q(rank); throws DomainError unless 1 <= rank <= population().
  double weight(std::uint64_t rank) const;

  // Nonincreasing in rank (within each component for mixtures).
  bool monotone() const;

  // Kind parameters. Each throws DomainError on the wrong kind.
  double alpha() const;
  double rho() const;
  std::span<const double> explicit_values() const;
  const std::vector<MixtureComponent>& components() const;
  const PopularityLaw& base() const;
  const HitProfile& hits() const;
  // For tabulated filters: base rank of each surviving item.
  std::span<const std::uint64_t> survivor_ranks() const;

  // Sum of q(n) over the universe. Closed form for parametric kinds,
  // compensated summation for explicit, bucketed for model filters.
  double mass() const;

  // Continuous extension of q for parametric kinds, used to pick segment
  // representatives. Falls back to weight(round(x)) otherwise.
  double weight_at(double rank) const;

  std::string describe() const;

 private:
  explicit PopularityLaw(std::shared_ptr<const detail::LawNode> node);

  std::shared_ptr<const detail::LawNode> node_;

  friend const detail::LawNode& node_of(const PopularityLaw& law);
};

struct MixtureComponent {
  double share = 0.0;
  PopularityLaw law;
  std::uint64_t chunks_per_item = 1;
};

// One content class of a traffic mix.
struct ContentType {
  std::string name;
  double share = 0.0;                // fraction p_i of requested traffic
  std::uint64_t population = 0;      // objects N_i
  std::uint64_t chunk_count = 1;     // chunks per object theta_i
  double zipf_alpha = 0.8;

  bool operator==(const ContentType&) const = default;
};

struct TrafficMix {
  std::vector<ContentType> types;

  // Throws ValidationError: empty list, shares outside (0,1], shares not
  // summing to 1 within 1e-9, zero populations or chunk counts, alpha <= 0.
  void validate() const;
  std::uint64_t total_chunks() const;

  bool operator==(const TrafficMix&) const = default;
};

// The mix from the reference ICN traffic study: web, file sharing, UGC, VoD.
TrafficMix internet_traffic_mix();

// Chunk-level law for the mix. Item universe is every (type, object, chunk)
// triple in type order; weights sum to 1.
PopularityLaw build_mix_law(const TrafficMix& mix);

// Exact q_i(n, k) from the chunk popularity formula, independent of
// build_mix_law; `type` is 0-based, `object` is 1-based.
double mix_chunk_weight(const TrafficMix& mix, std::size_t type,
                        std::uint64_t object);

PopularityLaw filter_law(const PopularityLaw& law, const HitProfile& hits);

// Generalized harmonic number sum_{n=1}^{count} n^-alpha. Exact summation
// for small counts, Euler-Maclaurin tail beyond.
double zipf_partial_sum(double alpha, std::uint64_t count);

// Partition of [1, N] into rank segments.
struct RankSegmentation {
  // 1 = breakpoints[0] < ... < breakpoints[J] = N + 1. Segment j covers
  // [breakpoints[j], breakpoints[j + 1]).
  std::vector<std::uint64_t> breakpoints;
  std::vector<double> q_lo;
  std::vector<double> q_hi;
  std::vector<double> q_rep;

  std::size_t size() const { return q_lo.size(); }
  std::uint64_t length(std::size_t j) const {
    return breakpoints[j + 1] - breakpoints[j];
  }
};

struct Segment {
  std::uint64_t first = 0;  // inclusive
  std::uint64_t last = 0;   // inclusive
  double q_first = 0.0;
  double q_last = 0.0;
  double q_rep = 0.0;
};

// Streams the segmentation without materializing it. Segments come in rank
// order.
void for_each_segment(const PopularityLaw& law, double epsilon,
                      const std::function<void(const Segment&)>& fn);

// Materialized segmentation. Every segment satisfies q_hi <= (1+eps) q_lo;
// non-monotone explicit laws get one segment per item.
RankSegmentation segment(const PopularityLaw& law, double epsilon);

// Sum of q(n) computed from the bucketed representation.
double total_mass(const PopularityLaw& law, double epsilon = kDefaultEpsilon);

// Sum of the `budget` largest weights (fractional budgets take the matching
// fraction of the next item). Divided by total_mass this is the request
// fraction a static LFU cache of that size captures.
double sorted_top_mass(const PopularityLaw& law, double budget,
                       double epsilon = kDefaultEpsilon);

}  // namespace hitrate
