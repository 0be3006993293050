#pragma once

// Monte-Carlo ground truth under the independent reference model: request
// streams drawn i.i.d. from a popularity law, replayed against real caches.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hitrate/popularity.h"

namespace hitrate {

inline constexpr std::uint64_t kMaxSimulatedPopulation = 1u << 22;
inline constexpr std::uint64_t kMinRequestsPerEstimate = 100;

enum class Policy { kLru, kRandom, kFifo, kLfuStatic };
const char* to_string(Policy policy);

// Walker alias table over a normalized law; O(1) per draw.
class AliasSampler {
 public:
  explicit AliasSampler(const std::vector<double>& weights);
  // Zero-based item index.
  std::uint32_t operator()(std::mt19937_64& rng) const;
  std::size_t size() const { return accept_.size(); }

 private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

// Item ids are zero-based and dense in [0, population).
class LruCache {
 public:
  LruCache(std::uint32_t capacity, std::uint32_t population);
  // Returns true on a hit. On a miss the item is inserted at the front,
  // evicting the back when full.
  bool access(std::uint32_t id);
  bool contains(std::uint32_t id) const { return resident_[id]; }
  std::uint32_t size() const { return size_; }
  // Resident ids, most recent first.
  std::vector<std::uint32_t> order() const;

 private:
  static constexpr std::uint32_t kNil = ~std::uint32_t{0};
  void unlink(std::uint32_t id);
  void push_front(std::uint32_t id);

  std::uint32_t capacity_;
  std::uint32_t size_ = 0;
  std::uint32_t head_ = kNil;
  std::uint32_t tail_ = kNil;
  std::vector<std::uint32_t> prev_;
  std::vector<std::uint32_t> next_;
  std::vector<bool> resident_;
};

class RandomCache {
 public:
  RandomCache(std::uint32_t capacity, std::uint32_t population);
  bool access(std::uint32_t id, std::mt19937_64& rng);
  bool contains(std::uint32_t id) const { return slot_[id] != kNil; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(items_.size()); }

 private:
  static constexpr std::uint32_t kNil = ~std::uint32_t{0};
  std::uint32_t capacity_;
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> slot_;
};

class FifoCache {
 public:
  FifoCache(std::uint32_t capacity, std::uint32_t population);
  bool access(std::uint32_t id);
  bool contains(std::uint32_t id) const { return resident_[id]; }
  std::uint32_t size() const { return size_; }

 private:
  std::uint32_t capacity_;
  std::uint32_t size_ = 0;
  std::uint32_t head_ = 0;  // oldest entry in ring_
  std::vector<std::uint32_t> ring_;
  std::vector<bool> resident_;
};

// Holds the `capacity` heaviest items, ties going to the lower rank.
class StaticCache {
 public:
  StaticCache(std::uint32_t capacity, const std::vector<double>& weights);
  bool access(std::uint32_t id) const { return resident_[id]; }
  bool contains(std::uint32_t id) const { return resident_[id]; }

 private:
  std::vector<bool> resident_;
};

struct SimConfig {
  PopularityLaw law = PopularityLaw::uniform(1);
  Policy policy = Policy::kLru;
  std::uint64_t capacity = 0;
  // Total stream length, warmup included.
  std::uint64_t requests = 0;
  // Defaults to max(10 C, 10^6) when unset.
  std::optional<std::uint64_t> warmup;
  std::uint64_t seed = 0;

  std::uint64_t effective_warmup() const;
  // Throws ValidationError.
  void validate() const;
};

struct SimEstimate {
  std::vector<std::uint64_t> requests;  // indexed by rank - 1
  std::vector<std::uint64_t> hits;
  std::uint64_t total_requests = 0;
  std::uint64_t total_hits = 0;
  double overall = 0.0;
  // From batch means over the measured window, so correlation between
  // successive requests is accounted for.
  double overall_halfwidth = 0.0;

  double hit_rate(std::uint64_t rank) const;
  // 95% normal-approximation half-width.
  double halfwidth(std::uint64_t rank) const;
  // At least kMinRequestsPerEstimate requests observed.
  bool reportable(std::uint64_t rank) const;
};

SimEstimate run_cache_sim(const SimConfig& config);

struct TandemEstimate {
  SimEstimate level1;
  SimEstimate level2;
  // Per-rank counts of level-1 misses over the measured window.
  std::vector<std::uint64_t> misses;

  // Misses of `rank` per level-1 request: estimates p(n)(1 - h1(n)).
  double miss_frequency(std::uint64_t rank) const;
  double miss_halfwidth(std::uint64_t rank) const;
};

// Level 1 of capacity c1 (possibly 0) feeds its misses to level 2 of
// capacity c2; both run `policy`.
TandemEstimate run_tandem_sim(const PopularityLaw& law, std::uint64_t c1,
                              std::uint64_t c2, Policy policy,
                              std::uint64_t requests, std::uint64_t seed,
                              std::optional<std::uint64_t> warmup = {});

struct XSample {
  std::vector<std::uint64_t> histogram;  // histogram[k] = trials with X(t) = k
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

// X(t) = #{n : tau_n < t} with tau_n independent exponential(q(n)).
XSample sample_X(const PopularityLaw& law, double t, std::uint64_t trials,
                 std::uint64_t seed);

// C-th smallest of the exponential clocks, one value per trial. With
// `excluded_rank` the clock of that item is left out.
std::vector<double> sample_T_C(const PopularityLaw& law, std::uint64_t capacity,
                               std::uint64_t trials, std::uint64_t seed,
                               std::optional<std::uint64_t> excluded_rank = {});

struct MeanEstimate {
  double mean = 0.0;
  double halfwidth = 0.0;
};

// E(1 - exp(-q(n) T_C(n))) by sample average over `trials` draws.
MeanEstimate order_statistic_hit_rate(const PopularityLaw& law,
                                      std::uint64_t capacity, std::uint64_t rank,
                                      std::uint64_t trials, std::uint64_t seed);

}  // namespace hitrate
