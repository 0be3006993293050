#include "hitrate/simulator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hitrate/errors.h"
#include "summation.h"

namespace hitrate {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr int kBatches = 32;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint32_t uniform_below(std::mt19937_64& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

double exponential(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

std::vector<double> weights_of(const PopularityLaw& law) {
  const std::uint64_t n = law.population();
  if (n == 0 || n > kMaxSimulatedPopulation) {
    throw ValidationError("simulation needs 1 <= N <= " +
                          std::to_string(kMaxSimulatedPopulation) + ", got N = " +
                          std::to_string(n));
  }
  std::vector<double> w(n);
  for (std::uint64_t r = 1; r <= n; ++r) w[r - 1] = law.weight(r);
  return w;
}

// Dispatches one policy behind a common access call.
class AnyCache {
 public:
  AnyCache(Policy policy, std::uint32_t capacity, const std::vector<double>& w)
      : policy_(policy) {
    const auto n = static_cast<std::uint32_t>(w.size());
    switch (policy) {
      case Policy::kLru: lru_.emplace(capacity, n); break;
      case Policy::kRandom: random_.emplace(capacity, n); break;
      case Policy::kFifo: fifo_.emplace(capacity, n); break;
      case Policy::kLfuStatic: static_.emplace(capacity, w); break;
    }
  }

  bool access(std::uint32_t id, std::mt19937_64& rng) {
    switch (policy_) {
      case Policy::kLru: return lru_->access(id);
      case Policy::kRandom: return random_->access(id, rng);
      case Policy::kFifo: return fifo_->access(id);
      case Policy::kLfuStatic: return static_->access(id);
    }
    return false;
  }

 private:
  Policy policy_;
  std::optional<LruCache> lru_;
  std::optional<RandomCache> random_;
  std::optional<FifoCache> fifo_;
  std::optional<StaticCache> static_;
};

class Tally {
 public:
  Tally(std::size_t n, std::uint64_t measured)
      : batch_length_(std::max<std::uint64_t>(1, measured / kBatches)) {
    est_.requests.assign(n, 0);
    est_.hits.assign(n, 0);
  }

  void record(std::uint32_t id, bool hit) {
    ++est_.requests[id];
    ++est_.total_requests;
    if (hit) {
      ++est_.hits[id];
      ++est_.total_hits;
      ++batch_hits_;
    }
    if (++batch_count_ == batch_length_) {
      batch_means_.push_back(static_cast<double>(batch_hits_) /
                             static_cast<double>(batch_count_));
      batch_hits_ = batch_count_ = 0;
    }
  }

  SimEstimate finish() {
    const double total = static_cast<double>(est_.total_requests);
    est_.overall = total > 0 ? static_cast<double>(est_.total_hits) / total : 0.0;
    const double p = (static_cast<double>(est_.total_hits) + 2.0) / (total + 4.0);
    double halfwidth = kZ95 * std::sqrt(p * (1.0 - p) / std::max(total, 1.0));
    if (batch_means_.size() >= 2) {
      internal::CompensatedSum sum;
      for (double b : batch_means_) sum += b;
      const double k = static_cast<double>(batch_means_.size());
      const double mean = sum.value() / k;
      internal::CompensatedSum sq;
      for (double b : batch_means_) sq += (b - mean) * (b - mean);
      const double batched = kZ95 * std::sqrt(sq.value() / (k - 1.0) / k);
      halfwidth = std::max(halfwidth, batched);
    }
    est_.overall_halfwidth = halfwidth;
    return std::move(est_);
  }

 private:
  SimEstimate est_;
  std::uint64_t batch_length_;
  std::uint64_t batch_count_ = 0;
  std::uint64_t batch_hits_ = 0;
  std::vector<double> batch_means_;
};

void check_rank(const std::vector<std::uint64_t>& v, std::uint64_t rank) {
  if (rank == 0 || rank > v.size()) {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(v.size()) + "]");
  }
}

std::uint64_t default_warmup(std::uint64_t capacity) {
  return std::max<std::uint64_t>(10 * capacity, 1'000'000);
}

}  // namespace

const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::kLru: return "LRU";
    case Policy::kRandom: return "RANDOM";
    case Policy::kFifo: return "FIFO";
    case Policy::kLfuStatic: return "LFU_STATIC";
  }
  return "?";
}

AliasSampler::AliasSampler(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw DomainError("alias table needs at least one weight");
  internal::CompensatedSum sum;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum.value() > 0.0)) throw DomainError("weights sum to zero");
  accept_.resize(n);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / sum.value();
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) accept_[i] = 1.0, alias_[i] = i;
  for (auto i : small) accept_[i] = 1.0, alias_[i] = i;
}

std::uint32_t AliasSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform01(rng) * static_cast<double>(accept_.size());
  const auto i = std::min(static_cast<std::uint32_t>(u),
                          static_cast<std::uint32_t>(accept_.size() - 1));
  return (u - i) < accept_[i] ? i : alias_[i];
}

LruCache::LruCache(std::uint32_t capacity, std::uint32_t population)
    : capacity_(capacity),
      prev_(population, kNil),
      next_(population, kNil),
      resident_(population, false) {}

void LruCache::unlink(std::uint32_t id) {
  const std::uint32_t p = prev_[id];
  const std::uint32_t n = next_[id];
  (p == kNil ? head_ : next_[p]) = n;
  (n == kNil ? tail_ : prev_[n]) = p;
}

void LruCache::push_front(std::uint32_t id) {
  prev_[id] = kNil;
  next_[id] = head_;
  (head_ == kNil ? tail_ : prev_[head_]) = id;
  head_ = id;
}

bool LruCache::access(std::uint32_t id) {
  if (resident_[id]) {
    if (head_ != id) {
      unlink(id);
      push_front(id);
    }
    return true;
  }
  if (capacity_ == 0) return false;
  if (size_ == capacity_) {
    const std::uint32_t victim = tail_;
    unlink(victim);
    resident_[victim] = false;
    --size_;
  }
  push_front(id);
  resident_[id] = true;
  ++size_;
  return false;
}

std::vector<std::uint32_t> LruCache::order() const {
  std::vector<std::uint32_t> out;
  out.reserve(size_);
  for (std::uint32_t i = head_; i != kNil; i = next_[i]) out.push_back(i);
  return out;
}

RandomCache::RandomCache(std::uint32_t capacity, std::uint32_t population)
    : capacity_(capacity), slot_(population, kNil) {
  items_.reserve(capacity);
}

bool RandomCache::access(std::uint32_t id, std::mt19937_64& rng) {
  if (slot_[id] != kNil) return true;
  if (capacity_ == 0) return false;
  if (items_.size() < capacity_) {
    slot_[id] = static_cast<std::uint32_t>(items_.size());
    items_.push_back(id);
    return false;
  }
  const std::uint32_t k = uniform_below(rng, capacity_);
  slot_[items_[k]] = kNil;
  items_[k] = id;
  slot_[id] = k;
  return false;
}

FifoCache::FifoCache(std::uint32_t capacity, std::uint32_t population)
    : capacity_(capacity), ring_(capacity), resident_(population, false) {}

bool FifoCache::access(std::uint32_t id) {
  if (resident_[id]) return true;
  if (capacity_ == 0) return false;
  if (size_ < capacity_) {
    ring_[(head_ + size_) % capacity_] = id;
    ++size_;
  } else {
    resident_[ring_[head_]] = false;
    ring_[head_] = id;
    head_ = (head_ + 1) % capacity_;
  }
  resident_[id] = true;
  return false;
}

StaticCache::StaticCache(std::uint32_t capacity, const std::vector<double>& weights)
    : resident_(weights.size(), false) {
  std::vector<std::uint32_t> idx(weights.size());
  std::iota(idx.begin(), idx.end(), 0u);
  const std::size_t keep = std::min<std::size_t>(capacity, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
                    });
  for (std::size_t i = 0; i < keep; ++i) resident_[idx[i]] = true;
}

std::uint64_t SimConfig::effective_warmup() const {
  return warmup.value_or(default_warmup(capacity));
}

void SimConfig::validate() const {
  const std::uint64_t n = law.population();
  if (n > kMaxSimulatedPopulation) {
    throw ValidationError("population " + std::to_string(n) +
                          " exceeds the simulator bound " +
                          std::to_string(kMaxSimulatedPopulation));
  }
  if (capacity == 0) throw ValidationError("capacity must be positive");
  if (capacity >= n) {
    throw ValidationError("capacity " + std::to_string(capacity) +
                          " must be below the population " + std::to_string(n));
  }
  if (effective_warmup() >= requests) {
    throw ValidationError("warmup " + std::to_string(effective_warmup()) +
                          " must be below the request count " +
                          std::to_string(requests));
  }
}

double SimEstimate::hit_rate(std::uint64_t rank) const {
  check_rank(requests, rank);
  const auto r = requests[rank - 1];
  return r ? static_cast<double>(hits[rank - 1]) / static_cast<double>(r) : 0.0;
}

double SimEstimate::halfwidth(std::uint64_t rank) const {
  check_rank(requests, rank);
  const double r = static_cast<double>(requests[rank - 1]);
  const double p = (static_cast<double>(hits[rank - 1]) + 2.0) / (r + 4.0);
  return kZ95 * std::sqrt(p * (1.0 - p) / std::max(r, 1.0));
}

bool SimEstimate::reportable(std::uint64_t rank) const {
  check_rank(requests, rank);
  return requests[rank - 1] >= kMinRequestsPerEstimate;
}

SimEstimate run_cache_sim(const SimConfig& config) {
  config.validate();
  const auto w = weights_of(config.law);
  const AliasSampler sample(w);
  std::mt19937_64 rng(config.seed);
  AnyCache cache(config.policy, static_cast<std::uint32_t>(config.capacity), w);
  const std::uint64_t warmup = config.effective_warmup();
  for (std::uint64_t i = 0; i < warmup; ++i) cache.access(sample(rng), rng);
  Tally tally(w.size(), config.requests - warmup);
  for (std::uint64_t i = warmup; i < config.requests; ++i) {
    const std::uint32_t id = sample(rng);
    tally.record(id, cache.access(id, rng));
  }
  return tally.finish();
}

double TandemEstimate::miss_frequency(std::uint64_t rank) const {
  check_rank(misses, rank);
  return static_cast<double>(misses[rank - 1]) /
         static_cast<double>(level1.total_requests);
}

double TandemEstimate::miss_halfwidth(std::uint64_t rank) const {
  check_rank(misses, rank);
  const double total = static_cast<double>(level1.total_requests);
  const double p = (static_cast<double>(misses[rank - 1]) + 2.0) / (total + 4.0);
  return kZ95 * std::sqrt(p * (1.0 - p) / total);
}

TandemEstimate run_tandem_sim(const PopularityLaw& law, std::uint64_t c1,
                              std::uint64_t c2, Policy policy,
                              std::uint64_t requests, std::uint64_t seed,
                              std::optional<std::uint64_t> warmup) {
  const auto w = weights_of(law);
  const std::uint64_t n = w.size();
  if (c1 >= n || c2 >= n) throw ValidationError("tandem capacities must be below N");
  if (c2 == 0) throw ValidationError("level-2 capacity must be positive");
  const std::uint64_t skip = warmup.value_or(default_warmup(std::max(c1, c2)));
  if (skip >= requests) throw ValidationError("warmup must be below the request count");

  const AliasSampler sample(w);
  std::mt19937_64 rng(seed);
  AnyCache first(policy, static_cast<std::uint32_t>(c1), w);
  AnyCache second(policy, static_cast<std::uint32_t>(c2), w);
  for (std::uint64_t i = 0; i < skip; ++i) {
    const std::uint32_t id = sample(rng);
    if (!first.access(id, rng)) second.access(id, rng);
  }
  const std::uint64_t measured = requests - skip;
  Tally one(n, measured);
  Tally two(n, measured);
  TandemEstimate out;
  out.misses.assign(n, 0);
  for (std::uint64_t i = skip; i < requests; ++i) {
    const std::uint32_t id = sample(rng);
    const bool hit = first.access(id, rng);
    one.record(id, hit);
    if (!hit) {
      ++out.misses[id];
      two.record(id, second.access(id, rng));
    }
  }
  out.level1 = one.finish();
  out.level2 = two.finish();
  return out;
}

XSample sample_X(const PopularityLaw& law, double t, std::uint64_t trials,
                 std::uint64_t seed) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and >= 0");
  if (trials == 0) throw DomainError("need at least one trial");
  const auto w = weights_of(law);
  // tau_n < t  <=>  u < 1 - exp(-q t) for u uniform on [0, 1).
  std::uint64_t certain = 0;
  std::vector<double> p;
  p.reserve(w.size());
  for (double q : w) {
    const double pn = -std::expm1(-q * t);
    if (pn >= 1.0) {
      ++certain;
    } else if (pn > 0.0) {
      p.push_back(pn);
    }
  }
  std::mt19937_64 rng(seed);
  XSample out;
  out.trials = trials;
  out.histogram.assign(w.size() + 1, 0);
  for (std::uint64_t k = 0; k < trials; ++k) {
    std::uint64_t x = certain;
    for (double pn : p) x += uniform01(rng) < pn;
    ++out.histogram[x];
  }
  internal::CompensatedSum sum;
  for (std::size_t x = 0; x < out.histogram.size(); ++x) {
    sum += static_cast<double>(x) * static_cast<double>(out.histogram[x]);
  }
  out.mean = sum.value() / static_cast<double>(trials);
  internal::CompensatedSum sq;
  for (std::size_t x = 0; x < out.histogram.size(); ++x) {
    const double d = static_cast<double>(x) - out.mean;
    sq += d * d * static_cast<double>(out.histogram[x]);
  }
  out.variance = trials > 1 ? sq.value() / static_cast<double>(trials - 1) : 0.0;
  return out;
}

std::vector<double> sample_T_C(const PopularityLaw& law, std::uint64_t capacity,
                               std::uint64_t trials, std::uint64_t seed,
                               std::optional<std::uint64_t> excluded_rank) {
  auto w = weights_of(law);
  if (excluded_rank) {
    if (*excluded_rank == 0 || *excluded_rank > w.size()) {
      throw DomainError("excluded rank outside the catalogue");
    }
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(*excluded_rank - 1));
  }
  if (capacity == 0 || capacity > w.size()) {
    throw DomainError("T_C needs 1 <= C <= number of clocks");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> clocks(w.size());
  std::vector<double> out;
  out.reserve(trials);
  const auto kth = clocks.begin() + static_cast<std::ptrdiff_t>(capacity - 1);
  for (std::uint64_t k = 0; k < trials; ++k) {
    for (std::size_t i = 0; i < w.size(); ++i) clocks[i] = exponential(rng, w[i]);
    std::nth_element(clocks.begin(), kth, clocks.end());
    out.push_back(*kth);
  }
  return out;
}

MeanEstimate order_statistic_hit_rate(const PopularityLaw& law,
                                      std::uint64_t capacity, std::uint64_t rank,
                                      std::uint64_t trials, std::uint64_t seed) {
  if (trials < 2) throw DomainError("need at least two trials");
  const double q = law.weight(rank);
  const auto samples = sample_T_C(law, capacity, trials, seed, rank);
  internal::CompensatedSum sum;
  for (double t : samples) sum += -std::expm1(-q * t);
  const double k = static_cast<double>(trials);
  const double mean = sum.value() / k;
  internal::CompensatedSum sq;
  for (double t : samples) {
    const double d = -std::expm1(-q * t) - mean;
    sq += d * d;
  }
  return {mean, kZ95 * std::sqrt(sq.value() / (k - 1.0) / k)};
}

}  // namespace hitrate
