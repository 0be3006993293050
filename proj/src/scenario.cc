#include "hitrate/scenario.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hitrate/errors.h"
#include "hitrate/gaussian.h"
#include "hitrate/lru_che.h"
#include "hitrate/random_replacement.h"
#include "hitrate/simulator.h"
#include "hitrate/spectrum.h"
#include "json.hpp"

namespace hitrate {

using nlohmann::json;

namespace {

constexpr SweepPolicy kAllPolicies[] = {SweepPolicy::kLruChe,   SweepPolicy::kRandomFp,
                                        SweepPolicy::kLfuStatic, SweepPolicy::kSimLru,
                                        SweepPolicy::kSimRandom, SweepPolicy::kSimFifo};

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) invalid(field + "." + key, "missing");
  return j.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "must be a number");
  return j.get<double>();
}

std::uint64_t as_count(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) invalid(field, "must be nonnegative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!(v >= 0.0) || v != std::floor(v) || v >= 0x1.0p64) {
      invalid(field, "must be a nonnegative integer");
    }
    return static_cast<std::uint64_t>(v);
  }
  invalid(field, "must be a nonnegative integer");
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) invalid(field, "must be true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) invalid(field, "must be a string");
  return j.get<std::string>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& field) {
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) ==
        keys.end()) {
      invalid(field.empty() ? k : field + "." + k, "unknown key");
    }
  }
}

LawKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "zipf") return LawKind::kZipf;
  if (s == "geometric") return LawKind::kGeometric;
  if (s == "uniform") return LawKind::kUniform;
  if (s == "explicit") return LawKind::kExplicit;
  invalid(field, "unknown law kind '" + s + "' (zipf, geometric, uniform, explicit)");
}

GridUnit parse_unit(const std::string& s, const std::string& field) {
  if (s == "items") return GridUnit::kItems;
  if (s == "chunks") return GridUnit::kChunks;
  if (s == "bytes") return GridUnit::kBytes;
  invalid(field, "unknown unit '" + s + "' (items, chunks, bytes)");
}

LawSpec parse_law(const json& j) {
  if (!j.is_object()) invalid("law", "must be an object");
  reject_unknown(j, {"kind", "alpha", "rho", "population", "weights"}, "law");
  LawSpec s;
  s.kind = parse_kind(as_string(require(j, "kind", "law"), "law.kind"), "law.kind");
  switch (s.kind) {
    case LawKind::kZipf:
      s.alpha = as_number(require(j, "alpha", "law"), "law.alpha");
      s.population = as_count(require(j, "population", "law"), "law.population");
      break;
    case LawKind::kGeometric:
      s.rho = as_number(require(j, "rho", "law"), "law.rho");
      s.population = as_count(require(j, "population", "law"), "law.population");
      break;
    case LawKind::kUniform:
      s.population = as_count(require(j, "population", "law"), "law.population");
      break;
    default: {
      const json& w = require(j, "weights", "law");
      if (!w.is_array()) invalid("law.weights", "must be a list of numbers");
      for (std::size_t i = 0; i < w.size(); ++i) {
        s.weights.push_back(as_number(w[i], "law.weights[" + std::to_string(i) + "]"));
      }
      s.population = s.weights.size();
    }
  }
  return s;
}

json law_json(const LawSpec& s) {
  json j;
  switch (s.kind) {
    case LawKind::kZipf:
      j = {{"kind", "zipf"}, {"alpha", s.alpha}, {"population", s.population}};
      break;
    case LawKind::kGeometric:
      j = {{"kind", "geometric"}, {"rho", s.rho}, {"population", s.population}};
      break;
    case LawKind::kUniform:
      j = {{"kind", "uniform"}, {"population", s.population}};
      break;
    default:
      j = {{"kind", "explicit"}, {"weights", s.weights}};
  }
  return j;
}

TrafficMix parse_mix(const json& j) {
  if (!j.is_object()) invalid("mix", "must be an object");
  reject_unknown(j, {"types"}, "mix");
  const json& types = require(j, "types", "mix");
  if (!types.is_array()) invalid("mix.types", "must be a list");
  TrafficMix mix;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string f = "mix.types[" + std::to_string(i) + "]";
    const json& t = types[i];
    if (!t.is_object()) invalid(f, "must be an object");
    reject_unknown(t, {"name", "share", "population", "chunk_count", "zipf_alpha"}, f);
    ContentType c;
    c.name = as_string(require(t, "name", f), f + ".name");
    c.share = as_number(require(t, "share", f), f + ".share");
    c.population = as_count(require(t, "population", f), f + ".population");
    c.chunk_count = as_count(require(t, "chunk_count", f), f + ".chunk_count");
    c.zipf_alpha = as_number(require(t, "zipf_alpha", f), f + ".zipf_alpha");
    mix.types.push_back(std::move(c));
  }
  return mix;
}

json mix_json(const TrafficMix& mix) {
  json types = json::array();
  for (const auto& t : mix.types) {
    types.push_back({{"name", t.name},
                     {"share", t.share},
                     {"population", t.population},
                     {"chunk_count", t.chunk_count},
                     {"zipf_alpha", t.zipf_alpha}});
  }
  return {{"types", types}};
}

CapacityGrid parse_grid(const json& j) {
  if (!j.is_object()) invalid("capacities", "must be an object");
  reject_unknown(j, {"unit", "bytes_per_chunk", "values", "log_range"}, "capacities");
  CapacityGrid g;
  g.unit = parse_unit(as_string(require(j, "unit", "capacities"), "capacities.unit"),
                      "capacities.unit");
  if (j.contains("bytes_per_chunk")) {
    g.bytes_per_chunk = as_number(j.at("bytes_per_chunk"), "capacities.bytes_per_chunk");
  }
  if (j.contains("values")) {
    const json& v = j.at("values");
    if (!v.is_array()) invalid("capacities.values", "must be a list of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      g.values.push_back(as_number(v[i], "capacities.values[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("log_range")) {
    const json& r = j.at("log_range");
    const std::string f = "capacities.log_range";
    reject_unknown(r, {"min", "max", "points"}, f);
    LogRange lr;
    lr.min = as_number(require(r, "min", f), f + ".min");
    lr.max = as_number(require(r, "max", f), f + ".max");
    const std::uint64_t points = as_count(require(r, "points", f), f + ".points");
    if (points > 100000) invalid(f + ".points", "at most 100000");
    lr.points = static_cast<std::uint32_t>(points);
    g.range = lr;
  }
  return g;
}

json grid_json(const CapacityGrid& g) {
  json j = {{"unit", to_string(g.unit)}, {"bytes_per_chunk", g.bytes_per_chunk}};
  if (g.range) {
    j["log_range"] = {{"min", g.range->min}, {"max", g.range->max}, {"points", g.range->points}};
  } else {
    j["values"] = g.values;
  }
  return j;
}

bool is_integral(double x) { return std::fabs(x - std::round(x)) <= 1e-9 * std::max(1.0, x); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// 0-based position of `rank` in the static-LFU order: heavier first, ties to
// the lower rank. Weights are nonincreasing inside each block.
double lfu_position(const PopularityLaw& law, std::uint64_t rank) {
  const double q = law.weight(rank);
  if (law.kind() == LawKind::kExplicit) {
    const auto w = law.explicit_values();
    std::uint64_t p = 0;
    for (std::uint64_t i = 0; i < w.size(); ++i) {
      p += w[i] > q || (w[i] == q && i + 1 < rank);
    }
    return static_cast<double>(p);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> blocks;
  if (law.kind() == LawKind::kMixture) {
    std::uint64_t first = 1;
    for (const auto& c : law.components()) {
      const std::uint64_t len = c.law.population() * c.chunks_per_item;
      blocks.emplace_back(first, first + len - 1);
      first += len;
    }
  } else if (law.monotone()) {
    blocks.emplace_back(1, law.population());
  } else {
    throw ValidationError("static LFU per-rank rates need a monotone, explicit or mixture law");
  }
  // Count of ranks in [a, b] whose weight satisfies pred, pred monotone.
  auto count_prefix = [&](std::uint64_t a, std::uint64_t b, auto pred) {
    std::uint64_t lo = a, hi = b + 1;  // first rank failing pred
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (pred(law.weight(mid))) lo = mid + 1; else hi = mid;
    }
    return lo - a;
  };
  double p = 0.0;
  for (auto [a, b] : blocks) {
    const auto greater = count_prefix(a, b, [&](double w) { return w > q; });
    p += static_cast<double>(greater);
    if (a < rank) {
      const std::uint64_t end = std::min(b, rank - 1);
      const auto at_least = count_prefix(a, end, [&](double w) { return w >= q; });
      const auto above = count_prefix(a, end, [&](double w) { return w > q; });
      p += static_cast<double>(at_least - above);
    }
  }
  return p;
}

struct SweepContext {
  const Scenario& scenario;
  PopularityLaw law;
  std::optional<WeightSpectrum> spectrum;
  std::vector<double> points;
};

ResultRow make_row(const SweepContext& ctx, double capacity, const std::string& policy,
                   std::optional<std::uint64_t> rank, double h,
                   std::optional<double> ci = {}, bool saturated = false) {
  return {capacity, ctx.scenario.capacities.unit, policy, rank, h, ci, saturated};
}

std::vector<ResultRow> saturated_rows(const SweepContext& ctx, double capacity,
                                      SweepPolicy policy) {
  std::vector<ResultRow> rows;
  const std::string name = to_string(policy);
  rows.push_back(make_row(ctx, capacity, name, {}, 1.0, {}, true));
  for (auto r : ctx.scenario.ranks) rows.push_back(make_row(ctx, capacity, name, r, 1.0, {}, true));
  if (policy == SweepPolicy::kLruChe) {
    for (const char* extra : {"LRU_ERFC", "LRU_ASYMPTOTIC"}) {
      const bool on = std::string(extra) == "LRU_ERFC" ? ctx.scenario.analysis.erfc
                                                       : ctx.scenario.analysis.asymptotic;
      if (!on) continue;
      for (auto r : ctx.scenario.ranks) rows.push_back(make_row(ctx, capacity, extra, r, 1.0, {}, true));
    }
  }
  return rows;
}

std::vector<ResultRow> run_task(const SweepContext& ctx, std::size_t point,
                                SweepPolicy policy) {
  const Scenario& sc = ctx.scenario;
  const double capacity = ctx.points[point];
  const double c = sc.capacities.to_law_units(capacity);
  const double n = static_cast<double>(ctx.law.population());
  if (c >= n) return saturated_rows(ctx, capacity, policy);
  const std::string name = to_string(policy);
  std::vector<ResultRow> rows;
  switch (policy) {
    case SweepPolicy::kLruChe: {
      const auto& s = *ctx.spectrum;
      const auto sol = solve_characteristic_time(s, c);
      const auto prof = lru_hit_profile(ctx.law, s, sol, sc.ranks);
      rows.push_back(make_row(ctx, capacity, name, {}, prof.overall));
      for (std::size_t i = 0; i < sc.ranks.size(); ++i) {
        rows.push_back(make_row(ctx, capacity, name, sc.ranks[i], prof.hit[i]));
      }
      if (sc.analysis.erfc) {
        for (auto r : sc.ranks) {
          rows.push_back(make_row(ctx, capacity, "LRU_ERFC", r,
                                  erfc_hit_rate(s, c, ctx.law.weight(r))));
        }
      }
      if (sc.analysis.asymptotic) {
        const double t = tc_asymptotic(sc.law->alpha, sc.law->population, c / n);
        for (auto r : sc.ranks) {
          rows.push_back(make_row(ctx, capacity, "LRU_ASYMPTOTIC", r,
                                  -std::expm1(-ctx.law.weight(r) * t)));
        }
      }
      break;
    }
    case SweepPolicy::kRandomFp: {
      const auto& s = *ctx.spectrum;
      const auto sol = solve_random_fixed_point(s, c);
      const auto prof = random_hit_profile(ctx.law, s, sol, sc.ranks);
      rows.push_back(make_row(ctx, capacity, name, {}, prof.overall));
      for (std::size_t i = 0; i < sc.ranks.size(); ++i) {
        rows.push_back(make_row(ctx, capacity, name, sc.ranks[i], prof.hit[i]));
      }
      break;
    }
    case SweepPolicy::kLfuStatic: {
      const auto& s = *ctx.spectrum;
      rows.push_back(make_row(ctx, capacity, name, {}, std::min(1.0, top_mass(s, c) / s.mass())));
      for (auto r : sc.ranks) {
        rows.push_back(make_row(ctx, capacity, name, r,
                                std::clamp(c - lfu_position(ctx.law, r), 0.0, 1.0)));
      }
      break;
    }
    default: {
      if (!is_integral(c)) {
        throw ValidationError("capacities: simulated policies need whole-item capacities, got " +
                              format_number(c));
      }
      SimConfig cfg;
      cfg.law = ctx.law;
      cfg.policy = policy == SweepPolicy::kSimLru      ? Policy::kLru
                   : policy == SweepPolicy::kSimRandom ? Policy::kRandom
                                                       : Policy::kFifo;
      cfg.capacity = static_cast<std::uint64_t>(std::llround(c));
      cfg.requests = sc.simulation.requests;
      cfg.warmup = sc.simulation.warmup;
      cfg.seed = splitmix(sc.seed ^ splitmix(point * 16 + static_cast<std::uint64_t>(policy)));
      if (!cfg.warmup && cfg.effective_warmup() >= cfg.requests) {
        cfg.warmup = cfg.requests / 10;
      }
      const auto est = run_cache_sim(cfg);
      rows.push_back(make_row(ctx, capacity, name, {}, est.overall, est.overall_halfwidth));
      for (auto r : sc.ranks) {
        if (!est.reportable(r)) continue;
        rows.push_back(make_row(ctx, capacity, name, r, est.hit_rate(r), est.halfwidth(r)));
      }
    }
  }
  return rows;
}

ResultTable run_sweep(const Scenario& scenario, const std::vector<SweepPolicy>& policies,
                      const SweepOptions& options) {
  scenario.validate();
  SweepContext ctx{scenario, scenario.build_law(), std::nullopt, scenario.capacities.points()};
  const bool analytic = std::any_of(policies.begin(), policies.end(),
                                    [](SweepPolicy p) { return !is_simulated(p); });
  if (analytic) ctx.spectrum.emplace(ctx.law, scenario.epsilon);

  const std::size_t tasks = ctx.points.size() * policies.size();
  std::vector<std::vector<ResultRow>> out(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < tasks;) {
      try {
        out[k] = run_task(ctx, k / policies.size(), policies[k % policies.size()]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, tasks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  ResultTable table;
  for (auto& rows : out) {
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

const char* to_string(SweepPolicy policy) {
  switch (policy) {
    case SweepPolicy::kLruChe: return "LRU_CHE";
    case SweepPolicy::kRandomFp: return "RANDOM_FP";
    case SweepPolicy::kLfuStatic: return "LFU_STATIC";
    case SweepPolicy::kSimLru: return "SIM_LRU";
    case SweepPolicy::kSimRandom: return "SIM_RANDOM";
    case SweepPolicy::kSimFifo: return "SIM_FIFO";
  }
  return "?";
}

SweepPolicy parse_policy(const std::string& name) {
  for (auto p : kAllPolicies) {
    if (name == to_string(p)) return p;
  }
  throw ValidationError("policies: unknown policy '" + name +
                        "' (LRU_CHE, RANDOM_FP, LFU_STATIC, SIM_LRU, SIM_RANDOM, SIM_FIFO)");
}

bool is_simulated(SweepPolicy policy) {
  return policy == SweepPolicy::kSimLru || policy == SweepPolicy::kSimRandom ||
         policy == SweepPolicy::kSimFifo;
}

const char* to_string(GridUnit unit) {
  switch (unit) {
    case GridUnit::kItems: return "items";
    case GridUnit::kChunks: return "chunks";
    case GridUnit::kBytes: return "bytes";
  }
  return "?";
}

PopularityLaw LawSpec::build() const {
  switch (kind) {
    case LawKind::kZipf: return PopularityLaw::zipf(alpha, population);
    case LawKind::kGeometric: return PopularityLaw::geometric(rho, population);
    case LawKind::kUniform: return PopularityLaw::uniform(population);
    case LawKind::kExplicit: return PopularityLaw::explicit_weights(weights);
    default: throw ValidationError("law.kind: not available in scenarios");
  }
}

std::vector<double> CapacityGrid::points() const {
  if (!range) return values;
  std::vector<double> out(range->points);
  const double span = std::log(range->max / range->min);
  for (std::uint32_t i = 0; i < range->points; ++i) {
    out[i] = range->min * std::exp(span * i / (range->points - 1));
  }
  out.front() = range->min;
  out.back() = range->max;
  return out;
}

double CapacityGrid::to_law_units(double capacity) const {
  return unit == GridUnit::kBytes ? capacity / bytes_per_chunk : capacity;
}

void Scenario::validate() const {
  if (law.has_value() == mix.has_value()) invalid("law/mix", "exactly one must be given");
  std::uint64_t population = 0;
  if (law) {
    try {
      population = law->build().population();
    } catch (const std::exception& e) {
      invalid("law", e.what());
    }
  } else {
    mix->validate();
    population = mix->total_chunks();
    if (capacities.unit == GridUnit::kItems) {
      invalid("capacities.unit", "a traffic mix is sized in chunks or bytes");
    }
  }
  if (!(capacities.bytes_per_chunk > 0.0) || !std::isfinite(capacities.bytes_per_chunk)) {
    invalid("capacities.bytes_per_chunk", "must be positive");
  }
  if (capacities.range.has_value() == !capacities.values.empty()) {
    invalid("capacities", "give exactly one of values and log_range");
  }
  if (capacities.range) {
    const auto& r = *capacities.range;
    if (!(r.min > 0.0) || !std::isfinite(r.max)) invalid("capacities.log_range", "bounds must be positive and finite");
    if (!(r.max > r.min)) invalid("capacities.log_range", "max must exceed min");
    if (r.points < 2) invalid("capacities.log_range.points", "must be at least 2");
  } else {
    for (std::size_t i = 0; i < capacities.values.size(); ++i) {
      const double v = capacities.values[i];
      if (!(v > 0.0) || !std::isfinite(v)) invalid("capacities.values", "must be positive and finite");
      if (i > 0 && !(v > capacities.values[i - 1])) invalid("capacities.values", "must be strictly increasing");
    }
  }
  if (policies.empty()) invalid("policies", "at least one policy is required");
  std::set<SweepPolicy> seen(policies.begin(), policies.end());
  if (seen.size() != policies.size()) invalid("policies", "duplicate entry");
  for (auto r : ranks) {
    if (r == 0 || r > population) invalid("ranks", "rank " + std::to_string(r) + " outside [1, " + std::to_string(population) + "]");
  }
  if (!(epsilon > 0.0 && epsilon <= 0.1)) invalid("epsilon", "must lie in (0, 0.1]");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) invalid("tolerance", "must be positive");
  if (simulation.requests == 0) invalid("simulation.requests", "must be positive");
  if ((analysis.erfc || analysis.asymptotic) && !seen.count(SweepPolicy::kLruChe)) {
    invalid("analysis", "erfc and asymptotic rows extend LRU_CHE, which is not listed");
  }
  if (analysis.asymptotic && (!law || law->kind != LawKind::kZipf)) {
    invalid("analysis.asymptotic", "needs a zipf law");
  }
  const bool simulated = std::any_of(policies.begin(), policies.end(), is_simulated);
  if (simulated && (!law || population > kMaxSimulatedPopulation)) {
    invalid("policies", "simulated policies need a single law with N <= " +
                            std::to_string(kMaxSimulatedPopulation));
  }
}

PopularityLaw Scenario::build_law() const {
  return law ? law->build() : build_mix_law(*mix);
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("scenario", "must be an object");
  reject_unknown(j, {"name", "law", "mix", "capacities", "policies", "ranks", "analysis",
                     "simulation", "epsilon", "tolerance", "seed", "output"}, "");
  Scenario s;
  if (j.contains("name")) s.name = as_string(j.at("name"), "name");
  if (j.contains("law")) s.law = parse_law(j.at("law"));
  if (j.contains("mix")) s.mix = parse_mix(j.at("mix"));
  s.capacities = parse_grid(require(j, "capacities", "scenario"));
  const json& pol = require(j, "policies", "scenario");
  if (!pol.is_array()) invalid("policies", "must be a list");
  for (const auto& p : pol) s.policies.push_back(parse_policy(as_string(p, "policies")));
  if (j.contains("ranks")) {
    const json& r = j.at("ranks");
    if (!r.is_array()) invalid("ranks", "must be a list");
    for (const auto& x : r) s.ranks.push_back(as_count(x, "ranks"));
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    reject_unknown(a, {"erfc", "asymptotic"}, "analysis");
    if (a.contains("erfc")) s.analysis.erfc = as_bool(a.at("erfc"), "analysis.erfc");
    if (a.contains("asymptotic")) s.analysis.asymptotic = as_bool(a.at("asymptotic"), "analysis.asymptotic");
  }
  if (j.contains("simulation")) {
    const json& m = j.at("simulation");
    reject_unknown(m, {"requests", "warmup"}, "simulation");
    if (m.contains("requests")) s.simulation.requests = as_count(m.at("requests"), "simulation.requests");
    if (m.contains("warmup")) s.simulation.warmup = as_count(m.at("warmup"), "simulation.warmup");
  }
  if (j.contains("epsilon")) s.epsilon = as_number(j.at("epsilon"), "epsilon");
  if (j.contains("tolerance")) s.tolerance = as_number(j.at("tolerance"), "tolerance");
  if (j.contains("seed")) s.seed = as_count(j.at("seed"), "seed");
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"csv", "svg"}, "output");
    if (o.contains("csv")) s.output.csv = as_string(o.at("csv"), "output.csv");
    if (o.contains("svg")) s.output.svg = as_string(o.at("svg"), "output.svg");
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  if (s.law) j["law"] = law_json(*s.law);
  if (s.mix) j["mix"] = mix_json(*s.mix);
  j["capacities"] = grid_json(s.capacities);
  json pol = json::array();
  for (auto p : s.policies) pol.push_back(to_string(p));
  j["policies"] = pol;
  j["ranks"] = s.ranks;
  j["analysis"] = {{"erfc", s.analysis.erfc}, {"asymptotic", s.analysis.asymptotic}};
  j["simulation"] = {{"requests", s.simulation.requests}};
  if (s.simulation.warmup) j["simulation"]["warmup"] = *s.simulation.warmup;
  j["epsilon"] = s.epsilon;
  j["tolerance"] = s.tolerance;
  j["seed"] = s.seed;
  json out = json::object();
  if (!s.output.csv.empty()) out["csv"] = s.output.csv;
  if (!s.output.svg.empty()) out["svg"] = s.output.svg;
  if (!out.empty()) j["output"] = out;
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_file(path, dump_scenario(scenario));
}

ResultTable sweep(const Scenario& scenario, const SweepOptions& options) {
  return run_sweep(scenario, scenario.policies, options);
}

double Deviation::deviation() const { return std::fabs(analytic_rate - simulated_rate); }

double ValidationReport::max_deviation() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.deviation());
  return worst;
}

ValidationReport validate_scenario(const Scenario& scenario, const SweepOptions& options) {
  scenario.validate();
  if (!scenario.law) throw ValidationError("validate: needs a single law small enough to simulate");
  std::set<SweepPolicy> want;
  for (auto p : scenario.policies) {
    switch (p) {
      case SweepPolicy::kLruChe:
      case SweepPolicy::kSimLru:
        want.insert({SweepPolicy::kLruChe, SweepPolicy::kSimLru});
        break;
      case SweepPolicy::kRandomFp:
      case SweepPolicy::kSimRandom:
        want.insert({SweepPolicy::kRandomFp, SweepPolicy::kSimRandom});
        break;
      case SweepPolicy::kSimFifo:
        want.insert({SweepPolicy::kRandomFp, SweepPolicy::kSimFifo});
        break;
      case SweepPolicy::kLfuStatic:
        break;
    }
  }
  if (want.empty()) throw ValidationError("validate: no policy has a simulated counterpart");
  Scenario copy = scenario;
  copy.policies.assign(want.begin(), want.end());
  const auto table = run_sweep(copy, copy.policies, options);

  using Key = std::tuple<double, std::string, std::uint64_t>;  // rank 0 = overall
  std::map<Key, const ResultRow*> index;
  for (const auto& row : table.rows) {
    if (row.saturated) continue;
    index[{row.capacity, row.policy, row.rank.value_or(0)}] = &row;
  }
  const std::pair<SweepPolicy, SweepPolicy> pairs[] = {
      {SweepPolicy::kLruChe, SweepPolicy::kSimLru},
      {SweepPolicy::kRandomFp, SweepPolicy::kSimRandom},
      {SweepPolicy::kRandomFp, SweepPolicy::kSimFifo}};
  ValidationReport report;
  report.tolerance = scenario.tolerance;
  for (double capacity : copy.capacities.points()) {
    for (auto [a, s] : pairs) {
      if (!want.count(a) || !want.count(s)) continue;
      std::vector<std::uint64_t> keys{0};
      keys.insert(keys.end(), scenario.ranks.begin(), scenario.ranks.end());
      for (auto r : keys) {
        auto ia = index.find({capacity, to_string(a), r});
        auto is = index.find({capacity, to_string(s), r});
        if (ia == index.end() || is == index.end()) continue;
        Deviation d;
        d.capacity = capacity;
        d.analytic = to_string(a);
        d.simulated = to_string(s);
        if (r) d.rank = r;
        d.analytic_rate = ia->second->hit_rate;
        d.simulated_rate = is->second->hit_rate;
        d.halfwidth = is->second->ci_halfwidth.value_or(0.0);
        report.entries.push_back(d);
      }
    }
  }
  return report;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string to_csv(const ResultTable& table) {
  std::string out = "capacity,unit,policy,rank,hit_rate,ci_halfwidth\n";
  for (const auto& r : table.rows) {
    out += format_number(r.capacity);
    out += ',';
    out += to_string(r.unit);
    out += ',';
    out += r.policy;
    out += ',';
    if (r.rank) out += std::to_string(*r.rank);
    out += ',';
    out += format_number(r.hit_rate);
    out += ',';
    out += csv_field(r.ci_halfwidth);
    out += '\n';
  }
  return out;
}

std::string to_svg(const ResultTable& table, const std::string& title) {
  constexpr double kW = 720, kH = 460, kL = 70, kR = 200, kT = 40, kB = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : table.rows) {
    std::string key = r.policy + (r.rank ? " n=" + std::to_string(*r.rank) : " overall");
    if (!series.count(key)) order.push_back(key);
    series[key].emplace_back(r.capacity, r.hit_rate);
    lo = std::min(lo, r.capacity);
    hi = std::max(hi, r.capacity);
  }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kL << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  if (order.empty()) {
    s << "</svg>\n";
    return s.str();
  }
  const double x0 = std::floor(std::log10(lo)), x1 = std::max(x0 + 1, std::ceil(std::log10(hi)));
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double c) { return kL + (std::log10(c) - x0) / (x1 - x0) * pw; };
  auto py = [&](double h) { return kT + (1.0 - h) * ph; };
  s << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = x0; d <= x1; d += 1) {
    s << "<line x1=\"" << px(std::pow(10, d)) << "\" y1=\"" << kT + ph << "\" x2=\""
      << px(std::pow(10, d)) << "\" y2=\"" << kT + ph + 5 << "\" stroke=\"black\"/>"
      << "<text x=\"" << px(std::pow(10, d)) << "\" y=\"" << kT + ph + 20
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double h = k / 5.0;
    s << "<line x1=\"" << kL - 5 << "\" y1=\"" << py(h) << "\" x2=\"" << kL << "\" y2=\""
      << py(h) << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << py(h) + 4
      << "\" text-anchor=\"end\">" << h << "</text>\n";
  }
  s << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 10
    << "\" text-anchor=\"middle\">cache size (" << to_string(table.rows.front().unit)
    << ")</text>\n";
  s << "<text x=\"18\" y=\"" << kT + ph / 2 << "\" transform=\"rotate(-90 18 " << kT + ph / 2
    << ")\" text-anchor=\"middle\">hit rate</text>\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [c, h] : series[order[i]]) s << px(c) << ',' << py(h) << ' ';
    s << "\"/>\n";
    const double ly = kT + 14 + 18 * static_cast<double>(i);
    s << "<line x1=\"" << kW - kR + 15 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR + 40
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\""
      << kW - kR + 46 << "\" y=\"" << ly + 4 << "\">" << order[i] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string to_text(const ValidationReport& report) {
  std::ostringstream s;
  s << "capacity,analytic,simulated,rank,analytic_rate,simulated_rate,ci_halfwidth,deviation\n";
  for (const auto& e : report.entries) {
    s << format_number(e.capacity) << ',' << e.analytic << ',' << e.simulated << ','
      << (e.rank ? std::to_string(*e.rank) : "") << ',' << format_number(e.analytic_rate)
      << ',' << format_number(e.simulated_rate) << ',' << format_number(e.halfwidth) << ','
      << format_number(e.deviation()) << '\n';
  }
  s << "max_deviation " << format_number(report.max_deviation()) << " tolerance "
    << format_number(report.tolerance) << (report.breached() ? " BREACH" : " ok") << '\n';
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace hitrate
