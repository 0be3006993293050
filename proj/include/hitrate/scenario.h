#pragma once

// Scenario files, capacity sweeps, analytic-versus-simulation checks and
// CSV/SVG output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hitrate/popularity.h"

namespace hitrate {

enum class SweepPolicy { kLruChe, kRandomFp, kLfuStatic, kSimLru, kSimRandom, kSimFifo };
const char* to_string(SweepPolicy policy);
SweepPolicy parse_policy(const std::string& name);
bool is_simulated(SweepPolicy policy);

enum class GridUnit { kItems, kChunks, kBytes };
const char* to_string(GridUnit unit);

struct LawSpec {
  LawKind kind = LawKind::kZipf;
  double alpha = 0.0;  // zipf
  double rho = 0.0;    // geometric
  std::uint64_t population = 0;
  std::vector<double> weights;  // explicit

  PopularityLaw build() const;
  bool operator==(const LawSpec&) const = default;
};

struct LogRange {
  double min = 0.0;
  double max = 0.0;
  std::uint32_t points = 0;
  bool operator==(const LogRange&) const = default;
};

struct CapacityGrid {
  GridUnit unit = GridUnit::kItems;
  double bytes_per_chunk = 1024.0;
  // Exactly one of the two is used.
  std::vector<double> values;
  std::optional<LogRange> range;

  // Strictly increasing capacity points in `unit`.
  std::vector<double> points() const;
  // Capacity in ranks of the scenario law (chunks for a traffic mix).
  double to_law_units(double capacity) const;
  bool operator==(const CapacityGrid&) const = default;
};

struct AnalysisOptions {
  bool erfc = false;        // adds LRU_ERFC per-rank rows
  bool asymptotic = false;  // adds LRU_ASYMPTOTIC per-rank rows (Zipf only)
  bool operator==(const AnalysisOptions&) const = default;
};

struct SimulationOptions {
  std::uint64_t requests = 20'000'000;
  std::optional<std::uint64_t> warmup;
  bool operator==(const SimulationOptions&) const = default;
};

struct OutputPaths {
  std::string csv;
  std::string svg;
  bool operator==(const OutputPaths&) const = default;
};

struct Scenario {
  std::string name;
  std::optional<LawSpec> law;
  std::optional<TrafficMix> mix;
  CapacityGrid capacities;
  std::vector<SweepPolicy> policies;
  std::vector<std::uint64_t> ranks;
  AnalysisOptions analysis;
  SimulationOptions simulation;
  double epsilon = kDefaultEpsilon;
  double tolerance = 0.02;
  std::uint64_t seed = 1;
  OutputPaths output;

  // Throws ValidationError naming the offending field.
  void validate() const;
  PopularityLaw build_law() const;
  bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

struct ResultRow {
  double capacity = 0.0;  // in the grid unit
  GridUnit unit = GridUnit::kItems;
  std::string policy;
  std::optional<std::uint64_t> rank;  // empty for the overall rate
  double hit_rate = 0.0;
  std::optional<double> ci_halfwidth;
  bool saturated = false;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

struct SweepOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

ResultTable sweep(const Scenario& scenario, const SweepOptions& options = {});

struct Deviation {
  double capacity = 0.0;
  std::string analytic;
  std::string simulated;
  std::optional<std::uint64_t> rank;
  double analytic_rate = 0.0;
  double simulated_rate = 0.0;
  double halfwidth = 0.0;
  double deviation() const;
};

struct ValidationReport {
  std::vector<Deviation> entries;
  double tolerance = 0.0;
  double max_deviation() const;
  bool breached() const { return max_deviation() > tolerance; }
};

// Pairs LRU_CHE with SIM_LRU and RANDOM_FP with SIM_RANDOM and SIM_FIFO at
// every unsaturated capacity point and requested rank.
ValidationReport validate_scenario(const Scenario& scenario,
                                   const SweepOptions& options = {});

std::string to_csv(const ResultTable& table);
std::string to_svg(const ResultTable& table, const std::string& title);
std::string to_text(const ValidationReport& report);

// Writes `contents` to `path`; throws std::runtime_error when it cannot.
void write_file(const std::filesystem::path& path, const std::string& contents);

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace hitrate
