#include "hitrate/scenario.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hitrate/errors.h"

namespace hitrate {
namespace {

const std::filesystem::path kDir = HITRATE_SCENARIO_DIR;

std::string uniform_text(const std::string& policies, const std::string& extra = "") {
  return R"({"law": {"kind": "uniform", "population": 100},
             "capacities": {"unit": "items", "values": [10, 50, 100, 150]},
             "policies": )" +
         policies + R"(, "ranks": [1, 50, 100])" + extra + "}";
}

TEST(Scenario, LoadsInternetMix) {
  const auto s = load_scenario(kDir / "internet-mix.json");
  ASSERT_TRUE(s.mix.has_value());
  EXPECT_FALSE(s.law.has_value());
  EXPECT_EQ(*s.mix, internet_traffic_mix());
  EXPECT_EQ(s.capacities.unit, GridUnit::kBytes);
  EXPECT_EQ(s.capacities.bytes_per_chunk, 1024.0);
  const auto pts = s.capacities.points();
  ASSERT_EQ(pts.size(), 25u);
  EXPECT_EQ(pts.front(), 1e8);
  EXPECT_EQ(pts.back(), 1e13);
  EXPECT_DOUBLE_EQ(s.capacities.to_law_units(1024.0 * 1000), 1000.0);
}

TEST(Scenario, AllShippedFilesLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
  }
}

TEST(Scenario, RoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    const auto s = load_scenario(entry.path());
    EXPECT_EQ(parse_scenario(dump_scenario(s)), s) << entry.path();
  }
  auto s = parse_scenario(uniform_text(R"(["LRU_CHE"])"));
  s.simulation.warmup = 123;
  s.output.csv = "a.csv";
  s.analysis.erfc = true;
  s.tolerance = 0.125;
  s.seed = 18446744073709551615ull;
  const auto path = std::filesystem::temp_directory_path() / "hitrate-roundtrip.json";
  save_scenario(s, path);
  EXPECT_EQ(load_scenario(path), s);
  std::filesystem::remove(path);
}

TEST(Scenario, ValidationNamesTheField) {
  auto expect_error = [](const std::string& text, const std::string& field) {
    try {
      parse_scenario(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_error(R"({"mix": {"types": []}, "capacities": {"unit": "bytes", "values": [1]},
                  "policies": ["LRU_CHE"]})",
               "types");
  expect_error(R"({"mix": {"types": [
                    {"name": "a", "share": 0.5, "population": 10, "chunk_count": 1, "zipf_alpha": 0.8},
                    {"name": "b", "share": 0.4, "population": 10, "chunk_count": 1, "zipf_alpha": 0.8}]},
                  "capacities": {"unit": "chunks", "values": [1]}, "policies": ["LRU_CHE"]})",
               "shares");
  expect_error(uniform_text(R"(["LRU_MAGIC"])"), "LRU_MAGIC");
  expect_error(uniform_text(R"([])"), "policies");
  expect_error(uniform_text(R"(["LRU_CHE", "LRU_CHE"])"), "policies");
  expect_error(R"({"law": {"kind": "zipf", "alpha": -1, "population": 10},
                  "capacities": {"unit": "items", "values": [1]}, "policies": ["LRU_CHE"]})",
               "law");
  expect_error(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10},
                  "capacities": {"unit": "items", "values": [5, 3]}, "policies": ["LRU_CHE"]})",
               "capacities.values");
  expect_error(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10},
                  "capacities": {"unit": "items", "log_range": {"min": 5, "max": 3, "points": 4}},
                  "policies": ["LRU_CHE"]})",
               "capacities.log_range");
  expect_error(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10},
                  "capacities": {"unit": "parsecs", "values": [1]}, "policies": ["LRU_CHE"]})",
               "capacities.unit");
  expect_error(R"({"law": {"kind": "zipf", "population": 10},
                  "capacities": {"unit": "items", "values": [1]}, "policies": ["LRU_CHE"]})",
               "law.alpha");
  expect_error(uniform_text(R"(["LRU_CHE"])", R"(, "colour": "red")"), "colour");
  expect_error(uniform_text(R"(["LRU_CHE"])", R"(, "ranks": [0])"), "ranks");
  expect_error("{not json", "JSON");
  expect_error(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10000000},
                  "capacities": {"unit": "items", "values": [1]}, "policies": ["SIM_LRU"]})",
               "policies");
}

TEST(Sweep, UniformPoliciesAllGiveCapacityFraction) {
  auto s = parse_scenario(uniform_text(
      R"(["LRU_CHE", "RANDOM_FP", "LFU_STATIC", "SIM_LRU", "SIM_RANDOM", "SIM_FIFO"])",
      R"(, "simulation": {"requests": 3000000})"));
  const auto table = sweep(s);
  int checked = 0;
  for (const auto& row : table.rows) {
    if (row.capacity == 50 && !row.rank && row.policy.rfind("SIM_", 0) != 0) {
      EXPECT_EQ(row.hit_rate, 0.5) << row.policy;
      ++checked;
    }
    if (row.capacity == 50 && !row.rank && row.policy.rfind("SIM_", 0) == 0) {
      EXPECT_NEAR(row.hit_rate, 0.5, 3 * *row.ci_halfwidth) << row.policy;
    }
    if (row.capacity >= 100) {
      EXPECT_TRUE(row.saturated);
      EXPECT_EQ(row.hit_rate, 1.0);
    } else {
      EXPECT_FALSE(row.saturated);
    }
  }
  EXPECT_EQ(checked, 3);
}

TEST(Sweep, LfuTiesByRank) {
  const auto s = parse_scenario(uniform_text(R"(["LFU_STATIC"])"));
  for (const auto& row : sweep(s).rows) {
    if (row.capacity != 50 || !row.rank) continue;
    EXPECT_EQ(row.hit_rate, *row.rank <= 50 ? 1.0 : 0.0);
  }
}

TEST(Sweep, OverallOnlyHasOneRowPerPoint) {
  const auto s = parse_scenario(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10000},
      "capacities": {"unit": "items", "log_range": {"min": 10, "max": 5000, "points": 7}},
      "policies": ["LRU_CHE", "RANDOM_FP", "LFU_STATIC"]})");
  const auto table = sweep(s);
  ASSERT_EQ(table.rows.size(), 21u);
  for (std::size_t i = 0; i < table.rows.size(); i += 3) {
    const double lfu = table.rows[i + 2].hit_rate;
    const double lru = table.rows[i].hit_rate;
    const double rnd = table.rows[i + 1].hit_rate;
    EXPECT_GE(lfu, lru);
    EXPECT_GE(lru, rnd);
    if (i) EXPECT_GT(lru, table.rows[i - 3].hit_rate);
  }
}

TEST(Sweep, FigureTwoCurves) {
  const auto s = parse_scenario(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 10000},
      "capacities": {"unit": "items", "values": [100, 1000]},
      "policies": ["LRU_CHE"], "ranks": [1, 10, 100, 1000],
      "analysis": {"erfc": true, "asymptotic": true}})");
  const auto table = sweep(s);
  // Per point: overall + 4 ranks, then 4 erfc rows and 4 asymptotic rows.
  ASSERT_EQ(table.rows.size(), 26u);
  EXPECT_EQ(table.rows[5].policy, "LRU_ERFC");
  EXPECT_EQ(table.rows[9].policy, "LRU_ASYMPTOTIC");
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(table.rows[5 + k].hit_rate, table.rows[1 + k].hit_rate, 0.02);
  }
}

TEST(Sweep, DeterministicCsvAcrossThreadCounts) {
  const auto s = parse_scenario(R"({"law": {"kind": "zipf", "alpha": 1.2, "population": 2000},
      "capacities": {"unit": "items", "values": [20, 200]},
      "policies": ["LRU_CHE", "SIM_LRU", "SIM_FIFO"], "ranks": [1, 10],
      "simulation": {"requests": 1500000, "warmup": 100000}, "seed": 77})");
  const auto one = to_csv(sweep(s, {1}));
  EXPECT_EQ(one, to_csv(sweep(s, {3})));
  EXPECT_EQ(one, to_csv(sweep(s, {1})));
}

TEST(Emit, CsvHeaderAndEmptyFields) {
  ResultTable t;
  t.rows.push_back({1e8, GridUnit::kBytes, "LRU_CHE", std::nullopt, 0.25, std::nullopt, false});
  t.rows.push_back({100, GridUnit::kItems, "SIM_LRU", 7, 0.5, 0.01, false});
  EXPECT_EQ(to_csv(t),
            "capacity,unit,policy,rank,hit_rate,ci_halfwidth\n"
            "1e+08,bytes,LRU_CHE,,0.25,\n"
            "100,items,SIM_LRU,7,0.5,0.01\n");
}

TEST(Emit, SvgHasOnePolylinePerSeries) {
  const auto s = parse_scenario(R"({"law": {"kind": "zipf", "alpha": 0.8, "population": 1000},
      "capacities": {"unit": "items", "values": [10, 100]},
      "policies": ["LRU_CHE", "RANDOM_FP"], "ranks": [1, 10]})");
  const auto svg = to_svg(sweep(s), "test");
  std::size_t count = 0;
  for (std::size_t p = 0; (p = svg.find("<polyline", p)) != std::string::npos; ++p) ++count;
  EXPECT_EQ(count, 6u);
  EXPECT_EQ(svg.rfind("</svg>"), svg.size() - 7);
}

TEST(Emit, UnwritablePathThrows) {
  EXPECT_THROW(write_file("/proc/hitrate/none.csv", "x"), std::runtime_error);
}

TEST(Validate, GeometricWithinTolerance) {
  auto s = load_scenario(kDir / "geo09.json");
  s.simulation.requests = 6'000'000;
  const auto report = validate_scenario(s);
  EXPECT_EQ(report.entries.size(), 15u);
  EXPECT_LE(report.max_deviation(), 0.03);
  EXPECT_FALSE(report.breached());
  s.tolerance = 1e-6;
  EXPECT_TRUE(validate_scenario(s).breached());
}

TEST(Validate, RejectsMixes) {
  const auto s = load_scenario(kDir / "internet-mix.json");
  EXPECT_THROW(validate_scenario(s), ValidationError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e13), "1e+13");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace hitrate
