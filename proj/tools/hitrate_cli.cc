// hitrate: cache hit-rate models from the command line.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hitrate/errors.h"
#include "hitrate/gaussian.h"
#include "hitrate/lru_che.h"
#include "hitrate/random_replacement.h"
#include "hitrate/scenario.h"
#include "hitrate/simulator.h"
#include "hitrate/spectrum.h"
#include "hitrate/statistics.h"

namespace {

using namespace hitrate;

struct Common {
  std::string scenario;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<double> epsilon;
  unsigned threads = 0;
};

Scenario load(const Common& c) {
  Scenario s = load_scenario(c.scenario);
  if (c.seed) s.seed = *c.seed;
  if (c.tolerance) s.tolerance = *c.tolerance;
  if (c.epsilon) s.epsilon = *c.epsilon;
  s.validate();
  return s;
}

// Writes to <out>/<stem>.<ext>, or stdout without --out.
void emit(const Common& c, const std::string& stem, const std::string& ext,
          const std::string& body) {
  if (c.out.empty()) {
    std::cout << body;
    return;
  }
  const auto path = std::filesystem::path(c.out) / (stem + "." + ext);
  write_file(path, body);
  std::cerr << "wrote " << path.string() << "\n";
}

std::string stem_of(const Common& c, const std::string& what) {
  return std::filesystem::path(c.scenario).stem().string() + "-" + what;
}

double first_capacity(const Scenario& s, const std::optional<double>& capacity) {
  return s.capacities.to_law_units(capacity ? *capacity : s.capacities.points().front());
}

int run_solve(const Common& c) {
  const Scenario s = load(c);
  const auto law = s.build_law();
  const WeightSpectrum spectrum(law, s.epsilon);
  std::ostringstream out;
  out << "capacity,unit,policy,parameter,residual,iterations\n";
  for (double cap : s.capacities.points()) {
    const double units = s.capacities.to_law_units(cap);
    if (units >= spectrum.item_count()) {
      out << format_number(cap) << ',' << to_string(s.capacities.unit) << ",SATURATED,,,\n";
      continue;
    }
    const auto che = solve_characteristic_time(spectrum, units);
    out << format_number(cap) << ',' << to_string(s.capacities.unit) << ",LRU_CHE,"
        << format_number(che.t_c) << ',' << format_number(che.residual) << ','
        << che.iterations << '\n';
    if (!spectrum.has_sizes() && spectrum.item_count() >= 2) {
      const auto rnd = solve_random_fixed_point(spectrum, units);
      out << format_number(cap) << ',' << to_string(s.capacities.unit) << ",RANDOM_FP,"
          << format_number(rnd.tau) << ',' << format_number(rnd.residual) << ','
          << rnd.iterations << '\n';
    }
  }
  emit(c, stem_of(c, "solve"), "csv", out.str());
  return 0;
}

int run_sweep(const Common& c) {
  const Scenario s = load(c);
  const auto table = sweep(s, {c.threads});
  if (c.format == "svg") {
    emit(c, stem_of(c, "sweep"), "svg", to_svg(table, s.name.empty() ? "sweep" : s.name));
  } else {
    emit(c, stem_of(c, "sweep"), "csv", to_csv(table));
  }
  return 0;
}

int run_validate(const Common& c) {
  const Scenario s = load(c);
  const auto report = validate_scenario(s, {c.threads});
  emit(c, stem_of(c, "validate"), "csv", to_text(report));
  if (report.breached()) {
    std::cerr << "max deviation " << report.max_deviation() << " exceeds tolerance "
              << report.tolerance << "\n";
    return 2;
  }
  return 0;
}

int run_simulate(const Common& c) {
  const Scenario s = load(c);
  if (!s.law) throw ValidationError("simulate: needs a single law");
  const auto law = s.build_law();
  std::vector<SweepPolicy> policies;
  for (auto p : s.policies) {
    if (is_simulated(p)) policies.push_back(p);
  }
  if (policies.empty()) policies.push_back(SweepPolicy::kSimLru);
  std::ostringstream out;
  out << "capacity,policy,rank,requests,hits,hit_rate,ci_halfwidth\n";
  for (double cap : s.capacities.points()) {
    for (auto p : policies) {
      SimConfig cfg;
      cfg.law = law;
      cfg.policy = p == SweepPolicy::kSimLru      ? Policy::kLru
                   : p == SweepPolicy::kSimRandom ? Policy::kRandom
                                                  : Policy::kFifo;
      cfg.capacity = static_cast<std::uint64_t>(std::llround(s.capacities.to_law_units(cap)));
      cfg.requests = s.simulation.requests;
      cfg.warmup = s.simulation.warmup;
      cfg.seed = s.seed;
      const auto est = run_cache_sim(cfg);
      std::vector<std::uint64_t> ranks = s.ranks;
      if (ranks.empty()) {
        for (std::uint64_t r = 1; r <= law.population(); ++r) ranks.push_back(r);
      }
      for (auto r : ranks) {
        if (!est.reportable(r)) continue;
        out << format_number(cap) << ',' << to_string(p) << ',' << r << ','
            << est.requests[r - 1] << ',' << est.hits[r - 1] << ','
            << format_number(est.hit_rate(r)) << ',' << format_number(est.halfwidth(r))
            << '\n';
      }
      out << format_number(cap) << ',' << to_string(p) << ",," << est.total_requests << ','
          << est.total_hits << ',' << format_number(est.overall) << ','
          << format_number(est.overall_halfwidth) << '\n';
    }
  }
  emit(c, stem_of(c, "simulate"), "csv", out.str());
  return 0;
}

struct XdistArgs {
  std::string mode = "x";
  std::optional<double> t;
  std::optional<double> capacity;
  std::uint64_t trials = 0;
};

int run_xdist(const Common& c, const XdistArgs& a) {
  const Scenario s = load(c);
  if (!s.law) throw ValidationError("xdist: needs a single law");
  const auto law = s.build_law();
  const WeightSpectrum spectrum(law, s.epsilon);
  const double cap = first_capacity(s, a.capacity);
  std::ostringstream out;
  if (a.mode == "x") {
    const double t = a.t ? *a.t : solve_characteristic_time(spectrum, cap).t_c;
    const auto xs = sample_X(law, t, a.trials ? a.trials : 100000, s.seed);
    const double m = mean_occupancy(spectrum, t);
    const double sd = std::sqrt(occupancy_variance(spectrum, t));
    out << "value,count,empirical_cdf,normal_cdf\n";
    std::uint64_t seen = 0;
    for (std::size_t k = 0; k < xs.histogram.size(); ++k) {
      if (xs.histogram[k] == 0) continue;
      seen += xs.histogram[k];
      out << k << ',' << xs.histogram[k] << ','
          << format_number(static_cast<double>(seen) / xs.trials) << ','
          << format_number(normal_cdf((k - m) / sd)) << '\n';
    }
    std::cerr << "t " << t << " mean " << xs.mean << " (m " << m << ") variance "
              << xs.variance << " (sigma^2 " << sd * sd << ") kolmogorov "
              << kolmogorov_distance_to_normal(xs.histogram, m, sd) << " berry-esseen "
              << kBerryEsseenConstant / sd << "\n";
    emit(c, stem_of(c, "xdist"), "csv", out.str());
    return 0;
  }
  if (a.mode != "tc") throw ValidationError("--mode: expected x or tc");
  auto samples = sample_T_C(law, static_cast<std::uint64_t>(std::llround(cap)),
                            a.trials ? a.trials : 10000, s.seed);
  const auto mom = moments(samples);
  const double sd = std::sqrt(mom.variance);
  std::sort(samples.begin(), samples.end());
  out << "t_c_sample,empirical_cdf,normal_cdf\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << format_number(samples[i]) << ','
        << format_number(static_cast<double>(i + 1) / samples.size()) << ','
        << format_number(normal_cdf((samples[i] - mom.mean) / sd)) << '\n';
  }
  std::cerr << "T_C mean " << mom.mean << " sd " << sd << " t_C "
            << solve_characteristic_time(spectrum, cap).t_c << " kolmogorov "
            << kolmogorov_distance_to_normal(samples, mom.mean, sd) << " lilliefors(1%) "
            << lilliefors_critical_1pct(samples.size()) << "\n";
  emit(c, stem_of(c, "tdist"), "csv", out.str());
  return 0;
}

int run_analyze(const Common& c) {
  const Scenario s = load(c);
  const auto law = s.build_law();
  const WeightSpectrum spectrum(law, s.epsilon);
  const double n = spectrum.item_count();
  std::ostringstream out;
  out << "capacity,quantity,rank,value\n";
  auto row = [&](double cap, const char* what, std::optional<std::uint64_t> r, double v) {
    out << format_number(cap) << ',' << what << ',' << (r ? std::to_string(*r) : "") << ','
        << format_number(v) << '\n';
  };
  for (double cap : s.capacities.points()) {
    const double units = s.capacities.to_law_units(cap);
    if (units >= n) continue;
    const double t = solve_characteristic_time(spectrum, units).t_c;
    const double var = occupancy_variance(spectrum, t);
    row(cap, "t_c", {}, t);
    row(cap, "sigma_t_c", {}, std::sqrt(var));
    if (var > 0) row(cap, "berry_esseen_bound", {}, kBerryEsseenConstant / std::sqrt(var));
    for (auto r : s.ranks) {
      const double q = law.weight(r);
      row(cap, "che_hit_rate", r, -std::expm1(-q * t));
      if (!s.mix) row(cap, "erfc_gap", r, step_function_gap(spectrum, units, q));
    }
    if (s.law && s.law->kind == LawKind::kZipf) {
      const auto z = zipf_asymptotics(s.law->alpha, s.law->population, units / n);
      row(cap, "psi_inverse_delta", {}, z.psi_inv_delta);
      row(cap, "t_c_asymptotic", {}, z.tc_scale);
      row(cap, "t_c_asymptotic_ratio", {}, z.tc_scale / t);
      row(cap, "t_c_fluctuation", {}, z.tc_fluctuation_scale);
    }
  }
  emit(c, stem_of(c, "analyze"), "csv", out.str());
  return 0;
}

std::string loglog_svg(const std::vector<std::uint64_t>& ranks,
                       const std::vector<double>& base, const std::vector<double>& filtered) {
  constexpr double kW = 640, kH = 440, kL = 70, kT = 30, kPW = 520, kPH = 350;
  double lo = INFINITY, hi = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    for (double v : {base[i], filtered[i]}) {
      if (v > 0) lo = std::min(lo, v), hi = std::max(hi, v);
    }
  }
  const double y0 = std::floor(std::log10(lo)), y1 = std::ceil(std::log10(hi));
  const double x1 = std::max(1.0, std::ceil(std::log10(static_cast<double>(ranks.back()))));
  auto px = [&](double r) { return kL + std::log10(r) / x1 * kPW; };
  auto py = [&](double v) { return kT + (y1 - std::log10(v)) / (y1 - y0) * kPH; };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
       "fill=\"white\"/>\n<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kPW
    << "\" height=\"" << kPH << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = 0; d <= x1; ++d) {
    s << "<text x=\"" << px(std::pow(10, d)) << "\" y=\"" << kT + kPH + 18
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = y0; d <= y1; ++d) {
    s << "<text x=\"" << kL - 6 << "\" y=\"" << py(std::pow(10, d)) + 4
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  const char* names[] = {"q", "q'"};
  const char* colors[] = {"#1f77b4", "#d62728"};
  for (int k = 0; k < 2; ++k) {
    const auto& v = k ? filtered : base;
    s << "<polyline fill=\"none\" stroke=\"" << colors[k] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (v[i] > 0) s << px(static_cast<double>(ranks[i])) << ',' << py(v[i]) << ' ';
    }
    s << "\"/>\n<text x=\"" << kL + kPW - 40 << "\" y=\"" << kT + 20 + 16 * k << "\" fill=\""
      << colors[k] << "\">" << names[k] << "</text>\n";
  }
  s << "<text x=\"" << kL + kPW / 2 << "\" y=\"" << kH - 8
    << "\" text-anchor=\"middle\">rank</text>\n</svg>\n";
  return s.str();
}

int run_filter(const Common& c, std::optional<double> capacity) {
  const Scenario s = load(c);
  const auto law = s.build_law();
  const WeightSpectrum spectrum(law, s.epsilon);
  const double cap = first_capacity(s, capacity);
  const auto sol = solve_characteristic_time(spectrum, cap);
  HitProfile prof = lru_hit_profile(law, spectrum, sol, {});
  const auto filtered = filter_law(law, prof);
  const double base_mass = spectrum.mass();
  const double filtered_mass = total_mass(filtered, s.epsilon);
  std::vector<std::uint64_t> ranks;
  const std::uint64_t n = law.population();
  if (n <= 100000) {
    for (std::uint64_t r = 1; r <= n; ++r) ranks.push_back(r);
  } else {
    for (double x = 0; x <= std::log10(static_cast<double>(n)); x += 0.02) {
      const auto r = static_cast<std::uint64_t>(std::llround(std::pow(10.0, x)));
      if (ranks.empty() || r > ranks.back()) ranks.push_back(std::min(r, n));
    }
  }
  std::vector<double> p, pf;
  for (auto r : ranks) {
    p.push_back(law.weight(r) / base_mass);
    pf.push_back(filtered.weight(r) / filtered_mass);
  }
  if (c.format == "svg") {
    emit(c, stem_of(c, "filter"), "svg", loglog_svg(ranks, p, pf));
    return 0;
  }
  std::ostringstream out;
  out << "rank,base,filtered\n";
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    out << ranks[i] << ',' << format_number(p[i]) << ',' << format_number(pf[i]) << '\n';
  }
  emit(c, stem_of(c, "filter"), "csv", out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache hit rates under the independent reference model"};
  app.require_subcommand(1);
  Common common;
  XdistArgs xdist;
  std::optional<double> filter_capacity;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "Scenario file (JSON)")->required();
    sub->add_option("--out", common.out, "Output directory (default: stdout)");
    sub->add_option("--seed", common.seed, "Override the scenario seed");
    sub->add_option("--format", common.format, "csv or svg")
        ->check(CLI::IsMember({"csv", "svg"}));
    sub->add_option("--tolerance", common.tolerance, "Override the validation tolerance");
    sub->add_option("--epsilon", common.epsilon, "Override the segmentation epsilon");
    sub->add_option("--threads", common.threads, "Worker threads (0: all cores)");
  };

  auto* solve = app.add_subcommand("solve", "Characteristic time and random-replacement constant");
  auto* sweep_cmd = app.add_subcommand("sweep", "Hit rate against capacity for each policy");
  auto* validate = app.add_subcommand("validate", "Analytic models against simulation");
  auto* simulate = app.add_subcommand("simulate", "Per-rank simulated hit rates");
  auto* xd = app.add_subcommand("xdist", "Sample X(t) or T_C");
  auto* analyze = app.add_subcommand("analyze", "erfc gap, Berry-Esseen bound, Zipf asymptotics");
  auto* filter = app.add_subcommand("filter", "Popularity of the miss stream");
  for (auto* sub : {solve, sweep_cmd, validate, simulate, xd, analyze, filter}) add_common(sub);
  xd->add_option("--mode", xdist.mode, "x or tc")->check(CLI::IsMember({"x", "tc"}));
  xd->add_option("--t", xdist.t, "Window length (default: t_C at the first capacity)");
  xd->add_option("--capacity", xdist.capacity, "Capacity (default: first grid point)");
  xd->add_option("--trials", xdist.trials, "Number of samples");
  filter->add_option("--capacity", filter_capacity, "Capacity (default: first grid point)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(common);
    if (*sweep_cmd) return run_sweep(common);
    if (*validate) return run_validate(common);
    if (*simulate) return run_simulate(common);
    if (*xd) return run_xdist(common, xdist);
    if (*analyze) return run_analyze(common);
    if (*filter) return run_filter(common, filter_capacity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
