#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "squadsim/scenario.hpp"

namespace squadsim::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario fields for `--scenario custom-file`. Lists are comma separated
// with one entry per process; empty means the default.
struct CustomScenario {
  std::string byzantine;      // "2:silent,3:equivocate"
  std::string start_times;
  std::string drift_rates;
  std::string proposals;
  std::string isolated;       // "1,4"
  std::string pre_gst_spread;
  bool hold_core = false;
  bool post_gst_max = false;
};

struct RunConfig {
  Protocol protocol = Protocol::squad;
  std::vector<SystemSize> sizes{SystemSize::from_n(4)};
  SimTime delta = 1;
  SimTime gst = 50;
  SimTime beta = 1;
  std::optional<SimTime> epsilon;
  std::uint64_t seed_first = 0;
  std::uint64_t seed_last = 0;
  std::string scenario = "happy";
  std::optional<std::string> out;
  std::optional<std::string> trace_dir;
  std::optional<SimTime> horizon;
  CustomScenario custom;

  SyncTiming timing() const { return {delta, epsilon.value_or(delta / 100)}; }
};

inline std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a non-negative integer: '" + s + "'");
  }
  if (used != s.size() || s.front() == '-') throw ConfigError("not a non-negative integer: '" + s + "'");
  return v;
}

inline SimTime parse_time(const std::string& s) {
  try {
    return SimTime::parse(s);
  } catch (const std::exception&) {
    throw ConfigError("not a time value: '" + s + "'");
  }
}

// "a..b" (inclusive) or a single seed.
inline std::pair<std::uint64_t, std::uint64_t> parse_seeds(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) {
    auto v = parse_u64(s);
    return {v, v};
  }
  auto a = parse_u64(s.substr(0, dots));
  auto b = parse_u64(s.substr(dots + 2));
  if (b < a) throw ConfigError("empty seed range '" + s + "'");
  return {a, b};
}

inline std::vector<SystemSize> parse_sizes(const std::vector<std::string>& items) {
  std::vector<SystemSize> out;
  for (const auto& item : items)
    for (const auto& tok : split(item)) {
      auto n = static_cast<int>(parse_u64(tok));
      try {
        out.push_back(SystemSize::from_n(n));
      } catch (const std::invalid_argument&) {
        throw ConfigError("n=" + tok + " is not 3f+1 for an integer f >= 1");
      }
    }
  if (out.empty()) throw ConfigError("no system size given");
  return out;
}

template <typename T, typename F>
std::vector<T> per_process(const std::string& list, int n, const char* what, F parse) {
  std::vector<T> out;
  if (list.empty()) return out;
  for (const auto& tok : split(list)) out.push_back(parse(tok));
  if (static_cast<int>(out.size()) != n)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                      std::to_string(out.size()));
  return out;
}

inline ScenarioConfig custom_scenario(const ScenarioBase& b, const CustomScenario& cs) {
  ScenarioConfig c = base_config(b, "custom-file");
  const int n = b.size.n;
  auto in_range = [n](const std::string& tok) {
    auto p = static_cast<ProcessId>(parse_u64(tok));
    if (p < 1 || p > n) throw ConfigError("process id " + tok + " out of range");
    return p;
  };
  for (const auto& entry : split(cs.byzantine)) {
    auto colon = entry.find(':');
    ProcessId p = in_range(entry.substr(0, colon));
    Strategy s = Strategy::silent;
    if (colon != std::string::npos) {
      try {
        s = parse_strategy(entry.substr(colon + 1));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    c.byzantine[p] = s;
  }
  if (static_cast<int>(c.byzantine.size()) > b.size.f)
    throw ConfigError("more than f=" + std::to_string(b.size.f) + " Byzantine processes");
  c.start_times = per_process<SimTime>(cs.start_times, n, "start-times", parse_time);
  c.drift_rates = per_process<SimTime>(cs.drift_rates, n, "drift-rates", parse_time);
  for (const auto& r : c.drift_rates)
    if (r <= SimTime(0)) throw ConfigError("drift rates must be positive");
  c.proposals = per_process<Value>(cs.proposals, n, "proposals",
                                   [](const std::string& t) { return static_cast<Value>(parse_u64(t)); });
  for (const auto& tok : split(cs.isolated)) c.network.isolated.insert(in_range(tok));
  if (!cs.pre_gst_spread.empty()) c.network.pre_gst_spread = parse_time(cs.pre_gst_spread);
  c.network.hold_core_before_gst = cs.hold_core;
  c.network.post_gst_max = cs.post_gst_max;
  return c;
}

inline ScenarioConfig build_scenario(const RunConfig& rc, SystemSize size, std::uint64_t seed) {
  ScenarioBase b{rc.protocol, size, rc.timing(), rc.gst, rc.beta, seed};
  ScenarioConfig c;
  if (rc.scenario == "happy") c = happy(b);
  else if (rc.scenario == "worst_case") c = worst_case(b);
  else if (rc.scenario == "scenario_s") c = scenario_s(b);
  else if (rc.scenario == "equivocate") c = equivocate(b);
  else if (rc.scenario == "random") c = randomized(b);
  else if (rc.scenario == "custom-file") c = custom_scenario(b, rc.custom);
  else throw ConfigError("unknown scenario '" + rc.scenario + "'");
  if (rc.horizon) c.horizon = rc.horizon;
  return c;
}

inline const char* csv_header() {
  return "protocol,n,f,seed,scenario,words_post_gst,words_sync_window,t_s,t_d,latency,epochs_max,violations";
}

inline std::string csv_row(const RunConfig& rc, SystemSize size, std::uint64_t seed, const MetricsReport& r) {
  auto opt = [](const std::optional<SimTime>& t, const char* none) { return t ? t->str() : std::string(none); };
  std::ostringstream os;
  os << to_string(rc.protocol) << ',' << size.n << ',' << size.f << ',' << seed << ',' << rc.scenario << ','
     << r.words_post_gst << ',' << r.words_sync_window << ',' << opt(r.t_s, "none") << ',' << opt(r.t_d, "inf")
     << ',' << opt(r.latency, "inf") << ',' << r.epochs_max << ',' << r.violations.size();
  return os.str();
}

inline constexpr const char* kScenarios[] = {"happy", "worst_case", "scenario_s", "equivocate", "random",
                                             "custom-file"};

// Builds the option table. Strings are collected raw and validated in
// finalize() so that every semantic error maps to a ConfigError.
struct Options {
  std::string protocol = "squad";
  std::vector<std::string> n{"4"};
  std::string delta = "1";
  std::string gst = "50";
  std::string beta = "1";
  std::string epsilon;
  std::string seeds = "0";
  std::string scenario = "happy";
  std::string out;
  std::string trace_dir;
  std::string horizon;
  CustomScenario custom;

  void attach(CLI::App& app) {
    app.set_config("--config", "", "flat key=value file; flags override it");
    app.allow_config_extras(false);
    app.add_option("--protocol", protocol, "raresync-quad | squad | alltoall | doubling")->capture_default_str();
    app.add_option("--n", n, "system sizes, n = 3f+1 (repeat or comma-separate)")->capture_default_str();
    app.add_option("--delta", delta, "post-GST message delay bound")->capture_default_str();
    app.add_option("--gst", gst, "global stabilization time")->capture_default_str();
    app.add_option("--beta", beta, "initial view duration of the doubling baseline")->capture_default_str();
    app.add_option("--epsilon", epsilon, "view-duration slack (default delta/100)");
    app.add_option("--seeds", seeds, "seed or inclusive range a..b")->capture_default_str();
    app.add_option("--scenario", scenario, "happy | worst_case | scenario_s | equivocate | random | custom-file")
        ->capture_default_str();
    app.add_option("--out", out, "CSV output file (default: $SQUADSIM_OUT/squadsim.csv or stdout)");
    app.add_option("--trace-dir", trace_dir, "write one trace file per run here");
    app.add_option("--horizon", horizon, "stop every run at this global time");
    app.add_option("--byzantine", custom.byzantine, "custom-file: id:strategy list");
    app.add_option("--start-times", custom.start_times, "custom-file: per-process start times");
    app.add_option("--drift-rates", custom.drift_rates, "custom-file: per-process pre-GST clock rates");
    app.add_option("--proposals", custom.proposals, "custom-file: per-process proposals");
    app.add_option("--isolated", custom.isolated, "custom-file: processes whose synchronizer traffic is held");
    app.add_option("--pre-gst-spread", custom.pre_gst_spread, "custom-file: max pre-GST delay");
    app.add_flag("--hold-core", custom.hold_core, "custom-file: hold view-core traffic until GST");
    app.add_flag("--post-gst-max", custom.post_gst_max, "custom-file: every post-GST delay is exactly delta");
  }

  RunConfig finalize() const {
    RunConfig rc;
    try {
      rc.protocol = parse_protocol(protocol);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    rc.sizes = parse_sizes(n);
    rc.delta = parse_time(delta);
    rc.gst = parse_time(gst);
    rc.beta = parse_time(beta);
    if (rc.delta <= SimTime(0) || rc.beta <= SimTime(0)) throw ConfigError("delta and beta must be positive");
    if (rc.gst < SimTime(0)) throw ConfigError("gst must be non-negative");
    if (!epsilon.empty()) {
      rc.epsilon = parse_time(epsilon);
      if (*rc.epsilon <= SimTime(0)) throw ConfigError("epsilon must be positive");
    }
    std::tie(rc.seed_first, rc.seed_last) = parse_seeds(seeds);
    rc.scenario = scenario;
    if (std::find(std::begin(kScenarios), std::end(kScenarios), scenario) == std::end(kScenarios))
      throw ConfigError("unknown scenario '" + scenario + "'");
    if (!out.empty()) rc.out = out;
    if (!trace_dir.empty()) rc.trace_dir = trace_dir;
    if (!horizon.empty()) rc.horizon = parse_time(horizon);
    rc.custom = custom;
    return rc;
  }
};

// Parses argv into a RunConfig. Returns the exit code to use instead when
// parsing does not produce a config (help: 0, any error: 2).
inline std::variant<RunConfig, int> parse_args(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Deterministic partial-synchrony simulator for RareSync, Quad and SQuad"};
  Options opts;
  opts.attach(app);
  try {
    app.parse(argc, argv);
    return opts.finalize();
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
}

inline std::string trace_file_name(const RunConfig& rc, SystemSize size, std::uint64_t seed) {
  return std::string(to_string(rc.protocol)) + "_" + rc.scenario + "_n" + std::to_string(size.n) + "_s" +
         std::to_string(seed) + ".trace";
}

// Runs every (n, seed) pair in order. Writes the CSV to `csv` and a short
// human-readable report to `report`. Returns 0 iff every run decided with no
// violations, 1 otherwise, 2 on a config error discovered while building runs.
inline int run_sweep(const RunConfig& rc, std::ostream& csv, std::ostream& report) {
  csv << csv_header() << '\n';
  bool clean = true;
  for (SystemSize size : rc.sizes) {
    long max_words = 0;
    std::optional<SimTime> max_latency;
    int failed = 0;
    int runs = 0;
    for (std::uint64_t seed = rc.seed_first;; ++seed) {
      ScenarioConfig sc;
      try {
        sc = build_scenario(rc, size, seed);
      } catch (const ConfigError& e) {
        report << "config error: " << e.what() << '\n';
        return 2;
      }
      RunOutcome o = run_scenario(sc);
      ++runs;
      csv << csv_row(rc, size, seed, o.report) << '\n';
      if (rc.trace_dir) {
        std::filesystem::create_directories(*rc.trace_dir);
        std::ofstream tf(std::filesystem::path(*rc.trace_dir) / trace_file_name(rc, size, seed));
        write_trace(tf, o.trace);
      }
      max_words = std::max(max_words, o.report.words_post_gst);
      if (o.report.latency && (!max_latency || *o.report.latency > *max_latency)) max_latency = o.report.latency;
      if (!o.report.ok()) {
        ++failed;
        clean = false;
        report << "n=" << size.n << " seed=" << seed << ": " << to_string(o.status)
               << (o.report.decided() ? "" : ", no decision") << '\n';
        for (const auto& v : o.report.violations) report << "  " << to_string(v.id) << ": " << v.detail << '\n';
      }
      if (seed == rc.seed_last) break;
    }
    report << to_string(rc.protocol) << ' ' << rc.scenario << " n=" << size.n << ": " << runs << " runs, " << failed
           << " failed, max words " << max_words << ", max latency " << (max_latency ? max_latency->str() : "inf")
           << '\n';
  }
  return clean ? 0 : 1;
}

// Where the CSV goes: --out, else $SQUADSIM_OUT/squadsim.csv, else stdout.
inline std::optional<std::filesystem::path> output_path(const RunConfig& rc) {
  if (rc.out) return std::filesystem::path(*rc.out);
  if (const char* dir = std::getenv("SQUADSIM_OUT"); dir && *dir) return std::filesystem::path(dir) / "squadsim.csv";
  return std::nullopt;
}

}  // namespace squadsim::cli
