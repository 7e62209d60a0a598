#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "squadsim/adversary.hpp"
#include "squadsim/metrics.hpp"

namespace squadsim {

struct ScenarioConfig {
  std::string name = "happy";
  Protocol protocol = Protocol::squad;
  SystemSize size;
  SyncTiming timing;
  SimTime gst = 50;
  SimTime beta = 1;
  std::map<ProcessId, Strategy> byzantine;
  std::vector<SimTime> start_times;  // empty: everyone starts at 0
  std::vector<SimTime> drift_rates;  // clock rate before GST; empty: no drift
  std::vector<Value> proposals;      // empty: P_i proposes 100 + i
  NetworkSpec network;
  std::uint64_t seed = 0;
  std::optional<SimTime> horizon;

  Value proposal(ProcessId p) const { return proposals.empty() ? 100 + p : proposals.at(p - 1); }

  std::set<ProcessId> byzantine_ids() const {
    std::set<ProcessId> s;
    for (const auto& [p, _] : byzantine) s.insert(p);
    return s;
  }

  // The common proposal of all correct processes, if there is one.
  std::optional<Value> unanimous_value() const {
    std::optional<Value> v;
    for (ProcessId p = 1; p <= size.n; ++p) {
      if (byzantine.count(p)) continue;
      if (v && *v != proposal(p)) return std::nullopt;
      v = proposal(p);
    }
    return v;
  }

  SimTime start_time(ProcessId p) const { return start_times.empty() ? SimTime(0) : start_times.at(p - 1); }

  SimTime default_horizon() const {
    if (protocol == Protocol::doubling) return gst + beta * SimTime(1L << 30);
    return gst + timing.epoch_duration(size.f) * 64;
  }
};

struct RunOutcome {
  RunStatus status = RunStatus::livelock;
  Trace trace;
  MetricsReport report;
  long tallied_words = 0;  // handler-side count over [GST, t_d]
};

// Compares the trace-side post-GST word count with the handlers' own tally.
inline void check_word_accounting(MetricsReport& report, long tallied) {
  if (report.words_post_gst == tallied) return;
  report.violations.push_back({Invariant::word_accounting, "trace counts " + std::to_string(report.words_post_gst) +
                                                               " words, handlers count " + std::to_string(tallied)});
}

namespace detail {

// Incremental view of the trace used by stop predicates.
class RunMonitor {
 public:
  RunMonitor(const ScenarioConfig& cfg) : cfg_(cfg) {
    for (ProcessId p = 1; p <= cfg.size.n; ++p)
      if (!cfg.byzantine.count(p)) correct_.insert(p);
  }

  void observe(const TraceEvent& e) {
    if (!correct_.count(e.process)) return;
    switch (e.kind) {
      case EventKind::decide:
        if (decided_.insert(e.process).second && decided_.size() == correct_.size()) t_d_ = e.time;
        break;
      case EventKind::advance:
        if (!first_advance_.count(e.process)) first_advance_.emplace(e.process, e.time);
        break;
      case EventKind::enter_epoch: {
        if (!first_entry_.count(e.epoch)) first_entry_.emplace(e.epoch, e.time);
        auto& m = max_epoch_[e.process];
        m = std::max(m, e.epoch);
        break;
      }
      default: break;
    }
  }

  bool done(const SimTime& now) const {
    if (!t_d_ || now < *t_d_ + cfg_.timing.big_delta()) return false;
    if (!uses_epochs(cfg_.protocol)) return true;
    // Keep going until every correct process has left e_final, so that all of
    // its views are closed in the trace.
    SimTime g = cfg_.gst;
    for (const auto& [p, t] : first_advance_) g = max(g, t);
    std::optional<Epoch> e_final;
    for (const auto& [e, t] : first_entry_)
      if (t >= g) {
        e_final = e;
        break;
      }
    if (!e_final) return false;
    for (ProcessId p : correct_) {
      auto it = max_epoch_.find(p);
      if (it == max_epoch_.end() || it->second <= *e_final) return false;
    }
    return true;
  }

 private:
  const ScenarioConfig& cfg_;
  std::set<ProcessId> correct_;
  std::set<ProcessId> decided_;
  std::optional<SimTime> t_d_;
  std::map<ProcessId, SimTime> first_advance_;
  std::map<Epoch, SimTime> first_entry_;
  std::map<ProcessId, Epoch> max_epoch_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

// A fully wired simulation for one scenario, with its signing authority.
class ScenarioRun {
 public:
  explicit ScenarioRun(ScenarioConfig cfg) : cfg_(std::move(cfg)), monitor_(cfg_) {
    const int n = cfg_.size.n;
    if (n != 3 * cfg_.size.f + 1) throw std::invalid_argument("scenario: n must equal 3f+1");
    if (static_cast<int>(cfg_.byzantine.size()) > cfg_.size.f)
      throw std::invalid_argument("scenario: more than f Byzantine processes");
    authority_ = std::make_unique<crypto::Authority>(n, cfg_.size.f, detail::derive_seed(cfg_.seed, 0xA17));
    ProtocolParams params{cfg_.protocol, cfg_.size, cfg_.timing, cfg_.beta};

    EngineConfig ec;
    ec.size = cfg_.size;
    ec.delta = cfg_.timing.delta;
    ec.gst = cfg_.gst;
    ec.byzantine = cfg_.byzantine_ids();
    ec.seed = detail::derive_seed(cfg_.seed, 0xDE1A);
    std::vector<std::unique_ptr<Node>> nodes;
    for (ProcessId p = 1; p <= n; ++p) {
      crypto::SigningKey key = authority_->key_for(p);
      auto proc = std::make_unique<Process>(params, *authority_, key, cfg_.proposal(p));
      auto it = cfg_.byzantine.find(p);
      if (it == cfg_.byzantine.end()) {
        nodes.push_back(std::move(proc));
      } else {
        nodes.push_back(std::make_unique<ByzantineNode>(std::move(proc), it->second, cfg_.size, cfg_.gst, key,
                                                        detail::derive_seed(cfg_.seed, 0xB00 + p)));
      }
      ec.start_times.push_back(cfg_.start_time(p));
      SimTime rate = cfg_.drift_rates.empty() ? SimTime(1) : cfg_.drift_rates.at(p - 1);
      ec.clocks.push_back(ClockModel::drifting(rate, cfg_.gst));
    }
    sim_ = std::make_unique<Simulation>(std::move(ec), std::move(nodes),
                                        std::make_unique<ScriptedDelay>(cfg_.network, cfg_.gst, cfg_.timing.delta));
    sim_->set_observer([this](const TraceEvent& e) {
      monitor_.observe(e);
      if (watch_ && !watch_hit_ && watch_(e)) watch_hit_ = e.time;
    });
  }

  const ScenarioConfig& config() const { return cfg_; }
  Simulation& sim() { return *sim_; }
  const crypto::Authority& authority() const { return *authority_; }

  // Runs until the standard stop condition: everyone decided, Delta has
  // passed, and (with epochs) every correct process has left e_final.
  RunStatus run() {
    SimTime horizon = cfg_.horizon.value_or(cfg_.default_horizon());
    return sim_->run([this](const Simulation& s) { return monitor_.done(s.now()); }, horizon);
  }

  // Runs until the first event matching `pred`; returns its time.
  std::optional<SimTime> run_until(std::function<bool(const TraceEvent&)> pred) {
    watch_ = std::move(pred);
    SimTime horizon = cfg_.horizon.value_or(cfg_.default_horizon());
    sim_->run([this](const Simulation&) { return watch_hit_.has_value(); }, horizon);
    return watch_hit_;
  }

  AnalysisParams analysis_params() const {
    AnalysisParams a;
    a.protocol = cfg_.protocol;
    a.size = cfg_.size;
    a.timing = cfg_.timing;
    a.gst = cfg_.gst;
    a.byzantine = cfg_.byzantine_ids();
    a.unanimous_value = cfg_.unanimous_value();
    a.all_start_by_gst = true;
    for (ProcessId p = 1; p <= cfg_.size.n; ++p)
      if (cfg_.start_time(p) > cfg_.gst) a.all_start_by_gst = false;
    a.authority = authority_.get();
    return a;
  }

  RunOutcome finish(RunStatus status) {
    RunOutcome out;
    out.status = status;
    AnalysisParams a = analysis_params();
    out.report = analyze(sim_->trace(), a);
    for (ProcessId p : a.correct()) out.tallied_words += tally(p, out.report.t_d);
    check_word_accounting(out.report, out.tallied_words);
    out.trace = sim_->take_trace();
    return out;
  }

 private:
  long tally(ProcessId p, const std::optional<SimTime>& t_d) const {
    // An unbounded window is the end of the run.
    SimTime to = t_d ? *t_d : sim_->now();
    if (to < cfg_.gst) return 0;
    return static_cast<const Simulation&>(*sim_).node(p).tallied_words(cfg_.gst, to);
  }

  ScenarioConfig cfg_;
  detail::RunMonitor monitor_;
  std::unique_ptr<crypto::Authority> authority_;
  std::unique_ptr<Simulation> sim_;
  std::function<bool(const TraceEvent&)> watch_;
  std::optional<SimTime> watch_hit_;
};

inline RunOutcome run_scenario(const ScenarioConfig& cfg) {
  ScenarioRun run(cfg);
  RunStatus status = run.run();
  return run.finish(status);
}

// ---------------------------------------------------------------------------
// Scenario builders.

struct ScenarioBase {
  Protocol protocol = Protocol::squad;
  SystemSize size;
  SyncTiming timing;
  SimTime gst = 50;
  SimTime beta = 1;
  std::uint64_t seed = 0;
};

inline ScenarioConfig base_config(const ScenarioBase& b, std::string name) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.protocol = b.protocol;
  c.size = b.size;
  c.timing = b.timing;
  c.gst = b.gst;
  c.beta = b.beta;
  c.seed = b.seed;
  c.network.pre_gst_spread = b.timing.delta;
  return c;
}

// Everyone correct and starting at GST.
inline ScenarioConfig happy(const ScenarioBase& b) {
  ScenarioConfig c = base_config(b, "happy");
  c.start_times.assign(b.size.n, b.gst);
  return c;
}

// Every Byzantine process equivocates when it leads; leader(1) is one of them.
inline ScenarioConfig equivocate(const ScenarioBase& b) {
  ScenarioConfig c = base_config(b, "equivocate");
  c.start_times.assign(b.size.n, b.gst);
  std::mt19937_64 rng(detail::derive_seed(b.seed, 0xE9));
  std::vector<ProcessId> others;
  for (ProcessId p = 1; p <= b.size.n; ++p)
    if (p != leader(1, b.size.n)) others.push_back(p);
  std::shuffle(others.begin(), others.end(), rng);
  c.byzantine[leader(1, b.size.n)] = Strategy::equivocate;
  for (int i = 0; i + 1 < b.size.f; ++i) c.byzantine[others[i]] = Strategy::equivocate;
  // Unanimity would make the second value uncertifiable; split the proposals.
  for (ProcessId p = 1; p <= b.size.n; ++p) c.proposals.push_back(p % 2 == 0 ? 7 : 8);
  return c;
}

// Pre-GST desynchronization: a fast group of 2f+1 (all f Byzantine among them)
// runs ahead while the synchronizer traffic of the other f correct processes is
// held until GST. GST lands in the last view of e_max for the fast group, and
// the Byzantine processes lead the first f views after GST, where they stay
// silent in the view core.
inline ScenarioConfig worst_case(const ScenarioBase& b, bool with_byzantine = true) {
  ScenarioConfig c = base_config(b, "worst_case");
  const int n = b.size.n;
  const int f = b.size.f;
  const SimTime vd = b.timing.view_duration();
  std::mt19937_64 rng(detail::derive_seed(b.seed, 0x3C));

  // Target pre-GST progress, in views for the all-to-all baseline and epochs otherwise.
  const Epoch e_max = 2 + static_cast<Epoch>(b.seed % 2);
  const View v_max = e_max * (f + 1);
  View first_bad = 0;
  if (uses_epochs(b.protocol)) first_bad = global_view(e_max + 1, 1, f);
  else if (b.protocol == Protocol::alltoall) first_bad = v_max + 1;

  std::set<ProcessId> bad;
  if (first_bad > 0)
    for (int i = 0; i < f; ++i) bad.insert(leader(first_bad + i, n));

  std::vector<ProcessId> rest;
  for (ProcessId p = 1; p <= n; ++p)
    if (!bad.count(p)) rest.push_back(p);
  std::shuffle(rest.begin(), rest.end(), rng);
  std::set<ProcessId> slow(rest.begin(), rest.begin() + f);

  std::uniform_int_distribution<long> tiny(0, 16);
  std::uniform_int_distribution<long> half(32, 64);
  for (ProcessId p = 1; p <= n; ++p) {
    if (slow.count(p)) c.drift_rates.push_back(SimTime(half(rng), 64));
    else c.drift_rates.push_back(SimTime(1) - SimTime(tiny(rng), 8L * (f + 1) * 16));
  }
  c.start_times.assign(n, SimTime(0));
  c.network.isolated = slow;
  c.network.hold_core_before_gst = true;
  c.network.post_gst_max = true;
  c.network.pre_gst_spread = b.timing.delta;

  if (b.protocol == Protocol::doubling) {
    // No synchronizer traffic to hold back: drift alone scatters the views. The
    // Byzantine set is the leaders right after the highest pre-GST view.
    ScenarioConfig pilot = c;
    ScenarioRun run(pilot);
    run.run_until([&](const TraceEvent& e) { return e.time >= c.gst; });
    View top = 0;
    for (const auto& e : run.sim().trace())
      if (e.kind == EventKind::advance && e.time < c.gst) top = std::max(top, e.view);
    if (with_byzantine)
      for (int i = 1; i <= f; ++i) c.byzantine[leader(top + i, n)] = Strategy::silent_leader;
    return c;
  }

  if (with_byzantine)
    for (ProcessId p : bad) c.byzantine[p] = Strategy::silent_leader;

  // Pilot with GST pushed out of reach to time the fast group's progress.
  ScenarioConfig pilot = c;
  pilot.gst = SimTime(1'000'000'000);
  pilot.horizon = pilot.gst;
  ScenarioRun run(pilot);
  std::optional<SimTime> t;
  if (uses_epochs(b.protocol)) {
    t = run.run_until([&](const TraceEvent& e) { return e.kind == EventKind::enter_epoch && e.epoch == e_max; });
    if (!t) throw std::logic_error("worst_case: fast group never reached e_max");
    c.gst = *t + vd * f + vd / 2;
  } else {
    t = run.run_until([&](const TraceEvent& e) { return e.kind == EventKind::advance && e.view == v_max; });
    if (!t) throw std::logic_error("worst_case: fast group never reached v_max");
    c.gst = *t + vd / 2;
  }
  // Clocks stop drifting at the new GST.
  return c;
}

// Three correct groups: at GST, A (f processes) is half-way through view 1,
// B (f) through view 2 and C (f+1) through view 3 of epoch 1, placed there by
// drift alone. View-core traffic is held until GST.
inline ScenarioConfig scenario_s(const ScenarioBase& b) {
  ScenarioConfig c = base_config(b, "scenario_s");
  const int n = b.size.n;
  const int f = b.size.f;
  const SimTime vd = b.timing.view_duration();
  c.start_times.assign(n, SimTime(0));
  for (ProcessId p = 1; p <= n; ++p) {
    long halves = p <= f ? 1 : p <= 2 * f ? 3 : 5;
    c.drift_rates.push_back(vd * halves / (b.gst * 2));
  }
  c.network.hold_core_before_gst = true;
  c.network.post_gst_max = true;
  return c;
}

// Randomized delays, drift, start times and Byzantine strategies.
inline ScenarioConfig randomized(const ScenarioBase& b, std::optional<Value> unanimous = std::nullopt,
                                 bool distinct = false) {
  ScenarioConfig c = base_config(b, "random");
  const int n = b.size.n;
  const int f = b.size.f;
  std::mt19937_64 rng(detail::derive_seed(b.seed, 0x5EED));
  auto uniform = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };

  std::vector<ProcessId> ids;
  for (ProcessId p = 1; p <= n; ++p) ids.push_back(p);
  std::shuffle(ids.begin(), ids.end(), rng);
  const Strategy all[] = {Strategy::silent,   Strategy::silent_after_gst, Strategy::silent_leader,
                          Strategy::equivocate, Strategy::replay,         Strategy::spam};
  long byz = uniform(0, f);
  for (long i = 0; i < byz; ++i) c.byzantine[ids[i]] = all[uniform(0, 5)];
  std::vector<ProcessId> correct(ids.begin() + byz, ids.end());
  long isolated = uniform(0, f);
  for (long i = 0; i < isolated && i < static_cast<long>(correct.size()); ++i) c.network.isolated.insert(correct[i]);

  for (ProcessId p = 1; p <= n; ++p) {
    c.start_times.push_back(b.gst * SimTime(uniform(0, 1000), 1000));
    c.drift_rates.push_back(SimTime(uniform(32, 128), 64));
  }
  const long spreads[] = {1, 5, 20};
  c.network.pre_gst_spread = b.timing.delta * spreads[uniform(0, 2)];
  c.network.hold_core_before_gst = uniform(0, 1) == 1;
  c.network.post_gst_max = uniform(0, 1) == 1;

  long mode = unanimous ? 0 : distinct ? 2 : uniform(0, 2);
  for (ProcessId p = 1; p <= n; ++p) {
    if (mode == 0) c.proposals.push_back(unanimous.value_or(7));
    else if (mode == 1) c.proposals.push_back(uniform(1, 3));
    else c.proposals.push_back(100 + p);
  }
  // Byzantine processes always push a value of their own.
  for (const auto& [p, _] : c.byzantine) c.proposals[p - 1] = 900 + p;
  return c;
}

}  // namespace squadsim
