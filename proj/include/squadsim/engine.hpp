#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "squadsim/clock.hpp"
#include "squadsim/process.hpp"
#include "squadsim/trace.hpp"

namespace squadsim {

struct Envelope {
  ProcessId sender = 0;
  ProcessId receiver = 0;
  MessagePtr payload;
  SimTime sent_at;
  SimTime deliver_at;
  int words = 1;
};

// Adversary-controlled choice of delivery time. The engine validates the
// result against the network model before queueing it.
class DelayPolicy {
 public:
  virtual ~DelayPolicy() = default;
  virtual SimTime deliver_at(const Envelope& env, std::mt19937_64& rng) const = 0;
};

struct TimerHandle {
  ProcessId owner = 0;
  TimerKind kind = TimerKind::view_timer;
  std::uint64_t generation = 0;
  std::optional<SimTime> pending;
};

struct EngineConfig {
  SystemSize size;
  SimTime delta = 1;
  SimTime gst = 0;
  std::set<ProcessId> byzantine;
  std::vector<SimTime> start_times;   // index p-1; defaults to 0
  std::vector<ClockModel> clocks;     // index p-1; defaults to ideal
  std::uint64_t seed = 0;
};

enum class RunStatus { stopped, livelock, horizon };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::stopped: return "stopped";
    case RunStatus::livelock: return "livelock";
    case RunStatus::horizon: return "horizon";
  }
  return "?";
}

// Deterministic discrete-event simulation of n processes. Simultaneous events
// are ordered by (time, class: delivery < timer < start, process id, sequence).
class Simulation {
 public:
  using StopPredicate = std::function<bool(const Simulation&)>;
  using Observer = std::function<void(const TraceEvent&)>;

  Simulation(EngineConfig cfg, std::vector<std::unique_ptr<Node>> nodes, std::unique_ptr<DelayPolicy> policy)
      : cfg_(std::move(cfg)), nodes_(std::move(nodes)), policy_(std::move(policy)), rng_(cfg_.seed) {
    const int n = cfg_.size.n;
    if (static_cast<int>(nodes_.size()) != n) throw std::invalid_argument("Simulation: need exactly n nodes");
    if (static_cast<int>(cfg_.byzantine.size()) > cfg_.size.f)
      throw std::invalid_argument("Simulation: more than f Byzantine processes");
    if (cfg_.start_times.empty()) cfg_.start_times.assign(n, SimTime(0));
    if (cfg_.clocks.empty()) cfg_.clocks.assign(n, ClockModel::ideal());
    if (static_cast<int>(cfg_.start_times.size()) != n || static_cast<int>(cfg_.clocks.size()) != n)
      throw std::invalid_argument("Simulation: start_times and clocks need n entries");
    for (int p = 1; p <= n; ++p)
      for (TimerKind k : {TimerKind::view_timer, TimerKind::dissemination_timer, TimerKind::baseline_timer})
        timers_.push_back(TimerHandle{p, k, 0, std::nullopt});
    started_.assign(n, false);
    waiting_.resize(n);
    for (int p = 1; p <= n; ++p) push({cfg_.start_times[p - 1], kStart, p, next_seq_++, {}, TimerKind::view_timer, 0});
  }

  const EngineConfig& config() const { return cfg_; }
  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }
  const SimTime& now() const { return now_; }
  Node& node(ProcessId p) { return *nodes_.at(p - 1); }
  const Node& node(ProcessId p) const { return *nodes_.at(p - 1); }
  bool is_byzantine(ProcessId p) const { return cfg_.byzantine.count(p) > 0; }
  void set_observer(Observer obs) { observer_ = std::move(obs); }

  const TimerHandle& timer(ProcessId p, TimerKind k) const { return timers_[index(p, k)]; }

  void measure(ProcessId p, TimerKind k, const SimTime& local_duration) {
    if (local_duration <= SimTime(0)) throw std::invalid_argument("measure: duration must be positive");
    TimerHandle& h = timers_[index(p, k)];
    ++h.generation;
    h.pending = cfg_.clocks[p - 1].global_after(now_, local_duration);
    push({*h.pending, kTimer, p, next_seq_++, {}, k, h.generation});
  }

  void cancel(ProcessId p, TimerKind k) {
    TimerHandle& h = timers_[index(p, k)];
    if (!h.pending) return;
    ++h.generation;
    h.pending.reset();
  }

  void send(ProcessId from, ProcessId to, MessagePtr payload, int words) {
    if (words <= 0) throw std::invalid_argument("send: words must be positive");
    if (from < 1 || from > cfg_.size.n || to < 1 || to > cfg_.size.n)
      throw std::out_of_range("send: process id out of range");
    Envelope env{from, to, std::move(payload), now_, SimTime(0), words};
    env.deliver_at = policy_->deliver_at(env, rng_);
    validate(env);
    record({now_, from, is_byzantine(from) ? EventKind::byz : EventKind::send, to, env.payload,
            TimerKind::view_timer, 0, 0, 0, 0, words});
    push({env.deliver_at, kDelivery, to, next_seq_++, env, TimerKind::view_timer, 0});
  }

  RunStatus run(const StopPredicate& stop, const std::optional<SimTime>& horizon = std::nullopt) {
    while (!queue_.empty()) {
      if (stop && stop(*this)) return RunStatus::stopped;
      if (horizon && queue_.top().time > *horizon) return RunStatus::horizon;
      // The moved-from top lands past the heap range in pop(), so it is never compared.
      Queued ev = std::move(const_cast<Queued&>(queue_.top()));
      queue_.pop();
      if (ev.time < now_) throw std::logic_error("Simulation: time went backwards");
      now_ = ev.time;
      step(ev);
    }
    if (stop && stop(*this)) return RunStatus::stopped;
    return RunStatus::livelock;
  }

 private:
  static constexpr int kDelivery = 0;
  static constexpr int kTimer = 1;
  static constexpr int kStart = 2;

  struct Queued {
    SimTime time;
    int rank;
    ProcessId process;
    std::uint64_t seq;
    Envelope env;
    TimerKind kind;
    std::uint64_t generation;
  };
  struct Later {
    bool operator()(const Queued& a, const Queued& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.rank != b.rank) return a.rank > b.rank;
      if (a.process != b.process) return a.process > b.process;
      return a.seq > b.seq;
    }
  };

  std::size_t index(ProcessId p, TimerKind k) const {
    if (p < 1 || p > cfg_.size.n) throw std::out_of_range("timer: process id out of range");
    return static_cast<std::size_t>(p - 1) * 3 + static_cast<std::size_t>(k);
  }

  void push(Queued q) { queue_.push(std::move(q)); }

  void validate(const Envelope& env) const {
    if (env.deliver_at < env.sent_at) throw std::logic_error("DelayPolicy: delivery before send");
    if (env.sent_at >= cfg_.gst) {
      SimTime d = env.deliver_at - env.sent_at;
      if (d <= SimTime(0) || d > cfg_.delta) throw std::logic_error("DelayPolicy: post-GST delay outside (0, delta]");
    }
  }

  void record(TraceEvent e) {
    trace_.push_back(std::move(e));
    if (observer_) observer_(trace_.back());
  }

  void step(const Queued& ev) {
    const ProcessId p = ev.process;
    Effects out;
    switch (ev.rank) {
      case kStart: {
        started_[p - 1] = true;
        node(p).on_start(now_, out);
        apply(p, out);
        auto waiting = std::move(waiting_[p - 1]);
        waiting_[p - 1].clear();
        for (const auto& env : waiting) deliver(env);
        break;
      }
      case kDelivery:
        if (!started_[p - 1]) {
          waiting_[p - 1].push_back(ev.env);
          break;
        }
        deliver(ev.env);
        break;
      case kTimer: {
        TimerHandle& h = timers_[index(p, ev.kind)];
        if (h.generation != ev.generation || !h.pending) break;
        h.pending.reset();
        record({now_, p, EventKind::timer, 0, nullptr, ev.kind, 0, 0, 0, 0, 0});
        node(p).on_timer(now_, ev.kind, out);
        apply(p, out);
        break;
      }
    }
  }

  void deliver(const Envelope& env) {
    record({now_, env.receiver, EventKind::deliver, env.sender, env.payload, TimerKind::view_timer, 0, 0, 0, 0, 0});
    Effects out;
    node(env.receiver).on_message(now_, env.sender, *env.payload, out);
    apply(env.receiver, out);
  }

  void apply(ProcessId p, Effects& out) {
    for (auto& item : out.items()) {
      std::visit(
          [&](auto& e) {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, effect::Send>) {
              int w = words(*e.msg);
              if (e.to == 0) {
                for (ProcessId r = 1; r <= cfg_.size.n; ++r) send(p, r, e.msg, w);
              } else {
                send(p, e.to, e.msg, w);
              }
            } else if constexpr (std::is_same_v<E, effect::Measure>) {
              measure(p, e.kind, e.duration);
            } else if constexpr (std::is_same_v<E, effect::Cancel>) {
              cancel(p, e.kind);
            } else if constexpr (std::is_same_v<E, effect::Advance>) {
              record({now_, p, EventKind::advance, 0, nullptr, TimerKind::view_timer, e.view, e.epoch, e.index, 0, 0});
            } else if constexpr (std::is_same_v<E, effect::EnterEpoch>) {
              record({now_, p, EventKind::enter_epoch, 0, nullptr, TimerKind::view_timer, 0, e.epoch, 0, 0, 0});
            } else {
              record({now_, p, EventKind::decide, 0, nullptr, TimerKind::view_timer, 0, 0, 0, e.value, 0});
            }
          },
          item);
    }
  }

  EngineConfig cfg_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::unique_ptr<DelayPolicy> policy_;
  std::mt19937_64 rng_;
  std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
  std::vector<TimerHandle> timers_;
  std::vector<bool> started_;
  std::vector<std::vector<Envelope>> waiting_;
  Trace trace_;
  Observer observer_;
  SimTime now_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace squadsim
