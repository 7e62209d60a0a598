#include <gtest/gtest.h>

#include <functional>

#include "squadsim/scenario.hpp"

using namespace squadsim;

namespace {

// Node whose handlers are plain callbacks; unset handlers do nothing.
struct ScriptNode : Node {
  std::function<void(const SimTime&, Effects&)> start;
  std::function<void(const SimTime&, ProcessId, const Message&, Effects&)> message;
  std::function<void(const SimTime&, TimerKind, Effects&)> timer;

  void on_start(const SimTime& now, Effects& out) override {
    if (start) start(now, out);
  }
  void on_message(const SimTime& now, ProcessId from, const Message& m, Effects& out) override {
    if (message) message(now, from, m, out);
  }
  void on_timer(const SimTime& now, TimerKind k, Effects& out) override {
    if (timer) timer(now, k, out);
  }
  long tallied_words(const SimTime&, const SimTime&) const override { return 0; }
};

struct FixedDelay : DelayPolicy {
  SimTime gst;
  SimTime delta;
  bool max_after_gst = true;
  SimTime deliver_at(const Envelope& env, std::mt19937_64&) const override {
    if (env.sent_at >= gst) return env.sent_at + delta;
    return gst + delta;
  }
};

struct BadDelay : DelayPolicy {
  SimTime deliver_at(const Envelope& env, std::mt19937_64&) const override { return env.sent_at + 5; }
};

struct Harness {
  std::vector<ScriptNode*> nodes;
  std::unique_ptr<Simulation> sim;

  explicit Harness(EngineConfig cfg, std::unique_ptr<DelayPolicy> policy = nullptr) {
    std::vector<std::unique_ptr<Node>> owned;
    for (int i = 0; i < cfg.size.n; ++i) {
      auto n = std::make_unique<ScriptNode>();
      nodes.push_back(n.get());
      owned.push_back(std::move(n));
    }
    if (!policy) {
      auto d = std::make_unique<FixedDelay>();
      d->gst = cfg.gst;
      d->delta = cfg.delta;
      policy = std::move(d);
    }
    sim = std::make_unique<Simulation>(std::move(cfg), std::move(owned), std::move(policy));
  }
  ScriptNode& node(ProcessId p) { return *nodes[p - 1]; }
};

EngineConfig four(SimTime gst = 0) {
  EngineConfig c;
  c.size = SystemSize::from_n(4);
  c.gst = gst;
  return c;
}

std::vector<SimTime> fired(const Trace& t, ProcessId p) {
  std::vector<SimTime> out;
  for (const auto& e : t)
    if (e.kind == EventKind::timer && e.process == p) out.push_back(e.time);
  return out;
}

}  // namespace

TEST(SimTime, ParsesIntegersFractionsAndDecimals) {
  EXPECT_EQ(SimTime::parse("7"), SimTime(7));
  EXPECT_EQ(SimTime::parse("3/2"), SimTime(3, 2));
  EXPECT_EQ(SimTime::parse("1.25"), SimTime(5, 4));
  EXPECT_EQ(SimTime(1, 100).str(), "1/100");
  EXPECT_THROW(SimTime::parse("abc"), std::invalid_argument);
}

TEST(ClockModel, IdealClockExpiresAfterDuration) {
  ClockModel c = ClockModel::ideal();
  EXPECT_EQ(c.global_after(5, 10), SimTime(15));
}

TEST(ClockModel, HalfRateBeforeGstDoublesGlobalTime) {
  // Frozen from tools/oracles.py (stepwise integration of the rate schedule).
  ClockModel c = ClockModel::drifting(SimTime(1, 2), 100);
  EXPECT_EQ(c.global_after(0, 10), SimTime(20));
  EXPECT_EQ(c.local_elapsed(0, 20), SimTime(10));
}

TEST(ClockModel, MeasurementStraddlingGstSwitchesRate) {
  ClockModel c = ClockModel::drifting(SimTime(1, 2), 100);
  // 45 local units by GST, the remaining 5 at rate 1.
  EXPECT_EQ(c.global_after(10, 50), SimTime(105));
  EXPECT_EQ(c.local_elapsed(10, 105), SimTime(50));
}

TEST(ClockModel, RejectsDriftAfterGstAndNonPositiveRates) {
  EXPECT_THROW(ClockModel({{0, SimTime(1, 2)}}, 10), std::invalid_argument);
  EXPECT_THROW(ClockModel({{0, SimTime(0)}, {10, 1}}, 10), std::invalid_argument);
  EXPECT_THROW(ClockModel({{1, 1}}, 10), std::invalid_argument);
  EXPECT_NO_THROW(ClockModel({{0, 2}, {4, SimTime(1, 3)}, {10, 1}}, 10));
}

TEST(Timers, MeasureFiresAtOwnersLocalDuration) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) { out.measure(TimerKind::view_timer, 10); };
  h.sim->run(nullptr);
  EXPECT_EQ(fired(h.sim->trace(), 1), std::vector<SimTime>{SimTime(10)});
}

TEST(Timers, RemeasureReplacesPendingExpiry) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) {
    out.measure(TimerKind::view_timer, 10);
    out.measure(TimerKind::view_timer, 3);
  };
  h.sim->run(nullptr);
  EXPECT_EQ(fired(h.sim->trace(), 1), std::vector<SimTime>{SimTime(3)});
}

TEST(Timers, CancelSuppressesExpiryAndIsIdempotent) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) {
    out.measure(TimerKind::view_timer, 15);
    out.measure(TimerKind::dissemination_timer, 10);
  };
  h.node(1).timer = [](const SimTime&, TimerKind k, Effects& out) {
    if (k == TimerKind::dissemination_timer) {
      out.cancel(TimerKind::view_timer);
      out.cancel(TimerKind::view_timer);
    }
  };
  h.sim->run(nullptr);
  EXPECT_EQ(fired(h.sim->trace(), 1), std::vector<SimTime>{SimTime(10)});
  EXPECT_FALSE(h.sim->timer(1, TimerKind::view_timer).pending);
}

TEST(Timers, CancelThenMeasureFiresExactlyOnce) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) {
    out.measure(TimerKind::dissemination_timer, 4);
    out.cancel(TimerKind::dissemination_timer);
    out.measure(TimerKind::dissemination_timer, 1);
  };
  h.sim->run(nullptr);
  EXPECT_EQ(fired(h.sim->trace(), 1), std::vector<SimTime>{SimTime(1)});
}

TEST(Timers, CancelOnIdleHandleIsNoop) {
  Harness h(four());
  h.node(2).start = [](const SimTime&, Effects& out) { out.cancel(TimerKind::baseline_timer); };
  EXPECT_EQ(h.sim->run(nullptr), RunStatus::livelock);
  EXPECT_TRUE(fired(h.sim->trace(), 2).empty());
}

TEST(Timers, RejectsNonPositiveDuration) {
  Harness h(four());
  EXPECT_THROW(h.sim->measure(1, TimerKind::view_timer, 0), std::invalid_argument);
}

TEST(Send, PostGstMaxDelayIsExactlyDelta) {
  Harness h(four(10));
  h.node(1).timer = [](const SimTime&, TimerKind, Effects& out) { out.send(2, Wish{1}); };
  h.node(1).start = [](const SimTime&, Effects& out) { out.measure(TimerKind::baseline_timer, 11); };
  h.sim->run(nullptr);
  bool seen = false;
  for (const auto& e : h.sim->trace())
    if (e.kind == EventKind::deliver) {
      EXPECT_EQ(e.time, SimTime(12));
      seen = true;
    }
  EXPECT_TRUE(seen);
}

TEST(Send, PreGstMessageMayArriveAtGstPlusDelta) {
  Harness h(four(30));
  h.node(3).start = [](const SimTime&, Effects& out) { out.send(4, Wish{1}); };
  h.sim->run(nullptr);
  for (const auto& e : h.sim->trace())
    if (e.kind == EventKind::deliver) { EXPECT_EQ(e.time, SimTime(31)); }
}

TEST(Send, SelfSendObeysTheSameBounds) {
  Harness h(four());
  h.node(2).start = [](const SimTime&, Effects& out) { out.send(2, Wish{1}); };
  h.sim->run(nullptr);
  int delivered = 0;
  for (const auto& e : h.sim->trace())
    if (e.kind == EventKind::deliver) {
      EXPECT_EQ(e.process, 2);
      EXPECT_EQ(e.peer, 2);
      EXPECT_EQ(e.time, SimTime(1));
      ++delivered;
    }
  EXPECT_EQ(delivered, 1);
}

TEST(Send, RejectsNonPositiveWordsAndBadIds) {
  Harness h(four());
  auto msg = std::make_shared<const Message>(Wish{1});
  EXPECT_THROW(h.sim->send(1, 2, msg, 0), std::invalid_argument);
  EXPECT_THROW(h.sim->send(1, 5, msg, 1), std::out_of_range);
}

TEST(Send, IllegalPostGstDelayIsRejected) {
  Harness h(four(), std::make_unique<BadDelay>());
  h.node(1).start = [](const SimTime&, Effects& out) { out.send(2, Wish{1}); };
  EXPECT_THROW(h.sim->run(nullptr), std::logic_error);
}

TEST(Send, BroadcastReachesEveryProcessIncludingSender) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) { out.broadcast(Wish{1}); };
  h.sim->run(nullptr);
  std::set<ProcessId> receivers;
  for (const auto& e : h.sim->trace())
    if (e.kind == EventKind::deliver) receivers.insert(e.process);
  EXPECT_EQ(receivers, (std::set<ProcessId>{1, 2, 3, 4}));
}

TEST(Run, EmptyProtocolProducesNoProtocolEvents) {
  Harness h(four());
  EXPECT_EQ(h.sim->run([](const Simulation& s) { return s.now() > SimTime(0); }), RunStatus::livelock);
  EXPECT_TRUE(h.sim->trace().empty());
}

TEST(Run, HorizonStopsBeforeLaterEvents) {
  Harness h(four());
  h.node(1).start = [](const SimTime&, Effects& out) { out.measure(TimerKind::view_timer, 100); };
  EXPECT_EQ(h.sim->run(nullptr, SimTime(50)), RunStatus::horizon);
  EXPECT_TRUE(fired(h.sim->trace(), 1).empty());
}

TEST(Run, DeliveriesBeforeStartWaitForTheReceiver) {
  EngineConfig cfg = four();
  cfg.start_times = {0, 0, 0, 20};
  Harness h(cfg);
  h.node(1).start = [](const SimTime&, Effects& out) { out.send(4, Wish{1}); };
  h.sim->run(nullptr);
  for (const auto& e : h.sim->trace())
    if (e.kind == EventKind::deliver) { EXPECT_EQ(e.time, SimTime(20)); }
}

TEST(Run, SimultaneousEventsFollowTheDocumentedOrder) {
  // At t=1: P2's delivery, then P1's and P3's timers, in that order.
  Harness h(four());
  h.node(3).start = [](const SimTime&, Effects& out) { out.measure(TimerKind::view_timer, 1); };
  h.node(1).start = [](const SimTime&, Effects& out) {
    out.measure(TimerKind::view_timer, 1);
    out.send(2, Wish{1});
  };
  h.sim->run(nullptr);
  std::vector<std::pair<EventKind, ProcessId>> at_one;
  for (const auto& e : h.sim->trace())
    if (e.time == SimTime(1)) at_one.emplace_back(e.kind, e.process);
  std::vector<std::pair<EventKind, ProcessId>> want{
      {EventKind::deliver, 2}, {EventKind::timer, 1}, {EventKind::timer, 3}};
  EXPECT_EQ(at_one, want);
}

TEST(Run, PoppedTimesNeverDecrease) {
  ScenarioBase b{Protocol::squad, SystemSize::from_n(7), {}, 50, 1, 3};
  RunOutcome o = run_scenario(randomized(b));
  for (std::size_t i = 1; i < o.trace.size(); ++i) ASSERT_LE(o.trace[i - 1].time, o.trace[i].time);
}

TEST(Run, SameSeedGivesByteIdenticalTraces) {
  ScenarioBase b{Protocol::squad, SystemSize::from_n(4), {}, 50, 1, 11};
  std::string a = serialize(run_scenario(randomized(b)).trace);
  std::string c = serialize(run_scenario(randomized(b)).trace);
  EXPECT_EQ(a, c);
  b.seed = 12;
  EXPECT_NE(a, serialize(run_scenario(randomized(b)).trace));
}

TEST(Run, SquadHappyPathDecidesOneValue) {
  ScenarioBase b{Protocol::squad, SystemSize::from_n(4), {}, 50, 1, 0};
  RunOutcome o = run_scenario(happy(b));
  EXPECT_EQ(o.status, RunStatus::stopped);
  std::set<Value> values;
  int decides = 0;
  for (const auto& e : o.trace)
    if (e.kind == EventKind::decide) {
      ++decides;
      values.insert(e.value);
    }
  EXPECT_GE(decides, 3);
  EXPECT_EQ(values.size(), 1u);
  EXPECT_TRUE(o.report.violations.empty());
}

TEST(Trace, SerializesOneLinePerEvent) {
  Trace t;
  t.push_back({SimTime(3, 2), 2, EventKind::decide, 0, nullptr, TimerKind::view_timer, 0, 0, 0, 7, 0});
  t.push_back({SimTime(2), 1, EventKind::send, 3, std::make_shared<const Message>(Wish{4}), TimerKind::view_timer, 0,
               0, 0, 0, 1});
  EXPECT_EQ(serialize(t), "3/2|2|decide|value=7|0\n2|1|send|to=3 WISH(4)|1\n");
}
