#pragma once

#include <deque>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "squadsim/engine.hpp"

namespace squadsim {

// Uniform draw of k/1000 * span for k in [1, 1000]: strictly positive, at most span.
inline SimTime fraction_of(const SimTime& span, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(1, 1000);
  return span * SimTime(d(rng), 1000);
}

// Network adversary.
//
// After GST every delay is in (0, delta]: uniform, or exactly delta with
// post_gst_max. Before GST a message takes up to pre_gst_spread but always
// arrives by GST + delta. Messages touching `isolated` processes (synchronizer
// class) and, with hold_core_before_gst, all view-core messages sent before GST
// are held until just after GST.
struct NetworkSpec {
  bool post_gst_max = false;
  SimTime pre_gst_spread = 1;
  std::set<ProcessId> isolated;
  bool hold_core_before_gst = false;
};

class ScriptedDelay : public DelayPolicy {
 public:
  ScriptedDelay(NetworkSpec spec, SimTime gst, SimTime delta)
      : spec_(std::move(spec)), gst_(std::move(gst)), delta_(std::move(delta)) {}

  SimTime deliver_at(const Envelope& env, std::mt19937_64& rng) const override {
    if (env.sent_at >= gst_) return env.sent_at + (spec_.post_gst_max ? delta_ : fraction_of(delta_, rng));
    MessageClass cls = classify(*env.payload);
    bool held = (cls == MessageClass::core && spec_.hold_core_before_gst) ||
                (cls == MessageClass::synchronizer &&
                 (spec_.isolated.count(env.sender) || spec_.isolated.count(env.receiver)));
    SimTime latest = gst_ + fraction_of(delta_, rng);
    if (held) return latest;
    return min(env.sent_at + fraction_of(spec_.pre_gst_spread, rng), latest);
  }

 private:
  NetworkSpec spec_;
  SimTime gst_;
  SimTime delta_;
};

enum class Strategy { silent, silent_after_gst, silent_leader, equivocate, replay, spam };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::silent: return "silent";
    case Strategy::silent_after_gst: return "silent_after_gst";
    case Strategy::silent_leader: return "silent_leader";
    case Strategy::equivocate: return "equivocate";
    case Strategy::replay: return "replay";
    case Strategy::spam: return "spam";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  for (Strategy x : {Strategy::silent, Strategy::silent_after_gst, Strategy::silent_leader, Strategy::equivocate,
                     Strategy::replay, Strategy::spam})
    if (s == to_string(x)) return x;
  throw std::invalid_argument("unknown Byzantine strategy '" + s + "'");
}

// A Byzantine process: runs the correct protocol with its own key and rewrites
// its outputs according to the strategy. It can only sign with its own key.
class ByzantineNode : public Node {
 public:
  ByzantineNode(std::unique_ptr<Process> inner, Strategy strategy, SystemSize size, SimTime gst,
                crypto::SigningKey key, std::uint64_t seed)
      : inner_(std::move(inner)), strategy_(strategy), size_(size), gst_(std::move(gst)), key_(key), rng_(seed) {}

  Strategy strategy() const { return strategy_; }

  void on_start(const SimTime& now, Effects& out) override {
    Effects local;
    inner_->on_start(now, local);
    if (strategy_ == Strategy::spam) {
      local.broadcast(AllowAny{key_.share_sign(any_value_digest(), crypto::Scheme::cert)});
      local.broadcast(Disclose{garbage_value(), key_.share_sign(value_digest(garbage_value()), crypto::Scheme::cert)});
    }
    filter(now, local, out);
  }

  void on_message(const SimTime& now, ProcessId from, const Message& m, Effects& out) override {
    observe(m);
    Effects local;
    inner_->on_message(now, from, m, local);
    filter(now, local, out);
  }

  void on_timer(const SimTime& now, TimerKind kind, Effects& out) override {
    Effects local;
    inner_->on_timer(now, kind, local);
    if (strategy_ == Strategy::spam) spam(local);
    filter(now, local, out);
  }

  long tallied_words(const SimTime&, const SimTime&) const override { return 0; }

 private:
  Value garbage_value() const { return 1'000'000 + key_.owner(); }

  void observe(const Message& m) {
    if (const auto* cm = std::get_if<CoreMessage>(&m); cm && cm->qc) {
      stale_.push_back(*cm);
      if (stale_.size() > 16) stale_.pop_front();
    }
    if (const auto* ee = std::get_if<EnterEpoch>(&m)) last_tsig_ = ee->tsig;
  }

  // ENTER-EPOCH for a far epoch with a signature over some other epoch, or a
  // hand-built signature naming every process. Neither verifies.
  void spam(Effects& local) {
    EnterEpoch bogus{1000 + static_cast<Epoch>(rng_() % 1000), {}};
    if (last_tsig_ && rng_() % 2 == 0) {
      bogus.tsig = *last_tsig_;
    } else {
      bogus.tsig.digest = epoch_digest(bogus.epoch - 1);
      for (ProcessId p = 1; p <= size_.n; ++p) bogus.tsig.signers.push_back(p);
      bogus.tsig.seal = rng_();
    }
    local.broadcast(bogus);
  }

  void filter(const SimTime& now, Effects& local, Effects& out) {
    for (auto& e : local.items()) {
      if (const auto* adv = std::get_if<effect::Advance>(&e); adv && strategy_ == Strategy::replay) replay(adv->view, out);
      const auto* send = std::get_if<effect::Send>(&e);
      if (!send) {
        out.push(std::move(e));
        continue;
      }
      const Message& m = *send->msg;
      switch (strategy_) {
        case Strategy::silent: continue;
        case Strategy::silent_after_gst:
          if (now >= gst_) continue;
          break;
        case Strategy::silent_leader:
          if (now >= gst_ && classify(m) == MessageClass::core) continue;
          break;
        case Strategy::equivocate:
          if (const auto* cm = std::get_if<CoreMessage>(&m); cm && cm->type == CoreType::prepare && send->to == 0) {
            equivocate(*cm, out);
            continue;
          }
          break;
        default: break;
      }
      out.push(std::move(e));
    }
  }

  // Half the processes get the real proposal, the other half a different value.
  void equivocate(const CoreMessage& prepare, Effects& out) {
    CoreMessage other = prepare;
    other.value = prepare.value.value_or(0) + 1;
    for (ProcessId r = 1; r <= size_.n; ++r) out.send(r, r <= size_.n / 2 ? Message(prepare) : Message(other));
  }

  void replay(View v, Effects& out) {
    if (stale_.empty()) return;
    const CoreMessage& oldest = stale_.front();
    CoreMessage vc{CoreType::view_change, v, std::nullopt, oldest.qc, std::nullopt, oldest.cert};
    out.send(leader(v, size_.n), vc);
    out.broadcast(stale_[rng_() % stale_.size()]);
  }

  std::unique_ptr<Process> inner_;
  Strategy strategy_;
  SystemSize size_;
  SimTime gst_;
  crypto::SigningKey key_;
  std::mt19937_64 rng_;
  std::deque<CoreMessage> stale_;
  std::optional<crypto::ThresholdSignature> last_tsig_;
};

}  // namespace squadsim
