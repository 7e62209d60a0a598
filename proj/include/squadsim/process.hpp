#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "squadsim/baselines.hpp"
#include "squadsim/certification.hpp"
#include "squadsim/effects.hpp"
#include "squadsim/raresync.hpp"
#include "squadsim/view_core.hpp"

namespace squadsim {

enum class Protocol { raresync_quad, squad, alltoall, doubling };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::raresync_quad: return "raresync-quad";
    case Protocol::squad: return "squad";
    case Protocol::alltoall: return "alltoall";
    case Protocol::doubling: return "doubling";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& s) {
  if (s == "raresync-quad" || s == "quad") return Protocol::raresync_quad;
  if (s == "squad") return Protocol::squad;
  if (s == "alltoall") return Protocol::alltoall;
  if (s == "doubling") return Protocol::doubling;
  throw std::invalid_argument("unknown protocol '" + s + "'");
}

inline bool uses_epochs(Protocol p) { return p == Protocol::raresync_quad || p == Protocol::squad; }

// Event interface the engine drives. Handlers append their outputs to `out`.
class Node {
 public:
  virtual ~Node() = default;
  virtual void on_start(const SimTime& now, Effects& out) = 0;
  virtual void on_message(const SimTime& now, ProcessId from, const Message& m, Effects& out) = 0;
  virtual void on_timer(const SimTime& now, TimerKind kind, Effects& out) = 0;
  // Words this node's handlers emitted in [from, to], by their own count.
  virtual long tallied_words(const SimTime& from, const SimTime& to) const = 0;
};

struct ProtocolParams {
  Protocol protocol = Protocol::squad;
  SystemSize size;
  SyncTiming timing;
  SimTime beta = 1;
};

// One process running a synchronizer composed with the view core, optionally
// preceded by the certification phase.
class Process : public Node {
 public:
  Process(const ProtocolParams& params, const crypto::Authority& auth, crypto::SigningKey key, Value proposal)
      : params_(params), proposal_(proposal), core_(params.size, auth, key, params.protocol == Protocol::squad) {
    switch (params.protocol) {
      case Protocol::raresync_quad:
      case Protocol::squad: sync_.emplace<RareSync>(params.size, params.timing, auth, key); break;
      case Protocol::alltoall: sync_.emplace<AllToAllSync>(params.size, params.timing.view_duration()); break;
      case Protocol::doubling: sync_.emplace<DoublingSync>(params.beta); break;
    }
    if (params.protocol == Protocol::squad) cert_.emplace(params.size, auth, key);
  }

  const ViewCore& core() const { return core_; }
  const std::optional<CertPhase>& cert() const { return cert_; }
  const RareSync* raresync() const { return std::get_if<RareSync>(&sync_); }
  bool quad_started() const { return quad_started_; }

  void on_start(const SimTime& now, Effects& out) override {
    if (cert_) {
      cert_->start(now, proposal_, out);
      return;
    }
    core_.set_proposal(proposal_);
    start_quad(now, out);
  }

  void on_message(const SimTime& now, ProcessId from, const Message& m, Effects& out) override {
    if (cert_ && classify(m) == MessageClass::certification) {
      if (cert_->exited()) return;
      if (const auto* d = std::get_if<Disclose>(&m)) cert_->on_disclose(now, from, *d, out);
      else if (const auto* a = std::get_if<AllowAny>(&m)) cert_->on_allow_any(now, from, *a, out);
      else if (const auto* c = std::get_if<CertificateMsg>(&m)) cert_->on_certificate(now, from, *c, out);
      if (cert_->exited()) {
        core_.set_proposal(cert_->chosen_value(), cert_->obtained());
        start_quad(now, out);
      }
      return;
    }
    if (!quad_started_) {
      backlog_.emplace_back(from, std::make_shared<const Message>(m));
      return;
    }
    dispatch(now, from, m, out);
  }

  void on_timer(const SimTime& now, TimerKind kind, Effects& out) override {
    if (!quad_started_) return;
    Effects local;
    std::visit(
        [&](auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, RareSync>) {
            if (kind == TimerKind::view_timer) s.on_view_timer(now, local);
            else if (kind == TimerKind::dissemination_timer) s.on_dissemination_timer(now, local);
          } else if constexpr (!std::is_same_v<S, std::monostate>) {
            if (kind == TimerKind::baseline_timer) s.on_timer(now, local);
          }
        },
        sync_);
    forward(now, local, out);
  }

  long tallied_words(const SimTime& from, const SimTime& to) const override {
    long total = core_.tally().total_in(from, to);
    if (cert_) total += cert_->tally().total_in(from, to);
    std::visit(
        [&](const auto& s) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) total += s.tally().total_in(from, to);
        },
        sync_);
    return total;
  }

 private:
  void start_quad(const SimTime& now, Effects& out) {
    quad_started_ = true;
    Effects local;
    std::visit(
        [&](auto& s) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) s.init(now, local);
        },
        sync_);
    forward(now, local, out);
    auto backlog = std::move(backlog_);
    backlog_.clear();
    for (const auto& [from, msg] : backlog) dispatch(now, from, *msg, out);
  }

  void dispatch(const SimTime& now, ProcessId from, const Message& m, Effects& out) {
    if (const auto* c = std::get_if<CoreMessage>(&m)) {
      core_.on_message(now, from, *c, out);
      return;
    }
    Effects local;
    if (auto* rs = std::get_if<RareSync>(&sync_)) {
      if (const auto* ec = std::get_if<EpochCompleted>(&m)) rs->on_epoch_completed(now, from, *ec, local);
      else if (const auto* ee = std::get_if<EnterEpoch>(&m)) rs->on_enter_epoch(now, from, *ee, local);
    } else if (auto* a2a = std::get_if<AllToAllSync>(&sync_)) {
      if (const auto* w = std::get_if<Wish>(&m)) a2a->on_wish(now, from, *w, local);
    }
    forward(now, local, out);
  }

  // Pass synchronizer outputs through, starting the view core on each advance.
  void forward(const SimTime& now, Effects& local, Effects& out) {
    for (auto& e : local.items()) {
      const auto* adv = std::get_if<effect::Advance>(&e);
      View v = adv ? adv->view : 0;
      out.push(std::move(e));
      if (adv) core_.start_executing(now, v, out);
    }
  }

  ProtocolParams params_;
  Value proposal_;
  ViewCore core_;
  std::variant<std::monostate, RareSync, AllToAllSync, DoublingSync> sync_;
  std::optional<CertPhase> cert_;
  bool quad_started_ = false;
  std::vector<std::pair<ProcessId, MessagePtr>> backlog_;
};

}  // namespace squadsim
