#pragma once

#include <map>
#include <optional>
#include <vector>

#include "squadsim/crypto.hpp"
#include "squadsim/effects.hpp"
#include "squadsim/messages.hpp"

namespace squadsim {

// HotStuff-style single-decree view core: VIEW-CHANGE, then prepare,
// precommit, commit and decide phases, each all-to-leader then leader-to-all.
//
// In certified mode every value-carrying message (VIEW-CHANGE, PREPARE,
// PRECOMMIT) must carry a verifying value certificate, otherwise the value is
// treated as absent.
class ViewCore {
 public:
  ViewCore(SystemSize size, const crypto::Authority& auth, crypto::SigningKey key, bool certified)
      : size_(size), auth_(&auth), key_(key), certified_(certified) {}

  void set_proposal(Value v, std::optional<Certificate> cert = std::nullopt) {
    proposal_ = v;
    proposal_cert_ = std::move(cert);
  }

  View current_view() const { return view_; }
  const std::optional<QuorumCertificate>& prepare_qc() const { return prepare_qc_; }
  const std::optional<QuorumCertificate>& locked_qc() const { return locked_qc_; }
  const std::optional<Value>& decision() const { return decision_; }
  const WordTally& tally() const { return tally_; }

  // Test hooks for building specific lock states.
  void set_locked_qc(std::optional<QuorumCertificate> qc) { locked_qc_ = std::move(qc); }
  void set_prepare_qc(std::optional<QuorumCertificate> qc, std::optional<Certificate> cert = std::nullopt) {
    prepare_qc_ = std::move(qc);
    prepare_cert_ = std::move(cert);
  }

  void start_executing(const SimTime& now, View v, Effects& out) {
    if (v <= view_) return;
    view_ = v;
    round_ = Round{};
    CoreMessage vc{CoreType::view_change, v, std::nullopt, prepare_qc_, std::nullopt, std::nullopt};
    if (certified_ && prepare_qc_) vc.cert = prepare_cert_;
    emit(now, leader(v, size_.n), std::move(vc), out);

    // Replay messages that arrived before we got here.
    pending_.erase(pending_.begin(), pending_.lower_bound(v));
    auto it = pending_.find(v);
    if (it != pending_.end()) {
      auto backlog = std::move(it->second);
      pending_.erase(it);
      for (auto& [from, msg] : backlog) on_message(now, from, msg, out);
    }
  }

  void on_message(const SimTime& now, ProcessId from, const CoreMessage& m, Effects& out) {
    if (m.view < 1 || m.view < view_) return;
    if (m.view > view_) {
      auto& backlog = pending_[m.view];
      if (backlog.size() < kMaxBacklogPerView * static_cast<std::size_t>(size_.n)) backlog.emplace_back(from, m);
      return;
    }
    bool i_lead = leader(view_, size_.n) == key_.owner();
    switch (m.type) {
      case CoreType::view_change:
        if (i_lead) on_view_change(now, from, m, out);
        break;
      case CoreType::prepare_vote:
      case CoreType::precommit_vote:
      case CoreType::commit_vote:
        if (i_lead) on_vote(now, from, m, out);
        break;
      case CoreType::prepare:
        if (from == leader(view_, size_.n)) on_prepare(now, m, out);
        break;
      case CoreType::precommit:
        if (from == leader(view_, size_.n)) on_precommit(now, m, out);
        break;
      case CoreType::commit:
        if (from == leader(view_, size_.n)) on_commit(now, m, out);
        break;
      case CoreType::decide:
        if (from == leader(view_, size_.n)) on_decide(m, out);
        break;
    }
  }

  // The replica-side PREPARE guard.
  static bool safe_to_vote(Value value, const std::optional<QuorumCertificate>& qc,
                           const std::optional<QuorumCertificate>& locked) {
    if (qc && qc->value != value) return false;
    if (!locked) return true;
    if (locked->value == value) return true;
    return qc && qc->view > locked->view;
  }

 private:
  static constexpr std::size_t kMaxBacklogPerView = 8;

  struct Round {
    std::map<ProcessId, CoreMessage> view_changes;
    std::map<ProcessId, crypto::PartialSignature> votes[3];
    bool proposed = false;
    Value proposed_value = 0;
    std::optional<Certificate> proposed_cert;
    bool phase_sent[3] = {false, false, false};  // precommit, commit, decide
    bool voted[3] = {false, false, false};
  };

  bool cert_ok(Value v, const std::optional<Certificate>& c) const {
    return !certified_ || (c && verify_certificate(*auth_, v, *c));
  }

  bool qc_ok(const std::optional<QuorumCertificate>& qc, Phase type, View view) const {
    return qc && qc->type == type && qc->view == view && verify_qc(*auth_, *qc);
  }

  void emit(const SimTime& now, ProcessId to, CoreMessage m, Effects& out) {
    Message msg = std::move(m);
    tally_.record(now, (to == 0 ? size_.n : 1) * words(msg));
    out.send(to, std::move(msg));
  }

  void on_view_change(const SimTime& now, ProcessId from, const CoreMessage& m, Effects& out) {
    if (round_.proposed) return;
    round_.view_changes.emplace(from, m);
    if (static_cast<int>(round_.view_changes.size()) < size_.quorum()) return;

    // highQC: highest view among valid prepare QCs, lowest sender on ties
    // (std::map iterates in sender order and we only replace on strictly higher).
    const CoreMessage* best = nullptr;
    for (const auto& [sender, vc] : round_.view_changes) {
      const auto& qc = vc.qc;
      if (!qc || qc->type != Phase::prepare || qc->view >= view_ || !verify_qc(*auth_, *qc)) continue;
      if (!cert_ok(qc->value, vc.cert)) continue;
      if (!best || qc->view > best->qc->view) best = &vc;
    }
    CoreMessage prep{CoreType::prepare, view_, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    if (best) {
      prep.value = best->qc->value;
      prep.qc = best->qc;
      if (certified_) prep.cert = best->cert;
    } else {
      if (!proposal_) return;
      prep.value = *proposal_;
      if (certified_) prep.cert = proposal_cert_;
    }
    round_.proposed = true;
    round_.proposed_value = *prep.value;
    round_.proposed_cert = prep.cert;
    emit(now, 0, std::move(prep), out);
  }

  void on_vote(const SimTime& now, ProcessId from, const CoreMessage& m, Effects& out) {
    if (!round_.proposed || !m.psig) return;
    int phase = m.type == CoreType::prepare_vote ? 0 : m.type == CoreType::precommit_vote ? 1 : 2;
    if (round_.phase_sent[phase]) return;
    Phase p = static_cast<Phase>(phase);
    if (m.psig->scheme != crypto::Scheme::quorum ||
        !auth_->share_verify(from, vote_digest(p, round_.proposed_value, view_), *m.psig))
      return;
    auto& votes = round_.votes[phase];
    votes.emplace(from, *m.psig);
    if (static_cast<int>(votes.size()) < size_.quorum()) return;

    std::vector<crypto::PartialSignature> partials;
    for (const auto& [_, s] : votes) partials.push_back(s);
    QuorumCertificate qc{p, round_.proposed_value, view_, auth_->combine(partials)};
    static constexpr CoreType next[3] = {CoreType::precommit, CoreType::commit, CoreType::decide};
    CoreMessage msg{next[phase], view_, std::nullopt, std::move(qc), std::nullopt, std::nullopt};
    if (certified_ && phase == 0) msg.cert = round_.proposed_cert;
    round_.phase_sent[phase] = true;
    emit(now, 0, std::move(msg), out);
  }

  void vote(const SimTime& now, Phase p, Value value, Effects& out) {
    static constexpr CoreType kind[3] = {CoreType::prepare_vote, CoreType::precommit_vote, CoreType::commit_vote};
    int idx = static_cast<int>(p);
    round_.voted[idx] = true;
    CoreMessage v{kind[idx], view_, value, std::nullopt,
                  key_.share_sign(vote_digest(p, value, view_), crypto::Scheme::quorum), std::nullopt};
    emit(now, leader(view_, size_.n), std::move(v), out);
  }

  void on_prepare(const SimTime& now, const CoreMessage& m, Effects& out) {
    if (round_.voted[0] || !m.value) return;
    if (m.qc && (m.qc->type != Phase::prepare || m.qc->view >= view_ || !verify_qc(*auth_, *m.qc))) return;
    if (!cert_ok(*m.value, m.cert)) return;
    if (!safe_to_vote(*m.value, m.qc, locked_qc_)) return;
    vote(now, Phase::prepare, *m.value, out);
  }

  void on_precommit(const SimTime& now, const CoreMessage& m, Effects& out) {
    if (round_.voted[1] || !qc_ok(m.qc, Phase::prepare, view_)) return;
    if (!cert_ok(m.qc->value, m.cert)) return;
    prepare_qc_ = m.qc;
    prepare_cert_ = m.cert;
    vote(now, Phase::precommit, m.qc->value, out);
  }

  void on_commit(const SimTime& now, const CoreMessage& m, Effects& out) {
    if (round_.voted[2] || !qc_ok(m.qc, Phase::precommit, view_)) return;
    locked_qc_ = m.qc;
    vote(now, Phase::commit, m.qc->value, out);
  }

  void on_decide(const CoreMessage& m, Effects& out) {
    if (decision_ || !qc_ok(m.qc, Phase::commit, view_)) return;
    decision_ = m.qc->value;
    out.decide(*decision_);
  }

  SystemSize size_;
  const crypto::Authority* auth_;
  crypto::SigningKey key_;
  bool certified_;

  std::optional<Value> proposal_;
  std::optional<Certificate> proposal_cert_;
  View view_ = 0;
  std::optional<QuorumCertificate> prepare_qc_;
  std::optional<Certificate> prepare_cert_;
  std::optional<QuorumCertificate> locked_qc_;
  std::optional<Value> decision_;
  Round round_;
  std::map<View, std::vector<std::pair<ProcessId, CoreMessage>>> pending_;
  WordTally tally_;
};

}  // namespace squadsim
