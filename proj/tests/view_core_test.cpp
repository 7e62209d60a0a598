#include <gtest/gtest.h>

#include <deque>
#include <memory>

#include "squadsim/view_core.hpp"

using namespace squadsim;
using crypto::Scheme;

namespace {

struct Cluster {
  SystemSize size;
  crypto::Authority auth;
  std::vector<std::unique_ptr<ViewCore>> cores;  // index p-1; null for silent processes
  std::vector<std::pair<ProcessId, Value>> decisions;

  explicit Cluster(int n, std::set<ProcessId> silent = {}, bool certified = false)
      : size(SystemSize::from_n(n)), auth(n, size.f, 99) {
    for (ProcessId p = 1; p <= n; ++p)
      cores.push_back(silent.count(p) ? nullptr : std::make_unique<ViewCore>(size, auth, auth.key_for(p), certified));
  }

  ViewCore& core(ProcessId p) { return *cores[p - 1]; }

  QuorumCertificate qc(Phase phase, Value value, View view, std::vector<ProcessId> signers) {
    std::vector<crypto::PartialSignature> ps;
    for (ProcessId p : signers) ps.push_back(auth.key_for(p).share_sign(vote_digest(phase, value, view), Scheme::quorum));
    return {phase, value, view, auth.combine(ps)};
  }

  // Delivers every send in FIFO order until quiescence.
  void pump(std::deque<std::tuple<ProcessId, ProcessId, MessagePtr>> queue) {
    while (!queue.empty()) {
      auto [from, to, msg] = queue.front();
      queue.pop_front();
      if (!cores[to - 1]) continue;
      Effects out;
      cores[to - 1]->on_message(0, from, std::get<CoreMessage>(*msg), out);
      collect(to, out, queue);
    }
  }

  void collect(ProcessId from, const Effects& out, std::deque<std::tuple<ProcessId, ProcessId, MessagePtr>>& queue) {
    for (const auto& s : out.of<effect::Send>()) {
      if (s.to == 0)
        for (ProcessId r = 1; r <= size.n; ++r) queue.emplace_back(from, r, s.msg);
      else
        queue.emplace_back(from, s.to, s.msg);
    }
    for (const auto& d : out.of<effect::Decide>()) decisions.emplace_back(from, d.value);
  }

  void run_view(View v) {
    std::deque<std::tuple<ProcessId, ProcessId, MessagePtr>> queue;
    for (ProcessId p = 1; p <= size.n; ++p) {
      if (!cores[p - 1]) continue;
      Effects out;
      cores[p - 1]->start_executing(0, v, out);
      collect(p, out, queue);
    }
    pump(std::move(queue));
  }
};

CoreMessage view_change(View v, std::optional<QuorumCertificate> qc) {
  return {CoreType::view_change, v, std::nullopt, std::move(qc), std::nullopt, std::nullopt};
}

std::optional<CoreMessage> broadcast_prepare(const Effects& out) {
  for (const auto& s : out.of<effect::Send>())
    if (const auto* cm = std::get_if<CoreMessage>(s.msg.get()); cm && cm->type == CoreType::prepare && s.to == 0)
      return *cm;
  return std::nullopt;
}

}  // namespace

TEST(ViewCore, StartSendsOneViewChangeToLeader) {
  Cluster c(4);
  c.core(3).set_proposal(5);
  Effects out;
  c.core(3).start_executing(0, 1, out);
  auto sends = out.of<effect::Send>();
  ASSERT_EQ(sends.size(), 1u);
  EXPECT_EQ(sends[0].to, 2);
  const auto& vc = std::get<CoreMessage>(*sends[0].msg);
  EXPECT_EQ(vc.type, CoreType::view_change);
  EXPECT_EQ(vc.view, 1);
  EXPECT_FALSE(vc.qc);
}

TEST(ViewCore, MessagesForPastViewsAreIgnored) {
  Cluster c(4);
  Effects out;
  c.core(2).set_proposal(1);
  c.core(2).start_executing(0, 5, out);
  out.clear();
  for (ProcessId p : {1, 3, 4}) c.core(2).on_message(0, p, view_change(1, std::nullopt), out);
  EXPECT_TRUE(out.empty());
}

TEST(ViewCore, LeaderWithoutQcsProposesOwnValue) {
  Cluster c(4);
  c.core(2).set_proposal(42);
  Effects out;
  c.core(2).start_executing(0, 1, out);
  out.clear();
  for (ProcessId p : {1, 3}) c.core(2).on_message(0, p, view_change(1, std::nullopt), out);
  EXPECT_FALSE(broadcast_prepare(out)) << "2f view changes must not trigger a proposal";
  c.core(2).on_message(0, 4, view_change(1, std::nullopt), out);
  auto prep = broadcast_prepare(out);
  ASSERT_TRUE(prep);
  EXPECT_EQ(prep->value, 42);
  EXPECT_FALSE(prep->qc);
}

TEST(ViewCore, LeaderProposesHighestPrepareQc) {
  // Frozen from tools/oracles.py: highQC of views {3,7,5} is 7.
  Cluster c(4);
  ViewCore& lead = c.core(1);  // leader(8) = P1
  lead.set_proposal(0);
  Effects out;
  lead.start_executing(0, 8, out);
  out.clear();
  lead.on_message(0, 2, view_change(8, c.qc(Phase::prepare, 30, 3, {1, 2, 3})), out);
  lead.on_message(0, 3, view_change(8, c.qc(Phase::prepare, 70, 7, {2, 3, 4})), out);
  lead.on_message(0, 4, view_change(8, c.qc(Phase::prepare, 50, 5, {1, 3, 4})), out);
  auto prep = broadcast_prepare(out);
  ASSERT_TRUE(prep);
  EXPECT_EQ(prep->value, 70);
  ASSERT_TRUE(prep->qc);
  EXPECT_EQ(prep->qc->view, 7);
}

TEST(ViewCore, LeaderIgnoresInvalidQcs) {
  Cluster c(4);
  ViewCore& lead = c.core(1);
  lead.set_proposal(11);
  Effects out;
  lead.start_executing(0, 8, out);
  QuorumCertificate forged = c.qc(Phase::prepare, 70, 7, {2, 3, 4});
  forged.value = 71;
  QuorumCertificate wrong_phase = c.qc(Phase::commit, 72, 6, {2, 3, 4});
  QuorumCertificate future = c.qc(Phase::prepare, 73, 9, {2, 3, 4});
  out.clear();
  lead.on_message(0, 2, view_change(8, forged), out);
  lead.on_message(0, 3, view_change(8, wrong_phase), out);
  lead.on_message(0, 4, view_change(8, future), out);
  auto prep = broadcast_prepare(out);
  ASSERT_TRUE(prep);
  EXPECT_EQ(prep->value, 11);
}

TEST(ViewCore, VoteGuardTruthTable) {
  Cluster c(4);
  QuorumCertificate lock = c.qc(Phase::precommit, 1, 5, {1, 2, 3});  // value A=1 locked in view 5
  QuorumCertificate newer = c.qc(Phase::prepare, 2, 6, {1, 2, 3});
  QuorumCertificate older = c.qc(Phase::prepare, 2, 4, {1, 2, 3});
  EXPECT_TRUE(ViewCore::safe_to_vote(2, newer, lock));
  EXPECT_FALSE(ViewCore::safe_to_vote(2, older, lock));
  EXPECT_FALSE(ViewCore::safe_to_vote(2, std::nullopt, lock));
  EXPECT_TRUE(ViewCore::safe_to_vote(1, std::nullopt, lock));
  EXPECT_TRUE(ViewCore::safe_to_vote(2, std::nullopt, std::nullopt));
  EXPECT_FALSE(ViewCore::safe_to_vote(3, newer, std::nullopt)) << "QC must justify the proposed value";
}

TEST(ViewCore, LockedReplicaRefusesOlderJustification) {
  Cluster c(4);
  ViewCore& r = c.core(3);
  r.set_locked_qc(c.qc(Phase::precommit, 1, 5, {1, 2, 4}));
  Effects out;
  r.start_executing(0, 9, out);  // leader(9) = P2
  out.clear();
  CoreMessage prep{CoreType::prepare, 9, 2, c.qc(Phase::prepare, 2, 4, {1, 2, 4}), std::nullopt, std::nullopt};
  r.on_message(0, 2, prep, out);
  EXPECT_TRUE(out.empty());
  prep.qc = c.qc(Phase::prepare, 2, 6, {1, 2, 4});
  r.on_message(0, 2, prep, out);
  ASSERT_EQ(out.of<effect::Send>().size(), 1u);
  EXPECT_EQ(std::get<CoreMessage>(*out.of<effect::Send>()[0].msg).type, CoreType::prepare_vote);
}

TEST(ViewCore, PrepareFromNonLeaderIsIgnored) {
  Cluster c(4);
  Effects out;
  c.core(3).start_executing(0, 1, out);
  out.clear();
  c.core(3).on_message(0, 4, CoreMessage{CoreType::prepare, 1, 5, std::nullopt, std::nullopt, std::nullopt}, out);
  EXPECT_TRUE(out.empty());
}

TEST(ViewCore, CorrectLeaderLeadsEveryoneToDecide) {
  Cluster c(4);
  for (ProcessId p = 1; p <= 4; ++p) c.core(p).set_proposal(100 + p);
  c.run_view(1);
  ASSERT_EQ(c.decisions.size(), 4u);
  for (const auto& [p, v] : c.decisions) EXPECT_EQ(v, 102);  // leader(1) = P2
  for (ProcessId p = 1; p <= 4; ++p) {
    ASSERT_TRUE(c.core(p).locked_qc());
    EXPECT_EQ(c.core(p).locked_qc()->value, 102);
  }
}

TEST(ViewCore, LeaderCountsItsOwnViewChange) {
  // With one silent replica, the leader's own VIEW-CHANGE completes the quorum.
  Cluster c(4, {4});
  for (ProcessId p = 1; p <= 3; ++p) c.core(p).set_proposal(7);
  c.run_view(1);
  EXPECT_EQ(c.decisions.size(), 3u);
}

TEST(ViewCore, SilentLeaderYieldsNoDecision) {
  Cluster c(4, {2});
  for (ProcessId p : {1, 3, 4}) c.core(p).set_proposal(7);
  c.run_view(1);
  EXPECT_TRUE(c.decisions.empty());
}

TEST(ViewCore, DecidesOnceAcrossViews) {
  Cluster c(4);
  for (ProcessId p = 1; p <= 4; ++p) c.core(p).set_proposal(100 + p);
  c.run_view(1);
  c.run_view(2);
  EXPECT_EQ(c.decisions.size(), 4u);
  // The view-2 leader re-proposed the locked value.
  for (ProcessId p = 1; p <= 4; ++p) EXPECT_EQ(c.core(p).prepare_qc()->view, 2);
  for (ProcessId p = 1; p <= 4; ++p) EXPECT_EQ(c.core(p).prepare_qc()->value, 102);
}

TEST(ViewCore, FutureViewMessagesAreReplayedOnEntry) {
  Cluster c(4);
  c.core(3).set_proposal(1);
  Effects out;
  CoreMessage prep{CoreType::prepare, 2, 9, std::nullopt, std::nullopt, std::nullopt};
  c.core(4).on_message(0, 3, prep, out);  // leader(2) = P3, P4 still in view 0
  EXPECT_TRUE(out.empty());
  c.core(4).start_executing(0, 2, out);
  bool voted = false;
  for (const auto& s : out.of<effect::Send>())
    voted |= std::get<CoreMessage>(*s.msg).type == CoreType::prepare_vote;
  EXPECT_TRUE(voted);
}

TEST(ViewCore, CertifiedModeDropsUncertifiedValues) {
  Cluster c(4, {}, true);
  Effects out;
  c.core(3).start_executing(0, 1, out);
  out.clear();
  c.core(3).on_message(0, 2, CoreMessage{CoreType::prepare, 1, 5, std::nullopt, std::nullopt, std::nullopt}, out);
  EXPECT_TRUE(out.empty());
  std::vector<crypto::PartialSignature> ps{c.auth.key_for(1).share_sign(value_digest(5), Scheme::cert),
                                           c.auth.key_for(4).share_sign(value_digest(5), Scheme::cert)};
  Certificate cert{5, c.auth.combine(ps)};
  c.core(3).on_message(0, 2, CoreMessage{CoreType::prepare, 1, 5, std::nullopt, std::nullopt, cert}, out);
  EXPECT_EQ(out.of<effect::Send>().size(), 1u);
}

TEST(Equivocation, AtMostOneValueGathersAPrepareQuorum) {
  // Byzantine leader P2 sends PREPARE(A) or PREPARE(B) to each correct replica,
  // in every one of the 2^3 splits, and signs both values itself. Frozen from
  // tools/oracles.py: no split yields two quorums.
  const Value A = 10, B = 20;
  for (int mask = 0; mask < 8; ++mask) {
    Cluster c(4, {2});
    std::map<Value, std::vector<crypto::PartialSignature>> votes;
    for (Value v : {A, B}) votes[v].push_back(c.auth.key_for(2).share_sign(vote_digest(Phase::prepare, v, 1), Scheme::quorum));
    int bit = 0;
    for (ProcessId r : {1, 3, 4}) {
      Value v = (mask >> bit++) & 1 ? B : A;
      Effects out;
      c.core(r).start_executing(0, 1, out);
      out.clear();
      c.core(r).on_message(0, 2, CoreMessage{CoreType::prepare, 1, v, std::nullopt, std::nullopt, std::nullopt}, out);
      // A second, conflicting PREPARE must not earn a second vote.
      c.core(r).on_message(0, 2, CoreMessage{CoreType::prepare, 1, A + B - v, std::nullopt, std::nullopt, std::nullopt}, out);
      auto sends = out.of<effect::Send>();
      ASSERT_EQ(sends.size(), 1u);
      const auto& vote = std::get<CoreMessage>(*sends[0].msg);
      votes[*vote.value].push_back(*vote.psig);
    }
    int quorums = 0;
    for (auto& [v, ps] : votes) {
      try {
        c.auth.combine(ps);
        ++quorums;
      } catch (const crypto::CryptoError&) {
      }
    }
    EXPECT_LE(quorums, 1) << "split mask " << mask;
  }
}
