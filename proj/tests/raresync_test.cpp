#include <gtest/gtest.h>

#include "squadsim/raresync.hpp"

using namespace squadsim;
using crypto::Scheme;

namespace {

struct Fixture {
  SystemSize size;
  crypto::Authority auth;
  RareSync sync;

  explicit Fixture(int n, ProcessId self = 1)
      : size(SystemSize::from_n(n)), auth(n, size.f, 7), sync(size, SyncTiming{}, auth, auth.key_for(self)) {}

  EpochCompleted completed(ProcessId p, Epoch e) {
    return {e, auth.key_for(p).share_sign(epoch_digest(e), Scheme::quorum)};
  }

  crypto::ThresholdSignature epoch_sig(Epoch e, std::vector<ProcessId> signers) {
    std::vector<crypto::PartialSignature> ps;
    for (ProcessId p : signers) ps.push_back(auth.key_for(p).share_sign(epoch_digest(e), Scheme::quorum));
    return auth.combine(ps);
  }

  // Runs view timers until the synchronizer asks for the epoch-completed broadcast.
  Effects finish_epoch() {
    Effects out;
    for (int i = 0; i <= size.f; ++i) {
      out.clear();
      sync.on_view_timer(0, out);
    }
    return out;
  }
};

bool has_measure(const Effects& e, TimerKind k, const SimTime& d) {
  for (const auto& m : e.of<effect::Measure>())
    if (m.kind == k && m.duration == d) return true;
  return false;
}

}  // namespace

TEST(RareSyncTiming, ViewDurationIsBigDeltaPlusTwoDeltaPlusEpsilon) {
  // Frozen from tools/oracles.py.
  SyncTiming t;
  EXPECT_EQ(t.big_delta(), SimTime(8));
  EXPECT_EQ(t.view_duration(), SimTime(1001, 100));
  EXPECT_EQ(t.epoch_duration(2), SimTime(3003, 100));
}

TEST(RareSyncTiming, GlobalViewArithmetic) {
  EXPECT_EQ(global_view(1, 3, 2), 3);
  EXPECT_EQ(global_view(2, 1, 2), 4);
  for (View v = 1; v < 40; ++v) {
    EXPECT_EQ(global_view(epoch_of_view(v, 3), index_in_epoch(v, 3), 3), v);
    EXPECT_GE(index_in_epoch(v, 3), 1);
    EXPECT_LE(index_in_epoch(v, 3), 4);
  }
}

TEST(RareSync, InitEntersEpochOneViewOne) {
  Fixture fx(4);
  Effects out;
  fx.sync.init(0, out);
  EXPECT_EQ(fx.sync.epoch(), 1);
  EXPECT_EQ(fx.sync.view_index(), 1);
  ASSERT_EQ(out.of<effect::Advance>().size(), 1u);
  EXPECT_EQ(out.of<effect::Advance>()[0].view, 1);
  EXPECT_TRUE(has_measure(out, TimerKind::view_timer, SimTime(1001, 100)));
}

TEST(RareSync, ViewTimerAdvancesWithinEpoch) {
  Fixture fx(7);
  Effects out;
  fx.sync.init(0, out);
  out.clear();
  fx.sync.on_view_timer(0, out);
  out.clear();
  fx.sync.on_view_timer(0, out);
  EXPECT_EQ(fx.sync.view_index(), 3);
  ASSERT_EQ(out.of<effect::Advance>().size(), 1u);
  EXPECT_EQ(out.of<effect::Advance>()[0].view, 3);
}

TEST(RareSync, LastViewTimeoutBroadcastsEpochCompletedAndEntersNoView) {
  Fixture fx(4);
  Effects init;
  fx.sync.init(0, init);
  Effects out = fx.finish_epoch();
  auto sends = out.of<effect::Send>();
  ASSERT_EQ(sends.size(), 1u);
  EXPECT_EQ(sends[0].to, 0);
  const auto* ec = std::get_if<EpochCompleted>(sends[0].msg.get());
  ASSERT_NE(ec, nullptr);
  EXPECT_EQ(ec->epoch, 1);
  EXPECT_TRUE(out.of<effect::Advance>().empty());
  EXPECT_TRUE(out.of<effect::Measure>().empty());
  EXPECT_EQ(fx.sync.tally().total_in(0, 0), 4);
}

TEST(RareSync, QuorumOfEpochCompletedJumpsPastThatEpoch) {
  Fixture fx(4);
  Effects out;
  fx.sync.init(0, out);
  out.clear();
  for (ProcessId p : {2, 3, 4}) fx.sync.on_epoch_completed(0, p, fx.completed(p, 2), out);
  EXPECT_EQ(fx.sync.epoch(), 3);
  EXPECT_TRUE(has_measure(out, TimerKind::dissemination_timer, SimTime(1)));
  ASSERT_EQ(out.of<effect::Cancel>().size(), 2u);
  EXPECT_TRUE(out.of<effect::Advance>().empty());
}

TEST(RareSync, BelowQuorumChangesNothing) {
  Fixture fx(4);
  Effects out;
  for (ProcessId p : {2, 3}) fx.sync.on_epoch_completed(0, p, fx.completed(p, 1), out);
  fx.sync.on_epoch_completed(0, 3, fx.completed(3, 1), out);  // duplicate sender
  EXPECT_EQ(fx.sync.epoch(), 1);
  EXPECT_TRUE(out.empty());
}

TEST(RareSync, StaleEpochCompletedIsIgnored) {
  Fixture fx(4);
  Effects out;
  for (ProcessId p : {2, 3, 4}) fx.sync.on_epoch_completed(0, p, fx.completed(p, 2), out);
  out.clear();
  for (ProcessId p : {1, 2, 3, 4}) fx.sync.on_epoch_completed(0, p, fx.completed(p, 1), out);
  EXPECT_EQ(fx.sync.epoch(), 3);
  EXPECT_TRUE(out.empty());
}

TEST(RareSync, EpochCompletedWithWrongSignatureIsDropped) {
  Fixture fx(4);
  Effects out;
  // P2 relays P3's share as its own; a share over another epoch.
  fx.sync.on_epoch_completed(0, 2, fx.completed(3, 1), out);
  fx.sync.on_epoch_completed(0, 4, {1, fx.auth.key_for(4).share_sign(epoch_digest(2), Scheme::quorum)}, out);
  fx.sync.on_epoch_completed(0, 1, fx.completed(1, 1), out);
  fx.sync.on_epoch_completed(0, 3, fx.completed(3, 1), out);
  EXPECT_EQ(fx.sync.epoch(), 1);
}

TEST(RareSync, EnterEpochWithValidSignatureJumpsForward) {
  Fixture fx(4);
  Effects out;
  fx.sync.on_enter_epoch(0, 2, {5, fx.epoch_sig(4, {1, 2, 4})}, out);
  EXPECT_EQ(fx.sync.epoch(), 5);
  EXPECT_TRUE(has_measure(out, TimerKind::dissemination_timer, SimTime(1)));
}

TEST(RareSync, EnterEpochForCurrentEpochIsIgnored) {
  Fixture fx(4);
  Effects out;
  fx.sync.on_enter_epoch(0, 2, {5, fx.epoch_sig(4, {1, 2, 4})}, out);
  out.clear();
  fx.sync.on_enter_epoch(0, 3, {5, fx.epoch_sig(4, {1, 2, 3})}, out);
  EXPECT_TRUE(out.empty());
}

TEST(RareSync, ForgedEnterEpochIsDropped) {
  Fixture fx(4);
  Effects out;
  crypto::ThresholdSignature sig = fx.epoch_sig(4, {1, 2, 4});
  crypto::ThresholdSignature short_sig = sig;
  short_sig.signers.pop_back();
  fx.sync.on_enter_epoch(0, 2, {5, short_sig}, out);
  fx.sync.on_enter_epoch(0, 2, {6, sig}, out);  // signature over the wrong epoch
  crypto::ThresholdSignature cert_scheme = sig;
  cert_scheme.scheme = Scheme::cert;
  fx.sync.on_enter_epoch(0, 2, {5, cert_scheme}, out);
  EXPECT_EQ(fx.sync.epoch(), 1);
  EXPECT_TRUE(out.empty());
}

TEST(RareSync, DisseminationBroadcastsEnterEpochAndStartsFirstView) {
  Fixture fx(7);
  Effects out;
  fx.sync.on_enter_epoch(0, 2, {2, fx.epoch_sig(1, {1, 2, 3, 4, 5})}, out);
  out.clear();
  fx.sync.on_dissemination_timer(1, out);
  auto sends = out.of<effect::Send>();
  ASSERT_EQ(sends.size(), 1u);
  EXPECT_EQ(sends[0].to, 0);
  EXPECT_EQ(std::get<EnterEpoch>(*sends[0].msg).epoch, 2);
  auto adv = out.of<effect::Advance>();
  ASSERT_EQ(adv.size(), 1u);
  EXPECT_EQ(adv[0].view, 4);  // f + 2 with f = 2
  EXPECT_EQ(fx.sync.view_index(), 1);
  EXPECT_EQ(fx.sync.tally().total_in(1, 1), 7);
}

TEST(RareSync, EpochOneNeverSendsEnterEpoch) {
  Fixture fx(4);
  Effects out;
  fx.sync.init(0, out);
  out.clear();
  fx.sync.on_dissemination_timer(0, out);
  EXPECT_TRUE(out.empty());
}

TEST(RareSync, EnterEpochIsEmittedBeforeAdvance) {
  Fixture fx(4);
  Effects out;
  fx.sync.on_enter_epoch(0, 2, {3, fx.epoch_sig(2, {2, 3, 4})}, out);
  out.clear();
  fx.sync.on_dissemination_timer(1, out);
  int enter_at = -1, advance_at = -1;
  for (std::size_t i = 0; i < out.items().size(); ++i) {
    if (std::holds_alternative<effect::EnterEpoch>(out.items()[i])) enter_at = static_cast<int>(i);
    if (std::holds_alternative<effect::Advance>(out.items()[i])) advance_at = static_cast<int>(i);
  }
  ASSERT_GE(enter_at, 0);
  EXPECT_LT(enter_at, advance_at);
}
