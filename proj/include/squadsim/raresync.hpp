#pragma once

#include <map>
#include <optional>
#include <vector>

#include "squadsim/crypto.hpp"
#include "squadsim/effects.hpp"
#include "squadsim/messages.hpp"

namespace squadsim {

struct SyncTiming {
  SimTime delta = 1;
  SimTime epsilon = SimTime(1, 100);

  SimTime big_delta() const { return delta * 8; }
  SimTime view_duration() const { return big_delta() + delta * 2 + epsilon; }
  SimTime epoch_duration(int f) const { return view_duration() * (f + 1); }
};

// Global view number of the index-th view (1-based) of epoch e.
inline View global_view(Epoch e, int index, int f) { return (e - 1) * (f + 1) + index; }
inline Epoch epoch_of_view(View v, int f) { return (v - 1) / (f + 1) + 1; }
inline int index_in_epoch(View v, int f) { return static_cast<int>((v - 1) % (f + 1)) + 1; }

// One process's RareSync state machine. Views are grouped in epochs of f+1; the
// only all-to-all exchange happens at epoch boundaries.
class RareSync {
 public:
  RareSync(SystemSize size, SyncTiming timing, const crypto::Authority& auth, crypto::SigningKey key)
      : size_(size), timing_(std::move(timing)), auth_(&auth), key_(key) {}

  Epoch epoch() const { return epoch_; }
  int view_index() const { return view_; }
  const std::optional<crypto::ThresholdSignature>& epoch_sig() const { return epoch_sig_; }
  const WordTally& tally() const { return tally_; }

  void init(const SimTime& /*now*/, Effects& out) {
    out.measure(TimerKind::view_timer, timing_.view_duration());
    out.enter_epoch(epoch_);
    out.advance(global_view(epoch_, view_, size_.f), epoch_, view_);
  }

  void on_view_timer(const SimTime& now, Effects& out) {
    if (view_ < size_.f + 1) {
      ++view_;
      out.measure(TimerKind::view_timer, timing_.view_duration());
      out.advance(global_view(epoch_, view_, size_.f), epoch_, view_);
      return;
    }
    // Last view of the epoch is over. Tell everyone; enter no view.
    Message m = EpochCompleted{epoch_, key_.share_sign(epoch_digest(epoch_), crypto::Scheme::quorum)};
    tally_.record(now, size_.n * words(m));
    out.broadcast(std::move(m));
  }

  void on_epoch_completed(const SimTime& now, ProcessId from, const EpochCompleted& m, Effects& out) {
    (void)now;
    if (m.epoch < epoch_ || m.psig.scheme != crypto::Scheme::quorum) return;
    if (!auth_->share_verify(from, epoch_digest(m.epoch), m.psig)) return;
    auto& senders = completed_[m.epoch];
    senders.emplace(from, m.psig);
    if (static_cast<int>(senders.size()) < size_.quorum()) return;

    std::vector<crypto::PartialSignature> partials;
    for (const auto& [_, p] : senders) partials.push_back(p);
    epoch_sig_ = auth_->combine(partials);
    epoch_ = m.epoch + 1;
    prune();
    restart_dissemination(out);
  }

  void on_enter_epoch(const SimTime& now, ProcessId /*from*/, const EnterEpoch& m, Effects& out) {
    (void)now;
    if (m.epoch <= epoch_ || m.epoch < 2) return;
    if (m.tsig.scheme != crypto::Scheme::quorum || !auth_->combined_verify(epoch_digest(m.epoch - 1), m.tsig)) return;
    epoch_sig_ = m.tsig;
    epoch_ = m.epoch;
    prune();
    restart_dissemination(out);
  }

  void on_dissemination_timer(const SimTime& now, Effects& out) {
    if (!epoch_sig_) return;  // unreachable: the timer only runs after an epoch switch
    Message m = EnterEpoch{epoch_, *epoch_sig_};
    tally_.record(now, size_.n * words(m));
    out.broadcast(std::move(m));
    view_ = 1;
    out.measure(TimerKind::view_timer, timing_.view_duration());
    out.enter_epoch(epoch_);
    out.advance(global_view(epoch_, 1, size_.f), epoch_, 1);
  }

 private:
  void restart_dissemination(Effects& out) {
    out.cancel(TimerKind::view_timer);
    out.cancel(TimerKind::dissemination_timer);
    out.measure(TimerKind::dissemination_timer, timing_.delta);
  }

  // Tallies for epochs below epoch_ can never fire again.
  void prune() { completed_.erase(completed_.begin(), completed_.lower_bound(epoch_)); }

  SystemSize size_;
  SyncTiming timing_;
  const crypto::Authority* auth_;
  crypto::SigningKey key_;

  Epoch epoch_ = 1;
  int view_ = 1;
  std::optional<crypto::ThresholdSignature> epoch_sig_;
  std::map<Epoch, std::map<ProcessId, crypto::PartialSignature>> completed_;
  WordTally tally_;
};

}  // namespace squadsim
