#pragma once

#include <map>
#include <set>

#include "squadsim/effects.hpp"
#include "squadsim/messages.hpp"

namespace squadsim {

// Per-view all-to-all synchronizer: every view timeout triggers a WISH
// broadcast, and 2f+1 wishes for a higher view move the process there.
class AllToAllSync {
 public:
  AllToAllSync(SystemSize size, SimTime view_duration) : size_(size), view_duration_(std::move(view_duration)) {}

  View view() const { return view_; }
  const WordTally& tally() const { return tally_; }

  void init(const SimTime& /*now*/, Effects& out) {
    view_ = 1;
    out.measure(TimerKind::baseline_timer, view_duration_);
    out.advance(1);
  }

  void on_timer(const SimTime& now, Effects& out) {
    View target = view_ + 1;
    if (target <= wished_) return;
    wished_ = target;
    Message m = Wish{target};
    tally_.record(now, size_.n * words(m));
    out.broadcast(std::move(m));
  }

  void on_wish(const SimTime& /*now*/, ProcessId from, const Wish& m, Effects& out) {
    if (m.view <= view_) return;
    auto& senders = wishes_[m.view];
    senders.insert(from);
    if (static_cast<int>(senders.size()) < size_.quorum()) return;
    view_ = m.view;
    wishes_.erase(wishes_.begin(), wishes_.upper_bound(view_));
    out.cancel(TimerKind::baseline_timer);
    out.measure(TimerKind::baseline_timer, view_duration_);
    out.advance(view_);
  }

 private:
  SystemSize size_;
  SimTime view_duration_;
  View view_ = 0;
  View wished_ = 0;
  std::map<View, std::set<ProcessId>> wishes_;
  WordTally tally_;
};

// Communication-free synchronizer: view v lasts beta * 2^(v-1) local time.
class DoublingSync {
 public:
  explicit DoublingSync(SimTime beta) : duration_(std::move(beta)) {}

  View view() const { return view_; }
  const SimTime& current_duration() const { return duration_; }
  const WordTally& tally() const { return tally_; }

  void init(const SimTime& /*now*/, Effects& out) {
    view_ = 1;
    out.measure(TimerKind::baseline_timer, duration_);
    out.advance(1);
  }

  void on_timer(const SimTime& /*now*/, Effects& out) {
    duration_ *= SimTime(2);
    ++view_;
    out.measure(TimerKind::baseline_timer, duration_);
    out.advance(view_);
  }

 private:
  SimTime duration_;
  View view_ = 0;
  WordTally tally_;
};

}  // namespace squadsim
