#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "squadsim/messages.hpp"
#include "squadsim/sim_time.hpp"

namespace squadsim {

enum class TimerKind { view_timer, dissemination_timer, baseline_timer };

inline const char* to_string(TimerKind k) {
  switch (k) {
    case TimerKind::view_timer: return "view_timer";
    case TimerKind::dissemination_timer: return "dissemination_timer";
    case TimerKind::baseline_timer: return "baseline_timer";
  }
  return "?";
}

using MessagePtr = std::shared_ptr<const Message>;

namespace effect {
struct Send {
  ProcessId to = 0;  // 0 means broadcast to all n, self included
  MessagePtr msg;
};
struct Measure {
  TimerKind kind;
  SimTime duration;
};
struct Cancel {
  TimerKind kind;
};
// epoch and index are 0 for synchronizers without epochs.
struct Advance {
  View view;
  Epoch epoch = 0;
  int index = 0;
};
struct EnterEpoch {
  Epoch epoch;
};
struct Decide {
  Value value;
};
}  // namespace effect

using Effect = std::variant<effect::Send, effect::Measure, effect::Cancel, effect::Advance, effect::EnterEpoch,
                            effect::Decide>;

// Ordered output of one protocol transition. Handlers append; the engine
// applies the list in order.
class Effects {
 public:
  void send(ProcessId to, Message m) { items_.emplace_back(effect::Send{to, std::make_shared<const Message>(std::move(m))}); }
  void broadcast(Message m) { send(0, std::move(m)); }
  void measure(TimerKind k, SimTime d) { items_.emplace_back(effect::Measure{k, std::move(d)}); }
  void cancel(TimerKind k) { items_.emplace_back(effect::Cancel{k}); }
  void advance(View v, Epoch e = 0, int index = 0) { items_.emplace_back(effect::Advance{v, e, index}); }
  void enter_epoch(Epoch e) { items_.emplace_back(effect::EnterEpoch{e}); }
  void decide(Value v) { items_.emplace_back(effect::Decide{v}); }
  void push(Effect e) { items_.push_back(std::move(e)); }

  std::vector<Effect>& items() { return items_; }
  const std::vector<Effect>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }

  template <class T>
  std::vector<T> of() const {
    std::vector<T> out;
    for (const auto& e : items_)
      if (const auto* p = std::get_if<T>(&e)) out.push_back(*p);
    return out;
  }

 private:
  std::vector<Effect> items_;
};

// Words emitted by one protocol component, recorded at the emission site.
// Independent of the engine trace, so the two accounting paths can be compared.
class WordTally {
 public:
  void record(const SimTime& t, int words) { entries_.emplace_back(t, words); }
  long total_in(const SimTime& from, const SimTime& to) const {
    long sum = 0;
    for (const auto& [t, w] : entries_)
      if (t >= from && t <= to) sum += w;
    return sum;
  }
  const std::vector<std::pair<SimTime, int>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<SimTime, int>> entries_;
};

}  // namespace squadsim
