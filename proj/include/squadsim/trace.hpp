#pragma once

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "squadsim/effects.hpp"

namespace squadsim {

enum class EventKind { send, deliver, timer, advance, enter_epoch, decide, byz };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::send: return "send";
    case EventKind::deliver: return "deliver";
    case EventKind::timer: return "timer";
    case EventKind::advance: return "advance";
    case EventKind::enter_epoch: return "enter_epoch";
    case EventKind::decide: return "decide";
    case EventKind::byz: return "byz";
  }
  return "?";
}

// One trace record. Only the fields relevant to `kind` are meaningful:
//   send/byz: peer = receiver, msg, words
//   deliver:  peer = sender, msg
//   timer:    timer
//   advance:  view, epoch, index (epoch and index are 0 without epochs)
//   enter_epoch: epoch
//   decide:   value
struct TraceEvent {
  SimTime time;
  ProcessId process = 0;
  EventKind kind = EventKind::send;
  ProcessId peer = 0;
  MessagePtr msg;
  TimerKind timer = TimerKind::view_timer;
  View view = 0;
  Epoch epoch = 0;
  int index = 0;
  Value value = 0;
  int words = 0;

  std::string detail() const {
    std::ostringstream os;
    switch (kind) {
      case EventKind::send:
      case EventKind::byz: os << "to=" << peer << " " << describe(*msg); break;
      case EventKind::deliver: os << "from=" << peer << " " << describe(*msg); break;
      case EventKind::timer: os << to_string(timer); break;
      case EventKind::advance:
        os << "view=" << view;
        if (epoch > 0) os << " epoch=" << epoch << " index=" << index;
        break;
      case EventKind::enter_epoch: os << "epoch=" << epoch; break;
      case EventKind::decide: os << "value=" << value; break;
    }
    return os.str();
  }
};

using Trace = std::vector<TraceEvent>;

inline void write_trace(std::ostream& os, const Trace& trace) {
  for (const auto& e : trace)
    os << e.time << '|' << e.process << '|' << to_string(e.kind) << '|' << e.detail() << '|' << e.words << '\n';
}

inline std::string serialize(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

}  // namespace squadsim
