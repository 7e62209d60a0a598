#pragma once

#include <stdexcept>
#include <vector>

#include "squadsim/sim_time.hpp"

namespace squadsim {

// Piecewise-constant local clock rate. Segment i covers [start_i, start_{i+1}).
// The last segment extends forever. Rates are positive and equal to 1 at and
// after GST.
class ClockModel {
 public:
  struct Segment {
    SimTime start;
    SimTime rate;
  };

  ClockModel() : segments_{{SimTime(0), SimTime(1)}} {}

  ClockModel(std::vector<Segment> segments, const SimTime& gst) : segments_(std::move(segments)) {
    if (segments_.empty() || segments_.front().start != SimTime(0))
      throw std::invalid_argument("ClockModel: schedule must start at time 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (segments_[i].rate <= SimTime(0)) throw std::invalid_argument("ClockModel: rate must be positive");
      if (i > 0 && segments_[i].start <= segments_[i - 1].start)
        throw std::invalid_argument("ClockModel: segment starts must increase");
      SimTime end_of_segment = i + 1 < segments_.size() ? segments_[i + 1].start : gst + 1;
      if (end_of_segment > gst && segments_[i].rate != SimTime(1))
        throw std::invalid_argument("ClockModel: clocks may not drift at or after GST");
    }
  }

  static ClockModel ideal() { return ClockModel(); }

  // Constant rate before GST, rate 1 afterwards.
  static ClockModel drifting(const SimTime& rate_before_gst, const SimTime& gst) {
    if (gst <= SimTime(0) || rate_before_gst == SimTime(1)) return ClockModel();
    return ClockModel({{SimTime(0), rate_before_gst}, {gst, SimTime(1)}}, gst);
  }

  const std::vector<Segment>& segments() const { return segments_; }

  // Local time elapsed on this clock between global times from <= to.
  SimTime local_elapsed(const SimTime& from, const SimTime& to) const {
    if (to < from) throw std::invalid_argument("ClockModel: interval reversed");
    SimTime total;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const SimTime& lo = segments_[i].start;
      bool last = i + 1 == segments_.size();
      if (!last && segments_[i + 1].start <= from) continue;
      if (lo >= to) break;
      SimTime a = max(lo, from);
      SimTime b = last ? to : min(segments_[i + 1].start, to);
      total += (b - a) * segments_[i].rate;
    }
    return total;
  }

  // Global time at which the clock has advanced by `local` since `from`.
  SimTime global_after(const SimTime& from, const SimTime& local) const {
    if (local < SimTime(0)) throw std::invalid_argument("ClockModel: negative duration");
    SimTime remaining = local;
    SimTime t = from;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      bool last = i + 1 == segments_.size();
      if (!last && segments_[i + 1].start <= t) continue;
      const SimTime& rate = segments_[i].rate;
      if (last) return t + remaining / rate;
      SimTime capacity = (segments_[i + 1].start - t) * rate;
      if (remaining <= capacity) return t + remaining / rate;
      remaining -= capacity;
      t = segments_[i + 1].start;
    }
    return t + remaining;
  }

 private:
  std::vector<Segment> segments_;
};

}  // namespace squadsim
