#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "squadsim/crypto.hpp"
#include "squadsim/process.hpp"
#include "squadsim/raresync.hpp"
#include "squadsim/trace.hpp"

namespace squadsim {

enum class Invariant {
  monotone_views,
  no_jump,
  view_index_range,
  epoch_entry_quorum,
  quiet_period,
  tight_entry,
  overlap,
  entry_bound,
  epoch_budget,
  epoch_spacing,
  e_final_successor,
  sync_latency,
  agreement,
  decide_once,
  conflicting_qcs,
  lock_safety,
  view_word_budget,
  quad_termination,
  termination,
  cert_computability,
  cert_liveness,
  cert_word_budget,
  squad_latency,
  unforgeability,
  positive_words,
  envelope_delay,
  word_accounting,
};

inline const char* to_string(Invariant i) {
  switch (i) {
    case Invariant::monotone_views: return "monotone_views";
    case Invariant::no_jump: return "no_jump";
    case Invariant::view_index_range: return "view_index_range";
    case Invariant::epoch_entry_quorum: return "epoch_entry_quorum";
    case Invariant::quiet_period: return "quiet_period";
    case Invariant::tight_entry: return "tight_entry";
    case Invariant::overlap: return "overlap";
    case Invariant::entry_bound: return "entry_bound";
    case Invariant::epoch_budget: return "epoch_budget";
    case Invariant::epoch_spacing: return "epoch_spacing";
    case Invariant::e_final_successor: return "e_final_successor";
    case Invariant::sync_latency: return "sync_latency";
    case Invariant::agreement: return "agreement";
    case Invariant::decide_once: return "decide_once";
    case Invariant::conflicting_qcs: return "conflicting_qcs";
    case Invariant::lock_safety: return "lock_safety";
    case Invariant::view_word_budget: return "view_word_budget";
    case Invariant::quad_termination: return "quad_termination";
    case Invariant::termination: return "termination";
    case Invariant::cert_computability: return "cert_computability";
    case Invariant::cert_liveness: return "cert_liveness";
    case Invariant::cert_word_budget: return "cert_word_budget";
    case Invariant::squad_latency: return "squad_latency";
    case Invariant::unforgeability: return "unforgeability";
    case Invariant::positive_words: return "positive_words";
    case Invariant::envelope_delay: return "envelope_delay";
    case Invariant::word_accounting: return "word_accounting";
  }
  return "?";
}

struct Violation {
  Invariant id;
  std::string detail;
};

// Everything the post-hoc analysis needs besides the trace itself.
struct AnalysisParams {
  Protocol protocol = Protocol::squad;
  SystemSize size;
  SyncTiming timing;
  SimTime gst = 0;
  std::set<ProcessId> byzantine;
  std::optional<Value> unanimous_value;
  bool all_start_by_gst = true;
  const crypto::Authority* authority = nullptr;  // enables signature checks

  std::set<ProcessId> correct() const {
    std::set<ProcessId> c;
    for (ProcessId p = 1; p <= size.n; ++p)
      if (!byzantine.count(p)) c.insert(p);
    return c;
  }
};

// Per-process view interval [enter, exit); exit == nullopt means the process
// never left the view.
struct ViewInterval {
  SimTime enter;
  std::optional<SimTime> exit;
};

// Correct-process facts extracted from a trace in one pass.
struct TraceIndex {
  struct Advance {
    SimTime time;
    View view;
    Epoch epoch;
    int index;
  };

  std::set<ProcessId> correct;
  std::map<ProcessId, std::vector<Advance>> advances;
  std::map<ProcessId, std::vector<std::pair<SimTime, Epoch>>> entries;
  std::map<ProcessId, std::vector<std::pair<SimTime, Value>>> decides;
  std::map<Epoch, SimTime> first_entry;
  std::vector<const TraceEvent*> correct_sends;
  std::vector<const TraceEvent*> messages;  // every send and byz event

  TraceIndex(const Trace& trace, std::set<ProcessId> correct_set) : correct(std::move(correct_set)) {
    for (const auto& e : trace) {
      if (e.kind == EventKind::send || e.kind == EventKind::byz) messages.push_back(&e);
      if (!correct.count(e.process)) continue;
      switch (e.kind) {
        case EventKind::send: correct_sends.push_back(&e); break;
        case EventKind::advance: advances[e.process].push_back({e.time, e.view, e.epoch, e.index}); break;
        case EventKind::enter_epoch: {
          entries[e.process].emplace_back(e.time, e.epoch);
          auto it = first_entry.find(e.epoch);
          if (it == first_entry.end() || e.time < it->second) first_entry[e.epoch] = e.time;
          break;
        }
        case EventKind::decide: decides[e.process].emplace_back(e.time, e.value); break;
        default: break;
      }
    }
  }

  // First time every correct process has decided.
  std::optional<SimTime> decision_time() const {
    std::optional<SimTime> t;
    for (ProcessId p : correct) {
      auto it = decides.find(p);
      if (it == decides.end() || it->second.empty()) return std::nullopt;
      if (!t || *t < it->second.front().first) t = it->second.front().first;
    }
    return t;
  }

  // Latest first-advance of a correct process, floored at GST. Equals GST when
  // every correct process starts its synchronizer by GST.
  SimTime effective_gst(const SimTime& gst) const {
    SimTime g = gst;
    for (ProcessId p : correct) {
      auto it = advances.find(p);
      if (it != advances.end() && !it->second.empty()) g = max(g, it->second.front().time);
    }
    return g;
  }

  std::map<View, ViewInterval> intervals(ProcessId p) const {
    std::map<View, ViewInterval> out;
    auto it = advances.find(p);
    if (it == advances.end()) return out;
    const auto& adv = it->second;
    for (std::size_t i = 0; i < adv.size(); ++i) {
      ViewInterval iv{adv[i].time, std::nullopt};
      if (i + 1 < adv.size()) iv.exit = adv[i + 1].time;
      out.emplace(adv[i].view, iv);
    }
    return out;
  }
};

// Sum of words over correct-process sends in [from, to]; to == nullopt is +inf.
inline long count_words_in(const TraceIndex& idx, const SimTime& from, const std::optional<SimTime>& to,
                           std::optional<MessageClass> cls = std::nullopt) {
  if (to && *to < from) return 0;
  long total = 0;
  for (const TraceEvent* e : idx.correct_sends) {
    if (e->time < from || (to && e->time > *to)) continue;
    if (cls && classify(*e->msg) != *cls) continue;
    total += e->words;
  }
  return total;
}

inline long count_words(const Trace& trace, const std::set<ProcessId>& correct, const SimTime& gst,
                        const std::optional<SimTime>& t_d) {
  return count_words_in(TraceIndex(trace, correct), gst, t_d);
}

// Earliest t >= GST such that all correct processes share a view with a
// correct leader throughout [t, t + big_delta].
inline std::optional<SimTime> find_sync_time(const TraceIndex& idx, int n, const SimTime& big_delta,
                                             const SimTime& gst) {
  if (idx.correct.empty()) return std::nullopt;
  std::vector<std::map<View, ViewInterval>> per;
  for (ProcessId p : idx.correct) per.push_back(idx.intervals(p));
  std::optional<SimTime> best;
  for (const auto& [v, first] : per.front()) {
    if (!idx.correct.count(leader(v, n))) continue;
    SimTime lo = first.enter;
    std::optional<SimTime> hi = first.exit;
    bool everyone = true;
    for (std::size_t i = 1; i < per.size() && everyone; ++i) {
      auto it = per[i].find(v);
      if (it == per[i].end()) {
        everyone = false;
        break;
      }
      lo = max(lo, it->second.enter);
      if (it->second.exit && (!hi || *it->second.exit < *hi)) hi = it->second.exit;
    }
    if (!everyone) continue;
    SimTime t = max(lo, gst);
    if (hi && t + big_delta > *hi) continue;
    if (!best || t < *best) best = t;
  }
  return best;
}

inline std::optional<SimTime> find_sync_time(const Trace& trace, const std::set<ProcessId>& correct, int n,
                                             const SimTime& big_delta, const SimTime& gst) {
  return find_sync_time(TraceIndex(trace, correct), n, big_delta, gst);
}

struct MetricsReport {
  long words_post_gst = 0;
  long words_sync_window = 0;
  std::optional<SimTime> t_s;
  std::optional<SimTime> t_d;
  std::optional<SimTime> latency;
  std::map<ProcessId, int> epochs_entered;  // in [GST, t_s + Delta]
  int epochs_max = 0;
  SimTime gst_eff;
  std::optional<Epoch> e_max;
  std::optional<Epoch> e_final;
  std::optional<SimTime> t_e_final;
  std::vector<Violation> violations;

  bool decided() const { return t_d.has_value(); }
  bool ok() const { return decided() && violations.empty(); }
  bool has(Invariant id) const {
    return std::any_of(violations.begin(), violations.end(), [id](const Violation& v) { return v.id == id; });
  }
};

namespace detail {

class Checker {
 public:
  Checker(const Trace& trace, const AnalysisParams& params, MetricsReport& report)
      : trace_(trace), p_(params), idx_(trace, params.correct()), r_(report) {}

  void run() {
    r_.t_d = idx_.decision_time();
    if (r_.t_d) r_.latency = *r_.t_d < p_.gst ? SimTime(0) : *r_.t_d - p_.gst;
    r_.words_post_gst = count_words_in(idx_, p_.gst, r_.t_d);
    r_.gst_eff = uses_epochs(p_.protocol) ? idx_.effective_gst(p_.gst) : p_.gst;
    r_.t_s = find_sync_time(idx_, p_.size.n, p_.timing.big_delta(), p_.gst);
    std::optional<SimTime> window_end;
    if (r_.t_s) window_end = *r_.t_s + p_.timing.big_delta();
    r_.words_sync_window = count_words_in(idx_, p_.gst, window_end, MessageClass::synchronizer);

    monotone_views();
    if (uses_epochs(p_.protocol)) epochs();
    view_core();
    if (p_.protocol == Protocol::squad) certification();
    if (p_.authority) unforgeability();
    words_and_envelopes();
  }

 private:
  void flag(Invariant id, std::string detail) { r_.violations.push_back({id, std::move(detail)}); }

  static std::string pid(ProcessId p) { return "P" + std::to_string(p); }

  void monotone_views() {
    for (const auto& [p, adv] : idx_.advances)
      for (std::size_t i = 1; i < adv.size(); ++i)
        if (adv[i].view <= adv[i - 1].view)
          flag(Invariant::monotone_views, pid(p) + " advance(" + std::to_string(adv[i].view) + ") after advance(" +
                                              std::to_string(adv[i - 1].view) + ")");
  }

  void epochs() {
    const int f = p_.size.f;
    const SimTime& delta = p_.timing.delta;
    const SimTime ed = p_.timing.epoch_duration(f);
    const SimTime& g = r_.gst_eff;

    for (const auto& [p, adv] : idx_.advances) {
      for (std::size_t i = 0; i < adv.size(); ++i) {
        const auto& a = adv[i];
        if (a.index < 1 || a.index > f + 1 || a.index != index_in_epoch(a.view, f) || a.epoch != epoch_of_view(a.view, f))
          flag(Invariant::view_index_range, pid(p) + " view " + std::to_string(a.view) + " recorded as epoch " +
                                                std::to_string(a.epoch) + " index " + std::to_string(a.index));
        if (index_in_epoch(a.view, f) != 1 && (i == 0 || adv[i - 1].view != a.view - 1))
          flag(Invariant::no_jump, pid(p) + " entered view " + std::to_string(a.view) + " without view " +
                                       std::to_string(a.view - 1));
      }
    }

    // Epoch-entry quorum.
    for (const auto& [p, ent] : idx_.entries) {
      for (const auto& [t, e] : ent) {
        if (e <= 1) continue;
        int witnesses = 0;
        for (const auto& [q, qent] : idx_.entries)
          if (std::any_of(qent.begin(), qent.end(), [&](const auto& x) { return x.second == e - 1 && x.first <= t; }))
            ++witnesses;
        if (witnesses < f + 1)
          flag(Invariant::epoch_entry_quorum, pid(p) + " entered epoch " + std::to_string(e) + " at " + t.str() +
                                                  " with only " + std::to_string(witnesses) +
                                                  " correct processes in the previous epoch");
      }
    }

    // e_max / e_final.
    for (const auto& [e, t] : idx_.first_entry) {
      if (t < g) r_.e_max = r_.e_max ? std::max(*r_.e_max, e) : e;
      else if (!r_.e_final || e < *r_.e_final) r_.e_final = e;
    }
    if (!r_.e_final) return;
    const Epoch ef = *r_.e_final;
    const SimTime tef = idx_.first_entry.at(ef);
    r_.t_e_final = tef;
    if (ef != r_.e_max.value_or(0) + 1)
      flag(Invariant::e_final_successor,
           "e_final=" + std::to_string(ef) + " but e_max=" + std::to_string(r_.e_max.value_or(0)));

    // Quiet period: no EPOCH-COMPLETED(e) for e >= e_final before t_e + epoch_duration.
    std::set<std::pair<ProcessId, Epoch>> seen;
    for (const TraceEvent* s : idx_.correct_sends) {
      const auto* ec = std::get_if<EpochCompleted>(s->msg.get());
      if (!ec || ec->epoch < ef || !seen.insert({s->process, ec->epoch}).second) continue;
      auto it = idx_.first_entry.find(ec->epoch);
      if (it == idx_.first_entry.end() || s->time < it->second + ed)
        flag(Invariant::quiet_period, pid(s->process) + " sent EPOCH-COMPLETED(" + std::to_string(ec->epoch) +
                                          ") at " + s->time.str());
    }

    // Tight entry into e_final.
    for (ProcessId p : idx_.correct) {
      std::optional<SimTime> when;
      auto it = idx_.entries.find(p);
      if (it != idx_.entries.end())
        for (const auto& [t, e] : it->second)
          if (e == ef && !when) when = t;
      if (!when || *when > tef + delta * 2)
        flag(Invariant::tight_entry, pid(p) + (when ? " entered e_final at " + when->str() : " never entered e_final") +
                                         ", first entry at " + tef.str());
    }

    // Overlap of Delta in every view of e_final.
    std::vector<std::map<View, ViewInterval>> per;
    for (ProcessId p : idx_.correct) per.push_back(idx_.intervals(p));
    for (int i = 1; i <= f + 1; ++i) {
      View v = global_view(ef, i, f);
      std::optional<SimTime> lo;
      std::optional<SimTime> hi;
      bool everyone = true;
      for (const auto& m : per) {
        auto it = m.find(v);
        if (it == m.end()) {
          everyone = false;
          break;
        }
        lo = lo ? max(*lo, it->second.enter) : it->second.enter;
        if (it->second.exit && (!hi || *it->second.exit < *hi)) hi = it->second.exit;
      }
      if (!everyone) {
        flag(Invariant::overlap, "some correct process never entered view " + std::to_string(v));
      } else if (hi && *hi - *lo < p_.timing.big_delta()) {
        flag(Invariant::overlap, "view " + std::to_string(v) + " overlap " + (*hi - *lo).str());
      }
    }

    if (tef > g + ed + delta * 4)
      flag(Invariant::entry_bound, "t_e_final=" + tef.str() + " exceeds GST+epoch_duration+4delta");

    // Spacing of epoch entries at or after GST.
    for (const auto& [p, ent] : idx_.entries)
      for (std::size_t i = 1; i < ent.size(); ++i)
        if (ent[i - 1].first >= g && ent[i].first - ent[i - 1].first < delta)
          flag(Invariant::epoch_spacing, pid(p) + " entered epochs " + std::to_string(ent[i - 1].second) + " and " +
                                             std::to_string(ent[i].second) + " less than delta apart");

    if (!r_.t_s) {
      flag(Invariant::sync_latency, "no synchronization time after GST");
      return;
    }
    const SimTime window_end = *r_.t_s + p_.timing.big_delta();
    if (window_end - g > ed * 2 + delta * 4)
      flag(Invariant::sync_latency, "t_s+Delta-GST=" + (window_end - g).str() + " exceeds 2*epoch_duration+4delta");

    for (ProcessId p : idx_.correct) {
      int count = 0;
      auto it = idx_.entries.find(p);
      if (it != idx_.entries.end())
        for (const auto& [t, e] : it->second)
          if (t >= g && t <= window_end) ++count;
      r_.epochs_entered[p] = count;
      r_.epochs_max = std::max(r_.epochs_max, count);
      if (count > 4) flag(Invariant::epoch_budget, pid(p) + " entered " + std::to_string(count) + " epochs");
    }
  }

  void view_core() {
    const int n = p_.size.n;
    const int f = p_.size.f;

    std::set<Value> decided;
    for (ProcessId p : idx_.correct) {
      auto it = idx_.decides.find(p);
      if (it == idx_.decides.end() || it->second.empty()) {
        flag(Invariant::termination, pid(p) + " never decided");
        continue;
      }
      if (it->second.size() > 1) flag(Invariant::decide_once, pid(p) + " decided " + std::to_string(it->second.size()) + " times");
      for (const auto& [t, v] : it->second) decided.insert(v);
    }
    if (decided.size() > 1) flag(Invariant::agreement, std::to_string(decided.size()) + " distinct decided values");

    // QC scan over every message on the wire.
    std::map<std::pair<Phase, View>, std::set<Value>> qcs;
    std::vector<const QuorumCertificate*> prepare_qcs;
    for (const TraceEvent* e : idx_.messages) {
      const auto* cm = std::get_if<CoreMessage>(e->msg.get());
      if (!cm || !cm->qc) continue;
      if (p_.authority && !verify_qc(*p_.authority, *cm->qc)) continue;
      qcs[{cm->qc->type, cm->qc->view}].insert(cm->qc->value);
      if (cm->qc->type == Phase::prepare) prepare_qcs.push_back(&*cm->qc);
    }
    for (const auto& [key, values] : qcs)
      if (values.size() > 1)
        flag(Invariant::conflicting_qcs, std::string(to_string(key.first)) + " QCs for view " +
                                             std::to_string(key.second) + " carry " + std::to_string(values.size()) +
                                             " values");

    // Locks: a correct COMMIT-VOTE marks the sender locked on (value, view).
    std::map<std::pair<Value, View>, std::set<ProcessId>> locks;
    std::map<std::pair<ProcessId, View>, int> sent_in_view;
    for (const TraceEvent* e : idx_.correct_sends) {
      const auto* cm = std::get_if<CoreMessage>(e->msg.get());
      if (!cm) continue;
      ++sent_in_view[{e->process, cm->view}];
      if (cm->type == CoreType::commit_vote && cm->value) locks[{*cm->value, cm->view}].insert(e->process);
    }
    for (const auto& [lock, holders] : locks) {
      if (static_cast<int>(holders.size()) < f + 1) continue;
      for (const QuorumCertificate* qc : prepare_qcs)
        if (qc->view > lock.second && qc->value != lock.first)
          flag(Invariant::lock_safety, "prepare QC for value " + std::to_string(qc->value) + " in view " +
                                           std::to_string(qc->view) + " after lock on " + std::to_string(lock.first) +
                                           " in view " + std::to_string(lock.second));
    }
    for (const auto& [key, count] : sent_in_view) {
      int budget = leader(key.second, n) == key.first ? 4 * n + 4 : 4;
      if (count > budget)
        flag(Invariant::view_word_budget, pid(key.first) + " sent " + std::to_string(count) +
                                              " view-core messages in view " + std::to_string(key.second));
    }

    if (r_.t_s) {
      SimTime bound = *r_.t_s + p_.timing.delta * 8;
      for (ProcessId p : idx_.correct) {
        auto it = idx_.decides.find(p);
        if (it == idx_.decides.end() || it->second.empty() || it->second.front().first > bound)
          flag(Invariant::quad_termination, pid(p) + " did not decide by t_s+8delta=" + bound.str());
      }
    }
  }

  void certification() {
    const int n = p_.size.n;
    const SimTime& delta = p_.timing.delta;
    std::map<ProcessId, int> sent;
    std::map<ProcessId, SimTime> exit_time;
    for (const TraceEvent* e : idx_.correct_sends) {
      if (classify(*e->msg) != MessageClass::certification) continue;
      ++sent[e->process];
      if (std::holds_alternative<CertificateMsg>(*e->msg) && !exit_time.count(e->process))
        exit_time[e->process] = e->time;
    }
    for (const auto& [p, count] : sent)
      if (count > 3 * n) flag(Invariant::cert_word_budget, pid(p) + " sent " + std::to_string(count) + " certification messages");
    if (p_.all_start_by_gst) {
      for (ProcessId p : idx_.correct) {
        auto it = exit_time.find(p);
        if (it == exit_time.end() || it->second > p_.gst + delta * 2)
          flag(Invariant::cert_liveness, pid(p) + (it == exit_time.end() ? " never exited certification"
                                                                          : " exited certification at " + it->second.str()));
      }
    }
    if (p_.unanimous_value) {
      const std::string good = value_digest(*p_.unanimous_value);
      std::set<std::string> reported;
      for (const TraceEvent* e : idx_.messages) {
        const Certificate* c = nullptr;
        if (const auto* cm = std::get_if<CertificateMsg>(e->msg.get())) c = &cm->cert;
        if (const auto* core = std::get_if<CoreMessage>(e->msg.get()); core && core->cert) c = &*core->cert;
        if (!c || c->tsig.digest == good) continue;
        bool valid = !p_.authority || p_.authority->combined_verify(c->tsig.digest, c->tsig);
        if (valid && c->tsig.scheme == crypto::Scheme::cert && reported.insert(c->tsig.digest).second)
          flag(Invariant::cert_computability, "certificate over '" + c->tsig.digest + "' under unanimous proposals");
      }
    }
    if (r_.t_d && *r_.t_d - p_.gst > p_.timing.epoch_duration(p_.size.f) * 2 + delta * 6)
      flag(Invariant::squad_latency, "t_d-GST=" + (*r_.t_d - p_.gst).str());
  }

  void check_tsig(const crypto::ThresholdSignature& sig, const std::map<std::pair<std::string, crypto::Scheme>, std::set<ProcessId>>& signed_by) {
    if (!p_.authority->combined_verify(sig.digest, sig)) return;
    auto it = signed_by.find({sig.digest, sig.scheme});
    int honest = 0;
    for (ProcessId s : sig.signers)
      if (idx_.correct.count(s) && it != signed_by.end() && it->second.count(s)) ++honest;
    int need = p_.authority->config(sig.scheme).k - p_.size.f;
    if (honest < need)
      flag(Invariant::unforgeability, crypto::describe(sig) + " has " + std::to_string(honest) + " honest signers");
  }

  void unforgeability() {
    std::map<std::pair<std::string, crypto::Scheme>, std::set<ProcessId>> signed_by;
    for (const auto& rec : p_.authority->signing_log()) signed_by[{rec.digest, rec.scheme}].insert(rec.signer);
    std::set<const Message*> done;
    for (const TraceEvent* e : idx_.messages) {
      if (!done.insert(e->msg.get()).second) continue;
      std::visit(
          [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, EnterEpoch>) check_tsig(m.tsig, signed_by);
            if constexpr (std::is_same_v<T, CertificateMsg>) check_tsig(m.cert.tsig, signed_by);
            if constexpr (std::is_same_v<T, CoreMessage>) {
              if (m.qc) check_tsig(m.qc->sig, signed_by);
              if (m.cert) check_tsig(m.cert->tsig, signed_by);
            }
          },
          *e->msg);
    }
  }

  void words_and_envelopes() {
    std::multimap<std::pair<const Message*, ProcessId>, SimTime> sent_at;
    for (const auto& e : trace_) {
      if (e.kind == EventKind::send && idx_.correct.count(e.process) && e.words < 1)
        flag(Invariant::positive_words, pid(e.process) + " sent a message with " + std::to_string(e.words) + " words");
      if (e.kind == EventKind::send || e.kind == EventKind::byz) sent_at.emplace(std::make_pair(e.msg.get(), e.peer), e.time);
      if (e.kind != EventKind::deliver) continue;
      // Match the latest send of this payload to this receiver not after the delivery.
      auto [lo, hi] = sent_at.equal_range({e.msg.get(), e.process});
      auto match = hi;
      for (auto it = lo; it != hi; ++it)
        if (it->second <= e.time && (match == hi || match->second < it->second)) match = it;
      if (match == hi) {
        flag(Invariant::envelope_delay, pid(e.process) + " received a message that was never sent before " + e.time.str());
        continue;
      }
      const SimTime s = match->second;
      sent_at.erase(match);
      if (s >= p_.gst && (e.time == s || e.time - s > p_.timing.delta))
        flag(Invariant::envelope_delay, "message sent at " + s.str() + " delivered at " + e.time.str());
    }
  }

  const Trace& trace_;
  const AnalysisParams& p_;
  TraceIndex idx_;
  MetricsReport& r_;
};

}  // namespace detail

// Full post-hoc analysis: word counts, t_s, t_d and every trace invariant.
inline MetricsReport analyze(const Trace& trace, const AnalysisParams& params) {
  MetricsReport report;
  detail::Checker(trace, params, report).run();
  return report;
}

inline std::vector<Violation> check_invariants(const Trace& trace, const AnalysisParams& params) {
  return analyze(trace, params).violations;
}

}  // namespace squadsim
