#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "squadsim/crypto.hpp"
#include "squadsim/effects.hpp"
#include "squadsim/messages.hpp"

namespace squadsim {

// Certification phase run before the view core. Each process discloses its
// proposal; f+1 matching disclosures certify that value, and if 2f+1
// disclosures show no such value, processes vouch that any value is fine.
class CertPhase {
 public:
  CertPhase(SystemSize size, const crypto::Authority& auth, crypto::SigningKey key)
      : size_(size), auth_(&auth), key_(key) {}

  bool exited() const { return exited_; }
  const std::optional<Certificate>& obtained() const { return obtained_; }
  bool sent_allow_any() const { return sent_allow_any_; }
  const WordTally& tally() const { return tally_; }

  // Value to propose to the view core after exit, and its certificate.
  Value chosen_value() const { return obtained_ && obtained_->subject ? *obtained_->subject : proposal_; }

  void start(const SimTime& now, Value proposal, Effects& out) {
    proposal_ = proposal;
    emit(now, Disclose{proposal, key_.share_sign(value_digest(proposal), crypto::Scheme::cert)}, out);
  }

  void on_disclose(const SimTime& now, ProcessId from, const Disclose& m, Effects& out) {
    if (exited_ || m.psig.scheme != crypto::Scheme::cert) return;
    if (!auth_->share_verify(from, value_digest(m.value), m.psig)) return;
    auto& tally = disclosed_[m.value];
    tally.emplace(from, m.psig);
    disclosers_.insert(from);

    if (static_cast<int>(tally.size()) >= size_.weak_quorum()) {
      std::vector<crypto::PartialSignature> partials;
      for (const auto& [_, p] : tally) partials.push_back(p);
      finish(now, Certificate{m.value, auth_->combine(partials)}, out);
      return;
    }
    if (!sent_allow_any_ && static_cast<int>(disclosers_.size()) >= size_.quorum()) {
      sent_allow_any_ = true;
      emit(now, AllowAny{key_.share_sign(any_value_digest(), crypto::Scheme::cert)}, out);
    }
  }

  void on_allow_any(const SimTime& now, ProcessId from, const AllowAny& m, Effects& out) {
    if (exited_ || m.psig.scheme != crypto::Scheme::cert) return;
    if (!auth_->share_verify(from, any_value_digest(), m.psig)) return;
    allow_any_.emplace(from, m.psig);
    if (static_cast<int>(allow_any_.size()) < size_.weak_quorum()) return;
    std::vector<crypto::PartialSignature> partials;
    for (const auto& [_, p] : allow_any_) partials.push_back(p);
    finish(now, Certificate{std::nullopt, auth_->combine(partials)}, out);
  }

  void on_certificate(const SimTime& now, ProcessId /*from*/, const CertificateMsg& m, Effects& out) {
    if (exited_) return;
    const Certificate& c = m.cert;
    if (c.tsig.scheme != crypto::Scheme::cert) return;
    bool valid = c.subject ? auth_->combined_verify(value_digest(*c.subject), c.tsig)
                           : auth_->combined_verify(any_value_digest(), c.tsig);
    if (!valid) return;
    finish(now, c, out);
  }

 private:
  void emit(const SimTime& now, Message m, Effects& out) {
    tally_.record(now, size_.n * words(m));
    out.broadcast(std::move(m));
  }

  void finish(const SimTime& now, Certificate c, Effects& out) {
    obtained_ = c;
    exited_ = true;
    emit(now, CertificateMsg{std::move(c)}, out);
  }

  SystemSize size_;
  const crypto::Authority* auth_;
  crypto::SigningKey key_;

  Value proposal_ = 0;
  std::map<Value, std::map<ProcessId, crypto::PartialSignature>> disclosed_;
  std::set<ProcessId> disclosers_;
  std::map<ProcessId, crypto::PartialSignature> allow_any_;
  bool sent_allow_any_ = false;
  bool exited_ = false;
  std::optional<Certificate> obtained_;
  WordTally tally_;
};

}  // namespace squadsim
