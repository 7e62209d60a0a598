#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "squadsim/crypto.hpp"
#include "squadsim/types.hpp"

namespace squadsim {

// Canonical digests. These are the exact strings that get signed.
inline std::string epoch_digest(Epoch e) { return "epoch:" + std::to_string(e); }
inline std::string value_digest(Value v) { return "value:" + std::to_string(v); }
inline const std::string& any_value_digest() {
  static const std::string s = "any value";
  return s;
}

enum class Phase { prepare, precommit, commit };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::prepare: return "prepare";
    case Phase::precommit: return "precommit";
    case Phase::commit: return "commit";
  }
  return "?";
}

inline std::string vote_digest(Phase phase, Value value, View view) {
  return std::string("vote:") + to_string(phase) + ":" + std::to_string(value) + ":" + std::to_string(view);
}

struct QuorumCertificate {
  Phase type = Phase::prepare;
  Value value = 0;
  View view = 0;
  crypto::ThresholdSignature sig;

  friend bool operator==(const QuorumCertificate&, const QuorumCertificate&) = default;
};

inline bool verify_qc(const crypto::Authority& auth, const QuorumCertificate& qc) {
  return qc.sig.scheme == crypto::Scheme::quorum && auth.combined_verify(vote_digest(qc.type, qc.value, qc.view), qc.sig);
}

// Value certificate from the certification phase. subject == nullopt is the
// ANY-certificate.
struct Certificate {
  std::optional<Value> subject;
  crypto::ThresholdSignature tsig;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

inline bool verify_certificate(const crypto::Authority& auth, Value v, const Certificate& c) {
  if (c.tsig.scheme != crypto::Scheme::cert) return false;
  return auth.combined_verify(any_value_digest(), c.tsig) || auth.combined_verify(value_digest(v), c.tsig);
}

// Synchronizer messages.
struct EpochCompleted {
  Epoch epoch = 0;
  crypto::PartialSignature psig;
};
struct EnterEpoch {
  Epoch epoch = 0;
  crypto::ThresholdSignature tsig;
};
struct Wish {
  View view = 0;
};

// View-core messages.
enum class CoreType { view_change, prepare, prepare_vote, precommit, precommit_vote, commit, commit_vote, decide };

inline const char* to_string(CoreType t) {
  switch (t) {
    case CoreType::view_change: return "VIEW-CHANGE";
    case CoreType::prepare: return "PREPARE";
    case CoreType::prepare_vote: return "PREPARE-VOTE";
    case CoreType::precommit: return "PRECOMMIT";
    case CoreType::precommit_vote: return "PRECOMMIT-VOTE";
    case CoreType::commit: return "COMMIT";
    case CoreType::commit_vote: return "COMMIT-VOTE";
    case CoreType::decide: return "DECIDE";
  }
  return "?";
}

struct CoreMessage {
  CoreType type = CoreType::view_change;
  View view = 0;
  std::optional<Value> value;
  std::optional<QuorumCertificate> qc;
  std::optional<crypto::PartialSignature> psig;
  std::optional<Certificate> cert;  // only in certificate-gated mode
};

// Certification-phase messages.
struct Disclose {
  Value value = 0;
  crypto::PartialSignature psig;
};
struct AllowAny {
  crypto::PartialSignature psig;
};
struct CertificateMsg {
  Certificate cert;
};

using Message = std::variant<EpochCompleted, EnterEpoch, Wish, CoreMessage, Disclose, AllowAny, CertificateMsg>;

enum class MessageClass { synchronizer, core, certification };

inline MessageClass classify(const Message& m) {
  if (std::holds_alternative<CoreMessage>(m)) return MessageClass::core;
  if (std::holds_alternative<Disclose>(m) || std::holds_alternative<AllowAny>(m) ||
      std::holds_alternative<CertificateMsg>(m))
    return MessageClass::certification;
  return MessageClass::synchronizer;
}

// A word is a constant number of values and signatures. Every message is one
// word; an attached value certificate adds one more.
inline int words(const Message& m) {
  if (const auto* c = std::get_if<CoreMessage>(&m)) return c->cert ? 2 : 1;
  return 1;
}

inline std::string describe(const QuorumCertificate& qc) {
  return std::string("qc(") + to_string(qc.type) + "," + std::to_string(qc.value) + "," + std::to_string(qc.view) +
         "," + crypto::describe(qc.sig) + ")";
}

inline std::string describe(const Certificate& c) {
  return std::string("cert(") + (c.subject ? std::to_string(*c.subject) : std::string("ANY")) + "," +
         crypto::describe(c.tsig) + ")";
}

inline std::string describe(const Message& m) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, EpochCompleted>) {
          os << "EPOCH-COMPLETED(" << msg.epoch << "," << crypto::describe(msg.psig) << ")";
        } else if constexpr (std::is_same_v<T, EnterEpoch>) {
          os << "ENTER-EPOCH(" << msg.epoch << "," << crypto::describe(msg.tsig) << ")";
        } else if constexpr (std::is_same_v<T, Wish>) {
          os << "WISH(" << msg.view << ")";
        } else if constexpr (std::is_same_v<T, CoreMessage>) {
          os << to_string(msg.type) << "(v=" << msg.view;
          if (msg.value) os << ",value=" << *msg.value;
          os << ",qc=" << (msg.qc ? describe(*msg.qc) : std::string("none"));
          if (msg.psig) os << "," << crypto::describe(*msg.psig);
          if (msg.cert) os << "," << describe(*msg.cert);
          os << ")";
        } else if constexpr (std::is_same_v<T, Disclose>) {
          os << "DISCLOSE(" << msg.value << "," << crypto::describe(msg.psig) << ")";
        } else if constexpr (std::is_same_v<T, AllowAny>) {
          os << "ALLOW-ANY(" << crypto::describe(msg.psig) << ")";
        } else {
          os << "CERTIFICATE(" << describe(msg.cert) << ")";
        }
      },
      m);
  return os.str();
}

}  // namespace squadsim
