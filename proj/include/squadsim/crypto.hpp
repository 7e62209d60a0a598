#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "squadsim/types.hpp"

// Simulated (k, n)-threshold signatures.
//
// Every signature object carries a seal: a keyed hash over its contents under a
// secret that only the Authority (the trusted dealer) knows. Anyone may build a
// signature struct by hand, but only objects produced through a SigningKey or
// through combine() verify. Each process receives only its own SigningKey, so a
// Byzantine process can sign for itself but never for a correct id.
namespace squadsim::crypto {

enum class Scheme : std::uint8_t { quorum, cert };

inline const char* to_string(Scheme s) { return s == Scheme::quorum ? "quorum" : "cert"; }

struct SchemeConfig {
  int k = 0;
  int n = 0;
  Scheme id = Scheme::quorum;

  static SchemeConfig make(int k, int n, Scheme id) {
    if (k < 1 || k > n) throw std::invalid_argument("SchemeConfig: need 1 <= k <= n");
    return {k, n, id};
  }
};

struct PartialSignature {
  ProcessId signer = 0;
  std::string digest;
  Scheme scheme = Scheme::quorum;
  std::uint64_t seal = 0;

  friend bool operator==(const PartialSignature&, const PartialSignature&) = default;
};

struct ThresholdSignature {
  std::string digest;
  std::vector<ProcessId> signers;  // sorted, distinct
  Scheme scheme = Scheme::quorum;
  std::uint64_t seal = 0;

  friend bool operator==(const ThresholdSignature&, const ThresholdSignature&) = default;
};

inline std::string describe(const ThresholdSignature& sig) {
  std::ostringstream os;
  os << "sig(" << sig.digest << ",{";
  for (std::size_t i = 0; i < sig.signers.size(); ++i) os << (i ? "," : "") << sig.signers[i];
  os << "})";
  return os.str();
}

inline std::string describe(const PartialSignature& psig) {
  return "psig(" + psig.digest + "," + std::to_string(psig.signer) + ")";
}

class CryptoError : public std::runtime_error {
 public:
  enum class Kind { threshold_too_small, mixed_digests, invalid_partial };
  CryptoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SigningRecord {
  ProcessId signer;
  std::string digest;
  Scheme scheme;
};

class Authority;

// Capability to produce partial signatures for exactly one process id.
class SigningKey {
 public:
  ProcessId owner() const { return owner_; }
  inline PartialSignature share_sign(std::string_view message, Scheme scheme) const;

 private:
  friend class Authority;
  SigningKey(ProcessId owner, Authority* authority) : owner_(owner), authority_(authority) {}
  ProcessId owner_;
  Authority* authority_;
};

class Authority {
 public:
  Authority(int n, int f, std::uint64_t secret)
      : n_(n),
        quorum_(SchemeConfig::make(2 * f + 1, n, Scheme::quorum)),
        cert_(SchemeConfig::make(f + 1, n, Scheme::cert)),
        secret_(secret ^ 0x9e3779b97f4a7c15ULL) {}

  Authority(const Authority&) = delete;
  Authority& operator=(const Authority&) = delete;

  int n() const { return n_; }
  const SchemeConfig& config(Scheme s) const { return s == Scheme::quorum ? quorum_ : cert_; }

  SigningKey key_for(ProcessId p) {
    if (p < 1 || p > n_) throw std::out_of_range("Authority: process id out of range");
    return SigningKey(p, this);
  }

  bool share_verify(ProcessId p, std::string_view message, const PartialSignature& psig) const {
    return psig.signer == p && psig.digest == message && p >= 1 && p <= n_ &&
           psig.seal == seal_partial(psig.signer, psig.digest, psig.scheme);
  }

  // Throws CryptoError on fewer than k distinct valid signers or mixed digests.
  template <class Range>
  ThresholdSignature combine(const Range& partials) const {
    auto it = std::begin(partials);
    if (it == std::end(partials)) throw CryptoError(CryptoError::Kind::threshold_too_small, "combine: no partials");
    const std::string& digest = it->digest;
    Scheme scheme = it->scheme;
    std::set<ProcessId> signers;
    for (const PartialSignature& p : partials) {
      if (p.digest != digest || p.scheme != scheme)
        throw CryptoError(CryptoError::Kind::mixed_digests, "combine: partials over different messages");
      if (!share_verify(p.signer, p.digest, p))
        throw CryptoError(CryptoError::Kind::invalid_partial, "combine: invalid partial signature");
      signers.insert(p.signer);
    }
    if (static_cast<int>(signers.size()) < config(scheme).k)
      throw CryptoError(CryptoError::Kind::threshold_too_small,
                        "combine: " + std::to_string(signers.size()) + " distinct signers, need " +
                            std::to_string(config(scheme).k));
    ThresholdSignature sig{digest, {signers.begin(), signers.end()}, scheme, 0};
    sig.seal = seal_combined(sig);
    return sig;
  }

  bool combined_verify(std::string_view message, const ThresholdSignature& sig) const {
    if (sig.digest != message) return false;
    if (static_cast<int>(sig.signers.size()) < config(sig.scheme).k) return false;
    for (std::size_t i = 0; i < sig.signers.size(); ++i) {
      if (sig.signers[i] < 1 || sig.signers[i] > n_) return false;
      if (i > 0 && sig.signers[i] <= sig.signers[i - 1]) return false;
    }
    return sig.seal == seal_combined(sig);
  }

  // Every share_sign call made through a key, in call order. Used by the
  // post-hoc unforgeability check.
  const std::vector<SigningRecord>& signing_log() const { return log_; }

 private:
  friend class SigningKey;

  PartialSignature sign(ProcessId p, std::string_view message, Scheme scheme) {
    log_.push_back({p, std::string(message), scheme});
    PartialSignature psig{p, std::string(message), scheme, 0};
    psig.seal = seal_partial(p, psig.digest, scheme);
    return psig;
  }

  static std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
  }
  std::uint64_t absorb(std::uint64_t h, std::string_view s) const {
    for (unsigned char c : s) h = mix(h, c);
    return mix(h, s.size());
  }
  std::uint64_t seal_partial(ProcessId p, std::string_view digest, Scheme scheme) const {
    std::uint64_t h = mix(secret_, 1);
    h = mix(h, static_cast<std::uint64_t>(scheme));
    h = mix(h, static_cast<std::uint64_t>(p));
    return absorb(h, digest);
  }
  std::uint64_t seal_combined(const ThresholdSignature& sig) const {
    std::uint64_t h = mix(secret_, 2);
    h = mix(h, static_cast<std::uint64_t>(sig.scheme));
    for (ProcessId p : sig.signers) h = mix(h, static_cast<std::uint64_t>(p));
    return absorb(h, sig.digest);
  }

  int n_;
  SchemeConfig quorum_;
  SchemeConfig cert_;
  std::uint64_t secret_;
  std::vector<SigningRecord> log_;
};

inline PartialSignature SigningKey::share_sign(std::string_view message, Scheme scheme) const {
  return authority_->sign(owner_, message, scheme);
}

}  // namespace squadsim::crypto
