#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace squadsim {

// Exact rational time. Drift integration and the overlap arithmetic of the
// synchronizer are tight, so floating point is not an option here.
class SimTime {
 public:
  SimTime() = default;
  SimTime(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  SimTime(long num, long den) : q_(num, den) {
    if (den == 0) throw std::invalid_argument("SimTime: zero denominator");
    q_.canonicalize();
  }
  explicit SimTime(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  // Accepts "7", "3/2", "-1/4", "1.25".
  static SimTime parse(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("SimTime: empty string");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string whole = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      bool neg = !whole.empty() && whole[0] == '-';
      if (neg) whole.erase(0, 1);
      if (whole.empty()) whole = "0";
      if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos ||
          whole.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("SimTime: malformed decimal '" + s + "'");
      mpz_class den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      mpq_class q(mpz_class(whole + frac), den);
      q.canonicalize();
      if (neg) q = -q;
      return SimTime(q);
    }
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("SimTime: malformed rational '" + s + "'");
    if (q.get_den() == 0) throw std::invalid_argument("SimTime: zero denominator");
    return SimTime(q);
  }

  const mpq_class& raw() const { return q_; }
  double to_double() const { return q_.get_d(); }
  std::string str() const { return q_.get_str(); }
  int sign() const { return sgn(q_); }

  SimTime& operator+=(const SimTime& o) { q_ += o.q_; return *this; }
  SimTime& operator-=(const SimTime& o) { q_ -= o.q_; return *this; }
  SimTime& operator*=(const SimTime& o) { q_ *= o.q_; return *this; }
  SimTime& operator/=(const SimTime& o) {
    if (o.q_ == 0) throw std::domain_error("SimTime: division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend SimTime operator+(SimTime a, const SimTime& b) { return a += b; }
  friend SimTime operator-(SimTime a, const SimTime& b) { return a -= b; }
  friend SimTime operator*(SimTime a, const SimTime& b) { return a *= b; }
  friend SimTime operator/(SimTime a, const SimTime& b) { return a /= b; }
  friend SimTime operator-(const SimTime& a) { return SimTime(mpq_class(-a.q_)); }

  friend bool operator==(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) == 0; }
  friend bool operator!=(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) != 0; }
  friend bool operator<(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) < 0; }
  friend bool operator<=(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) <= 0; }
  friend bool operator>(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) > 0; }
  friend bool operator>=(const SimTime& a, const SimTime& b) { return cmp(a.q_, b.q_) >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const SimTime& t) { return os << t.str(); }

 private:
  mpq_class q_;
};

inline SimTime min(const SimTime& a, const SimTime& b) { return b < a ? b : a; }
inline SimTime max(const SimTime& a, const SimTime& b) { return a < b ? b : a; }

}  // namespace squadsim
