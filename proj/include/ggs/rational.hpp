#pragma once
// Exact integers and rationals (GMP), plus the error type shared by all modules.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ggs {

using Int = mpz_class;
using Rational = mpq_class;

enum class Errc {
  incompatible,   // operands over different fields / variable sets
  non_unit,       // inversion of a series with zero constant term
  precondition,   // a documented precondition was refused
  parse,          // grammar or file format error
  not_basis,      // proposed generating set is not a free basis
  not_good,       // transformation would violate its weight contract
  malformed,      // malformed variable / index out of range
  unsatisfiable,  // hypotheses cannot be met
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::incompatible: return "incompatible-operands";
    case Errc::non_unit: return "non-unit";
    case Errc::precondition: return "precondition-violated";
    case Errc::parse: return "parse-error";
    case Errc::not_basis: return "not-a-basis";
    case Errc::not_good: return "not-W-good";
    case Errc::malformed: return "malformed-variable";
    case Errc::unsatisfiable: return "unsatisfiable";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline Rational make_q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline Rational qpow(const Rational& b, unsigned long e) {
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), b.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), b.get_den_mpz_t(), e);
  r.canonicalize();
  return r;
}

inline Int ipow(const Int& b, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

inline Int qfloor(const Rational& q) {
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Int qceil(const Rational& q) {
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }
inline std::string to_string(const Int& z) { return z.get_str(); }

/// Parses "a", "a/b", "-a/b" or a terminating decimal "0.3".
inline Rational parse_rational(std::string_view s) {
  auto bad = [&] { return Error(Errc::parse, "not a rational: '" + std::string(s) + "'"); };
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) throw bad();
  auto digits = [](std::string_view t) {
    if (t.empty()) return false;
    for (char c : t)
      if (c < '0' || c > '9') return false;
    return true;
  };
  bool neg = false;
  std::string_view body = s;
  if (body.front() == '-' || body.front() == '+') {
    neg = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational r;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto a = body.substr(0, slash), b = body.substr(slash + 1);
    if (!digits(a) || !digits(b)) throw bad();
    Int den{std::string(b)};
    if (den == 0) throw bad();
    r = Rational(Int(std::string(a)), den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto a = body.substr(0, dot), b = body.substr(dot + 1);
    if ((!a.empty() && !digits(a)) || !digits(b)) throw bad();
    Int num{std::string(a.empty() ? "0" : a) + std::string(b)};
    r = Rational(num, ipow(Int(10), b.size()));
  } else {
    if (!digits(body)) throw bad();
    r = Rational(Int(std::string(body)));
  }
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

/// Smallest k >= 0 with base^k >= target, for base > 1.  Exact rational powering.
inline unsigned long least_power_at_least(const Rational& base, const Rational& target) {
  if (base <= 1) throw Error(Errc::precondition, "base must exceed 1");
  unsigned long k = 0;
  Rational acc = 1;
  while (acc < target) {
    acc *= base;
    ++k;
  }
  return k;
}

/// Integer square-root bracket: returns (lo, hi) with lo^2 <= n <= hi^2 and hi - lo <= 1.
inline std::pair<Int, Int> isqrt_bracket(const Int& n) {
  Int lo;
  mpz_sqrt(lo.get_mpz_t(), n.get_mpz_t());
  Int hi = lo * lo == n ? lo : Int(lo + 1);
  return {lo, hi};
}

}  // namespace ggs
