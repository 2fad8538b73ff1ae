#pragma once
// Exact bound ledger: every entry names the rule that produced it from its recorded inputs,
// so the whole derivation can be replayed.  Quantities too large for 64 bits stay in tower
// form coeff * base^exponent + offset, where the exponent is itself a quantity.

#include "ggs/rational.hpp"

#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ggs {

struct Quantity;
using QuantityPtr = std::shared_ptr<const Quantity>;

struct Tower {
  Rational coeff;
  Int base;
  QuantityPtr exponent;
  Rational offset;
};

struct Interval {
  Rational lo, hi;
};

struct Quantity {
  std::variant<Rational, Interval, Tower, bool> v;

  static Quantity exact(Rational q) { return {std::move(q)}; }
  static Quantity interval(Rational lo, Rational hi) { return {Interval{std::move(lo), std::move(hi)}}; }
  static Quantity truth(bool b) { return {b}; }
  /// coeff * base^e + offset; materialized when the result fits in 64 bits.
  static Quantity power(Rational coeff, Int base, Quantity e, Rational offset = 0);

  bool is_exact() const { return std::holds_alternative<Rational>(v); }
  bool is_interval() const { return std::holds_alternative<Interval>(v); }
  bool is_tower() const { return std::holds_alternative<Tower>(v); }
  bool is_truth() const { return std::holds_alternative<bool>(v); }
  const Rational& value() const {
    if (!is_exact()) throw Error(Errc::precondition, "quantity is not an exact rational: " + render());
    return std::get<Rational>(v);
  }
  const Interval& range() const { return std::get<Interval>(v); }
  const Tower& tower() const { return std::get<Tower>(v); }
  bool holds() const {
    if (!is_truth()) throw Error(Errc::precondition, "quantity is not a truth value");
    return std::get<bool>(v);
  }
  /// Exact integer value, refusing non-integers.
  Int integer() const {
    const Rational& q = value();
    if (q.get_den() != 1) throw Error(Errc::precondition, "expected an integer, got " + to_string(q));
    return q.get_num();
  }
  /// Lower end: the value itself for exact quantities.
  Rational lower() const {
    if (is_exact()) return value();
    if (is_interval()) return range().lo;
    throw Error(Errc::precondition, "no rational lower end for " + render());
  }
  Rational upper() const {
    if (is_exact()) return value();
    if (is_interval()) return range().hi;
    throw Error(Errc::precondition, "no rational upper end for " + render());
  }

  bool operator==(const Quantity& o) const;
  bool operator!=(const Quantity& o) const { return !(*this == o); }
  std::string render() const;
};

inline Quantity Quantity::power(Rational coeff, Int base, Quantity e, Rational offset) {
  if (base < 2) throw Error(Errc::precondition, "tower base must be at least 2");
  if (e.is_exact() && e.value().get_den() == 1) {
    const Int& n = e.value().get_num();
    std::size_t bits = mpz_sizeinbase(base.get_mpz_t(), 2);
    if (n >= 0 && n * static_cast<unsigned long>(bits) <= 64) {
      return exact(coeff * Rational(ipow(base, n.get_ui())) + offset);
    }
    if (n < 0 && -n * static_cast<unsigned long>(bits) <= 64) {
      Rational r = coeff / Rational(ipow(base, Int(-n).get_ui())) + offset;
      return exact(r);
    }
  }
  if (!e.is_exact() && !e.is_tower()) throw Error(Errc::precondition, "tower exponent must be exact or a tower");
  return {Tower{std::move(coeff), std::move(base), std::make_shared<const Quantity>(std::move(e)), std::move(offset)}};
}

inline bool Quantity::operator==(const Quantity& o) const {
  if (v.index() != o.v.index()) return false;
  if (is_exact()) return value() == o.value();
  if (is_truth()) return holds() == o.holds();
  if (is_interval()) return range().lo == o.range().lo && range().hi == o.range().hi;
  auto& a = tower();
  auto& b = o.tower();
  return a.coeff == b.coeff && a.base == b.base && a.offset == b.offset && *a.exponent == *b.exponent;
}

inline std::string Quantity::render() const {
  if (is_exact()) return to_string(value());
  if (is_truth()) return holds() ? "true" : "false";
  if (is_interval()) return "[" + to_string(range().lo) + ", " + to_string(range().hi) + "]";
  auto& t = tower();
  std::string s;
  if (t.coeff != 1) s += to_string(t.coeff) + "*";
  if (t.exponent->is_exact() && t.exponent->value().get_den() == 1 && t.exponent->value() >= 0)
    s += t.base.get_str() + "^" + t.exponent->render();
  else
    s += t.base.get_str() + "^(" + t.exponent->render() + ")";
  if (t.offset > 0) s += " + " + to_string(t.offset);
  if (t.offset < 0) s += " - " + to_string(Rational(-t.offset));
  return s;
}

/// Scales a quantity by a positive rational; towers scale their coefficient and offset.
inline Quantity scale(const Quantity& q, const Rational& a) {
  if (q.is_exact()) return Quantity::exact(q.value() * a);
  if (q.is_interval()) {
    Rational lo = q.range().lo * a, hi = q.range().hi * a;
    return a >= 0 ? Quantity::interval(lo, hi) : Quantity::interval(hi, lo);
  }
  if (q.is_tower()) {
    auto& t = q.tower();
    return Quantity::power(t.coeff * a, t.base, *t.exponent, t.offset * a);
  }
  throw Error(Errc::precondition, "cannot scale a truth value");
}

/// q + r for exact quantities and towers (the offset moves).
inline Quantity shift(const Quantity& q, const Rational& r) {
  if (q.is_exact()) return Quantity::exact(q.value() + r);
  if (q.is_interval()) return Quantity::interval(q.range().lo + r, q.range().hi + r);
  if (q.is_tower()) {
    auto& t = q.tower();
    return Quantity::power(t.coeff, t.base, *t.exponent, t.offset + r);
  }
  throw Error(Errc::precondition, "cannot shift a truth value");
}

/// Smallest k >= 0 with base^k >= x.
inline Int ceil_log(const Int& base, const Rational& x) {
  if (x <= 1) return 0;
  return Int(least_power_at_least(Rational(base), x));
}

inline Quantity log_ceiling(const Int& base, const Quantity& q);

/// True only when a <= b follows from the structure of both quantities.  Towers are compared
/// through their exponents, so the answer false means "not shown", never "a > b".
inline bool provably_le(const Quantity& a, const Quantity& b) {
  if (a.is_truth() || b.is_truth()) return false;
  if (a.is_interval()) return provably_le(Quantity::exact(a.range().hi), b);
  if (b.is_interval()) return provably_le(a, Quantity::exact(b.range().lo));
  if (a.is_exact() && b.is_exact()) return a.value() <= b.value();
  if (a.is_tower()) {
    auto& at = a.tower();
    if (at.coeff <= 0) return provably_le(Quantity::exact(at.offset), b);
    if (!b.is_tower()) return false;
    auto& bt = b.tower();
    if (bt.coeff <= 0) return false;
    if (at.base == bt.base && at.offset <= bt.offset) {
      Int k = ceil_log(at.base, at.coeff / bt.coeff);
      return provably_le(shift(*at.exponent, Rational(k)), *bt.exponent);
    }
    // a <= base^l with l = log_ceiling(base, a) <= coeff_b base^E_b when l + ceil log(1/coeff_b) <= E_b.
    if (bt.offset < 0) return false;
    try {
      Quantity l = log_ceiling(bt.base, a);
      return provably_le(shift(l, Rational(ceil_log(bt.base, 1 / bt.coeff))), *bt.exponent);
    } catch (const Error&) {
      return false;
    }
  }
  // a exact, b a tower.
  auto& bt = b.tower();
  if (bt.coeff <= 0) return false;
  Rational x = (a.value() - bt.offset) / bt.coeff;
  return provably_le(Quantity::exact(Rational(ceil_log(bt.base, x))), *bt.exponent);
}

/// An upper bound for log_base(q), q > 0.
inline Quantity log_ceiling(const Int& base, const Quantity& q) {
  if (q.is_exact()) {
    if (q.value() <= 0) throw Error(Errc::precondition, "logarithm of a non-positive number");
    return Quantity::exact(Rational(ceil_log(base, q.value())));
  }
  if (q.is_interval()) return log_ceiling(base, Quantity::exact(q.range().hi));
  if (!q.is_tower()) throw Error(Errc::precondition, "logarithm of a truth value");
  auto& t = q.tower();
  if (t.coeff <= 0) return log_ceiling(base, Quantity::exact(t.offset));
  // c b^E + o <= b^(E + ceil log_b c) when o <= 0, and <= b^(E + ceil log_b c + 1) when 0 < o <= c b^E.
  Rational k = Rational(ceil_log(t.base, t.coeff));
  if (t.offset > 0) {
    if (!provably_le(Quantity::exact(t.offset), Quantity::power(t.coeff, t.base, *t.exponent)))
      throw Error(Errc::precondition, "tower offset dominates: " + q.render());
    k += 1;
  }
  Quantity e = shift(*t.exponent, k);
  if (t.base == base) return e;
  // b^E <= base^(E * ceil log_base b).
  Int f = ceil_log(base, Rational(t.base));
  return scale(e, Rational(f));
}

/// floor(log2 x) for rational x > 0.
inline Int log2_floor_q(const Rational& x) {
  if (x <= 0) throw Error(Errc::precondition, "logarithm of a non-positive number");
  long a = static_cast<long>(mpz_sizeinbase(x.get_num().get_mpz_t(), 2));
  long b = static_cast<long>(mpz_sizeinbase(x.get_den().get_mpz_t(), 2));
  // 2^(a-1) <= num < 2^a and 2^(b-1) <= den < 2^b, so the answer is a - b or a - b - 1.
  long k = a - b;
  Rational two_k = k >= 0 ? Rational(Int(1) << static_cast<mp_bitcnt_t>(k)) : Rational(Int(1), Int(1) << static_cast<mp_bitcnt_t>(-k));
  if (two_k > x) --k;
  return Int(k);
}

/// An integer lower bound for log2 q, q >= 1; towers need an exact exponent.
inline Int log2_floor(const Quantity& q) {
  if (q.is_exact() || q.is_interval()) {
    Rational lo = q.lower();
    if (lo < 1) throw Error(Errc::precondition, "log2 lower bound needs q >= 1");
    return log2_floor_q(lo);
  }
  if (!q.is_tower() || !q.tower().exponent->is_exact()) throw Error(Errc::precondition, "no log2 lower bound for " + q.render());
  auto& t = q.tower();
  if (t.coeff <= 0) throw Error(Errc::precondition, "no log2 lower bound for " + q.render());
  Int E = t.exponent->integer();
  // c b^E + o >= c b^E / 2 when o >= -c b^E / 2.
  Int k = E * log2_floor_q(Rational(t.base)) + log2_floor_q(t.coeff);
  if (t.offset < 0) {
    if (!provably_le(Quantity::exact(-2 * t.offset), Quantity::power(t.coeff, t.base, *t.exponent)))
      throw Error(Errc::precondition, "no log2 lower bound for " + q.render());
    k -= 1;
  }
  return k;
}

/// Rational bracket of sqrt(x), x >= 0, with hi - lo <= 10^-digits.
inline Interval sqrt_bracket(const Rational& x, unsigned digits) {
  if (x < 0) throw Error(Errc::precondition, "square root of a negative number");
  Int scale10 = ipow(10, digits);
  Rational s2 = x * Rational(scale10 * scale10);
  auto lo = isqrt_bracket(qfloor(s2)).first;
  auto hi = isqrt_bracket(qceil(s2)).second;
  Rational a(lo, scale10), b(hi, scale10);
  a.canonicalize();
  b.canonicalize();
  return {a, b};
}

struct LedgerStep {
  std::string name;
  std::string rule;
  std::string ref;  // which inequality the rule instantiates
  std::vector<std::pair<std::string, Quantity>> inputs;
  Quantity output;
};

namespace rules {

using Fn = std::function<Quantity(const std::vector<Quantity>&)>;

inline void arity(const std::vector<Quantity>& in, std::size_t n, const char* rule) {
  if (in.size() != n) throw Error(Errc::malformed, std::string("rule ") + rule + " takes " + std::to_string(n) + " inputs");
}

inline const std::map<std::string, Fn>& table() {
  static const std::map<std::string, Fn> t = {
      {"product",
       [](const std::vector<Quantity>& in) {
         Rational r = 1;
         for (auto& q : in) r *= q.value();
         return Quantity::exact(r);
       }},
      {"ratio",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "ratio");
         if (in[1].value() == 0) throw Error(Errc::precondition, "division by zero");
         return Quantity::exact(in[0].value() / in[1].value());
       }},
      {"power",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "power");
         return Quantity::power(1, in[0].integer(), in[1]);
       }},
      // a > b, certified through the lower end of a and the upper end of b.
      {"greater",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "greater");
         return Quantity::truth(in[0].lower() > in[1].upper());
       }},
      {"sqrt",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "sqrt");
         unsigned d = static_cast<unsigned>(in[1].integer().get_ui());
         auto lo = sqrt_bracket(in[0].lower(), d).lo, hi = sqrt_bracket(in[0].upper(), d).hi;
         return Quantity::interval(lo, hi);
       }},
      // sqrt((2/9)(1 - (k-1)/sqrt(p))) from an interval for sqrt(p); increasing in sqrt(p).
      {"kazhdan-root",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "kazhdan-root");
         Rational k1 = in[0].value() - 1;
         unsigned d = static_cast<unsigned>(in[2].integer().get_ui());
         Rational a = make_q(2, 9) * (1 - k1 / in[1].lower());
         Rational b = make_q(2, 9) * (1 - k1 / in[1].upper());
         if (a <= 0) throw Error(Errc::unsatisfiable, "1 - (k-1)/sqrt(p) is not positive");
         return Quantity::interval(sqrt_bracket(a, d).lo, sqrt_bracket(b, d).hi);
       }},
      // kappa(Gamma, S; V) >= kappa(Delta, Y; V) / depth: lower end divided by the depth.
      {"depth-division",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "depth-division");
         return Quantity::exact(in[0].lower() / in[1].value());
       }},
      {"at-least",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "at-least");
         if (in[0].lower() < in[1].value())
           throw Error(Errc::unsatisfiable, "lower bound " + in[0].render() + " is below " + in[1].render());
         return in[1];
       }},
      {"least-power",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "least-power");
         return Quantity::exact(Rational(Int(least_power_at_least(in[0].value(), in[1].value()))));
       }},
      {"ceil-log",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "ceil-log");
         return Quantity::exact(Rational(ceil_log(in[0].integer(), in[1].value())));
       }},
      // sum_{i=0}^{k} d^i.
      {"geometric-sum",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "geometric-sum");
         Int d = in[0].integer(), k = in[1].integer();
         if (d == 1) return Quantity::exact(Rational(k + 1));
         Rational c(1, d - 1);
         c.canonicalize();
         return Quantity::power(c, d, Quantity::exact(Rational(k + 1)), -c);
       }},
      {"shift",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "shift");
         return shift(in[0], in[1].value());
       }},
      {"scale",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "scale");
         return scale(in[0], in[1].value());
       }},
      // c * base^e.
      {"scaled-power",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "scaled-power");
         return Quantity::power(in[0].value(), in[1].integer(), in[2]);
       }},
      // An upper bound for log_base(q).
      {"log-ceiling",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "log-ceiling");
         return log_ceiling(in[0].integer(), in[1]);
       }},
      {"at-most",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "at-most");
         return Quantity::truth(provably_le(in[0], in[1]));
       }},
      // Upper bound for a + b: exact sum, or a tower c b^E + o absorbing the other term when it
      // is at most b^E.
      {"sum-bound",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "sum-bound");
         if (in[0].is_exact() && in[1].is_exact()) return Quantity::exact(in[0].value() + in[1].value());
         if (in[0].is_tower() && in[1].is_exact()) return shift(in[0], in[1].value());
         if (in[1].is_tower() && in[0].is_exact()) return shift(in[1], in[0].value());
         for (int i = 0; i < 2; ++i) {
           const Quantity& big = in[static_cast<std::size_t>(i)];
           const Quantity& small = in[static_cast<std::size_t>(1 - i)];
           if (!big.is_tower() || big.tower().coeff <= 0) continue;
           auto& t = big.tower();
           if (provably_le(small, Quantity::power(1, t.base, *t.exponent)))
             return Quantity::power(t.coeff + 1, t.base, *t.exponent, t.offset);
         }
         throw Error(Errc::precondition, "no bound for " + in[0].render() + " + " + in[1].render());
       }},
      {"lower-end",
       [](const std::vector<Quantity>& in) {
         arity(in, 1, "lower-end");
         if (in[0].is_tower()) return in[0];
         return Quantity::exact(in[0].lower());
       }},
      // Best of several lower bounds.
      {"maximum",
       [](const std::vector<Quantity>& in) {
         if (in.empty()) throw Error(Errc::malformed, "maximum of nothing");
         for (auto& cand : in) {
           bool top = true;
           for (auto& other : in) top = top && provably_le(other, cand);
           if (top) return cand;
         }
         throw Error(Errc::precondition, "lower bounds are not comparable");
       }},
      // h >= alpha^2 / 2.
      {"cheeger-from-alpha",
       [](const std::vector<Quantity>& in) {
         arity(in, 1, "cheeger-from-alpha");
         auto& a = in[0];
         if (a.is_tower()) {
           auto& t = a.tower();
           if (t.offset != 0) throw Error(Errc::precondition, "squaring a tower with offset");
           return Quantity::power(t.coeff * t.coeff / 2, t.base, scale(*t.exponent, 2));
         }
         Rational lo = a.lower();
         return Quantity::exact(lo * lo / 2);
       }},
      // alpha(Gamma) >= alpha(Delta) / (u L) with u >= sqrt|Y| rational.
      {"subgroup-alpha",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "subgroup-alpha");
         Rational u = sqrt_bracket(in[1].value(), 6).hi;
         return Quantity::exact(in[0].lower() / (u * in[2].value()));
       }},
      // h(Gamma) >= h(Delta) / (|Y| L + 1).
      {"subgroup-h",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "subgroup-h");
         return Quantity::exact(in[0].lower() / (in[1].value() * in[2].value() + 1));
       }},
      {"copy", [](const std::vector<Quantity>& in) {
         arity(in, 1, "copy");
         return in[0];
       }},
      {"min-half-gap",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "min-half-gap");
         Rational t0 = in[0].value(), t1 = in[1].value();
         return Quantity::exact(std::min<Rational>(t1 / 2, (t0 - t1) / 2));
       }},
      {"difference",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "difference");
         return Quantity::exact(in[0].value() - in[1].value());
       }},
      {"sum",
       [](const std::vector<Quantity>& in) {
         Rational r = 0;
         for (auto& q : in) r += q.value();
         return Quantity::exact(r);
       }},
      {"ceil",
       [](const std::vector<Quantity>& in) {
         arity(in, 1, "ceil");
         return Quantity::exact(Rational(qceil(in[0].value())));
       }},
      // prod_{i=1}^{n-1} ((1 - t^(p i)) / (1 - t^i))^(c_i); inputs t, p, c_1, ..., c_{n-1}.
      {"descent-product",
       [](const std::vector<Quantity>& in) {
         if (in.size() < 2) throw Error(Errc::malformed, "descent-product takes t, p and the c_i");
         Rational t = in[0].value(), r = 1;
         unsigned long p = in[1].integer().get_ui();
         for (std::size_t i = 2; i < in.size(); ++i) {
           unsigned long n = i - 1;
           Rational f = (1 - qpow(t, p * n)) / (1 - qpow(t, n));
           r *= qpow(f, in[i].integer().get_ui());
         }
         return Quantity::exact(r);
       }},
      {"rational-power",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "rational-power");
         return Quantity::exact(qpow(in[0].value(), in[1].integer().get_ui()));
       }},
      // An integer lower bound for log2 q, q >= 1.
      {"floor-log2",
       [](const std::vector<Quantity>& in) {
         arity(in, 1, "floor-log2");
         return Quantity::exact(Rational(log2_floor(in[0])));
       }},
      // (1 + t^(n-1))^c; inputs t, n, c.
      {"one-plus-power",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "one-plus-power");
         Rational s = qpow(in[0].value(), in[1].integer().get_ui() - 1);
         return Quantity::exact(qpow(1 + s, in[2].integer().get_ui()));
       }},
      // x >= 2^e for rational e = a/b: exactly as x^b >= 2^a when that is small enough to
      // evaluate, otherwise through x >= 2^ceil(e).
      {"power-of-two-bound",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "power-of-two-bound");
         const Rational& x = in[0].value();
         const Rational& e = in[1].value();
         if (x <= 0) return Quantity::truth(false);
         Int a = e.get_num(), b = e.get_den();
         std::size_t xbits = mpz_sizeinbase(x.get_num().get_mpz_t(), 2) + mpz_sizeinbase(x.get_den().get_mpz_t(), 2);
         if (b * Int(static_cast<unsigned long>(xbits)) <= Int(1) << 24 && abs(a) <= Int(1) << 24) {
           Rational lhs = qpow(x, b.get_ui());
           Rational rhs = a >= 0 ? Rational(Int(1) << static_cast<mp_bitcnt_t>(a.get_ui()))
                                 : Rational(Int(1), Int(1) << static_cast<mp_bitcnt_t>(Int(-a).get_ui()));
           return Quantity::truth(lhs >= rhs);
         }
         Int c = qceil(e);
         if (c < 0) c = 0;
         return Quantity::truth(x >= Rational(Int(1) << static_cast<mp_bitcnt_t>(c.get_ui())));
       }},
      // (1 + s)^ceil(1/s) >= 2 for s in (0, 1], via the binomial bound 1 + ceil(1/s) s >= 2.
      {"binomial-two",
       [](const std::vector<Quantity>& in) {
         arity(in, 1, "binomial-two");
         const Rational& s = in[0].value();
         if (s <= 0 || s > 1) return Quantity::truth(false);
         Rational k = Rational(qceil(1 / s));
         return Quantity::truth(1 + k * s >= 2);
       }},
      // Largest beta = j/den with lm^beta <= la, checked as lm^j <= la^den; inputs la, lm, den.
      {"growth-exponent",
       [](const std::vector<Quantity>& in) {
         arity(in, 3, "growth-exponent");
         Int la = in[0].integer(), lm = in[1].integer();
         unsigned long den = in[2].integer().get_ui();
         if (lm < 2 || la < 1) return Quantity::exact(0);
         Int cap = ipow(la, den);
         unsigned long j = 0;
         Int acc = lm;
         while (acc <= cap) {
           ++j;
           acc *= lm;
         }
         Rational b(Int(static_cast<unsigned long>(j)), Int(den));
         b.canonicalize();
         return Quantity::exact(b);
       }},
      // (p^d - 1)/(p - 1): the number of index-p subgroups of (Z/p)^d.
      {"hyperplane-count",
       [](const std::vector<Quantity>& in) {
         arity(in, 2, "hyperplane-count");
         Int p = in[0].integer();
         Rational c(1, p - 1);
         c.canonicalize();
         return Quantity::power(c, p, in[1], -c);
       }},
  };
  return t;
}

inline Quantity apply(const std::string& rule, const std::vector<Quantity>& in) {
  auto& t = table();
  auto it = t.find(rule);
  if (it == t.end()) throw Error(Errc::malformed, "unknown ledger rule '" + rule + "'");
  return it->second(in);
}

}  // namespace rules

class BoundLedger {
 public:
  /// Evaluates the rule on the named inputs and records the result under `name`.
  const Quantity& record(const std::string& name, const std::string& rule, const std::string& ref,
                         std::vector<std::pair<std::string, Quantity>> inputs) {
    std::vector<Quantity> vals;
    for (auto& [n, q] : inputs) vals.push_back(q);
    LedgerStep s{name, rule, ref, std::move(inputs), rules::apply(rule, vals)};
    index_[name] = steps_.size();
    steps_.push_back(std::move(s));
    return steps_.back().output;
  }
  /// Records a given input value (no derivation).
  const Quantity& given(const std::string& name, Quantity q, const std::string& ref = "input") {
    return record(name, "copy", ref, {{name, std::move(q)}});
  }
  /// Input taken from an earlier entry of this ledger.
  std::pair<std::string, Quantity> ref(const std::string& name) const { return {name, get(name)}; }

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const Quantity& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(Errc::malformed, "no ledger entry '" + name + "'");
    return steps_[it->second].output;
  }
  const std::vector<LedgerStep>& steps() const { return steps_; }
  /// Adds a step as recorded elsewhere; replay() decides whether it holds.
  void push(LedgerStep s) {
    index_[s.name] = steps_.size();
    steps_.push_back(std::move(s));
  }
  void append(const BoundLedger& o) {
    for (auto& s : o.steps_) {
      index_[s.name] = steps_.size();
      steps_.push_back(s);
    }
  }

  /// Recomputes every step from its inputs; inputs naming earlier entries must match them.
  /// Returns the name of the first step that does not reproduce, or an empty string.
  std::string replay() const {
    std::map<std::string, Quantity> seen;
    for (auto& s : steps_) {
      std::vector<Quantity> vals;
      for (auto& [n, q] : s.inputs) {
        auto it = seen.find(n);
        if (it != seen.end() && it->second != q) return s.name + " (input " + n + " differs from its entry)";
        vals.push_back(q);
      }
      Quantity out;
      try {
        out = rules::apply(s.rule, vals);
      } catch (const Error&) {
        return s.name;
      }
      if (out != s.output) return s.name;
      seen.insert_or_assign(s.name, s.output);
    }
    return {};
  }

  std::string render() const {
    std::ostringstream os;
    for (auto& s : steps_) {
      os << s.name << " = " << s.output.render() << "  [" << s.rule;
      if (!s.ref.empty()) os << "; " << s.ref;
      os << "]";
      if (!(s.rule == "copy" && s.inputs.size() == 1 && s.inputs[0].first == s.name)) {
        os << " from";
        for (auto& [n, q] : s.inputs) os << " " << n << "=" << q.render();
      }
      os << "\n";
    }
    return os.str();
  }

 private:
  std::vector<LedgerStep> steps_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace ggs
