#pragma once
// Truncated noncommutative power series over a finite field.

#include "ggs/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ggs {

using Monomial = std::vector<std::uint32_t>;

/// Graded (by length) then lexicographic order on variable indices.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

inline double log_of(const Rational& q) {
  long en, ed;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(mn) - std::log(md) + double(en - ed) * std::log(2.0);
}

/// Degrees d(u_i) >= 1 and weights w(u_i) in (0,1) of the variables.
struct Grading {
  std::vector<long> degrees;
  std::vector<Rational> weights;
  std::vector<double> logw;

  Grading() = default;
  Grading(std::vector<long> d, std::vector<Rational> w) : degrees(std::move(d)), weights(std::move(w)) {
    if (!weights.empty() && !degrees.empty() && weights.size() != degrees.size())
      throw Error(Errc::precondition, "grading size mismatch");
    for (auto v : degrees)
      if (v < 1) throw Error(Errc::precondition, "degrees must be >= 1");
    for (auto& w : weights)
      if (w <= 0 || w >= 1) throw Error(Errc::precondition, "weights must lie in (0,1)");
    logw.reserve(weights.size());
    for (auto& w : weights) logw.push_back(log_of(w));
  }
  static Grading standard(std::size_t n) { return Grading(std::vector<long>(n, 1), {}); }
  static Grading of_weights(std::vector<Rational> w) {
    return Grading(std::vector<long>(w.size(), 1), std::move(w));
  }
  bool has_weights() const { return !weights.empty(); }

  Rational weight(const Monomial& m) const {
    Rational r = 1;
    for (auto v : m) r *= weights.at(v);
    return r;
  }
  double log_weight(const Monomial& m) const {
    double r = 0;
    for (auto v : m) r += logw.at(v);
    return r;
  }
  long degree(const Monomial& m) const {
    long r = 0;
    for (auto v : m) r += degrees.empty() ? 1 : degrees.at(v);
    return r;
  }
};

/// Truncation policy: keep a monomial iff length <= cap and (if floor set) weight >= floor.
struct Policy {
  std::size_t cap = 8;
  std::optional<Rational> floor;
  std::shared_ptr<const Grading> grading;  // required when floor is set

  static Policy degree_cap(std::size_t n) { return Policy{n, std::nullopt, nullptr}; }
  static Policy with_floor(std::size_t n, Rational theta, std::shared_ptr<const Grading> g) {
    return Policy{n, std::move(theta), std::move(g)};
  }
};

/// Three-way outcome of a weight evaluation.
struct WeightValue {
  enum Kind { exact, below, zero } kind = zero;
  Rational value;  // exact value, or the floor the true value lies strictly below

  static WeightValue make_exact(Rational v) { return {exact, std::move(v)}; }
  static WeightValue make_below(Rational theta) { return {below, std::move(theta)}; }
  static WeightValue make_zero() { return {zero, Rational(0)}; }
  bool is_exact() const { return kind == exact; }
  /// A sound upper bound for the true weight.
  Rational upper() const { return kind == zero ? Rational(0) : value; }
  std::string str() const {
    if (kind == exact) return to_string(value);
    if (kind == zero) return "0";
    return "<" + to_string(value);
  }
};

struct DegreeValue {
  enum Kind { exact, above, infinite } kind = infinite;
  long value = 0;  // exact degree, or the lower bound for `above`

  bool is_exact() const { return kind == exact; }
  std::string str() const {
    if (kind == exact) return std::to_string(value);
    if (kind == infinite) return "inf";
    return ">=" + std::to_string(value);
  }
};

using VarNames = std::shared_ptr<const std::vector<std::string>>;

inline VarNames make_vars(std::vector<std::string> names) {
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}
inline VarNames make_vars(std::size_t n, const std::string& stem = "u") {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(stem + std::to_string(i + 1));
  return make_vars(std::move(v));
}

class Series {
 public:
  using Terms = std::map<Monomial, Elem, GradedLex>;

  Series(Field f, VarNames vars, Policy pol) : field_(std::move(f)), vars_(std::move(vars)), pol_(std::move(pol)) {
    if (pol_.floor && !pol_.grading) throw Error(Errc::precondition, "weight floor needs a grading");
    if (pol_.floor && (*pol_.floor <= 0 || *pol_.floor >= 1))
      throw Error(Errc::precondition, "weight floor must lie in (0,1)");
  }

  static Series constant(const Field& f, VarNames vars, Policy pol, Elem c) {
    Series s(f, std::move(vars), std::move(pol));
    if (c != 0) s.terms_[{}] = c;
    return s;
  }
  static Series one(const Field& f, VarNames vars, Policy pol) { return constant(f, std::move(vars), std::move(pol), 1); }
  static Series monomial(const Field& f, VarNames vars, Policy pol, Monomial m, Elem c = 1) {
    Series s(f, std::move(vars), std::move(pol));
    s.put(std::move(m), c);
    return s;
  }

  const Field& field() const { return field_; }
  const VarNames& vars() const { return vars_; }
  std::size_t nvars() const { return vars_->size(); }
  const Policy& policy() const { return pol_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// True if some term was dropped by the length cap / weight floor.
  bool cap_fired() const { return cap_fired_; }
  bool floor_fired() const { return floor_fired_; }
  bool truncated() const { return cap_fired_ || floor_fired_; }
  Elem coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0 : it->second;
  }
  Elem constant_term() const { return coeff({}); }

  /// Adds c*m respecting the policy.
  void put(Monomial m, Elem c) {
    if (c == 0) return;
    if (!admit(m)) return;
    auto [it, fresh] = terms_.try_emplace(std::move(m), c);
    if (!fresh) {
      it->second = field_.add(it->second, c);
      if (it->second == 0) terms_.erase(it);
    }
  }

  void check_compatible(const Series& o) const {
    if (field_ != o.field_) throw Error(Errc::incompatible, "field mismatch " + field_.tag() + " vs " + o.field_.tag());
    if (vars_ != o.vars_ && *vars_ != *o.vars_) throw Error(Errc::incompatible, "variable set mismatch");
    if (pol_.floor && o.pol_.floor && pol_.grading != o.pol_.grading &&
        pol_.grading->weights != o.pol_.grading->weights)
      throw Error(Errc::incompatible, "weight floors over different gradings");
  }

  /// The tighter of the two policies.
  static Policy meet(const Policy& a, const Policy& b) {
    Policy r;
    r.cap = std::min(a.cap, b.cap);
    if (a.floor && b.floor) {
      r.floor = std::max(*a.floor, *b.floor);
      r.grading = a.grading;
    } else if (a.floor) {
      r.floor = a.floor;
      r.grading = a.grading;
    } else if (b.floor) {
      r.floor = b.floor;
      r.grading = b.grading;
    }
    return r;
  }

  Series operator+(const Series& o) const {
    check_compatible(o);
    Series r(field_, vars_, meet(pol_, o.pol_));
    r.cap_fired_ = cap_fired_ || o.cap_fired_;
    r.floor_fired_ = floor_fired_ || o.floor_fired_;
    for (auto& [m, c] : terms_) r.put(m, c);
    for (auto& [m, c] : o.terms_) r.put(m, c);
    return r;
  }
  Series operator-() const {
    Series r = *this;
    for (auto& [m, c] : r.terms_) c = field_.neg(c);
    return r;
  }
  Series operator-(const Series& o) const { return *this + (-o); }
  Series scaled(Elem c) const {
    Series r(field_, vars_, pol_);
    r.cap_fired_ = cap_fired_;
    r.floor_fired_ = floor_fired_;
    if (c == 0) return r;
    for (auto& [m, e] : terms_) r.put(m, field_.mul(e, c));
    return r;
  }
  bool operator==(const Series& o) const { return field_ == o.field_ && terms_ == o.terms_; }
  bool operator!=(const Series& o) const { return !(*this == o); }

  /// Convolution product truncated to the tighter policy.
  Series operator*(const Series& o) const {
    check_compatible(o);
    Series r(field_, vars_, meet(pol_, o.pol_));
    r.cap_fired_ = cap_fired_ || o.cap_fired_;
    r.floor_fired_ = floor_fired_ || o.floor_fired_;
    const bool use_floor = r.pol_.floor.has_value();
    std::vector<double> lb;
    double lfloor = 0;
    if (use_floor) {
      lfloor = log_of(*r.pol_.floor);
      lb.reserve(o.terms_.size());
      for (auto& t : o.terms_) lb.push_back(r.pol_.grading->log_weight(t.first));
    }
    Monomial buf;
    for (auto& [ma, ca] : terms_) {
      double la = use_floor ? r.pol_.grading->log_weight(ma) : 0.0;
      std::size_t k = 0;
      for (auto it = o.terms_.begin(); it != o.terms_.end(); ++it, ++k) {
        const auto& mb = it->first;
        if (ma.size() + mb.size() > r.pol_.cap) {
          r.cap_fired_ = true;
          // Terms of o are length-ordered: the rest are longer still.
          break;
        }
        if (use_floor && la + lb[k] < lfloor - 1e-9) {
          r.floor_fired_ = true;
          continue;
        }
        buf.assign(ma.begin(), ma.end());
        buf.insert(buf.end(), mb.begin(), mb.end());
        r.put(buf, field_.mul(ca, it->second));
      }
    }
    return r;
  }

  /// this * (sum_k c[k] u_var^k), the fast path used by the Magnus embedding.
  Series mul_univariate(std::uint32_t var, const std::vector<Elem>& c) const {
    Series r(field_, vars_, pol_);
    r.cap_fired_ = cap_fired_;
    r.floor_fired_ = floor_fired_;
    const bool use_floor = pol_.floor.has_value();
    double lfloor = use_floor ? log_of(*pol_.floor) : 0.0;
    double lv = use_floor ? pol_.grading->logw.at(var) : 0.0;
    Monomial buf;
    for (auto& [m, e] : terms_) {
      double lm = use_floor ? pol_.grading->log_weight(m) : 0.0;
      buf = m;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (k > 0) buf.push_back(var);
        if (buf.size() > pol_.cap) {
          r.cap_fired_ = true;
          break;
        }
        if (use_floor && lm + double(k) * lv < lfloor - 1e-9) {
          r.floor_fired_ = true;
          break;
        }
        if (c[k] != 0) r.put(buf, field_.mul(e, c[k]));
      }
    }
    return r;
  }

  /// Two-sided inverse up to the policy; requires a nonzero constant term.
  Series inverse() const {
    Elem c0 = constant_term();
    if (c0 == 0) throw Error(Errc::non_unit, "constant term is zero");
    Elem ic = field_.inv(c0);
    // a = c0 (1 - n), a^{-1} = c0^{-1} sum_k n^k, n nilpotent modulo the cap.
    Series n(field_, vars_, pol_);
    for (auto& [m, e] : terms_)
      if (!m.empty()) n.put(m, field_.neg(field_.mul(e, ic)));
    Series acc = Series::one(field_, vars_, pol_);
    Series pw = acc;
    for (std::size_t k = 1; k <= pol_.cap; ++k) {
      pw = pw * n;
      if (pw.is_zero()) break;
      acc = acc + pw;
    }
    acc.cap_fired_ = acc.cap_fired_ || cap_fired_ || !n.is_zero();
    acc.floor_fired_ = acc.floor_fired_ || floor_fired_;
    return acc.scaled(ic);
  }

  /// max weight over stored monomials (see WeightValue for the truncated cases).
  WeightValue weight(const Grading& g) const {
    if (terms_.empty()) {
      if (!truncated()) return WeightValue::make_zero();
      return WeightValue::make_below(below_bound(g));
    }
    const Monomial* best = nullptr;
    double bl = -1e300;
    for (auto& [m, c] : terms_) {
      double l = g.log_weight(m);
      if (l > bl + 1e-9) {
        bl = l;
        best = &m;
      } else if (l > bl - 1e-9 && g.weight(m) > g.weight(*best)) {
        bl = l;
        best = &m;
      }
    }
    Rational w = g.weight(*best);
    if (cap_fired_) {
      // A dropped term has length > cap, so weight <= (max var weight)^(cap+1).
      Rational lost = qpow(max_weight(g), pol_.cap + 1);
      if (lost >= w) return WeightValue::make_below(lost > below_bound(g) ? lost : below_bound(g));
    }
    if (floor_fired_ && pol_.floor && *pol_.floor > w) return WeightValue::make_below(*pol_.floor);
    return WeightValue::make_exact(w);
  }

  /// min graded degree over stored monomials; exact only when no dropped term could be lower.
  DegreeValue degree(const Grading& g) const {
    if (terms_.empty()) {
      if (!truncated()) return {DegreeValue::infinite, 0};
      return {DegreeValue::above, static_cast<long>(pol_.cap) + 1};
    }
    long best = -1;
    for (auto& [m, c] : terms_) {
      long d = g.degree(m);
      if (best < 0 || d < best) best = d;
    }
    if (floor_fired_) {
      // Floor-dropped terms may have any degree; only trust degrees within the cap and when
      // the caller's floor is irrelevant (no floor) -- report as a lower bound otherwise.
      return {DegreeValue::above, std::min<long>(best, static_cast<long>(pol_.cap) + 1)};
    }
    if (cap_fired_ && best > static_cast<long>(pol_.cap)) return {DegreeValue::above, static_cast<long>(pol_.cap) + 1};
    return {DegreeValue::exact, best};
  }

  /// Largest stored monomial under (weight, then lex with var_rank) order; nullopt for zero.
  std::optional<Monomial> leading_term(const Grading& g, const std::vector<std::uint32_t>& var_rank) const {
    const Monomial* best = nullptr;
    Rational bw;
    for (auto& [m, c] : terms_) {
      Rational w = g.weight(m);
      if (!best || w > bw || (w == bw && lex_less(*best, m, var_rank))) {
        best = &m;
        bw = w;
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  std::string render() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto& [m, c] : terms_) {
      if (!s.empty()) s += " + ";
      std::string coef = field_.render(c);
      if (field_.m() > 1 && coef.find_first_of("+x") != std::string::npos && !m.empty()) coef = "(" + coef + ")";
      if (m.empty()) {
        s += coef;
        continue;
      }
      if (c != 1) s += coef + "*";
      s += render_monomial(m, *vars_);
    }
    return s;
  }

  static std::string render_monomial(const Monomial& m, const std::vector<std::string>& names) {
    if (m.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < m.size();) {
      std::size_t j = i;
      while (j < m.size() && m[j] == m[i]) ++j;
      if (!s.empty()) s += "*";
      s += names.at(m[i]);
      if (j - i > 1) s += "^" + std::to_string(j - i);
      i = j;
    }
    return s;
  }

  /// Restrict the policy (e.g. after changing the cap); drops terms that no longer pass.
  Series retruncated(const Policy& p) const {
    Series r(field_, vars_, p);
    r.cap_fired_ = cap_fired_;
    r.floor_fired_ = floor_fired_;
    for (auto& [m, c] : terms_) r.put(m, c);
    return r;
  }

 private:
  static bool lex_less(const Monomial& a, const Monomial& b, const std::vector<std::uint32_t>& rank) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto ra = rank.at(a[i]), rb = rank.at(b[i]);
      if (ra != rb) return ra < rb;
    }
    return a.size() < b.size();
  }

  Rational max_weight(const Grading& g) const {
    Rational m = 0;
    for (auto& w : g.weights)
      if (w > m) m = w;
    return m;
  }
  Rational below_bound(const Grading& g) const {
    Rational b = 0;
    if (pol_.floor) b = *pol_.floor;
    if (cap_fired_ && g.has_weights()) {
      Rational lost = qpow(max_weight(g), pol_.cap + 1);
      if (lost > b) b = lost;
    }
    return b;
  }

  bool admit(const Monomial& m) {
    if (m.size() > pol_.cap) {
      cap_fired_ = true;
      return false;
    }
    if (pol_.floor && !m.empty()) {
      double l = pol_.grading->log_weight(m), lf = log_of(*pol_.floor);
      if (l < lf - 1e-9 || (l < lf + 1e-9 && pol_.grading->weight(m) < *pol_.floor)) {
        floor_fired_ = true;
        return false;
      }
    }
    return true;
  }

  Field field_;
  VarNames vars_;
  Policy pol_;
  Terms terms_;
  bool cap_fired_ = false;
  bool floor_fired_ = false;
};

/// Target variable and basis index (1-based) of each source variable u_{i,k}(lambda_j).
struct PhiVar {
  std::uint32_t tilde;
  unsigned basis;
};

/// Ring homomorphism u_{i,k}(lambda_j) -> lambda_j * tilde-u_{i,k} into F_q<<U~>>.
inline Series scalar_extend_phi(const Series& a, const Field& target, const std::vector<PhiVar>& map, VarNames tilde_vars,
                                std::optional<Policy> pol = std::nullopt) {
  if (a.field().m() != 1 || a.field().p() != target.p())
    throw Error(Errc::incompatible, "phi maps F_p series into an extension of F_p");
  if (map.size() != a.nvars()) throw Error(Errc::malformed, "phi needs one target per source variable");
  for (auto& v : map) {
    if (v.basis < 1 || v.basis > target.m()) throw Error(Errc::malformed, "basis index out of range");
    if (v.tilde >= tilde_vars->size()) throw Error(Errc::malformed, "tilde variable out of range");
  }
  Policy p = pol ? *pol : Policy::degree_cap(a.policy().cap);
  Series r(target, tilde_vars, p);
  for (auto& [m, c] : a.terms()) {
    Elem coef = target.from_int(static_cast<long long>(c));
    Monomial tm;
    tm.reserve(m.size());
    for (auto v : m) {
      coef = target.mul(coef, target.basis(map[v].basis));
      tm.push_back(map[v].tilde);
    }
    r.put(std::move(tm), coef);
  }
  return r;
}

}  // namespace ggs
