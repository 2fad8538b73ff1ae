#pragma once
// One-variable truncated series with exact coefficients, Hilbert series of word sets,
// the Golod-Shafarevich condition and the Quillen product.

#include "ggs/words.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ggs {

class IntSeries {
 public:
  IntSeries() = default;
  explicit IntSeries(std::size_t N) : c_(N + 1, Rational(0)) {}
  explicit IntSeries(std::vector<Rational> c) : c_(std::move(c)) {
    if (c_.empty()) c_.push_back(0);
  }
  static IntSeries one(std::size_t N) {
    IntSeries s(N);
    s.c_[0] = 1;
    return s;
  }
  /// Polynomial with the given coefficients, truncated or padded to degree N.
  static IntSeries of(std::vector<Rational> c, std::size_t N) {
    c.resize(N + 1, Rational(0));
    return IntSeries(std::move(c));
  }

  std::size_t N() const { return c_.size() - 1; }
  const Rational& operator[](std::size_t k) const { return c_.at(k); }
  Rational& operator[](std::size_t k) { return c_.at(k); }
  const std::vector<Rational>& coeffs() const { return c_; }

  IntSeries truncated(std::size_t N) const {
    std::vector<Rational> c(c_.begin(), c_.begin() + static_cast<long>(std::min(N, this->N()) + 1));
    return of(std::move(c), N);
  }

  IntSeries operator+(const IntSeries& o) const {
    std::size_t n = std::min(N(), o.N());
    IntSeries r(n);
    for (std::size_t k = 0; k <= n; ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
  }
  IntSeries operator-(const IntSeries& o) const {
    std::size_t n = std::min(N(), o.N());
    IntSeries r(n);
    for (std::size_t k = 0; k <= n; ++k) r.c_[k] = c_[k] - o.c_[k];
    return r;
  }
  IntSeries operator*(const IntSeries& o) const {
    std::size_t n = std::min(N(), o.N());
    IntSeries r(n);
    for (std::size_t i = 0; i <= n; ++i) {
      if (c_[i] == 0) continue;
      for (std::size_t j = 0; i + j <= n; ++j) r.c_[i + j] += c_[i] * o.c_[j];
    }
    return r;
  }
  IntSeries scaled(const Rational& a) const {
    IntSeries r = *this;
    for (auto& x : r.c_) x *= a;
    return r;
  }
  /// Multiplication by 1/(1-t).
  IntSeries partial_sums() const {
    IntSeries r = *this;
    for (std::size_t k = 1; k <= N(); ++k) r.c_[k] += r.c_[k - 1];
    return r;
  }
  Rational eval(const Rational& t) const {
    Rational acc = 0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * t + c_[k];
    return acc;
  }
  /// Coefficient-wise a_k >= b_k up to min(N1,N2); returns the first failing index.
  std::optional<std::size_t> first_below(const IntSeries& o) const {
    std::size_t n = std::min(N(), o.N());
    for (std::size_t k = 0; k <= n; ++k)
      if (c_[k] < o.c_[k]) return k;
    return std::nullopt;
  }
  bool operator==(const IntSeries& o) const { return c_ == o.c_; }

  std::string render() const {
    std::string s = "[";
    for (std::size_t k = 0; k < c_.size(); ++k) s += (k ? ", " : "") + to_string(c_[k]);
    return s + "]";
  }

 private:
  std::vector<Rational> c_{Rational(0)};
};

struct HilbertTally {
  IntSeries series;
  std::size_t beyond = 0;  // elements of degree > N (or degree not resolved within N)
};

/// H_{D,S}(t) = sum over f in S of t^{D(f)}, truncated at N.
inline HilbertTally hilbert_of_set(const std::vector<Word>& S, const std::vector<long>& D, std::uint32_t p, std::size_t N) {
  HilbertTally h{IntSeries(N), 0};
  for (auto& f : S) {
    auto d = word_degree(f, D, p, static_cast<long>(N));
    if (d.is_exact() && d.value <= static_cast<long>(N))
      h.series[static_cast<std::size_t>(d.value)] += 1;
    else
      ++h.beyond;
  }
  return h;
}

/// Hilbert series of a generating set: tallies D directly.
inline IntSeries hilbert_of_degrees(const std::vector<long>& D, std::size_t N) {
  IntSeries s(N);
  for (auto d : D)
    if (d >= 0 && static_cast<std::size_t>(d) <= N) s[static_cast<std::size_t>(d)] += 1;
  return s;
}

enum class Verdict { satisfied, not_satisfied, unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::not_satisfied: return "not-satisfied";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

/// One point of the integral-approximation sweep for a weight input.
struct SweepPoint {
  Rational t;
  std::vector<long> D;
  Rational value;  // 1 - H_X(t) + H_R(t) for the (D_t, t) weight function
  bool exact = true;
};

struct GGSCertificate {
  std::optional<Rational> t0;
  Rational value;  // 1 - W(X) + W(R), an upper bound when some relator is inexact
  std::vector<bool> exact;
  std::vector<std::string> relator_weights;
  Verdict verdict = Verdict::unknown;
  std::vector<SweepPoint> sweep;
};

inline Verdict decide(const Rational& value, bool all_exact) {
  if (value < 0) return Verdict::satisfied;
  return all_exact ? Verdict::not_satisfied : Verdict::unknown;
}

/// GGS condition for the (D, t0) weight function, evaluated through degrees.
/// Relators whose degree exceeds `cap` contribute the bound t0^(cap+1).
inline GGSCertificate ggs_check(const std::vector<long>& D, const Rational& t0, const std::vector<Word>& R, std::uint32_t p,
                                std::optional<long> cap = std::nullopt) {
  if (t0 <= 0 || t0 >= 1) throw Error(Errc::precondition, "t0 must lie in (0,1)");
  GGSCertificate c;
  c.t0 = t0;
  c.value = 1;
  for (auto d : D) c.value -= qpow(t0, static_cast<unsigned long>(d));
  bool all = true;
  for (auto& r : R) {
    auto d = word_degree(r, D, p, cap);
    if (d.kind == DegreeValue::infinite) {
      c.exact.push_back(true);
      c.relator_weights.push_back("0");
      continue;
    }
    Rational w = qpow(t0, static_cast<unsigned long>(d.value));
    c.value += w;
    c.exact.push_back(d.is_exact());
    c.relator_weights.push_back(d.is_exact() ? to_string(w) : "<=" + to_string(w));
    all = all && d.is_exact();
  }
  c.verdict = decide(c.value, all);
  return c;
}

/// Default sweep grid 1 - 2^-k, k = 1..levels.
inline std::vector<Rational> default_t_grid(int levels = 4) {
  std::vector<Rational> g;
  for (int k = 1; k <= levels; ++k) g.push_back(1 - qpow(make_q(1, 2), static_cast<unsigned long>(k)));
  return g;
}

/// GGS condition for a weight function W; optionally sweeps (D_t, t) integral approximations.
/// An explicit floor theta is honoured as given; otherwise the floor is refined adaptively.
/// Relator weights are evaluated on up to `threads` threads and summed in relator order.
inline GGSCertificate ggs_check(const std::vector<Rational>& W, const std::vector<Word>& R, std::uint32_t p,
                                const std::vector<Rational>& grid = {}, std::optional<Rational> theta = std::nullopt,
                                unsigned threads = 1) {
  GGSCertificate c;
  c.value = 1;
  for (auto& w : W) c.value -= w;
  std::vector<WeightValue> ws(R.size());
  auto work = [&](std::size_t from, std::size_t stride) {
    for (std::size_t i = from; i < R.size(); i += stride) ws[i] = theta ? word_weight(R[i], W, p, theta) : word_weight_exact(R[i], W, p);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(R.size())));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  bool all = true;
  for (auto& w : ws) {
    c.value += w.upper();
    c.exact.push_back(w.kind != WeightValue::below);
    c.relator_weights.push_back(w.str());
    all = all && w.kind != WeightValue::below;
  }
  c.verdict = decide(c.value, all);
  for (auto& t : grid) {
    auto D = integral_approx(W, t);
    auto sub = ggs_check(D, t, R, p);
    bool ex = true;
    for (bool e : sub.exact) ex = ex && e;
    c.sweep.push_back({t, D, sub.value, ex});
  }
  return c;
}

/// Product over n of ((1 - t^{np}) / (1 - t^n))^{c_n}, truncated at N.
inline IntSeries quillen_rhs(const std::vector<long>& c, std::uint32_t p, std::size_t N) {
  IntSeries r = IntSeries::one(N);
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t n = i + 1;
    IntSeries f(N);
    for (std::size_t k = 0; k < p && k * n <= N; ++k) f[k * n] = 1;
    for (long e = 0; e < c[i]; ++e) r = r * f;
  }
  return r;
}

struct InequalityReport {
  bool holds = true;
  std::optional<std::size_t> first_failure;
  std::size_t verified_prefix = 0;  // coefficients 0..verified_prefix-1 were compared
  IntSeries lhs;                    // partial sums of (1 - H_X + H_R) Hilb_A
};

/// (1 - H_X + H_R) Hilb_A / (1 - t) >= 1 / (1 - t), coefficient-wise through degree N.
inline InequalityReport ggs_inequality_check(const IntSeries& HX, const IntSeries& HR, const IntSeries& hilb, std::size_t N) {
  if (HX.N() < N || HR.N() < N || hilb.N() < N) throw Error(Errc::precondition, "series truncated below N");
  auto base = IntSeries::one(N) - HX.truncated(N) + HR.truncated(N);
  InequalityReport rep;
  rep.lhs = (base * hilb.truncated(N)).partial_sums();
  std::vector<Rational> ones(N + 1, Rational(1));
  rep.first_failure = rep.lhs.first_below(IntSeries(ones));
  rep.holds = !rep.first_failure;
  rep.verified_prefix = N + 1;
  return rep;
}

}  // namespace ggs
