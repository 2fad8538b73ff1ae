#pragma once
// Brute-force oracles: finite p-groups as multiplication tables with their D-filtrations and
// group-algebra filtrations, Hilbert series of truncated quotient algebras by row reduction, and
// word weights from a full Magnus expansion.  Nothing here uses the series module.

#include "ggs/hilbert.hpp"
#include "ggs/words.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ggs {

// ---------------------------------------------------------------------------------------------
// Finite groups

class FiniteGroupTable {
 public:
  /// Elements 0..n-1 with identity 0.  Validates the group axioms, that |G| is a power of p and
  /// that `gens` generate G.
  FiniteGroupTable(std::string name, std::uint32_t p, std::size_t n, std::function<std::uint32_t(std::uint32_t, std::uint32_t)> mul,
                   std::vector<std::uint32_t> gens)
      : name_(std::move(name)), p_(p), n_(n), gens_(std::move(gens)) {
    if (n > 729) throw Error(Errc::precondition, "group too large for the oracle (|G| <= 3^6)");
    tab_.assign(n * n, 0);
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b) {
        auto c = mul(a, b);
        if (c >= n) throw Error(Errc::malformed, name_ + ": product out of range");
        tab_[a * n + b] = c;
      }
    validate();
  }
  static FiniteGroupTable from_table(std::string name, std::uint32_t p, std::size_t n, std::vector<std::uint32_t> table,
                                     std::vector<std::uint32_t> gens) {
    if (table.size() != n * n) throw Error(Errc::malformed, "table size must be n^2");
    return FiniteGroupTable(std::move(name), p, n, [&](std::uint32_t a, std::uint32_t b) { return table[a * n + b]; }, std::move(gens));
  }

  const std::string& name() const { return name_; }
  std::uint32_t p() const { return p_; }
  std::size_t order() const { return n_; }
  const std::vector<std::uint32_t>& gens() const { return gens_; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return tab_[a * n_ + b]; }
  std::uint32_t inv(std::uint32_t a) const { return inv_[a]; }
  std::uint32_t pow(std::uint32_t a, unsigned long e) const {
    std::uint32_t r = 0;
    for (unsigned long i = 0; i < e; ++i) r = mul(r, a);
    return r;
  }
  std::uint32_t comm(std::uint32_t a, std::uint32_t b) const { return mul(mul(inv(a), inv(b)), mul(a, b)); }
  /// Image of a word in the generators.
  std::uint32_t eval(const Word& w) const {
    std::uint32_t r = 0;
    for (auto& s : w.syllables()) {
      if (s.gen >= gens_.size()) throw Error(Errc::malformed, "generator out of range");
      std::uint32_t g = s.exp > 0 ? gens_[s.gen] : inv(gens_[s.gen]);
      for (long long k = 0; k < (s.exp > 0 ? s.exp : -s.exp); ++k) r = mul(r, g);
    }
    return r;
  }
  /// Subgroup generated by a set of elements.
  std::set<std::uint32_t> closure(const std::set<std::uint32_t>& s) const {
    std::set<std::uint32_t> H{0};
    std::vector<std::uint32_t> todo{0};
    while (!todo.empty()) {
      auto h = todo.back();
      todo.pop_back();
      for (auto g : s) {
        auto x = mul(h, g);
        if (H.insert(x).second) todo.push_back(x);
      }
    }
    return H;
  }
  /// The subgroup generated by `gens` (elements of this group) as a table of its own.
  FiniteGroupTable subgroup(std::string name, const std::vector<std::uint32_t>& gens) const {
    auto H = closure({gens.begin(), gens.end()});
    std::vector<std::uint32_t> elems(H.begin(), H.end());  // 0 first
    std::map<std::uint32_t, std::uint32_t> idx;
    for (std::uint32_t i = 0; i < elems.size(); ++i) idx[elems[i]] = i;
    std::vector<std::uint32_t> local;
    for (auto g : gens) local.push_back(idx.at(g));
    FiniteGroupTable T(std::move(name), p_, elems.size(),
                       [&](std::uint32_t a, std::uint32_t b) { return idx.at(mul(elems[a], elems[b])); }, local);
    T.embedding_ = elems;
    return T;
  }
  /// Element of the ambient group for each element of a subgroup table (identity map otherwise).
  std::uint32_t ambient(std::uint32_t a) const { return embedding_.empty() ? a : embedding_[a]; }

 private:
  void validate() {
    std::size_t q = 1;
    while (q < n_) q *= p_;
    if (q != n_) throw Error(Errc::precondition, name_ + ": order is not a power of p");
    for (std::uint32_t a = 0; a < n_; ++a)
      if (mul(0, a) != a || mul(a, 0) != a) throw Error(Errc::malformed, name_ + ": 0 is not an identity");
    inv_.assign(n_, n_);
    for (std::uint32_t a = 0; a < n_; ++a)
      for (std::uint32_t b = 0; b < n_; ++b)
        if (mul(a, b) == 0) inv_[a] = b;
    for (std::uint32_t a = 0; a < n_; ++a)
      if (inv_[a] == n_ || mul(inv_[a], a) != 0) throw Error(Errc::malformed, name_ + ": missing inverse");
    for (std::uint32_t a = 0; a < n_; ++a)
      for (std::uint32_t b = 0; b < n_; ++b)
        for (std::uint32_t c = 0; c < n_; ++c)
          if (mul(mul(a, b), c) != mul(a, mul(b, c))) throw Error(Errc::malformed, name_ + ": not associative");
    for (auto g : gens_)
      if (g >= n_) throw Error(Errc::malformed, name_ + ": generator out of range");
    if (closure({gens_.begin(), gens_.end()}).size() != n_) throw Error(Errc::malformed, name_ + ": generators do not generate");
  }

  std::string name_;
  std::uint32_t p_;
  std::size_t n_;
  std::vector<std::uint32_t> tab_, inv_, gens_, embedding_;
};

namespace groups {

/// Cyclic group of order p^k, generated by 1.
inline FiniteGroupTable cyclic(std::uint32_t p, unsigned k = 1) {
  std::uint32_t n = 1;
  for (unsigned i = 0; i < k; ++i) n *= p;
  return FiniteGroupTable("C_" + std::to_string(n), p, n, [n](std::uint32_t a, std::uint32_t b) { return (a + b) % n; }, {1});
}

/// C_p x C_p: element a + p b, generators (1,0) and (0,1).
inline FiniteGroupTable elementary(std::uint32_t p) {
  return FiniteGroupTable("C_" + std::to_string(p) + "xC_" + std::to_string(p), p, p * p,
                          [p](std::uint32_t a, std::uint32_t b) { return (a % p + b % p) % p + p * ((a / p + b / p) % p); }, {1, p});
}

/// Upper unitriangular 3x3 matrices over F_p: (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab'),
/// element a + p b + p^2 c, generators x = (1,0,0) and y = (0,1,0).
inline FiniteGroupTable heisenberg(std::uint32_t p) {
  return FiniteGroupTable("Heis_" + std::to_string(p), p, p * p * p,
                          [p](std::uint32_t u, std::uint32_t v) {
                            std::uint32_t a = u % p, b = (u / p) % p, c = u / (p * p);
                            std::uint32_t a2 = v % p, b2 = (v / p) % p, c2 = v / (p * p);
                            return (a + a2) % p + p * ((b + b2) % p) + p * p * ((c + c2 + a * b2) % p);
                          },
                          {1, p});
}

inline FiniteGroupTable by_name(const std::string& name, std::uint32_t p) {
  if (name == "cyclic") return cyclic(p, 1);
  if (name == "cyclic2") return cyclic(p, 2);
  if (name == "elementary") return elementary(p);
  if (name == "heisenberg") return heisenberg(p);
  throw Error(Errc::malformed, "unknown group '" + name + "' (cyclic, cyclic2, elementary, heisenberg)");
}

}  // namespace groups

// ---------------------------------------------------------------------------------------------
// Filtrations

struct FiltrationData {
  std::vector<std::set<std::uint32_t>> G_levels;  // G_1, G_2, ..., ending with the trivial group
  std::vector<long> c;                            // c_n = log_p [G_n : G_{n+1}], n >= 1
  std::vector<std::size_t> A_dims;                // dim A_0, dim A_1, ..., ending with 0
  std::vector<long> a;                            // a_n = dim A_n - dim A_{n+1}, n >= 0
  bool conditions_hold = true;                    // [G_i,G_j] in G_{i+j}, G_i^p in G_{pi}, A_i A_j in A_{i+j}
  std::string failure;
};

namespace detail {

inline long log_p_of(std::size_t q, std::uint32_t p) {
  long k = 0;
  while (q > 1) {
    if (q % p) throw Error(Errc::malformed, "index is not a power of p");
    q /= p;
    ++k;
  }
  return k;
}

/// Row-reduced span over F_p of vectors in F_p^n; rows kept with distinct pivots.
class DenseSpan {
 public:
  DenseSpan(std::size_t n, std::uint32_t p) : n_(n), p_(p) {}
  bool add(std::vector<std::uint32_t> v) {
    for (auto& [piv, row] : rows_) {
      if (v[piv] == 0) continue;
      std::uint64_t f = v[piv];
      for (std::size_t k = 0; k < n_; ++k) v[k] = static_cast<std::uint32_t>((v[k] + (p_ - f) * row[k]) % p_);
    }
    std::size_t piv = 0;
    while (piv < n_ && v[piv] == 0) ++piv;
    if (piv == n_) return false;
    std::uint64_t inv = modinv(v[piv]);
    for (auto& x : v) x = static_cast<std::uint32_t>(x * inv % p_);
    for (auto& [q, row] : rows_)
      if (row[piv]) {
        std::uint64_t f = row[piv];
        for (std::size_t k = 0; k < n_; ++k) row[k] = static_cast<std::uint32_t>((row[k] + (p_ - f) * v[k]) % p_);
      }
    rows_.emplace(piv, std::move(v));
    return true;
  }
  bool contains(std::vector<std::uint32_t> v) const {
    for (auto& [piv, row] : rows_) {
      if (v[piv] == 0) continue;
      std::uint64_t f = v[piv];
      for (std::size_t k = 0; k < n_; ++k) v[k] = static_cast<std::uint32_t>((v[k] + (p_ - f) * row[k]) % p_);
    }
    return std::all_of(v.begin(), v.end(), [](std::uint32_t x) { return x == 0; });
  }
  std::size_t dim() const { return rows_.size(); }
  std::vector<std::vector<std::uint32_t>> basis() const {
    std::vector<std::vector<std::uint32_t>> b;
    for (auto& [piv, row] : rows_) b.push_back(row);
    return b;
  }

 private:
  std::uint64_t modinv(std::uint64_t a) const {
    std::uint64_t r = 1, e = p_ - 2;
    while (e) {
      if (e & 1) r = r * a % p_;
      a = a * a % p_;
      e >>= 1;
    }
    return r;
  }
  std::size_t n_;
  std::uint32_t p_;
  std::map<std::size_t, std::vector<std::uint32_t>> rows_;
};

/// Product in the group algebra F_p[G] (vectors indexed by group elements).
inline std::vector<std::uint32_t> algebra_mul(const FiniteGroupTable& G, const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> r(G.order(), 0);
  const std::uint32_t p = G.p();
  for (std::uint32_t g = 0; g < a.size(); ++g) {
    if (!a[g]) continue;
    for (std::uint32_t h = 0; h < b.size(); ++h)
      if (b[h]) {
        auto k = G.mul(g, h);
        r[k] = static_cast<std::uint32_t>((r[k] + static_cast<std::uint64_t>(a[g]) * b[h]) % p);
      }
  }
  return r;
}

/// A_0 = F_p[G] and A_m = sum_i (x_i - 1) A_{max(m - D_i, 0)} until A_m = 0.
inline std::vector<DenseSpan> algebra_levels(const FiniteGroupTable& G, const std::vector<long>& D, std::size_t max_level) {
  const std::uint32_t p = G.p();
  const std::size_t n = G.order();
  std::vector<std::vector<std::uint32_t>> U;
  for (auto g : G.gens()) {
    std::vector<std::uint32_t> u(n, 0);
    u[g] = 1;
    u[0] = (u[0] + p - 1) % p;
    U.push_back(u);
  }
  std::vector<DenseSpan> A;
  A.emplace_back(n, p);
  for (std::uint32_t g = 0; g < n; ++g) {
    std::vector<std::uint32_t> e(n, 0);
    e[g] = 1;
    A[0].add(e);
  }
  while (A.back().dim() > 0) {
    std::size_t m = A.size();
    if (m > max_level) throw Error(Errc::precondition, "incomplete filtration: augmentation powers do not vanish");
    DenseSpan next(n, p);
    for (std::size_t i = 0; i < U.size(); ++i) {
      std::size_t from = m > static_cast<std::size_t>(D[i]) ? m - static_cast<std::size_t>(D[i]) : 0;
      for (auto& v : A[from].basis()) next.add(algebra_mul(G, U[i], v));
    }
    A.push_back(std::move(next));
  }
  return A;
}

}  // namespace detail

/// D-filtration of G and of F_p[G].  G_n is the smallest filtration with x_i in G_{D(x_i)},
/// [G_i,G_j] in G_{i+j} and G_i^p in G_{pi}, found by saturating all levels together.  A_n is
/// spanned by the products (x_{i_1} - 1) ... (x_{i_k} - 1) of total degree >= n.
inline FiltrationData finite_group_filtration(const FiniteGroupTable& G, const std::vector<long>& D, std::size_t max_level = 256) {
  if (D.size() != G.gens().size()) throw Error(Errc::malformed, "one degree per generator required");
  for (auto d : D)
    if (d < 1) throw Error(Errc::precondition, "degrees must be >= 1");
  const std::uint32_t p = G.p();
  FiltrationData F;

  // Group side.  S[k] are the elements forced into G_k (1-based).
  std::vector<std::set<std::uint32_t>> S(max_level + 2);
  for (std::size_t i = 0; i < D.size(); ++i)
    for (std::size_t k = 1; k <= static_cast<std::size_t>(D[i]) && k <= max_level; ++k) S[k].insert(G.gens()[i]);
  std::vector<std::set<std::uint32_t>> Gl(max_level + 2);
  bool changed = true;
  int rounds = 0;
  while (changed) {
    if (++rounds > 64) throw Error(Errc::precondition, "incomplete filtration: saturation not reached");
    changed = false;
    for (std::size_t k = 1; k <= max_level; ++k) Gl[k] = G.closure(S[k]);
    // Larger levels are contained in smaller ones.
    for (std::size_t k = max_level; k >= 2; --k)
      for (auto g : Gl[k])
        if (S[k - 1].insert(g).second) changed = true;
    for (std::size_t i = 1; i <= max_level; ++i) {
      if (Gl[i].size() <= 1) break;
      for (std::size_t j = i; i + j <= max_level; ++j) {
        if (Gl[j].size() <= 1) break;
        for (auto a : Gl[i])
          for (auto b : Gl[j]) {
            auto c = G.comm(a, b);
            if (c && S[i + j].insert(c).second) changed = true;
          }
      }
      if (p * i <= max_level)
        for (auto a : Gl[i]) {
          auto c = G.pow(a, p);
          if (c && S[p * i].insert(c).second) changed = true;
        }
    }
  }
  std::size_t top = 1;
  while (top <= max_level && Gl[top].size() > 1) ++top;
  if (top > max_level) throw Error(Errc::precondition, "incomplete filtration: G_n is not trivial by level " + std::to_string(max_level));
  for (std::size_t k = 1; k <= top; ++k) F.G_levels.push_back(Gl[k]);
  for (std::size_t k = 1; k < top; ++k) {
    if (Gl[k].size() % Gl[k + 1].size()) throw Error(Errc::malformed, "filtration levels are not nested");
    F.c.push_back(detail::log_p_of(Gl[k].size() / Gl[k + 1].size(), p));
  }

  auto A = detail::algebra_levels(G, D, max_level * 4);
  for (auto& s : A) F.A_dims.push_back(s.dim());
  for (std::size_t k = 0; k + 1 < A.size(); ++k) F.a.push_back(static_cast<long>(A[k].dim() - A[k + 1].dim()));

  // Conditions on the computed levels.
  auto level = [&](std::size_t k) -> const std::set<std::uint32_t>& {
    static const std::set<std::uint32_t> trivial{0};
    return k <= F.G_levels.size() ? F.G_levels[k - 1] : trivial;
  };
  for (std::size_t i = 1; i <= F.G_levels.size() && F.conditions_hold; ++i) {
    for (std::size_t j = 1; j <= F.G_levels.size() && F.conditions_hold; ++j)
      for (auto a : level(i))
        for (auto b : level(j))
          if (!level(i + j).count(G.comm(a, b))) {
            F.conditions_hold = false;
            F.failure = "[G_" + std::to_string(i) + ",G_" + std::to_string(j) + "] not in G_" + std::to_string(i + j);
          }
    for (auto a : level(i))
      if (F.conditions_hold && !level(p * i).count(G.pow(a, p))) {
        F.conditions_hold = false;
        F.failure = "G_" + std::to_string(i) + "^p not in G_" + std::to_string(p * i);
      }
  }
  // A_i is spanned by left products, so nesting plus A_j (x_k - 1) in A_{j+D_k} gives A_i A_j in A_{i+j}.
  for (std::size_t j = 1; j < A.size() && F.conditions_hold; ++j) {
    for (auto& v : A[j].basis())
      if (F.conditions_hold && !A[j - 1].contains(v)) {
        F.conditions_hold = false;
        F.failure = "A_" + std::to_string(j) + " not in A_" + std::to_string(j - 1);
      }
    for (std::size_t k = 0; k < D.size() && F.conditions_hold; ++k) {
      std::vector<std::uint32_t> u(G.order(), 0);
      u[G.gens()[k]] = 1;
      u[0] = (u[0] + p - 1) % p;
      std::size_t t = std::min(j + static_cast<std::size_t>(D[k]), A.size() - 1);
      for (auto& v : A[j].basis())
        if (F.conditions_hold && !A[t].contains(detail::algebra_mul(G, v, u))) {
          F.conditions_hold = false;
          F.failure = "A_" + std::to_string(j) + " is not a right ideal";
        }
    }
  }
  return F;
}

/// {g : g - 1 in A_n} for n = 1, 2, ... up to the last nonzero A_n.
inline std::vector<std::set<std::uint32_t>> dimension_subgroups(const FiniteGroupTable& G, const std::vector<long>& D) {
  auto A = detail::algebra_levels(G, D, 1024);
  std::vector<std::set<std::uint32_t>> out;
  for (std::size_t m = 1; m < A.size(); ++m) {
    std::set<std::uint32_t> level;
    for (std::uint32_t g = 0; g < G.order(); ++g) {
      std::vector<std::uint32_t> v(G.order(), 0);
      v[g] = (v[g] + 1) % G.p();
      v[0] = (v[0] + G.p() - 1) % G.p();
      if (A[m].contains(v)) level.insert(g);
    }
    out.push_back(level);
  }
  return out;
}

struct QuillenResult {
  bool pass = false;
  IntSeries lhs, rhs;  // sum a_n t^n and prod ((1 - t^{np})/(1 - t^n))^{c_n}
  std::optional<std::size_t> first_mismatch;
  Rational lhs_at_1, rhs_at_1;
  std::size_t order = 0;
};

/// Compares sum a_n t^n with the product formula over the full finite range.
inline QuillenResult quillen_compare(const std::vector<long>& a, const std::vector<long>& c, std::uint32_t p, std::size_t order) {
  std::size_t N = 0;
  for (std::size_t n = 0; n < c.size(); ++n) N += static_cast<std::size_t>(c[n]) * (n + 1) * (p - 1);
  N = std::max(N, a.empty() ? 0 : a.size() - 1);
  QuillenResult r;
  std::vector<Rational> la;
  for (auto x : a) la.push_back(Rational(x));
  r.lhs = IntSeries::of(la, N);
  r.rhs = quillen_rhs(c, p, N);
  for (std::size_t k = 0; k <= N; ++k)
    if (r.lhs[k] != r.rhs[k]) {
      r.first_mismatch = k;
      break;
    }
  r.lhs_at_1 = r.lhs.eval(1);
  r.rhs_at_1 = r.rhs.eval(1);
  r.order = order;
  r.pass = !r.first_mismatch && r.lhs_at_1 == Rational(static_cast<unsigned long>(order)) && r.rhs_at_1 == r.lhs_at_1;
  return r;
}

inline QuillenResult quillen_verify(const FiniteGroupTable& G, const std::vector<long>& D) {
  auto F = finite_group_filtration(G, D);
  auto r = quillen_compare(F.a, F.c, G.p(), G.order());
  r.pass = r.pass && F.conditions_hold;
  return r;
}

// ---------------------------------------------------------------------------------------------
// Quotient algebras F_p<<U>>/I by row reduction

/// A polynomial in noncommuting variables over F_p: monomial -> coefficient.
using NCPoly = std::map<std::vector<std::uint32_t>, std::uint32_t>;

struct AlgebraDims {
  std::vector<long> a;       // a_0..a_N
  std::vector<long> ideal;   // rank of the degree-n slice of gr I
  std::vector<long> free;    // number of monomials of degree n
  std::size_t spanning = 0;  // products m s m' fed to the reduction
};

/// a_n = #monomials of degree n - dim gr_n(I), through degree N, for the ideal generated by S.
/// Monomials are graded by `deg` (positive integers per variable).  Every m s m' whose lowest
/// degree is <= N is reduced with pivots at the lowest monomial, so the pivots of each degree
/// count gr_n(I) exactly within the truncation.
inline AlgebraDims quotient_algebra_dims(std::size_t nvars, const std::vector<NCPoly>& S, const std::vector<long>& deg, std::size_t N,
                                         std::uint32_t p) {
  if (nvars > 4 || N > 10) throw Error(Errc::precondition, "refused: need |U| <= 4 and N <= 10");
  if (deg.size() != nvars) throw Error(Errc::malformed, "one degree per variable required");
  for (auto d : deg)
    if (d < 1) throw Error(Errc::precondition, "degrees must be >= 1");
  using Mono = std::vector<std::uint32_t>;
  auto dg = [&](const Mono& m) {
    long s = 0;
    for (auto v : m) s += deg[v];
    return static_cast<std::size_t>(s);
  };
  // Monomials of degree <= N, ordered by degree (then lexicographically).
  std::vector<std::vector<Mono>> by_deg(N + 1);
  by_deg[0].push_back({});
  std::vector<Mono> frontier{{}};
  while (!frontier.empty()) {
    std::vector<Mono> next;
    for (auto& m : frontier)
      for (std::uint32_t v = 0; v < nvars; ++v) {
        Mono x = m;
        x.push_back(v);
        if (dg(x) <= N) {
          by_deg[dg(x)].push_back(x);
          next.push_back(x);
        }
      }
    frontier = std::move(next);
  }
  std::size_t total = 0;
  for (auto& b : by_deg) total += b.size();
  if (total > 50000) throw Error(Errc::precondition, "refused: more than 50000 monomials below the truncation");
  std::map<Mono, std::size_t> col;
  std::vector<std::size_t> col_deg;
  for (std::size_t d = 0; d <= N; ++d) {
    std::sort(by_deg[d].begin(), by_deg[d].end());
    for (auto& m : by_deg[d]) {
      col[m] = col_deg.size();
      col_deg.push_back(d);
    }
  }
  using Row = std::map<std::size_t, std::uint32_t>;
  std::map<std::size_t, Row> pivots;
  auto inv = [p](std::uint64_t a) {
    std::uint64_t r = 1, e = p - 2;
    while (e) {
      if (e & 1) r = r * a % p;
      a = a * a % p;
      e >>= 1;
    }
    return r;
  };
  auto insert = [&](Row r) {
    while (!r.empty()) {
      auto [c, v] = *r.begin();
      auto it = pivots.find(c);
      if (it == pivots.end()) {
        std::uint64_t iv = inv(v);
        for (auto& [k, x] : r) x = static_cast<std::uint32_t>(x * iv % p);
        pivots.emplace(c, std::move(r));
        return;
      }
      std::uint64_t f = v;
      for (auto& [k, x] : it->second) {
        auto& y = r[k];
        y = static_cast<std::uint32_t>((y + (p - f) * x) % p);
        if (y == 0) r.erase(k);
      }
    }
  };
  AlgebraDims out;
  std::vector<Mono> all;
  for (auto& b : by_deg) all.insert(all.end(), b.begin(), b.end());
  for (auto& s : S) {
    std::size_t low = N + 1;
    for (auto& [m, c] : s)
      if (c % p) low = std::min(low, dg(m));
    if (low > N) continue;
    for (auto& L : all)
      for (auto& R : all) {
        if (dg(L) + dg(R) + low > N) continue;
        Row r;
        for (auto& [m, c] : s) {
          if (c % p == 0) continue;
          Mono x = L;
          x.insert(x.end(), m.begin(), m.end());
          x.insert(x.end(), R.begin(), R.end());
          if (dg(x) > N) continue;
          auto& y = r[col.at(x)];
          y = static_cast<std::uint32_t>((y + c) % p);
          if (y == 0) r.erase(col.at(x));
        }
        ++out.spanning;
        insert(std::move(r));
      }
  }
  out.ideal.assign(N + 1, 0);
  for (auto& [c, r] : pivots) out.ideal[col_deg[c]] += 1;
  for (std::size_t d = 0; d <= N; ++d) {
    out.free.push_back(static_cast<long>(by_deg[d].size()));
    out.a.push_back(out.free[d] - out.ideal[d]);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Weights by full expansion

namespace detail {

/// Coefficients of (1 + u)^e mod p through u^depth, from exact binomials.
inline std::vector<std::uint32_t> binomial_row(long long e, std::size_t depth, std::uint32_t p) {
  std::vector<std::uint32_t> out;
  Int c = 1;
  for (std::size_t k = 0; k <= depth; ++k) {
    if (k > 0) {
      c *= Int(static_cast<long>(e)) - Int(static_cast<unsigned long>(k - 1));
      c /= Int(static_cast<unsigned long>(k));
    }
    Int r = c % Int(p);
    if (r < 0) r += p;
    out.push_back(static_cast<std::uint32_t>(r.get_ui()));
  }
  return out;
}

}  // namespace detail

/// max w(m) over the monomials m != 1 of the Magnus expansion of f with nonzero coefficient and
/// length <= depth; 0 if there is none.
inline Rational weight_bruteforce(const Word& f, const std::vector<Rational>& W, std::uint32_t p, std::size_t depth) {
  using Mono = std::vector<std::uint32_t>;
  std::map<Mono, std::uint32_t> e{{{}, 1}};
  for (auto& s : f.syllables()) {
    auto row = detail::binomial_row(s.exp, depth, p);
    std::map<Mono, std::uint32_t> next;
    for (auto& [m, c] : e)
      for (std::size_t k = 0; k < row.size() && m.size() + k <= depth; ++k) {
        if (!row[k]) continue;
        Mono x = m;
        x.insert(x.end(), k, s.gen);
        auto& y = next[x];
        y = static_cast<std::uint32_t>((y + static_cast<std::uint64_t>(c) * row[k]) % p);
      }
    e.clear();
    for (auto& [m, c] : next)
      if (c) e.emplace(m, c);
  }
  Rational best = 0;
  for (auto& [m, c] : e) {
    if (m.empty()) continue;
    Rational w = 1;
    for (auto v : m) w *= W.at(v);
    if (w > best) best = w;
  }
  return best;
}

// ---------------------------------------------------------------------------------------------
// Index-p subgroups of (Z/p)^d

/// Distinct spans of (d-1)-tuples of vectors with index p: every hyperplane arises this way.
inline std::size_t index_p_subgroups_bruteforce(std::uint32_t p, unsigned d) {
  if (d < 1 || d > 4) throw Error(Errc::precondition, "need 1 <= d <= 4");
  std::uint32_t n = 1;
  for (unsigned i = 0; i < d; ++i) n *= p;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    std::uint32_t r = 0, f = 1;
    for (unsigned i = 0; i < d; ++i, a /= p, b /= p, f *= p) r += ((a % p + b % p) % p) * f;
    return r;
  };
  std::set<std::set<std::uint32_t>> found;
  std::vector<std::uint32_t> pick(d - 1, 0);
  while (true) {
    std::set<std::uint32_t> span{0};
    bool grown = true;
    while (grown) {
      grown = false;
      for (auto s : std::set<std::uint32_t>(span))
        for (auto g : pick)
          if (span.insert(add(s, g)).second) grown = true;
    }
    if (span.size() * p == n) found.insert(span);
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == n) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return found.size();
}

}  // namespace ggs
