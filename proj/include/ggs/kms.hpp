#pragma once
// Kac-Moody-Steinberg presentations over F_p and F_{p^m}, the balanced generator partition,
// the combined-quotient certificates, and Kazhdan-constant arithmetic.

#include "ggs/contract.hpp"
#include "ggs/ledger.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ggs {

struct KMSSpec {
  std::uint32_t p = 2;
  unsigned m = 1;              // field extension degree
  std::vector<std::size_t> n;  // root-subgroup ranks n_1..n_k

  std::size_t k() const { return n.size(); }
  std::size_t total() const {
    std::size_t s = 0;
    for (auto x : n) s += x;
    return s;
  }
  /// |F| > (k-1)^2.
  bool property_T() const { return Int(ipow(p, m)) > Int((k() - 1) * (k() - 1)); }
  void validate() const {
    if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
    if (m < 1) throw Error(Errc::precondition, "extension degree must be >= 1");
    if (n.size() < 2) throw Error(Errc::precondition, "need at least two root subgroups");
    for (auto x : n)
      if (x < 1) throw Error(Errc::precondition, "every n_i must be >= 1");
  }
  /// Flat generator index of x_{i,k}(lambda_j); all indices 0-based.
  std::uint32_t gen(std::size_t i, std::size_t kk, unsigned j = 0) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < i; ++a) off += n[a];
    return static_cast<std::uint32_t>((off + kk) * m + j);
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k(); ++i)
      for (std::size_t kk = 0; kk < n[i]; ++kk)
        for (unsigned j = 0; j < m; ++j) {
          std::string s = "x" + std::to_string(i + 1) + "_" + std::to_string(kk + 1);
          if (m > 1) s += "_l" + std::to_string(j + 1);
          out.push_back(s);
        }
    return out;
  }
};

struct KMSCounts {
  Int gens, power, intra, triple, field;
  Int relators() const { return power + intra + triple + field; }
  bool operator==(const KMSCounts& o) const {
    return gens == o.gens && power == o.power && intra == o.intra && triple == o.triple && field == o.field;
  }
};

/// Closed-form sizes of the relator families (one relator per index tuple).
inline KMSCounts kms_relator_counts(const KMSSpec& s) {
  s.validate();
  KMSCounts c;
  Int m = s.m, N = static_cast<unsigned long>(s.total());
  c.gens = m * N;
  c.power = m * N;
  c.intra = 0;
  c.triple = 0;
  c.field = 0;
  for (std::size_t i = 0; i < s.k(); ++i) {
    Int g = m * Int(static_cast<unsigned long>(s.n[i]));
    c.intra += g * (g - 1) / 2;
    for (std::size_t j = 0; j < s.k(); ++j) {
      if (i == j) continue;
      Int ni = static_cast<unsigned long>(s.n[i]), nj = static_cast<unsigned long>(s.n[j]);
      c.triple += m * m * m * ni * ni * nj;
      if (s.m > 1) c.field += m * m * ni * nj;
    }
  }
  return c;
}

struct KMSPresentation {
  Presentation pres;
  KMSCounts counts;  // as enumerated
  // Relators are stored block by block: powers, intra-part commutators, triple commutators, field relators.
  std::size_t intra_begin = 0, triple_begin = 0, field_begin = 0;
};

namespace detail {

/// x_{i,k}(alpha) = prod_j x_{i,k}(lambda_j)^{c_j} for alpha = sum_j c_j lambda_j.
inline Word field_element(const KMSSpec& s, const Field& F, std::size_t i, std::size_t kk, Elem alpha) {
  auto c = F.coords(alpha);
  Word w;
  for (unsigned j = 0; j < s.m; ++j)
    if (c[j] != 0) w = w * Word::gen(s.gen(i, kk, j), c[j]);
  return w;
}

}  // namespace detail

/// Emits one relator per index tuple, so field relators with mu = 1 appear as identity words.
inline KMSPresentation build_kms(const KMSSpec& s) {
  s.validate();
  Field F = Field::standard(s.p, s.m);
  KMSPresentation out;
  out.pres.gens = GeneratorSet(s.names(), s.p);
  auto& R = out.pres.relators;
  const unsigned m = s.m;
  for (std::size_t i = 0; i < s.k(); ++i)
    for (std::size_t kk = 0; kk < s.n[i]; ++kk)
      for (unsigned j = 0; j < m; ++j) R.push_back(Word::gen(s.gen(i, kk, j), s.p));
  out.intra_begin = R.size();
  for (std::size_t i = 0; i < s.k(); ++i) {
    std::uint32_t lo = s.gen(i, 0, 0), hi = lo + static_cast<std::uint32_t>(s.n[i] * m);
    for (std::uint32_t a = lo; a < hi; ++a)
      for (std::uint32_t b = a + 1; b < hi; ++b) R.push_back(commutator(Word::gen(a), Word::gen(b)));
  }
  out.triple_begin = R.size();
  for (std::size_t i = 0; i < s.k(); ++i)
    for (std::size_t j = 0; j < s.k(); ++j) {
      if (i == j) continue;
      for (std::size_t kk = 0; kk < s.n[i]; ++kk)
        for (std::size_t l = 0; l < s.n[j]; ++l)
          for (std::size_t mm = 0; mm < s.n[i]; ++mm)
            for (unsigned a = 0; a < m; ++a)
              for (unsigned b = 0; b < m; ++b)
                for (unsigned c = 0; c < m; ++c)
                  R.push_back(commutator({Word::gen(s.gen(i, kk, a)), Word::gen(s.gen(j, l, b)), Word::gen(s.gen(i, mm, c))}));
    }
  out.field_begin = R.size();
  if (m > 1) {
    for (std::size_t i = 0; i < s.k(); ++i)
      for (std::size_t j = 0; j < s.k(); ++j) {
        if (i == j) continue;
        for (std::size_t kk = 0; kk < s.n[i]; ++kk)
          for (std::size_t l = 0; l < s.n[j]; ++l)
            for (unsigned a = 1; a <= m; ++a)
              for (unsigned b = 1; b <= m; ++b) {
                Elem lm = F.mul(F.basis(a), F.basis(b));
                Word y1 = Word::gen(s.gen(j, l, 0));
                Word left = commutator(Word::gen(s.gen(i, kk, a - 1)), Word::gen(s.gen(j, l, b - 1)));
                Word right = commutator(detail::field_element(s, F, i, kk, lm), y1);
                R.push_back(left * right.inverse());
              }
      }
  }
  out.counts.gens = static_cast<unsigned long>(out.pres.rank());
  out.counts.power = static_cast<unsigned long>(out.intra_begin);
  out.counts.intra = static_cast<unsigned long>(out.triple_begin - out.intra_begin);
  out.counts.triple = static_cast<unsigned long>(out.field_begin - out.triple_begin);
  out.counts.field = static_cast<unsigned long>(R.size() - out.field_begin);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Partition

struct PartitionPlan {
  unsigned m = 1;
  /// Generator indices of each part.  For m > 1 a part is a sequence of groups of m
  /// equal-weight generators, read as x_{i,k}(lambda_1..lambda_m).
  std::vector<std::vector<std::uint32_t>> parts;
  std::vector<std::uint32_t> padding;  // added generators (each is also a relator)
  std::vector<Rational> part_weights;
  Rational tolerance = 0;  // max_i W(X^i) - min_i W(X^i)
  Rational bound = 0;      // eps (m = 1) or m * eps
  Rational contraction = 1;
  Rational padding_weight = 0;  // W of the added relators, before contraction
  Rational padding_budget = 0;  // 7 * sum of the distinct generator weights

  std::size_t groups(std::size_t i) const { return parts.at(i).size() / m; }
  KMSSpec spec(std::uint32_t p) const {
    KMSSpec s{p, m, {}};
    for (std::size_t i = 0; i < parts.size(); ++i) s.n.push_back(groups(i));
    return s;
  }
  std::string render() const {
    std::ostringstream os;
    os << "parts:";
    for (std::size_t i = 0; i < parts.size(); ++i) os << " " << parts[i].size() << "@" << to_string(part_weights[i]);
    os << "\ntolerance " << to_string(tolerance) << " < " << to_string(bound);
    if (m > 1)
      os << "\npadding " << padding.size() << " generators, weight " << to_string(padding_weight) << " <= "
         << to_string(padding_budget) << ", contraction " << to_string(contraction);
    return os.str();
  }
};

struct Partitioned {
  WeightedPresentation P;
  PartitionPlan plan;
  TransformLog log;
};

namespace detail {

/// Largest-first greedy: each item goes to the currently lightest part.  When the last item
/// lands on the eventual heaviest part that part was the lightest, so the spread is below the
/// largest item.
inline std::vector<std::vector<std::size_t>> balance(const std::vector<Rational>& item, std::size_t bins,
                                                      std::vector<Rational>& sums) {
  std::vector<std::size_t> order(item.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return item[a] > item[b]; });
  std::vector<std::vector<std::size_t>> out(bins);
  sums.assign(bins, Rational(0));
  for (auto it : order) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < bins; ++b)
      if (sums[b] < sums[best]) best = b;
    out[best].push_back(it);
    sums[best] += item[it];
  }
  for (auto& o : out) std::sort(o.begin(), o.end());
  return out;
}

inline Rational spread(const std::vector<Rational>& s) {
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return *hi - *lo;
}

}  // namespace detail

/// Splits X into `parts` subsets of nearly equal weight.  With m > 1 each weight level is first
/// padded to a multiple of m by generators that are also relators, the weights are contracted
/// back to the original W(X), and balancing moves whole groups of m equal weights.
inline Partitioned partition_and_pad(const WeightedPresentation& P, unsigned m, const Rational& eps, std::size_t parts = 9) {
  if (m < 1) throw Error(Errc::precondition, "group size must be >= 1");
  if (eps <= 0) throw Error(Errc::precondition, "eps must be positive");
  if (parts < 2) throw Error(Errc::precondition, "need at least two parts");
  Rational maxw = detail::max_weight(P.W);
  if (maxw >= eps)
    throw Error(Errc::precondition, "largest generator weight " + to_string(maxw) + " is not below eps = " + to_string(eps));
  Partitioned out{P, {}, {}};
  out.plan.m = m;
  out.plan.bound = eps * m;
  std::vector<Rational> item;
  std::vector<std::vector<std::uint32_t>> members;
  if (m == 1) {
    for (std::uint32_t g = 0; g < P.rank(); ++g) {
      item.push_back(P.W[g]);
      members.push_back({g});
    }
  } else {
    std::map<Rational, std::vector<std::uint32_t>> levels;
    for (std::uint32_t g = 0; g < P.rank(); ++g) levels[P.W[g]].push_back(g);
    Rational s = 0;
    for (auto& [w, gs] : levels) s += w;
    out.plan.padding_budget = 7 * s;
    WeightedPresentation& Q = out.P;
    std::set<std::string> taken(Q.pres.gens.names.begin(), Q.pres.gens.names.end());
    std::size_t next_name = 1;
    for (auto& [w, gs] : levels) {
      while (gs.size() % m != 0) {
        auto nm = detail::fresh_name("y" + std::to_string(next_name++), taken);
        taken.insert(nm);
        auto g = static_cast<std::uint32_t>(Q.rank());
        Q.pres.gens = GeneratorSet([&] {
          auto v = Q.pres.gens.names;
          v.push_back(nm);
          return v;
        }(), Q.p());
        Q.W.push_back(w);
        Q.pres.relators.push_back(Word::gen(g));
        Q.origin.push_back(Word::gen(g));
        Q.origin_names.push_back(nm);
        gs.push_back(g);
        out.plan.padding.push_back(g);
        out.plan.padding_weight += w;
      }
    }
    Q.D.clear();
    Q.t0.reset();
    Q.invalidate();
    if (out.plan.padding_weight > out.plan.padding_budget)
      throw Error(Errc::precondition, "padding weight exceeds 7 times the sum of distinct weights");
    Rational c = Q.WX() / P.WX();
    out.plan.contraction = c;
    if (c > 1) {
      auto t = contract(Q, c);
      out.log.append(t.log);
      out.P = std::move(t.P);
    }
    for (auto& [w, gs] : levels)
      for (std::size_t a = 0; a < gs.size(); a += m) {
        item.push_back(out.P.W[gs[a]] * m);
        members.emplace_back(gs.begin() + static_cast<std::ptrdiff_t>(a), gs.begin() + static_cast<std::ptrdiff_t>(a + m));
      }
  }
  std::vector<Rational> sums;
  auto bins = detail::balance(item, parts, sums);
  out.plan.part_weights = sums;
  out.plan.tolerance = detail::spread(sums);
  for (auto& b : bins) {
    std::vector<std::uint32_t> part;
    for (auto it : b) part.insert(part.end(), members[it].begin(), members[it].end());
    if (part.empty()) throw Error(Errc::precondition, "too few generators for " + std::to_string(parts) + " nonempty parts");
    out.plan.parts.push_back(std::move(part));
  }
  if (out.plan.tolerance >= out.plan.bound)
    throw Error(Errc::unsatisfiable, "balance tolerance " + to_string(out.plan.tolerance) + " not below " + to_string(out.plan.bound));
  return out;
}

namespace detail {

inline void check_plan(const WeightedPresentation& P, const PartitionPlan& plan) {
  std::vector<int> seen(P.rank(), 0);
  for (auto& part : plan.parts) {
    if (part.empty() || part.size() % plan.m != 0) throw Error(Errc::precondition, "part size is not a positive multiple of m");
    for (std::size_t a = 0; a < part.size(); ++a) {
      if (part[a] >= P.rank()) throw Error(Errc::malformed, "plan names a generator out of range");
      ++seen[part[a]];
      if (P.W[part[a]] != P.W[part[a - a % plan.m]])
        throw Error(Errc::precondition, "a group of the plan mixes generator weights");
    }
  }
  for (auto s : seen)
    if (s != 1) throw Error(Errc::precondition, "plan must cover every generator exactly once");
}

/// Per-part sums of the group weights: S_i = sum w, Q_i = sum w^2, and the power sums.
struct PartSums {
  std::vector<Rational> S, Q;
  Rational power = 0, cube = 0;
  std::vector<std::map<Rational, std::size_t>> levels;  // multiplicity of each weight per part
};

inline PartSums part_sums(const std::vector<std::vector<Rational>>& w, std::uint32_t p) {
  PartSums s;
  for (auto& part : w) {
    Rational a = 0, b = 0;
    std::map<Rational, std::size_t> lv;
    for (auto& x : part) {
      a += x;
      b += x * x;
      s.power += qpow(x, p);
      s.cube += x * x * x;
      ++lv[x];
    }
    s.S.push_back(a);
    s.Q.push_back(b);
    s.levels.push_back(std::move(lv));
  }
  return s;
}

/// W of the three relator classes: powers, intra-part commutators over k < l, and triple
/// commutators [x_ik, x_jl, x_im] over i != j and all k, l, m.
struct ClassWeights {
  Rational power, intra, triple;
  Rational total() const { return power + intra + triple; }
};

inline ClassWeights class_weights(const PartSums& s) {
  ClassWeights c{s.power, 0, 0};
  Rational all = 0;
  for (auto& x : s.S) all += x;
  for (std::size_t i = 0; i < s.S.size(); ++i) {
    c.intra += (s.S[i] * s.S[i] - s.Q[i]) / 2;
    c.triple += s.S[i] * s.S[i] * (all - s.S[i]);
  }
  return c;
}

/// The class sums use W(x^p) = W(x)^p, W([x,y]) = W(x)W(y) and W([x,y,z]) = W(x)W(y)W(z) for
/// distinct free generators (z = x allowed).  One representative per occurring weight tuple is
/// evaluated by word_weight to confirm them.
inline Check verify_class_representatives(const PartSums& s, std::uint32_t p, std::size_t& evaluated) {
  evaluated = 0;
  std::set<Rational> weights;
  std::set<std::pair<Rational, Rational>> pairs;
  std::set<std::vector<Rational>> triples;
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    for (auto& [a, na] : s.levels[i]) {
      weights.insert(a);
      for (auto& [b, nb] : s.levels[i])
        if (a < b || (a == b && na >= 2)) pairs.insert({a, b});
    }
    for (std::size_t j = 0; j < s.levels.size(); ++j) {
      if (i == j) continue;
      for (auto& [a, na] : s.levels[i])
        for (auto& [b, nb] : s.levels[j]) {
          triples.insert({a, b, a, Rational(0)});  // z = x
          for (auto& [c, nc] : s.levels[i])
            if (a != c || na >= 2) triples.insert({a, b, c, Rational(1)});
        }
    }
  }
  auto x = Word::gen(0), y = Word::gen(1), z = Word::gen(2);
  auto bad = [&](const std::string& what, const WeightValue& got, const Rational& want) {
    return Check{"relator class weights", false, what + ": got " + got.str() + ", expected " + to_string(want)};
  };
  for (auto& a : weights) {
    Rational want = qpow(a, p);
    auto got = word_weight(x.power(p), {a}, p, want);
    ++evaluated;
    if (!got.is_exact() || got.value != want) return bad("x^p", got, want);
  }
  for (auto& [a, b] : pairs) {
    Rational want = a * b;
    auto got = word_weight(commutator(x, y), {a, b}, p, want);
    ++evaluated;
    if (!got.is_exact() || got.value != want) return bad("[x,y]", got, want);
  }
  for (auto& t : triples) {
    bool distinct = t[3] == 1;
    Rational want = t[0] * t[1] * t[2];
    auto got = distinct ? word_weight(commutator({x, y, z}), {t[0], t[1], t[2]}, p, want)
                        : word_weight(commutator({x, y, x}), {t[0], t[1]}, p, want);
    ++evaluated;
    if (!got.is_exact() || got.value != want) return bad(distinct ? "[x,y,z]" : "[x,y,x]", got, want);
  }
  return {"relator class weights", true, std::to_string(evaluated) + " representatives"};
}

inline std::string render_checks(const std::vector<Check>& cs) {
  std::string s;
  for (auto& c : cs) s += std::string(c.ok ? "  ok   " : "  FAIL ") + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "\n";
  return s;
}

inline bool all_ok(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.ok; });
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// p >= 67: the combined presentation (X, R u R_KM)

struct LargeCertificate {
  std::uint32_t p = 0;
  Rational wx, wr;
  bool wr_exact = true;
  detail::ClassWeights km;
  Rational value;     // 1 - W(X) + W(R) + W(R_KM)
  Rational estimate;  // (1/2) sum w_i^2 + sum_{i != j} w_i^2 w_j + eps^(p-1) w
  Rational chain;     // 1 - w + w^2/18 + 8w^3/81 + 9(w + 1/2) eps^2 + w eps^(p-1) + delta
  std::vector<Rational> part_weights;
  std::vector<Check> checks;
  Verdict verdict = Verdict::unknown;

  bool certified() const { return verdict == Verdict::satisfied && detail::all_ok(checks); }
  std::string render() const {
    std::ostringstream os;
    os << "W(X) = " << to_string(wx) << "\nW(R) " << (wr_exact ? "= " : "<= ") << to_string(wr)
       << "\nW(powers) = " << to_string(km.power) << "\nW(intra-part commutators) = " << to_string(km.intra)
       << "\nW(triple commutators) = " << to_string(km.triple) << "\n1 - W(X) + W(R u R_KM) = " << to_string(value)
       << "\nanalytic chain = " << to_string(chain) << "\nverdict: " << verdict_name(verdict) << "\n"
       << detail::render_checks(checks);
    return os.str();
  }
};

inline Rational large_p_chain(const Rational& w, const Rational& delta, const Rational& eps, std::uint32_t p) {
  return 1 - w + w * w / 18 + 8 * w * w * w / 81 + 9 * (w + make_q(1, 2)) * eps * eps + w * qpow(eps, p - 1) + delta;
}

/// Certificate for 1 - W(X) + W(R u R_KM) < 0 with W(R_KM) summed exactly over its relators.
inline LargeCertificate certify_quotient_p_large(const WeightedPresentation& P, const PartitionPlan& plan,
                                                 const PresCondition& cond = {make_q(3, 2), make_q(1, 50), make_q(1, 100)}) {
  cond.validate();
  const std::uint32_t p = P.p();
  if (p < 67) throw Error(Errc::precondition, "the F_p route needs p >= 67 (p > (9-1)^2 for nine parts)");
  if (plan.m != 1) throw Error(Errc::precondition, "the F_p route takes an m = 1 plan");
  detail::check_plan(P, plan);
  if (!plan.spec(p).property_T()) throw Error(Errc::precondition, "p <= (k-1)^2: property (T) hypothesis unmet");

  LargeCertificate c;
  c.p = p;
  c.wx = P.WX();
  auto wr = P.WR();
  c.wr = wr.value;
  c.wr_exact = wr.exact;
  std::vector<std::vector<Rational>> w;
  for (auto& part : plan.parts) {
    w.emplace_back();
    for (auto g : part) w.back().push_back(P.W[g]);
  }
  auto sums = detail::part_sums(w, p);
  c.part_weights = sums.S;
  c.km = detail::class_weights(sums);
  c.value = 1 - c.wx + c.wr + c.km.total();

  const Rational& eps = cond.eps;
  Rational sq = 0, cross = 0;
  for (std::size_t i = 0; i < sums.S.size(); ++i) {
    sq += sums.S[i] * sums.S[i];
    cross += sums.S[i] * sums.S[i] * (c.wx - sums.S[i]);
  }
  c.estimate = sq / 2 + cross + qpow(eps, p - 1) * c.wx;
  c.chain = large_p_chain(c.wx, cond.delta, eps, p);

  auto& ch = c.checks;
  ch.push_back({"W(X) = w", c.wx == cond.w, to_string(c.wx)});
  ch.push_back({"W(R) < delta", c.wr < cond.delta, to_string(c.wr)});
  ch.push_back({"max W(x) < eps", detail::max_weight(P.W) < eps, to_string(detail::max_weight(P.W))});
  ch.push_back({"|W(X^i) - W(X^j)| < eps", detail::spread(sums.S) < eps, to_string(detail::spread(sums.S))});
  std::size_t reps = 0;
  ch.push_back(detail::verify_class_representatives(sums, p, reps));
  ch.push_back({"intra-part weight < (1/2) sum w_i^2", c.km.intra < sq / 2, to_string(c.km.intra)});
  ch.push_back({"sum w_i^2 <= w^2/9 + 9 eps^2", sq <= c.wx * c.wx / 9 + 9 * eps * eps, to_string(sq)});
  ch.push_back({"sum_{i!=j} w_i^2 w_j <= 8w^3/81 + 9 w eps^2", cross <= 8 * c.wx * c.wx * c.wx / 81 + 9 * c.wx * eps * eps,
                to_string(cross)});
  ch.push_back({"W(R_KM) <= estimate", c.km.total() <= c.estimate, to_string(c.estimate)});
  ch.push_back({"value <= analytic chain", c.value <= c.chain, to_string(c.chain)});
  c.verdict = decide(c.value, c.wr_exact);
  return c;
}

// ---------------------------------------------------------------------------------------------
// Ideal membership in F_q<<U>> modulo degree > N

/// Span of all m * g * m' (truncated to degree <= N) over the added generators g, kept in
/// echelon form with each row's pivot at its smallest monomial.
class IdealSlice {
 public:
  using Vec = Series::Terms;

  IdealSlice(Field f, std::size_t nvars, std::size_t N) : f_(std::move(f)), nvars_(nvars), N_(N) {}

  std::size_t rank() const { return rows_.size(); }
  std::size_t truncation() const { return N_; }

  void add_generator(const Series& g) {
    if (g.field() != f_ || g.nvars() != nvars_) throw Error(Errc::incompatible, "generator lives in another algebra");
    std::size_t lo = N_ + 1;
    for (auto& [m, c] : g.terms()) lo = std::min(lo, m.size());
    if (lo > N_) return;
    for (std::size_t dl = 0; dl + lo <= N_; ++dl)
      for (auto& left : monomials(dl))
        for (std::size_t dr = 0; dl + dr + lo <= N_; ++dr)
          for (auto& right : monomials(dr)) {
            Vec v;
            for (auto& [m, c] : g.terms()) {
              if (dl + m.size() + dr > N_) continue;
              Monomial x = left;
              x.insert(x.end(), m.begin(), m.end());
              x.insert(x.end(), right.begin(), right.end());
              add_term(v, x, c);
            }
            insert(std::move(v));
          }
  }

  /// First monomial of the residue of f (truncated to degree <= N), or nullopt if f lies in the slice.
  std::optional<Monomial> witness(const Series& f) const {
    Vec v;
    for (auto& [m, c] : f.terms())
      if (m.size() <= N_) add_term(v, m, c);
    v = reduce(std::move(v));
    if (v.empty()) return std::nullopt;
    return v.begin()->first;
  }
  bool contains(const Series& f) const { return !witness(f); }

 private:
  void add_term(Vec& v, const Monomial& m, Elem c) const {
    if (c == 0) return;
    auto [it, fresh] = v.try_emplace(m, c);
    if (!fresh) {
      it->second = f_.add(it->second, c);
      if (it->second == 0) v.erase(it);
    }
  }

  Vec reduce(Vec v) const {
    auto it = v.begin();
    while (it != v.end()) {
      auto r = rows_.find(it->first);
      if (r == rows_.end()) {
        ++it;
        continue;
      }
      Monomial key = it->first;
      Elem c = f_.neg(it->second);
      for (auto& [m, a] : r->second) add_term(v, m, f_.mul(c, a));
      it = v.upper_bound(key);
    }
    return v;
  }

  void insert(Vec v) {
    v = reduce(std::move(v));
    if (v.empty()) return;
    Elem inv = f_.inv(v.begin()->second);
    for (auto& [m, c] : v) c = f_.mul(c, inv);
    Monomial key = v.begin()->first;
    rows_.emplace(std::move(key), std::move(v));
  }

  const std::vector<Monomial>& monomials(std::size_t d) {
    while (mono_.size() <= d) {
      std::vector<Monomial> next;
      if (mono_.empty()) {
        next.push_back({});
      } else {
        for (auto& m : mono_.back())
          for (std::uint32_t v = 0; v < nvars_; ++v) {
            Monomial x = m;
            x.push_back(v);
            next.push_back(std::move(x));
          }
      }
      mono_.push_back(std::move(next));
    }
    return mono_[d];
  }

  Field f_;
  std::size_t nvars_, N_;
  std::map<Monomial, Vec, GradedLex> rows_;
  std::vector<std::vector<Monomial>> mono_;
};

/// The monomials {a^2 b, a b a, b a^2 : a, b in U}: every 3-letter word with a repeated letter.
inline std::vector<Series> repeated_letter_cubes(const Field& F, VarNames vars, const Policy& pol) {
  std::vector<Series> out;
  std::uint32_t n = static_cast<std::uint32_t>(vars->size());
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = 0; b < n; ++b)
      for (std::uint32_t c = 0; c < n; ++c)
        if (a == b || b == c || a == c) out.push_back(Series::monomial(F, vars, pol, {a, b, c}));
  return out;
}

/// Image of a word under x -> 1 + lambda(x) u_{var(x)} in F_q<<U>>, truncated at degree N.
/// `image` maps a generator to (variable, lambda).
template <class Image>
inline Series phi_direct(const Word& w, const Field& Fq, VarNames vars, const Policy& pol, Image&& image) {
  Series s = Series::one(Fq, std::move(vars), pol);
  for (auto& x : w.syllables()) {
    auto [v, lambda] = image(x.gen);
    auto c = one_plus_u_power(x.exp, pol.cap, Fq.p());
    std::vector<Elem> e(c.size());
    Elem pw = 1;
    for (std::size_t k = 0; k < c.size(); ++k) {
      e[k] = Fq.mul(Fq.from_int(static_cast<long long>(c[k])), pw);
      pw = Fq.mul(pw, lambda);
    }
    s = s.mul_univariate(v, e);
  }
  return s;
}

template <class Image>
inline Series phi_direct(const Word& w, const Field& Fq, VarNames vars, std::size_t N, Image&& image) {
  return phi_direct(w, Fq, std::move(vars), Policy::degree_cap(N), std::forward<Image>(image));
}

struct CongruenceReport {
  std::size_t checked = 0;
  std::size_t truncation = 0;
  std::vector<std::string> failures;  // relator and witness monomial
  bool ok() const { return failures.empty() && checked > 0; }
};

namespace detail {

/// Local tilde variables of a relator: groups numbered in order of first appearance.
struct LocalPhi {
  std::vector<std::uint32_t> group_of_var;
  std::map<std::uint32_t, std::uint32_t> var_of_group;
  std::uint32_t var(std::uint32_t group) {
    auto [it, fresh] = var_of_group.try_emplace(group, static_cast<std::uint32_t>(group_of_var.size()));
    if (fresh) group_of_var.push_back(group);
    return it->second;
  }
};

}  // namespace detail

/// phi(r - 1) lies in the ideal generated by the repeated-letter cubes, for every field relator
/// [x_ik(l), x_jl(m)][x_ik(lm), x_jl(1)]^-1 of the spec, modulo degree > N.  Each check runs in
/// the subalgebra on the two letters involved, which suffices for membership in the full ideal.
inline CongruenceReport verify_field_congruence(const KMSSpec& s, std::size_t N = 4) {
  if (s.m < 2) throw Error(Errc::precondition, "field relators need m >= 2");
  auto K = build_kms(s);
  Field Fq = Field::standard(s.p, s.m);
  auto vars = make_vars(2, "u");
  IdealSlice I(Fq, 2, N);
  for (auto& g : repeated_letter_cubes(Fq, vars, Policy::degree_cap(N))) I.add_generator(g);
  CongruenceReport rep;
  rep.truncation = N;
  for (std::size_t r = K.field_begin; r < K.pres.relators.size(); ++r) {
    detail::LocalPhi loc;
    auto f = phi_direct(K.pres.relators[r], Fq, vars, N, [&](std::uint32_t g) {
      return std::pair<std::uint32_t, Elem>{loc.var(g / s.m), Fq.basis(g % s.m + 1)};
    });
    f = f - Series::one(Fq, vars, f.policy());
    ++rep.checked;
    if (loc.group_of_var.size() > 2) throw Error(Errc::malformed, "field relator touches more than two groups");
    if (auto w = I.witness(f))
      rep.failures.push_back(K.pres.render(K.pres.relators[r]) + " : " + Series::render_monomial(*w, *vars));
  }
  return rep;
}

/// Every R_nilp relator satisfies phi(r - 1) in the ideal of the cubes and phi(r_rep - 1), where
/// r_rep is the same relator with all basis elements equal to 1, modulo degree > N.
inline CongruenceReport verify_representative_congruence(const KMSSpec& s, std::size_t N = 4) {
  auto K = build_kms(s);
  Field Fq = Field::standard(s.p, s.m);
  CongruenceReport rep;
  rep.truncation = N;
  std::map<std::string, IdealSlice> ideals;
  for (std::size_t r = 0; r < K.field_begin; ++r) {
    const Word& w = K.pres.relators[r];
    detail::LocalPhi loc;
    std::vector<std::uint32_t> syl_var;
    for (auto& x : w.syllables()) syl_var.push_back(loc.var(x.gen / s.m));
    std::size_t nv = loc.group_of_var.size();
    auto vars = make_vars(nv, "u");
    auto f = phi_direct(w, Fq, vars, N, [&](std::uint32_t g) {
      return std::pair<std::uint32_t, Elem>{loc.var_of_group.at(g / s.m), Fq.basis(g % s.m + 1)};
    });
    f = f - Series::one(Fq, vars, f.policy());
    // The representative: the same word with every generator replaced by its lambda_1 member.
    Word wr = w.substitute([&](std::uint32_t g) { return Word::gen(g - g % s.m); });
    std::string shape = std::to_string(nv) + ":";
    for (auto& x : wr.syllables()) shape += std::to_string(loc.var_of_group.at(x.gen / s.m)) + "^" + std::to_string(x.exp) + " ";
    auto it = ideals.find(shape);
    if (it == ideals.end()) {
      IdealSlice I(Fq, nv, N);
      for (auto& g : repeated_letter_cubes(Fq, vars, Policy::degree_cap(N))) I.add_generator(g);
      auto g = phi_direct(wr, Fq, vars, N, [&](std::uint32_t x) {
        return std::pair<std::uint32_t, Elem>{loc.var_of_group.at(x / s.m), 1};
      });
      I.add_generator(g - Series::one(Fq, vars, g.policy()));
      it = ideals.emplace(shape, std::move(I)).first;
    }
    ++rep.checked;
    if (auto m = it->second.witness(f)) rep.failures.push_back(K.pres.render(w) + " : " + Series::render_monomial(*m, *vars));
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Small p: the F_q-algebra route

struct SmallCertificate {
  std::uint32_t p = 0;
  unsigned m = 8;
  Rational wt_U;                 // w~(U~)
  Rational s1, s2, s3;           // w~(S_1), w~(S_2), w~(S_3)
  detail::ClassWeights s2_parts;
  bool s1_exact = true;
  Rational value;  // 1 - w~(U~) + w~(S_1) + w~(S_2) + w~(S_3)
  Rational chain;  // 1 - w + w^2/18 + 8w^3/81 + 9(w + 1/2) eps^2 + (w + 3w^2) eps + delta at w = w~(U~)
  Rational closing;  // -1/24 + 36 eps^2 + 9 eps + delta
  std::size_t phi_evaluated = 0;  // relators of R whose phi image was expanded
  std::vector<Check> checks;
  CongruenceReport field, nilp;
  Verdict verdict = Verdict::unknown;

  bool certified() const { return verdict == Verdict::satisfied && detail::all_ok(checks) && field.ok() && nilp.ok(); }
  std::string render() const {
    std::ostringstream os;
    os << "q = " << p << "^" << m << "\nw~(U~) = " << to_string(wt_U) << "\nw~(S_1) " << (s1_exact ? "<= " : "<= ")
       << to_string(s1) << "\nw~(S_2) = " << to_string(s2) << "  (powers " << to_string(s2_parts.power) << ", intra "
       << to_string(s2_parts.intra) << ", triples " << to_string(s2_parts.triple) << ")\nw~(S_3) = " << to_string(s3)
       << "\n1 - w~(U~) + w~(S_1) + w~(S_2) + w~(S_3) <= " << to_string(value) << "\nanalytic chain = " << to_string(chain)
       << "\nclosing bound = " << to_string(closing) << "\nfield congruences: " << field.checked << " checked, "
       << field.failures.size() << " failed (degree <= " << field.truncation << ")\nrepresentative congruences: " << nilp.checked
       << " checked, " << nilp.failures.size() << " failed\nverdict: " << verdict_name(verdict) << "\n"
       << detail::render_checks(checks);
    return os.str();
  }
};


namespace detail {

/// Group (tilde variable) and basis index of every generator under an m > 1 plan.
struct PlanLayout {
  std::vector<std::uint32_t> group_of;
  std::vector<unsigned> basis_of;  // 1-based
  std::vector<std::vector<Rational>> part_weights;  // tilde weights per part
  std::vector<Rational> tilde;
};

inline PlanLayout layout(const WeightedPresentation& P, const PartitionPlan& plan) {
  PlanLayout L;
  L.group_of.assign(P.rank(), 0);
  L.basis_of.assign(P.rank(), 1);
  for (auto& part : plan.parts) {
    L.part_weights.emplace_back();
    for (std::size_t a = 0; a < part.size(); a += plan.m) {
      auto grp = static_cast<std::uint32_t>(L.tilde.size());
      L.tilde.push_back(P.W[part[a]]);
      L.part_weights.back().push_back(P.W[part[a]]);
      for (unsigned j = 0; j < plan.m; ++j) {
        L.group_of[part[a + j]] = grp;
        L.basis_of[part[a + j]] = j + 1;
      }
    }
  }
  return L;
}

/// w~(phi(r - 1)), expanded in the tilde letters of r down to the weight floor that word_weight
/// would use; `below` when everything above the floor cancels.
inline WeightValue phi_weight(const Word& r, const std::vector<Rational>& W, const PlanLayout& L, const Field& Fq) {
  if (r.is_identity()) return WeightValue::make_zero();
  LocalPhi loc;
  std::vector<Rational> lw;
  for (auto& x : r.syllables())
    if (!loc.var_of_group.count(L.group_of[x.gen])) {
      loc.var(L.group_of[x.gen]);
      lw.push_back(W[x.gen]);
    }
  Rational th = default_floor(lw), maxw = max_weight(lw);
  std::size_t cap = 1;
  for (Rational acc = maxw; acc >= th; acc *= maxw) ++cap;
  auto g = std::make_shared<const Grading>(Grading::of_weights(lw));
  auto vars = make_vars(lw.size(), "u");
  auto s = phi_direct(r, Fq, vars, Policy::with_floor(cap - 1, th, g), [&](std::uint32_t x) {
    return std::pair<std::uint32_t, Elem>{loc.var_of_group.at(L.group_of[x]), Fq.basis(L.basis_of[x])};
  });
  s = s - Series::one(Fq, vars, s.policy());
  auto w = s.weight(*g);
  if (w.kind == WeightValue::zero) return WeightValue::make_below(th);
  return w;
}

}  // namespace detail

inline Rational small_p_chain(const Rational& w, const Rational& delta, const Rational& eps, std::uint32_t p) {
  (void)p;
  return 1 - w + w * w / 18 + 8 * w * w * w / 81 + 9 * (w + make_q(1, 2)) * eps * eps + (w + 3 * w * w) * eps + delta;
}

/// Certificate for the F_q-algebra F_q<<U~>>/I~ with I~ generated by S_1 u S_2 u S_3: the GGS
/// inequality 1 - w~(U~) + w~(S_1) + w~(S_2) + w~(S_3) < 0.  S_2 holds one representative
/// (all basis elements 1) per relator class; verify_representative_congruence confirms that
/// the other members lie in the ideal it generates together with S_3.  Relators of R touching
/// at most `phi_support` groups get their phi image expanded; the rest use w~(phi(r-1)) <= W(r).
inline SmallCertificate certify_quotient_p_small(const WeightedPresentation& P, const PartitionPlan& plan,
                                                 const PresCondition& cond = {12, make_q(1, 100), make_q(1, 1000)},
                                                 std::size_t N = 4, std::size_t phi_support = 4) {
  cond.validate();
  const std::uint32_t p = P.p();
  if (plan.m < 2) throw Error(Errc::precondition, "the algebra route takes an m > 1 plan");
  detail::check_plan(P, plan);
  KMSSpec spec = plan.spec(p);
  if (!spec.property_T()) throw Error(Errc::precondition, "q <= (k-1)^2: property (T) hypothesis unmet");
  Field Fq = Field::standard(p, plan.m);
  auto L = detail::layout(P, plan);

  SmallCertificate c;
  c.p = p;
  c.m = plan.m;
  for (auto& w : L.tilde) c.wt_U += w;
  auto sums = detail::part_sums(L.part_weights, p);
  c.s2_parts = detail::class_weights(sums);
  c.s2 = c.s2_parts.total();
  Rational S = 0, Q = 0;
  for (auto& w : L.tilde) {
    S += w;
    Q += w * w;
  }
  c.s3 = 3 * S * Q - 2 * sums.cube;

  const auto& rw = P.relator_weights();
  for (std::size_t r = 0; r < P.relators().size(); ++r) {
    Rational b = rw[r].upper();
    c.s1_exact = c.s1_exact && rw[r].kind != WeightValue::below;
    std::set<std::uint32_t> groups;
    for (auto g : P.relators()[r].support()) groups.insert(L.group_of[g]);
    if (groups.size() <= phi_support) {
      auto pw = detail::phi_weight(P.relators()[r], P.W, L, Fq);
      ++c.phi_evaluated;
      if (pw.upper() < b) b = pw.upper();
    }
    c.s1 += b;
  }
  c.value = 1 - c.wt_U + c.s1 + c.s2 + c.s3;
  const Rational& eps = cond.eps;
  c.chain = small_p_chain(c.wt_U, cond.delta, eps, p);
  c.closing = make_q(-1, 24) + 36 * eps * eps + 9 * eps + cond.delta;

  Rational wx = P.WX();
  auto& ch = c.checks;
  ch.push_back({"W(X) = w", wx == cond.w, to_string(wx)});
  ch.push_back({"w~(U~) = W(X)/m", c.wt_U == wx / plan.m, to_string(c.wt_U)});
  ch.push_back({"max W(x) < eps", detail::max_weight(P.W) < eps, to_string(detail::max_weight(P.W))});
  ch.push_back({"|w~_i - w~_j| < eps", detail::spread(sums.S) < eps, to_string(detail::spread(sums.S))});
  ch.push_back({"w~(S_1) <= W(R) < delta", c.s1 <= P.WR().value && P.WR().value < cond.delta, to_string(P.WR().value)});
  std::size_t reps = 0;
  ch.push_back(detail::verify_class_representatives(sums, p, reps));
  ch.push_back({"w~(S_3) <= 3 eps w~^2", c.s3 <= 3 * eps * c.wt_U * c.wt_U, to_string(c.s3)});
  ch.push_back({"value <= analytic chain", c.value <= c.chain, to_string(c.chain)});
  ch.push_back({"analytic chain <= closing bound", c.chain <= c.closing, to_string(c.closing)});
  KMSSpec unit{p, plan.m, std::vector<std::size_t>(spec.k(), 1)};
  c.field = verify_field_congruence(unit, N);
  c.nilp = verify_representative_congruence(unit, N);
  c.verdict = decide(c.value, c.s1_exact);
  return c;
}

// ---------------------------------------------------------------------------------------------
// Kazhdan constants

/// kappa(Lambda, U_1 u ... u U_k) >= sqrt((2/9)(1 - (k-1)/sqrt|F|)) > 1/25 for |F| = p^m, then
/// the depth of the root subgroups in S and kappa(Lambda, S) >= 1/(25 p |X|).
inline BoundLedger kazhdan_numbers(std::uint32_t p, unsigned m, std::size_t k, std::size_t nX, std::size_t max_n,
                                   unsigned digits = 6) {
  if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
  if (k < 2 || nX < 1 || max_n < 1) throw Error(Errc::precondition, "need k >= 2, |X| >= 1, max n_i >= 1");
  auto ex = [](std::size_t v) { return Quantity::exact(Rational(static_cast<unsigned long>(v))); };
  BoundLedger L;
  L.given("p", ex(p));
  L.given("m", ex(m));
  L.given("k-1", ex(k - 1));
  L.given("|X|", ex(nX));
  L.given("max n_i", ex(max_n));
  L.given("digits", ex(digits));
  L.record("|F|", "power", "field order", {L.ref("p"), L.ref("m")});
  L.record("(k-1)^2", "product", "", {L.ref("k-1"), L.ref("k-1")});
  if (!L.record("property (T)", "greater", "|F| > (k-1)^2", {L.ref("|F|"), L.ref("(k-1)^2")}).holds())
    throw Error(Errc::unsatisfiable, "property (T) hypothesis unmet: " + L.get("|F|").render() + " <= " + L.get("(k-1)^2").render());
  L.given("k", ex(k));
  L.record("sqrt|F|", "sqrt", "rational bracket", {L.ref("|F|"), L.ref("digits")});
  L.record("kappa(Lambda,U)", "kazhdan-root", "kappa >= sqrt((2/9)(1 - (k-1)/sqrt|F|))", {L.ref("k"), L.ref("sqrt|F|"), L.ref("digits")});
  L.given("1/25", Quantity::exact(make_q(1, 25)));
  L.record("kappa(Lambda,U) > 1/25", "greater", "", {L.ref("kappa(Lambda,U)"), L.ref("1/25")});
  L.record("kappa(Lambda,U) lower", "at-least", "", {L.ref("kappa(Lambda,U)"), L.ref("1/25")});
  L.record("depth_S(U)", "product", "each root element is a word of length <= (p-1) m n_i", {L.ref("p"), L.ref("m"), L.ref("max n_i")});
  L.record("p|X|", "product", "", {L.ref("p"), L.ref("|X|")});
  L.record("depth_S(U) <= p|X|", "greater", "", {{"p|X|+1", Quantity::exact(L.get("p|X|").value() + 1)}, L.ref("depth_S(U)")});
  if (!L.get("depth_S(U) <= p|X|").holds()) throw Error(Errc::unsatisfiable, "root-subgroup depth exceeds p|X|");
  L.record("kappa(Lambda,S)", "depth-division", "kappa(G,S;V) >= kappa(H,Y;V) / depth_S(Y)", {L.ref("kappa(Lambda,U) lower"), L.ref("p|X|")});
  return L;
}

}  // namespace ggs
