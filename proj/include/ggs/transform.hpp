#pragma once
// Presentations, elementary transformations with verified weight contracts, and index-p descent.

#include "ggs/hilbert.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ggs {

struct Presentation {
  GeneratorSet gens;
  std::vector<Word> relators;  // words in `gens`

  std::uint32_t p() const { return gens.p; }
  std::size_t rank() const { return gens.size(); }
  std::string render(const Word& w) const { return render_word(w, gens.names); }
};

/// (X, R, W), optionally integral: W = t0^D.  Relator weights are cached on first use.
class WeightedPresentation {
 public:
  Presentation pres;
  std::vector<Rational> W;
  std::vector<long> D;  // nonempty iff integral
  std::optional<Rational> t0;
  std::vector<Word> origin;  // each generator as a word in the input generators
  std::vector<std::string> origin_names;
  std::optional<Rational> floor;  // relator weight floor; default (min W)^8, refined adaptively

  WeightedPresentation() = default;

  static WeightedPresentation weighted(Presentation P, std::vector<Rational> W) {
    if (W.size() != P.rank()) throw Error(Errc::malformed, "one weight per generator required");
    for (auto& w : W)
      if (w <= 0 || w >= 1) throw Error(Errc::precondition, "weights must lie in (0,1)");
    WeightedPresentation wp;
    wp.pres = std::move(P);
    wp.W = std::move(W);
    wp.reset_origin();
    return wp;
  }
  static WeightedPresentation integral(Presentation P, std::vector<long> D, Rational t0) {
    if (D.size() != P.rank()) throw Error(Errc::malformed, "one degree per generator required");
    if (t0 <= 0 || t0 >= 1) throw Error(Errc::precondition, "t0 must lie in (0,1)");
    for (auto d : D)
      if (d < 1) throw Error(Errc::precondition, "degrees must be >= 1");
    auto wp = weighted(std::move(P), integral_weights(D, t0));
    wp.D = std::move(D);
    wp.t0 = std::move(t0);
    return wp;
  }

  bool is_integral() const { return t0.has_value(); }
  std::uint32_t p() const { return pres.p(); }
  std::size_t rank() const { return pres.rank(); }
  const std::vector<Word>& relators() const { return pres.relators; }

  void reset_origin() {
    origin.clear();
    for (std::uint32_t i = 0; i < rank(); ++i) origin.push_back(Word::gen(i));
    origin_names = pres.gens.names;
  }
  void invalidate() const {
    rw_.reset();
    rd_.reset();
  }

  Rational WX() const {
    Rational s = 0;
    for (auto& w : W) s += w;
    return s;
  }

  const std::vector<DegreeValue>& relator_degrees() const {
    if (!is_integral()) throw Error(Errc::precondition, "relator degrees need integral weights");
    if (!rd_) {
      std::vector<DegreeValue> v;
      for (auto& r : pres.relators) v.push_back(word_degree(r, D, p()));
      rd_ = std::move(v);
    }
    return *rd_;
  }

  const std::vector<WeightValue>& relator_weights() const {
    if (!rw_) {
      std::vector<WeightValue> v;
      if (is_integral()) {
        for (auto& d : relator_degrees()) {
          if (d.kind == DegreeValue::infinite)
            v.push_back(WeightValue::make_zero());
          else if (d.is_exact())
            v.push_back(WeightValue::make_exact(qpow(*t0, static_cast<unsigned long>(d.value))));
          else
            v.push_back(WeightValue::make_below(qpow(*t0, static_cast<unsigned long>(d.value - 1))));
        }
      } else {
        Rational th = floor ? *floor : default_floor(W);
        for (auto& r : pres.relators) v.push_back(word_weight_exact(r, W, p(), th));
      }
      rw_ = std::move(v);
    }
    return *rw_;
  }

  struct Total {
    Rational value;  // exact sum, or an upper bound if !exact
    bool exact = true;
  };
  Total WR() const {
    Total t{0, true};
    for (auto& w : relator_weights()) {
      t.value += w.upper();
      t.exact = t.exact && w.kind != WeightValue::below;
    }
    return t;
  }
  /// 1 - W(X) + W(R) (an upper bound when some relator weight is inexact).
  Rational ggs_value() const { return 1 - WX() + WR().value; }

  /// 1 - H_X + H_R through degree N (integral presentations only).
  IntSeries series(std::size_t N) const {
    auto s = IntSeries::one(N) - hilbert_of_degrees(D, N);
    for (auto& d : relator_degrees())
      if (d.is_exact() && d.value <= static_cast<long>(N)) s[static_cast<std::size_t>(d.value)] += 1;
    return s;
  }

  /// Seeds the cache, e.g. with weights carried over from a transformation that preserved them.
  void seed_weights(std::vector<WeightValue> w) const { rw_ = std::move(w); }

 private:
  mutable std::optional<std::vector<WeightValue>> rw_;
  mutable std::optional<std::vector<DegreeValue>> rd_;
};

/// A nonzero homomorphism F -> Z/p, given by its values on the generators.
struct Character {
  std::vector<std::uint32_t> values;

  long long eval(const Word& w, std::uint32_t p) const {
    long long s = 0;
    for (auto& x : w.syllables()) {
      long long v = x.gen < values.size() ? values[x.gen] : 0;
      s = (s + (v * (x.exp % static_cast<long long>(p)))) % static_cast<long long>(p);
    }
    return (s + p) % p;
  }
  bool is_zero(std::uint32_t p) const {
    for (auto v : values)
      if (v % p) return false;
    return true;
  }
};

enum class StepKind { p_descent, gen_change, rel_change, cleanup, pair_elim, contraction };

inline const char* step_name(StepKind k) {
  switch (k) {
    case StepKind::p_descent: return "p-descent";
    case StepKind::gen_change: return "gen-change";
    case StepKind::rel_change: return "rel-change";
    case StepKind::cleanup: return "cleanup";
    case StepKind::pair_elim: return "pair-elim";
    case StepKind::contraction: return "contraction";
  }
  return "?";
}

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct LogStep {
  StepKind kind;
  std::string params;
  Rational wx_before, wx_after, wr_before, wr_after;
  bool wr_exact = true;
  std::vector<Check> checks;
};

struct TransformLog {
  std::vector<LogStep> steps;

  void append(const TransformLog& o) { steps.insert(steps.end(), o.steps.begin(), o.steps.end()); }
  bool all_ok() const {
    for (auto& s : steps)
      for (auto& c : s.checks)
        if (!c.ok) return false;
    return true;
  }
  std::string render() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      auto& s = steps[i];
      os << i + 1 << ". " << step_name(s.kind) << " " << s.params << ": W(X) " << s.wx_before << " -> " << s.wx_after
         << ", W(R) " << s.wr_before << " -> " << (s.wr_exact ? "" : "<=") << s.wr_after << "\n";
      for (auto& c : s.checks) os << "   [" << (c.ok ? "ok" : "FAIL") << "] " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    }
    return os.str();
  }
};

struct Transformed {
  WeightedPresentation P;
  TransformLog log;
};

namespace detail {

inline std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.count(base)) base += "'";
  return base;
}

inline LogStep open_step(StepKind k, std::string params, const WeightedPresentation& P) {
  LogStep s;
  s.kind = k;
  s.params = std::move(params);
  s.wx_before = P.WX();
  s.wr_before = P.WR().value;
  return s;
}

inline void close_step(LogStep& s, const WeightedPresentation& Q) {
  s.wx_after = Q.WX();
  auto t = Q.WR();
  s.wr_after = t.value;
  s.wr_exact = t.exact;
}

/// Rank over F_p of sparse rows (column -> nonzero entry).
inline std::size_t rank_mod_p(const std::vector<std::map<std::uint32_t, std::uint32_t>>& rows, std::uint32_t p) {
  auto inv = [p](std::uint64_t b) {
    std::uint64_t r = 1;
    for (std::uint64_t e = p - 2; e; e >>= 1, b = b * b % p)
      if (e & 1) r = r * b % p;
    return r;
  };
  std::map<std::uint32_t, std::map<std::uint32_t, std::uint32_t>> pivots;  // leading column -> row with leading 1
  for (auto row : rows) {
    while (!row.empty()) {
      auto [c, v] = *row.begin();
      auto it = pivots.find(c);
      if (it == pivots.end()) {
        std::uint64_t s = inv(v);
        for (auto& [k, x] : row) x = static_cast<std::uint32_t>(x * s % p);
        pivots.emplace(c, std::move(row));
        break;
      }
      std::uint64_t f = v;
      for (auto& [k, x] : it->second) {
        std::uint64_t y = (row.count(k) ? row[k] : 0) + (p - f) * x % p;
        if (y % p)
          row[k] = static_cast<std::uint32_t>(y % p);
        else
          row.erase(k);
      }
    }
  }
  return pivots.size();
}

/// Generator weight of a word: t0^degree for integral presentations, else the weight.
inline WeightValue element_weight(const WeightedPresentation& P, const Word& w) {
  if (P.is_integral()) {
    auto d = word_degree(w, P.D, P.p());
    if (d.kind == DegreeValue::infinite) return WeightValue::make_zero();
    if (!d.is_exact()) return WeightValue::make_below(qpow(*P.t0, static_cast<unsigned long>(d.value - 1)));
    return WeightValue::make_exact(qpow(*P.t0, static_cast<unsigned long>(d.value)));
  }
  return word_weight_exact(w, P.W, P.p(), P.floor);
}

/// Expresses every old generator in terms of the new basis by successive single-occurrence
/// solving; nullopt when no finite expression is found this way.
inline std::optional<std::vector<Word>> invert_basis(const std::vector<Word>& newX, std::size_t d) {
  std::vector<std::optional<Word>> expr(d);
  std::vector<bool> used(newX.size(), false);
  std::size_t solved = 0;
  bool progress = true;
  while (solved < d && progress) {
    progress = false;
    for (std::size_t i = 0; i < newX.size(); ++i) {
      if (used[i]) continue;
      const auto& syl = newX[i].syllables();
      std::optional<std::uint32_t> target;
      std::size_t pos = 0, occurrences = 0;
      bool bad = false;
      for (std::size_t k = 0; k < syl.size(); ++k) {
        if (expr[syl[k].gen]) continue;
        if (target && *target != syl[k].gen) bad = true;
        target = syl[k].gen;
        pos = k;
        ++occurrences;
      }
      if (bad || !target || occurrences != 1) continue;
      long long s = syl[pos].exp;
      if (s != 1 && s != -1) continue;
      auto sub = [&](std::size_t a, std::size_t b) {
        Word w;
        for (std::size_t k = a; k < b; ++k) w = w * expr[syl[k].gen]->power(syl[k].exp);
        return w;
      };
      Word u = sub(0, pos), v = sub(pos + 1, syl.size());
      Word x = u.inverse() * Word::gen(static_cast<std::uint32_t>(i)) * v.inverse();
      expr[*target] = s == 1 ? x : x.inverse();
      used[i] = true;
      ++solved;
      progress = true;
    }
  }
  if (solved < d) return std::nullopt;
  std::vector<Word> out;
  for (auto& e : expr) out.push_back(*e);
  return out;
}

inline Word substitute_all(const Word& w, const std::vector<Word>& images) {
  return w.substitute([&](std::uint32_t g) { return images.at(g); });
}

/// lhs is an exact value or an upper bound; the check only passes if rhs is exact.
inline Check le_check(const std::string& name, const Rational& lhs, const Rational& rhs, bool rhs_exact) {
  Check c{name, lhs <= rhs, to_string(lhs) + " <= " + to_string(rhs)};
  if (c.ok && !rhs_exact) {
    c.ok = false;
    c.detail += ", right side inexact";
  }
  return c;
}

}  // namespace detail

/// Checks that newX is a W-good free basis and rewrites the relators in it.
inline Transformed change_generators(const WeightedPresentation& P, const std::vector<Word>& newX,
                                     std::optional<std::vector<std::string>> names = std::nullopt) {
  const std::size_t d = P.rank();
  const std::uint32_t p = P.p();
  if (newX.size() != d) throw Error(Errc::not_basis, "new generating set has the wrong size");
  std::vector<std::map<std::uint32_t, std::uint32_t>> T;
  for (auto& w : newX) T.push_back(linear_part(w, p));
  if (detail::rank_mod_p(T, p) < d) throw Error(Errc::not_basis, "transition matrix is singular mod p");

  std::vector<Rational> newW;
  std::vector<long> newD;
  for (auto& w : newX) {
    const auto& syl = w.syllables();
    if (syl.size() == 1 && (syl[0].exp == 1 || syl[0].exp == -1)) {
      newW.push_back(P.W[syl[0].gen]);
      if (P.is_integral()) newD.push_back(P.D[syl[0].gen]);
      continue;
    }
    if (P.is_integral()) {
      auto dg = word_degree(w, P.D, p);
      if (!dg.is_exact()) throw Error(Errc::not_good, "degree of new generator '" + P.pres.render(w) + "' is not exact");
      newD.push_back(dg.value);
      newW.push_back(qpow(*P.t0, static_cast<unsigned long>(dg.value)));
      continue;
    }
    auto v = detail::element_weight(P, w);
    if (!v.is_exact()) throw Error(Errc::not_good, "weight of new generator '" + P.pres.render(w) + "' is not exact");
    newW.push_back(v.value);
  }
  auto a = P.W, b = newW;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(Errc::not_good, "multiset of generator weights not preserved");

  auto inv = detail::invert_basis(newX, d);
  if (!inv) throw Error(Errc::precondition, "basis change has no finite inverse by single-occurrence solving");

  auto step = detail::open_step(StepKind::gen_change, "", P);
  WeightedPresentation Q;
  std::vector<std::string> nn = names ? *names : P.pres.gens.names;
  Q.pres.gens = GeneratorSet(nn, p);
  for (auto& r : P.relators()) Q.pres.relators.push_back(detail::substitute_all(r, *inv));
  Q.W = newW;
  if (P.is_integral()) {
    Q.D = newD;
    Q.t0 = P.t0;
  }
  Q.floor = P.floor;
  Q.origin_names = P.origin_names;
  for (auto& w : newX) Q.origin.push_back(detail::substitute_all(w, P.origin));
  std::string params;
  for (std::size_t i = 0; i < d; ++i)
    if (!(newX[i] == Word::gen(static_cast<std::uint32_t>(i))))
      params += (params.empty() ? "" : ", ") + P.pres.gens.names[i] + " -> " + P.pres.render(newX[i]);
  step.params = params.empty() ? "identity" : params;
  detail::close_step(step, Q);
  step.checks.push_back({"transition matrix invertible mod p", true, ""});
  step.checks.push_back({"generator weight multiset preserved", true, ""});
  step.checks.push_back({"W(X') = W(X)", step.wx_after == step.wx_before, to_string(step.wx_after)});
  auto wr = P.WR();
  step.checks.push_back({"W(R') <= W(R)", step.wr_after <= wr.value || !wr.exact,
                         to_string(step.wr_after) + " vs " + to_string(wr.value)});
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

/// p-descent at generator x: X' = {y, [y,x], ..., [y,x,...,x]} (y != x) plus x^p, relators
/// [r,x,...,x] for k = 0..p-1, all rewritten in the new basis.  Trivial relators are dropped.
inline Transformed p_descent(const WeightedPresentation& P, std::uint32_t x) {
  const std::size_t d = P.rank();
  const std::uint32_t p = P.p();
  if (x >= d) throw Error(Errc::malformed, "descent generator out of range");
  for (std::size_t i = 0; i < P.relators().size(); ++i)
    if (is_linear_in(P.relators()[i], x, p))
      throw Error(Errc::precondition, "relator " + std::to_string(i + 1) + " '" + P.pres.render(P.relators()[i]) +
                                          "' is X-linear in " + P.pres.gens.names[x]);
  if (p > 7) throw Error(Errc::precondition, "p-descent rewriting is limited to p <= 7");

  // Block of new generators for each y != x; z = x^p last.
  std::vector<long> block(d, -1);
  std::uint32_t next = 0;
  for (std::uint32_t y = 0; y < d; ++y)
    if (y != x) {
      block[y] = next;
      next += p;
    }
  const std::uint32_t z = next;

  // sigma^i(c_0) over abstract indices: conjugation by x sends c_k to c_k c_{k+1}.
  std::vector<Word> sig{Word::gen(0)};
  for (std::uint32_t i = 1; i < p; ++i)
    sig.push_back(sig.back().substitute([](std::uint32_t k) { return Word::gen(k) * Word::gen(k + 1); }));

  // y^{x^i} in the commutator basis.
  auto conj = [&](std::uint32_t y, std::uint32_t i) {
    auto b = static_cast<std::uint32_t>(block[y]);
    return sig[i].substitute([&](std::uint32_t k) { return Word::gen(b + k); });
  };
  // Reidemeister-Schreier with transversal x^{j-p} (coset j = exponent sum of x mod p).
  auto rewrite = [&](const Word& w) {
    Word out;
    std::uint32_t j = 0;
    for (auto& s : w.syllables()) {
      if (s.gen == x) {
        long long n = s.exp > 0 ? s.exp : -s.exp;
        for (long long t = 0; t < n; ++t) {
          if (s.exp > 0) {
            if (j == 0) out = out * Word::gen(z);
            j = (j + 1) % p;
          } else {
            if (j == 1) out = out * Word::gen(z, -1);
            j = (j + p - 1) % p;
          }
        }
      } else {
        out = out * conj(s.gen, (p - j) % p).power(s.exp);
      }
    }
    if (j != 0) throw Error(Errc::precondition, "word does not lie in the descended subgroup");
    return out;
  };

  auto step = detail::open_step(StepKind::p_descent, "at " + P.pres.gens.names[x], P);
  WeightedPresentation Q;
  std::set<std::string> taken;
  std::vector<std::string> names;
  const Rational tau = P.W[x];
  for (std::uint32_t y = 0; y < d; ++y) {
    if (y == x) continue;
    for (std::uint32_t k = 0; k < p; ++k) {
      std::string nm = k == 0 ? P.pres.gens.names[y] : P.pres.gens.names[y] + "." + P.pres.gens.names[x] + std::to_string(k);
      nm = detail::fresh_name(nm, taken);
      taken.insert(nm);
      names.push_back(nm);
      Q.W.push_back(P.W[y] * qpow(tau, k));
      if (P.is_integral()) Q.D.push_back(P.D[y] + static_cast<long>(k) * P.D[x]);
      Q.origin.push_back(commutator_power(P.origin[y], P.origin[x], k));
    }
  }
  names.push_back(detail::fresh_name(P.pres.gens.names[x] + "." + std::to_string(p), taken));
  Q.W.push_back(qpow(tau, p));
  if (P.is_integral()) Q.D.push_back(static_cast<long>(p) * P.D[x]);
  Q.origin.push_back(P.origin[x].power(p));
  Q.origin_names = P.origin_names;
  Q.pres.gens = GeneratorSet(names, p);
  if (P.is_integral()) Q.t0 = P.t0;
  Q.floor = P.floor;
  for (auto& r : P.relators())
    for (std::uint32_t k = 0; k < p; ++k) {
      Word w = rewrite(commutator_power(r, Word::gen(x), k));
      if (!w.is_identity()) Q.pres.relators.push_back(w);
    }

  detail::close_step(step, Q);
  Rational c = 0;
  for (std::uint32_t k = 0; k < p; ++k) c += qpow(tau, k);
  step.checks.push_back({"|X'| = p(|X|-1)+1", Q.rank() == p * (d - 1) + 1, std::to_string(Q.rank())});
  step.checks.push_back({"W(X')-1 = c(W(X)-1)", step.wx_after - 1 == c * (step.wx_before - 1), "c = " + to_string(c)});
  auto wr = P.WR();
  step.checks.push_back(detail::le_check("W(R') <= c W(R)", step.wr_after, c * wr.value, wr.exact));
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

struct Adapted {
  Transformed t;
  std::uint32_t j;  // distinguished generator
};

/// Basis adapted to ker(chi): every generator except x_j lies in the kernel.
inline Adapted subgroup_adapt(const WeightedPresentation& P, const Character& chi) {
  const std::uint32_t p = P.p();
  const std::size_t d = P.rank();
  if (chi.values.size() != d) throw Error(Errc::malformed, "character has the wrong length");
  if (chi.is_zero(p)) throw Error(Errc::precondition, "invalid subgroup: zero character");
  std::optional<std::uint32_t> j;
  for (std::uint32_t i = 0; i < d; ++i)
    if (chi.values[i] % p && (!j || P.W[i] < P.W[*j])) j = i;
  std::uint64_t cj = chi.values[*j] % p, inv = 1;
  for (std::uint64_t b = cj, e = p - 2; e; e >>= 1, b = b * b % p)
    if (e & 1) inv = inv * b % p;
  std::vector<Word> newX;
  for (std::uint32_t i = 0; i < d; ++i) {
    std::uint64_t ci = chi.values[i] % p;
    if (i == *j || ci == 0) {
      newX.push_back(Word::gen(i));
      continue;
    }
    auto k = static_cast<long long>((p - ci) * inv % p);
    newX.push_back(Word::gen(i) * Word::gen(*j, k));
  }
  return {change_generators(P, newX), *j};
}

/// Replaces r_i by r_i r_j^k for each edit, refusing any net weight increase.
struct RelatorEdit {
  std::size_t i, j;
  long long k;
};

inline Transformed change_relators(const WeightedPresentation& P, const std::vector<RelatorEdit>& edits) {
  auto R = P.relators();
  std::string params;
  for (auto& e : edits) {
    if (e.i >= R.size() || e.j >= R.size()) throw Error(Errc::malformed, "relator index out of range");
    if (e.i == e.j) throw Error(Errc::precondition, "relator change needs i != j");
    R[e.i] = R[e.i] * R[e.j].power(e.k);
    params += (params.empty() ? "" : ", ") + ("r" + std::to_string(e.i + 1) + " *= r" + std::to_string(e.j + 1) + "^" + std::to_string(e.k));
  }
  auto step = detail::open_step(StepKind::rel_change, params.empty() ? "none" : params, P);
  WeightedPresentation Q = P;
  Q.pres.relators = R;
  Q.invalidate();
  detail::close_step(step, Q);
  auto wr = P.WR();
  auto check = detail::le_check("W(R') <= W(R)", step.wr_after, wr.value, wr.exact);
  if (!check.ok) throw Error(Errc::not_good, "relator change would not be W-good: " + check.detail);
  step.checks.push_back(check);
  step.checks.push_back({"W(X') = W(X)", true, ""});
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

namespace detail {

/// Removes generators `kill` (mapped to the given images in the remaining basis) and reindexes.
inline WeightedPresentation drop_generators(const WeightedPresentation& P, const std::vector<std::uint32_t>& kill,
                                            const std::vector<std::optional<Word>>& image_of_killed,
                                            const std::vector<std::size_t>& drop_relators) {
  const std::size_t d = P.rank();
  std::vector<long> newidx(d, -1);
  std::vector<std::string> names;
  WeightedPresentation Q;
  std::set<std::uint32_t> ks(kill.begin(), kill.end());
  for (std::uint32_t i = 0; i < d; ++i)
    if (!ks.count(i)) {
      newidx[i] = static_cast<long>(names.size());
      names.push_back(P.pres.gens.names[i]);
      Q.W.push_back(P.W[i]);
      if (P.is_integral()) Q.D.push_back(P.D[i]);
      Q.origin.push_back(P.origin[i]);
    }
  if (names.empty()) throw Error(Errc::precondition, "cannot remove every generator");
  std::vector<Word> img(d);
  for (std::uint32_t i = 0; i < d; ++i)
    if (newidx[i] >= 0) img[i] = Word::gen(static_cast<std::uint32_t>(newidx[i]));
  for (std::size_t k = 0; k < kill.size(); ++k) {
    Word w = image_of_killed[k] ? *image_of_killed[k] : Word();
    img[kill[k]] = w.substitute([&](std::uint32_t g) { return img[g]; });
  }
  Q.pres.gens = GeneratorSet(names, P.p());
  std::set<std::size_t> dr(drop_relators.begin(), drop_relators.end());
  for (std::size_t r = 0; r < P.relators().size(); ++r) {
    if (dr.count(r)) continue;
    Word w = substitute_all(P.relators()[r], img);
    if (!w.is_identity()) Q.pres.relators.push_back(w);
  }
  if (P.is_integral()) Q.t0 = P.t0;
  Q.floor = P.floor;
  Q.origin_names = P.origin_names;
  return Q;
}

}  // namespace detail

/// Cleanup of C, a set of generators each of which also occurs as a relator (x or x^-1).
inline Transformed cleanup(const WeightedPresentation& P, const std::vector<std::uint32_t>& C) {
  std::vector<std::size_t> rel_of;
  std::set<std::size_t> claimed;
  for (auto c : C) {
    if (c >= P.rank()) throw Error(Errc::malformed, "cleanup generator out of range");
    std::optional<std::size_t> hit;
    for (std::size_t r = 0; r < P.relators().size() && !hit; ++r) {
      auto& w = P.relators()[r];
      if (!claimed.count(r) && (w == Word::gen(c) || w == Word::gen(c, -1))) hit = r;
    }
    if (!hit) throw Error(Errc::precondition, "invalid cleanup: generator " + P.pres.gens.names[c] + " is not a relator");
    claimed.insert(*hit);
    rel_of.push_back(*hit);
  }
  std::string params;
  Rational wc = 0;
  for (auto c : C) {
    params += (params.empty() ? "" : ", ") + P.pres.gens.names[c];
    wc += P.W[c];
  }
  auto step = detail::open_step(StepKind::cleanup, "{" + params + "}", P);
  auto Q = detail::drop_generators(P, C, std::vector<std::optional<Word>>(C.size()), rel_of);
  detail::close_step(step, Q);
  auto wr = P.WR();
  step.checks.push_back({"W(X') = W(X) - W(C)", step.wx_after == step.wx_before - wc, to_string(wc)});
  step.checks.push_back(detail::le_check("W(R') <= W(R) - W(C)", step.wr_after, wr.value - wc, wr.exact));
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

/// Eliminates the pair (x, r): basis change X \ {x} u {r}, then cleanup of r.
inline Transformed pair_elimination(const WeightedPresentation& P, std::uint32_t x, std::size_t ri) {
  if (x >= P.rank() || ri >= P.relators().size()) throw Error(Errc::malformed, "pair index out of range");
  const std::uint32_t p = P.p();
  const Word& r = P.relators()[ri];
  if (!is_linear_in(r, x, p))
    throw Error(Errc::precondition, "relator '" + P.pres.render(r) + "' is not linear in " + P.pres.gens.names[x]);
  auto wr = P.relator_weights()[ri];
  if (!wr.is_exact() || wr.value != P.W[x])
    throw Error(Errc::not_good, "pair elimination needs W(r) = W(x); got " + wr.str() + " vs " + to_string(P.W[x]));

  // psi(x): solve r = 1 for x when x occurs once with exponent +-1.
  std::optional<Word> image;
  const auto& syl = r.syllables();
  std::size_t occ = 0, pos = 0;
  for (std::size_t k = 0; k < syl.size(); ++k)
    if (syl[k].gen == x) {
      ++occ;
      pos = k;
    }
  bool others_use_x = false;
  for (std::size_t k = 0; k < P.relators().size(); ++k)
    if (k != ri)
      for (auto& s : P.relators()[k].syllables()) others_use_x = others_use_x || s.gen == x;
  if (occ == 1 && (syl[pos].exp == 1 || syl[pos].exp == -1)) {
    Word u = Word::from_syllables(std::vector<Syllable>(syl.begin(), syl.begin() + static_cast<long>(pos)));
    Word v = Word::from_syllables(std::vector<Syllable>(syl.begin() + static_cast<long>(pos) + 1, syl.end()));
    Word sol = u.inverse() * v.inverse();
    image = syl[pos].exp == 1 ? sol : sol.inverse();
  } else if (others_use_x) {
    throw Error(Errc::precondition, "elimination of " + P.pres.gens.names[x] +
                                        " has no finite rewriting: it occurs more than once in the relator and elsewhere");
  }
  auto step = detail::open_step(StepKind::pair_elim, "(" + P.pres.gens.names[x] + ", r" + std::to_string(ri + 1) + ")", P);
  auto Q = detail::drop_generators(P, {x}, {image}, {ri});
  detail::close_step(step, Q);
  auto total = P.WR();
  step.checks.push_back({"W(r) = W(x)", true, to_string(P.W[x])});
  step.checks.push_back({"W(X') = W(X) - W(x)", step.wx_after == step.wx_before - P.W[x], ""});
  step.checks.push_back(detail::le_check("W(R') <= W(R) - W(r)", step.wr_after, total.value - wr.value, total.exact));
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

struct DescentResult {
  WeightedPresentation P;
  TransformLog log;
  std::vector<long> degrees;  // D(x) of each descent generator, in order
  bool stalled = false;
  std::string stall_reason;
};

/// Descends along a chain of index-p characters (each on the then-current generators),
/// then optionally eliminates pairs until every generator has degree >= m.
inline DescentResult descend_chain(const WeightedPresentation& P, const std::vector<Character>& chain,
                                   std::optional<long> m = std::nullopt, std::size_t N = 16) {
  if (!P.is_integral()) throw Error(Errc::precondition, "descend_chain needs a (D, t0) presentation");
  DescentResult res{P, {}, {}, false, ""};
  const Rational t0 = *P.t0;
  const std::uint32_t p = P.p();
  for (std::size_t k = 0; k < chain.size(); ++k) {
    auto& cur = res.P;
    for (std::size_t i = 0; i < cur.relators().size(); ++i)
      if (chain[k].eval(cur.relators()[i], p) != 0)
        throw Error(Errc::precondition, "invalid chain: character " + std::to_string(k + 1) + " does not annihilate relator " +
                                            std::to_string(i + 1));
    auto ad = subgroup_adapt(cur, chain[k]);
    long n = ad.t.P.D[ad.j];
    auto desc = p_descent(ad.t.P, ad.j);
    Rational factor = (1 - qpow(t0, static_cast<unsigned long>(p * n))) / (1 - qpow(t0, static_cast<unsigned long>(n)));
    auto& st = desc.log.steps.back();
    st.checks.push_back(detail::le_check("value' <= value * (1-t0^{pn})/(1-t0^n) at t0", desc.P.ggs_value(),
                                         cur.ggs_value() * factor, cur.WR().exact));
    IntSeries geo(N);
    for (std::size_t e = 0; e < p && e * static_cast<std::size_t>(n) <= N; ++e) geo[e * static_cast<std::size_t>(n)] = 1;
    auto lhs = desc.P.series(N).partial_sums(), rhs = (cur.series(N) * geo).partial_sums();
    auto bad = rhs.first_below(lhs);
    st.checks.push_back({"descent series inequality through degree " + std::to_string(N), !bad,
                         bad ? "fails at " + std::to_string(*bad) : ""});
    res.log.append(ad.t.log);
    res.log.append(desc.log);
    res.degrees.push_back(n);
    res.P = std::move(desc.P);
  }
  if (!m) return res;
  while (true) {
    auto& cur = res.P;
    std::optional<std::uint32_t> x;
    for (std::uint32_t i = 0; i < cur.rank(); ++i)
      if (cur.D[i] < *m && (!x || cur.D[i] < cur.D[*x])) x = i;
    if (!x) break;
    auto& degs = cur.relator_degrees();
    std::string why = "no relator linear in " + cur.pres.gens.names[*x] + " of matching degree";
    bool done = false;
    for (std::size_t r = 0; r < cur.relators().size() && !done; ++r) {
      if (!is_linear_in(cur.relators()[r], *x, p) || !degs[r].is_exact() || degs[r].value != cur.D[*x]) continue;
      try {
        auto before = cur.series(N).partial_sums();
        auto t = pair_elimination(cur, *x, r);
        auto after = t.P.series(N).partial_sums();
        auto bad = before.first_below(after);
        t.log.steps.back().checks.push_back({"series does not increase through degree " + std::to_string(N), !bad,
                                             bad ? "fails at " + std::to_string(*bad) : ""});
        res.log.append(t.log);
        res.P = std::move(t.P);
        done = true;
      } catch (const Error& e) {
        why = e.what();
      }
    }
    if (!done) {
      res.stalled = true;
      res.stall_reason = why;
      break;
    }
  }
  return res;
}

}  // namespace ggs
