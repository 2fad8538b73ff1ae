#pragma once
// Contractions of weight functions, the descent-until-margin loop and the Pres(w, delta, eps)
// normal form.

#include "ggs/transform.hpp"

#include <functional>

namespace ggs {

struct PresCondition {
  Rational w, delta, eps;

  void validate() const {
    if (w <= 0) throw Error(Errc::precondition, "w must be positive");
    if (delta <= 0 || delta >= 1) throw Error(Errc::precondition, "delta must lie in (0,1)");
    if (eps <= 0 || eps >= 1) throw Error(Errc::precondition, "eps must lie in (0,1)");
  }
};

/// W' = W / c.
inline std::vector<Rational> contract_weights(const std::vector<Rational>& W, const Rational& c) {
  if (c < 1) throw Error(Errc::precondition, "invalid contraction: c = " + to_string(c) + " < 1");
  std::vector<Rational> out;
  out.reserve(W.size());
  for (auto& w : W) out.push_back(w / c);
  return out;
}

/// The c-contraction of a weighted presentation, logged with the bounds it must satisfy.
inline Transformed contract(const WeightedPresentation& P, const Rational& c) {
  auto step = detail::open_step(StepKind::contraction, "c = " + to_string(c), P);
  WeightedPresentation Q = P;
  Q.W = contract_weights(P.W, c);
  Q.D.clear();
  Q.t0.reset();
  Q.floor.reset();
  Q.invalidate();
  detail::close_step(step, Q);
  step.checks.push_back({"W'(X) = W(X)/c", step.wx_after == step.wx_before / c, to_string(step.wx_after)});
  const auto& before = P.relator_weights();
  const auto& after = Q.relator_weights();
  bool a = true, b = true;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].kind == WeightValue::below) continue;
    a = a && after[i].upper() <= before[i].upper() / c;
    if (!is_linear(P.relators()[i], P.rank(), P.p())) b = b && after[i].upper() <= before[i].upper() / (c * c);
  }
  step.checks.push_back({"W'(r) <= W(r)/c", a, ""});
  step.checks.push_back({"W'(r) <= W(r)/c^2 for non-linear r", b, ""});
  Transformed out{std::move(Q), {}};
  out.log.steps.push_back(std::move(step));
  return out;
}

struct BadRelator {
  std::size_t r;    // relator index
  std::uint32_t x;  // paired generator
  Rational lambda;  // W(r) / W(x)
};

struct RelatorClassification {
  std::vector<BadRelator> bad;  // in pairing order
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad1, bad2;  // positions in `bad`, filled by the contraction split

  std::string render(const WeightedPresentation& P) const {
    std::ostringstream os;
    os << "R_bad:";
    for (auto& b : bad) os << " (r" << b.r + 1 << ", " << P.pres.gens.names[b.x] << ", lambda=" << to_string(b.lambda) << ")";
    os << "; R_good: " << good.size();
    return os.str();
  }
};

struct Optimized {
  WeightedPresentation P;
  RelatorClassification cls;
  TransformLog log;
};

/// Relator changes r_i -> r_i r_1^{k_i} until each linear relator r_i is paired with a generator
/// x_i of maximal weight among those it is linear in, and no later relator is linear in x_i.
inline Optimized optimize_linear_relators(const WeightedPresentation& P) {
  const std::uint32_t p = P.p();
  Optimized o{P, {}, {}};
  auto wr0 = P.WR();
  if (!wr0.exact) throw Error(Errc::precondition, "relator weights must be exact");
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < P.relators().size(); ++i)
    if (!linear_part(P.relators()[i], p).empty()) remaining.push_back(i);

  while (!remaining.empty()) {
    const auto& rw = o.P.relator_weights();
    std::size_t r1 = remaining[0];
    for (auto i : remaining)
      if (rw[i].value < rw[r1].value) r1 = i;
    auto lin = linear_part(o.P.relators()[r1], p);
    std::uint32_t x1 = lin.begin()->first;
    for (auto& [g, e] : lin)
      if (o.P.W[g] > o.P.W[x1]) x1 = g;
    std::uint64_t a1inv = 1;
    for (std::uint64_t b = lin[x1], e = p - 2; e; e >>= 1, b = b * b % p)
      if (e & 1) a1inv = a1inv * b % p;
    std::vector<RelatorEdit> edits;
    for (auto i : remaining) {
      if (i == r1) continue;
      auto li = linear_part(o.P.relators()[i], p);
      auto it = li.find(x1);
      if (it == li.end()) continue;
      edits.push_back({i, r1, static_cast<long long>((p - it->second) * a1inv % p)});
    }
    o.cls.bad.push_back({r1, x1, rw[r1].value / o.P.W[x1]});
    if (!edits.empty()) {
      auto t = change_relators(o.P, edits);
      o.log.append(t.log);
      o.P = std::move(t.P);
    }
    std::vector<std::size_t> next;
    for (auto i : remaining)
      if (i != r1 && !linear_part(o.P.relators()[i], p).empty()) next.push_back(i);
    remaining = std::move(next);
  }

  // Postconditions (i)-(iii) and lambda >= 1, rechecked on the final relators.
  std::set<std::size_t> badset;
  for (auto& b : o.cls.bad) badset.insert(b.r);
  for (std::size_t i = 0; i < o.P.relators().size(); ++i)
    if (!badset.count(i)) o.cls.good.push_back(i);
  bool c1 = true, c2 = true, c3 = true, c4 = true;
  const auto& rw = o.P.relator_weights();
  for (std::size_t i = 0; i < o.cls.bad.size(); ++i) {
    auto& b = o.cls.bad[i];
    auto lin = linear_part(o.P.relators()[b.r], p);
    c1 = c1 && lin.count(b.x);
    for (std::size_t j = 0; j < i; ++j) c1 = c1 && !lin.count(o.cls.bad[j].x);
    for (auto& [g, e] : lin) c2 = c2 && o.P.W[g] <= o.P.W[b.x];
    auto lw = localize(o.P.relators()[b.r]);
    std::vector<Rational> Wl;
    for (auto g : lw.globals) Wl.push_back(o.P.W[g]);
    auto wl = word_weight_exact(linear_decompose(lw.word, lw.globals.size(), p).f_L, Wl, p);
    c3 = c3 && wl.is_exact() && wl.value == o.P.W[b.x];
    b.lambda = rw[b.r].value / o.P.W[b.x];
    c4 = c4 && b.lambda >= 1;
  }
  LogStep s = detail::open_step(StepKind::rel_change, "classification: " + o.cls.render(o.P), o.P);
  detail::close_step(s, o.P);
  s.checks.push_back({"(i) r_i linear in x_i and in no earlier x_j", c1, ""});
  s.checks.push_back({"(ii) x_i has maximal weight among linear generators of r_i", c2, ""});
  s.checks.push_back({"(iii) W((r_i)_L) = W(x_i)", c3, ""});
  s.checks.push_back({"lambda_i >= 1", c4, ""});
  s.checks.push_back(detail::le_check("W(R) not increased", s.wr_after, wr0.value, true));
  o.log.steps.push_back(std::move(s));
  return o;
}

struct ContractResult {
  WeightedPresentation P;
  TransformLog log;
  RelatorClassification cls;
  Rational c = 1, c1 = 1;
};

namespace detail {

inline void require_margin(const WeightedPresentation& P, const Rational& M, const Rational& need, const std::string& what) {
  if (!(M > need)) throw Error(Errc::precondition, "margin M = " + to_string(M) + " must exceed " + what + " = " + to_string(need));
  auto wr = P.WR();
  Rational v = 1 - P.WX() + wr.value;
  if (!wr.exact) throw Error(Errc::precondition, "relator weights are not exact, so 1 - W(X) + W(R) < -M cannot be certified");
  if (!(v < -M)) throw Error(Errc::precondition, "1 - W(X) + W(R) = " + to_string(v) + " is not < -M = " + to_string(-M));
}

inline Rational max_weight(const std::vector<Rational>& W) {
  Rational m = 0;
  for (auto& w : W) m = std::max(m, w);
  return m;
}

}  // namespace detail

/// A presentation with W'(X') = w, W'(R') < delta and every generator weight < eps.
inline ContractResult deepdescent4_a(const WeightedPresentation& P, const Rational& M, const PresCondition& target) {
  target.validate();
  const Rational& w = target.w;
  detail::require_margin(P, M, std::max<Rational>(w * w / target.delta, w / target.eps), "max(w^2/delta, w/eps)");
  const std::uint32_t p = P.p();
  auto WR0 = P.WR().value;
  auto WX0 = P.WX();

  ContractResult res{P, {}, {}, 1, 1};
  auto opt = optimize_linear_relators(P);
  res.log.append(opt.log);
  res.cls = opt.cls;
  WeightedPresentation cur = std::move(opt.P);

  Rational xbad = 0;
  for (auto& b : res.cls.bad) xbad += cur.W[b.x];
  res.c = (cur.WX() - xbad) / w;
  if (!(res.c > 1)) throw Error(Errc::precondition, "margin accounting failure: c = W(X_good)/w = " + to_string(res.c) + " is not > 1");
  for (std::size_t i = 0; i < res.cls.bad.size(); ++i) (res.cls.bad[i].lambda <= res.c ? res.cls.bad1 : res.cls.bad2).push_back(i);

  auto a = contract(cur, res.c);
  {
    auto& st = a.log.steps.back();
    const auto& before = cur.relator_weights();
    const auto& after = a.P.relator_weights();
    std::set<std::size_t> in1;
    for (auto k : res.cls.bad1) in1.insert(res.cls.bad[k].r);
    bool q1 = true, q2 = true;
    for (std::size_t i = 0; i < before.size(); ++i)
      if (!in1.count(i)) q1 = q1 && after[i].upper() <= before[i].value / (res.c * res.c);
    for (auto k : res.cls.bad1) {
      auto& b = res.cls.bad[k];
      q2 = q2 && after[b.r].is_exact() && after[b.r].value == a.P.W[b.x];
    }
    st.checks.push_back({"W_a(r) <= W(r)/c^2 on R_good and R_bad^2", q1, ""});
    st.checks.push_back({"W_a(r_i) = W_a(x_i) on R_bad^1", q2, ""});
    st.checks.push_back({"W_a(X_good) = w", a.P.WX() - xbad / res.c == w, ""});
  }
  res.log.append(a.log);
  cur = std::move(a.P);

  if (!res.cls.bad1.empty()) {
    // X~ = X \ X_bad^1 u R_bad^1; the transition matrix on X_bad^1 must be triangular.
    bool tri = true;
    std::vector<Word> newX;
    for (std::uint32_t i = 0; i < cur.rank(); ++i) newX.push_back(Word::gen(i));
    auto names = cur.pres.gens.names;
    std::set<std::string> taken(names.begin(), names.end());
    std::vector<std::uint32_t> C;
    for (std::size_t k = 0; k < res.cls.bad1.size(); ++k) {
      auto& b = res.cls.bad[res.cls.bad1[k]];
      auto lin = linear_part(cur.relators()[b.r], p);
      tri = tri && lin.count(b.x);
      for (std::size_t j = 0; j < k; ++j) tri = tri && !lin.count(res.cls.bad[res.cls.bad1[j]].x);
      newX[b.x] = cur.relators()[b.r];
      names[b.x] = detail::fresh_name("r" + std::to_string(b.r + 1), taken);
      taken.insert(names[b.x]);
      C.push_back(b.x);
    }
    auto g = change_generators(cur, newX, names);
    g.log.steps.back().checks.push_back({"transition matrix upper-triangular with nonzero diagonal on X_bad^1", tri, ""});
    res.log.append(g.log);
    auto cl = cleanup(g.P, C);
    res.log.append(cl.log);
    cur = std::move(cl.P);
  }

  Rational ratio = cur.WR().value / cur.WX();
  LogStep est = detail::open_step(StepKind::contraction, "estimate before the second contraction", cur);
  detail::close_step(est, cur);
  est.checks.push_back({"W_a(R')/W_a(X') < 1/c", ratio < 1 / res.c, to_string(ratio)});
  est.checks.push_back({"W(R) < W(X) on input", WR0 < WX0, ""});
  res.log.steps.push_back(std::move(est));

  res.c1 = cur.WX() / w;
  auto fin = contract(cur, res.c1);
  {
    auto& st = fin.log.steps.back();
    auto wr = fin.P.WR();
    st.checks.push_back({"W'(X') = w", fin.P.WX() == w, to_string(fin.P.WX())});
    st.checks.push_back({"W'(R') < w^2/M < delta", wr.exact && wr.value < w * w / M && w * w / M < target.delta, to_string(wr.value)});
    auto mx = detail::max_weight(fin.P.W);
    st.checks.push_back({"max W'(x) < w/M < eps", mx < w / M && w / M < target.eps, to_string(mx)});
  }
  res.log.append(fin.log);
  res.P = std::move(fin.P);
  return res;
}

/// Integral weights contracted by a rational factor: W(x) = t^D(x) / c.
struct ContractedIntegral {
  std::vector<long> D;
  Rational t;
  Rational c = 1;
};

struct PresCertificate {
  Rational wx, wr;
  bool wr_exact = true;
  bool wx_ok = false, wr_ok = false;
  std::optional<Rational> image_sum;  // upper bound for the sum over Im(W)
  Verdict image = Verdict::unknown;
  Verdict verdict = Verdict::unknown;
  std::string image_method;
};

namespace detail {

/// Upper bound for the sum of distinct values t^n c^-l, where n is a sum of l generator degrees.
/// Values >= cutoff are enumerated and deduplicated; the rest are bounded by geometric tails.
inline Rational contracted_image_sum(const std::vector<long>& D, const Rational& t, const Rational& c, const Rational& cutoff) {
  std::set<long> degs(D.begin(), D.end());
  const long N = *degs.begin();
  const Rational q = qpow(t, static_cast<unsigned long>(N)) / c;
  std::set<Rational> seen;
  Rational tail = 0;
  std::set<long> sums{0};
  auto value = [&](long n, long l) -> Rational { return qpow(t, static_cast<unsigned long>(n)) / qpow(c, static_cast<unsigned long>(l)); };
  for (long l = 1;; ++l) {
    if (value(N * l, l) < cutoff) {
      // All remaining lengths: sum over l' >= l and n >= N l' of t^n c^-l' = q^l / ((1-q)(1-t)).
      tail += qpow(q, static_cast<unsigned long>(l)) / ((1 - q) * (1 - t));
      break;
    }
    // A value >= cutoff at length l extends one >= cutoff at length l-1, so only those are kept.
    std::set<long> next;
    for (auto s : sums)
      for (auto d : degs)
        if (value(s + d, l) >= cutoff) next.insert(s + d);
    sums = std::move(next);
    for (auto n : sums) seen.insert(value(n, l));
    long nl = N * l;
    while (value(nl, l) >= cutoff) ++nl;
    tail += value(nl, l) / (1 - t);
  }
  Rational total = tail;
  for (auto& v : seen) total += v;
  return total;
}

}  // namespace detail

/// Checks Pres(w, delta, eps): (a) W(X) = w and W(R) < delta; (b) sum over Im(W) < eps.
inline PresCertificate pres_check(const WeightedPresentation& P, const PresCondition& cond,
                                  const std::optional<ContractedIntegral>& prov = std::nullopt) {
  cond.validate();
  PresCertificate c;
  c.wx = P.WX();
  auto wr = P.WR();
  c.wr = wr.value;
  c.wr_exact = wr.exact;
  c.wx_ok = c.wx == cond.w;
  c.wr_ok = wr.value < cond.delta;
  if (P.is_integral()) {
    long N0 = *std::min_element(P.D.begin(), P.D.end());
    c.image_sum = qpow(*P.t0, static_cast<unsigned long>(N0)) / (1 - *P.t0);
    c.image_method = "integral: t^N0/(1-t)";
  } else if (prov) {
    if (prov->D.size() != P.rank()) throw Error(Errc::malformed, "provenance degrees do not match the generators");
    for (std::size_t i = 0; i < P.rank(); ++i)
      if (P.W[i] != qpow(prov->t, static_cast<unsigned long>(prov->D[i])) / prov->c)
        throw Error(Errc::malformed, "weights do not match the contracted-integral provenance");
    if (prov->c == 1) {
      long N0 = *std::min_element(prov->D.begin(), prov->D.end());
      c.image_sum = qpow(prov->t, static_cast<unsigned long>(N0)) / (1 - prov->t);
      c.image_method = "integral: t^N0/(1-t)";
    } else {
      c.image_sum = detail::contracted_image_sum(prov->D, prov->t, prov->c, cond.eps / 64);
      c.image_method = "contracted integral: enumerated values >= eps/64 plus geometric tail";
    }
  }
  if (c.image_sum) {
    // The integral value is the geometric sum itself; the contracted one is only a bound.
    bool conservative = !P.is_integral() && prov && prov->c != 1;
    c.image = *c.image_sum < cond.eps ? Verdict::satisfied : conservative ? Verdict::unknown : Verdict::not_satisfied;
  }
  Verdict a = !c.wx_ok ? Verdict::not_satisfied : c.wr_ok ? Verdict::satisfied : wr.exact ? Verdict::not_satisfied : Verdict::unknown;
  if (a == Verdict::not_satisfied || c.image == Verdict::not_satisfied)
    c.verdict = Verdict::not_satisfied;
  else if (a == Verdict::satisfied && c.image == Verdict::satisfied)
    c.verdict = Verdict::satisfied;
  return c;
}

struct PresResult {
  WeightedPresentation P;
  TransformLog log;
  ContractResult a;
  ContractedIntegral prov;
  PresCertificate cert;
};

/// Pres(w, delta, eps) via (a) with (2w, delta, eps/2), dyadic rounding and an exact final contraction.
inline PresResult deepdescent4_b(const WeightedPresentation& P, const Rational& M, const PresCondition& target) {
  target.validate();
  const Rational& w = target.w;
  detail::require_margin(P, M, 4 * std::max<Rational>(w * w / target.delta, w / target.eps), "4 max(w^2/delta, w/eps)");
  PresResult res;
  res.a = deepdescent4_a(P, M, {2 * w, target.delta, target.eps / 2});
  res.log = res.a.log;
  const auto& Pa = res.a.P;
  const Rational half(1, 2);

  auto D = integral_approx(Pa.W, half);
  auto integral = Pa;
  integral.W = integral_weights(D, half);
  integral.D = D;
  integral.t0 = half;
  integral.floor.reset();
  integral.invalidate();
  auto step = detail::open_step(StepKind::contraction, "dyadic rounding W'' = (1/2)^D", Pa);
  detail::close_step(step, integral);
  bool bracket = true;
  for (std::size_t i = 0; i < D.size(); ++i) bracket = bracket && Pa.W[i] / 2 < integral.W[i] && integral.W[i] <= Pa.W[i];
  long N = *std::min_element(D.begin(), D.end());
  step.checks.push_back({"W'(x)/2 < (1/2)^D(x) <= W'(x)", bracket, ""});
  step.checks.push_back({"W''(X') > w", integral.WX() > w, to_string(integral.WX())});
  auto wr2 = integral.WR();
  step.checks.push_back({"W''(R') < delta", wr2.exact && wr2.value < target.delta, to_string(wr2.value)});
  step.checks.push_back({"sum over Im(W'') <= (1/2)^(N-1) < eps", qpow(half, static_cast<unsigned long>(N - 1)) < target.eps,
                         "N = " + std::to_string(N)});
  res.log.steps.push_back(std::move(step));

  Rational cp = integral.WX() / w;
  auto fin = contract(integral, cp);
  res.log.append(fin.log);
  res.P = std::move(fin.P);
  res.prov = {D, half, cp};
  res.cert = pres_check(res.P, target, res.prov);
  LogStep cs = detail::open_step(StepKind::contraction, "Pres certificate", res.P);
  detail::close_step(cs, res.P);
  cs.checks.push_back({"W~(X') = w", res.cert.wx_ok, to_string(res.cert.wx)});
  cs.checks.push_back({"W~(R') < delta", res.cert.wr_ok && res.cert.wr_exact, to_string(res.cert.wr)});
  cs.checks.push_back({"sum over Im(W~) < eps", res.cert.image == Verdict::satisfied,
                       res.cert.image_sum ? to_string(*res.cert.image_sum) : "unknown"});
  res.log.steps.push_back(std::move(cs));
  return res;
}

/// Supplies the next index-p character for the current presentation, or nullopt when exhausted.
using ChainSource = std::function<std::optional<Character>(const WeightedPresentation&)>;

/// For a presentation without relators: the character dual to a generator of minimal degree.
inline ChainSource free_chain_source() {
  return [](const WeightedPresentation& P) -> std::optional<Character> {
    if (!P.relators().empty()) return std::nullopt;
    std::uint32_t j = 0;
    for (std::uint32_t i = 1; i < P.rank(); ++i)
      if (P.D[i] < P.D[j]) j = i;
    Character chi{std::vector<std::uint32_t>(P.rank(), 0)};
    chi.values[j] = 1;
    return chi;
  };
}

/// Characters from a fixed list, one per descent.
inline ChainSource fixed_chain_source(std::vector<Character> chain) {
  auto pos = std::make_shared<std::size_t>(0);
  return [chain = std::move(chain), pos](const WeightedPresentation&) -> std::optional<Character> {
    if (*pos >= chain.size()) return std::nullopt;
    return chain[(*pos)++];
  };
}

struct MarginResult {
  WeightedPresentation P;
  TransformLog log;
  std::vector<Rational> mu;           // mu_0, mu_1, ... with mu_n = -(1 - W(X_n) + W(R_n))
  std::vector<Rational> lower_bound;  // mu_0 * prod of descent factors
  std::vector<long> degrees;
  bool reached = false;
};

/// Descends until 1 - W(X) + W(R) < -M, or until the chain source is exhausted (max_steps caps the loop).
inline MarginResult deepdescent3_loop(const WeightedPresentation& P, ChainSource next, const Rational& M,
                                      std::size_t max_steps = 64) {
  if (!P.is_integral()) throw Error(Errc::precondition, "deepdescent3_loop needs a (D, t0) presentation");
  Rational v = P.ggs_value();
  if (!(v < 0)) throw Error(Errc::precondition, "value 1 - W(X) + W(R) = " + to_string(v) + " is not negative");
  MarginResult res{P, {}, {-v}, {-v}, {}, false};
  const Rational t0 = *P.t0;
  const std::uint32_t p = P.p();
  for (std::size_t step = 0; step < max_steps; ++step) {
    if (res.mu.back() > M) {
      res.reached = true;
      break;
    }
    auto chi = next(res.P);
    if (!chi) break;
    auto d = descend_chain(res.P, {*chi});
    long n = d.degrees.at(0);
    Rational factor = (1 - qpow(t0, static_cast<unsigned long>(p * n))) / (1 - qpow(t0, static_cast<unsigned long>(n)));
    Rational mu = -d.P.ggs_value();
    Rational lb = res.lower_bound.back() * factor;
    LogStep s = detail::open_step(StepKind::p_descent, "margin after descent " + std::to_string(step + 1), d.P);
    detail::close_step(s, d.P);
    s.checks.push_back({"mu_n >= mu_0 * prod (1-t0^{pk})/(1-t0^k)", mu >= lb, to_string(mu) + " >= " + to_string(lb)});
    res.log.append(d.log);
    res.log.steps.push_back(std::move(s));
    res.P = std::move(d.P);
    res.mu.push_back(mu);
    res.lower_bound.push_back(lb);
    res.degrees.push_back(n);
  }
  if (res.mu.back() > M) res.reached = true;
  return res;
}

}  // namespace ggs
