#pragma once
// Uniform non-amenability constants and subgroup-growth lower bounds, derived step by step in a
// BoundLedger.  Logarithms are exact integer searches over rational powers.

#include "ggs/field.hpp"
#include "ggs/ledger.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ggs {

// ---------------------------------------------------------------------------------------------
// Kazhdan, Kazhdan L^2 and Cheeger constants along quotient and subgroup relations

enum class GroupRelation {
  quotient,     // `source` is a quotient of `group` (S maps onto S')
  subgroup,     // `source` is a subgroup of `group` generated by Y, depth_S(Y) = L
  regenerated,  // `source` is `group` itself with the generating set Y, depth_S(Y) = L
};

struct GroupFact {
  std::string group;
  std::string constant;  // kappa, alpha or h
  Quantity value;
  std::string ref = "input";
};

struct GroupLink {
  GroupRelation kind;
  std::string group, source;
  std::size_t Y = 0;
  Rational L = 0;
};

struct AmenabilityInput {
  std::set<std::string> infinite;
  std::vector<GroupFact> facts;
  std::vector<GroupLink> links;
};

namespace detail {

inline std::vector<std::string> link_order(const AmenabilityInput& in) {
  std::set<std::string> groups;
  std::map<std::string, std::set<std::string>> deps;
  for (auto& f : in.facts) {
    if (f.constant != "kappa" && f.constant != "alpha" && f.constant != "h")
      throw Error(Errc::malformed, "unknown constant '" + f.constant + "'");
    if (f.value.is_truth() || !(f.value.lower() > 0))
      throw Error(Errc::malformed, f.constant + "(" + f.group + ") must be positive");
    groups.insert(f.group);
  }
  for (auto& l : in.links) {
    if (l.group == l.source) throw Error(Errc::malformed, "inconsistent provenance graph: " + l.group + " linked to itself");
    if (l.kind != GroupRelation::quotient && (l.Y < 1 || l.L < 1))
      throw Error(Errc::malformed, "inconsistent provenance graph: " + l.source + " in " + l.group + " needs |Y| >= 1 and L >= 1");
    groups.insert(l.group);
    groups.insert(l.source);
    deps[l.group].insert(l.source);
  }
  for (auto& g : in.infinite) groups.insert(g);
  std::vector<std::string> order;
  std::map<std::string, int> state;
  std::function<void(const std::string&)> visit = [&](const std::string& g) {
    if (state[g] == 2) return;
    if (state[g] == 1) throw Error(Errc::malformed, "inconsistent provenance graph: cycle through " + g);
    state[g] = 1;
    for (auto& d : deps[g]) visit(d);
    state[g] = 2;
    order.push_back(g);
  };
  for (auto& g : groups) visit(g);
  return order;
}

inline std::string cname(const std::string& c, const std::string& g) { return c + "(" + g + ")"; }

}  // namespace detail

/// Propagates every lower bound for kappa, alpha and h that the given relations imply.  The
/// best bound for each constant of each group is the ledger entry "alpha(G)" and so on.
inline BoundLedger amenability_chain(const AmenabilityInput& in) {
  auto order = detail::link_order(in);
  BoundLedger L;
  for (auto& g : order) {
    std::map<std::string, std::vector<std::pair<std::string, Quantity>>> cand;
    auto record = [&](const std::string& c, const std::string& name, const std::string& rule, const std::string& ref,
                      std::vector<std::pair<std::string, Quantity>> inputs) {
      L.record(name, rule, ref, std::move(inputs));
      cand[c].push_back(L.ref(name));
    };
    auto finish = [&](const std::string& c) {
      auto it = cand.find(c);
      if (it == cand.end()) return;
      L.record(detail::cname(c, g), it->second.size() == 1 ? "copy" : "maximum", "best lower bound", it->second);
    };
    std::size_t nfact = 0;
    for (auto& f : in.facts)
      if (f.group == g) {
        std::string n = detail::cname(f.constant, g) + " given #" + std::to_string(++nfact);
        L.given(n, f.value, f.ref);
        cand[f.constant].push_back(L.ref(n));
      }
    for (auto& l : in.links) {
      if (l.group != g || l.kind != GroupRelation::regenerated || !L.has(detail::cname("kappa", l.source))) continue;
      std::string depth = "depth of " + l.source + " in " + g;
      L.given(depth, Quantity::exact(l.L), "supplied word lengths");
      record("kappa", detail::cname("kappa", g) + " from " + detail::cname("kappa", l.source), "depth-division",
             "kappa(G,S;V) >= kappa(G,Y;V) / depth_S(Y)", {L.ref(detail::cname("kappa", l.source)), L.ref(depth)});
    }
    finish("kappa");
    if (in.infinite.count(g) && L.has(detail::cname("kappa", g)))
      record("alpha", detail::cname("alpha", g) + " from " + detail::cname("kappa", g), "lower-end",
             "alpha(G,S) >= kappa(G,S) for infinite G", {L.ref(detail::cname("kappa", g))});
    for (auto& l : in.links) {
      if (l.group != g) continue;
      for (const char* c : {"alpha", "h"}) {
        std::string src = detail::cname(c, l.source);
        if (!L.has(src)) continue;
        std::string name = detail::cname(c, g) + " from " + src;
        if (l.kind == GroupRelation::quotient) {
          record(c, name, "copy", std::string(c) + "(G,S) >= " + c + "(G',S') for a quotient G'", {L.ref(src)});
          continue;
        }
        std::string y = "|Y| of " + l.source + " in " + g, d = "depth of " + l.source + " in " + g;
        if (!L.has(y)) L.given(y, Quantity::exact(Rational(static_cast<unsigned long>(l.Y))), "generating set");
        if (!L.has(d)) L.given(d, Quantity::exact(l.L), "supplied word lengths");
        if (std::string(c) == "alpha")
          record(c, name, "subgroup-alpha", "alpha(G,S) >= alpha(D,Y) / (sqrt|Y| L)", {L.ref(src), L.ref(y), L.ref(d)});
        else
          record(c, name, "subgroup-h", "h(G,S) >= h(D,Y) / (|Y| L + 1)", {L.ref(src), L.ref(y), L.ref(d)});
      }
    }
    finish("alpha");
    if (L.has(detail::cname("alpha", g)))
      record("h", detail::cname("h", g) + " from " + detail::cname("alpha", g), "cheeger-from-alpha",
             "h(G,S) >= alpha(G,S)^2 / 2", {L.ref(detail::cname("alpha", g))});
    finish("h");
  }
  return L;
}

// ---------------------------------------------------------------------------------------------
// Index and Cheeger constants for a GS presentation

/// k0 = least k with rho^k >= M/mu, N = sum_{i<=k0} |X|^i, and the chain down to the lower bound
/// C for alpha of a dense subgroup (entry "C") and h >= C^2/2 (entry "h").
inline BoundLedger cheeger_constants(const Rational& mu, const Rational& rho, const Rational& M, std::size_t nX, std::uint32_t p) {
  if (mu <= 0) throw Error(Errc::precondition, "mu must be positive");
  if (rho <= 1) throw Error(Errc::precondition, "rho must exceed 1");
  if (M < 600000) throw Error(Errc::precondition, "M must be at least 6*10^5");
  if (nX < 1) throw Error(Errc::precondition, "|X| must be at least 1");
  if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
  BoundLedger L;
  L.given("mu", Quantity::exact(mu));
  L.given("rho", Quantity::exact(rho));
  L.given("M", Quantity::exact(M));
  L.given("|X|", Quantity::exact(Rational(static_cast<unsigned long>(nX))));
  L.given("p", Quantity::exact(Rational(p)));
  L.record("M/mu", "ratio", "", {L.ref("M"), L.ref("mu")});
  L.record("k0", "least-power", "least k with rho^k >= M/mu", {L.ref("rho"), L.ref("M/mu")});
  L.record("N", "geometric-sum", "N = sum_{i=0}^{k0} |X|^i", {L.ref("|X|"), L.ref("k0")});
  L.record("log_p [G:H]", "copy", "[G:G_{k0+1}] <= p^N along the Zassenhaus series", {L.ref("N")});
  L.record("a", "log-ceiling", "|X| <= p^a", {L.ref("p"), L.ref("|X|")});
  L.record("N+a", "sum-bound", "", {L.ref("N"), L.ref("a")});
  L.record("|X''|", "power", "|X''| < p^N |X| <= p^(N+a)", {L.ref("p"), L.ref("N+a")});
  L.record("theta(X'',W'')", "power", "theta <= p^N: each p-descent multiplies theta by at most p", {L.ref("p"), L.ref("N")});
  L.record("log_p(N+a)", "log-ceiling", "", {L.ref("p"), L.ref("N+a")});
  L.record("N+log_p(N+a)", "sum-bound", "", {L.ref("N"), L.ref("log_p(N+a)")});
  L.record("log_p |X''|^m", "power", "(N+a) p^N <= p^(N + log_p(N+a)), m = ceil(theta) <= p^N", {L.ref("p"), L.ref("N+log_p(N+a)")});
  L.given("2", Quantity::exact(2));
  L.record("log_p [H:K]", "scaled-power", "log_p[H:K] <= sum_{i=0}^m |X''|^i <= 2 |X''|^m",
           {L.ref("2"), L.ref("p"), L.ref("log_p |X''|^m")});
  L.record("log_p [G:K]", "sum-bound", "[G:K] = [G:H][H:K]", {L.ref("log_p [H:K]"), L.ref("log_p [G:H]")});
  L.given("3/2", Quantity::exact(make_q(3, 2)));
  L.record("log_p |X''|^(3/2)", "scale", "", {L.ref("N+a"), L.ref("3/2")});
  L.record("E", "sum-bound", "log_p(|X''|^(3/2) [G:K])", {L.ref("log_p [G:K]"), L.ref("log_p |X''|^(3/2)")});
  L.given("-1", Quantity::exact(-1));
  L.record("-E", "scale", "", {L.ref("E"), L.ref("-1")});
  L.given("1/(25p)", Quantity::exact(Rational(1, 25 * static_cast<unsigned long>(p))));
  L.record("C", "scaled-power", "alpha(Gamma) >= 1 / (25 p |X''|^(3/2) [G:K])", {L.ref("1/(25p)"), L.ref("p"), L.ref("-E")});
  L.record("h", "cheeger-from-alpha", "h(Gamma) >= alpha(Gamma)^2 / 2", {L.ref("C")});
  return L;
}

/// Submultiplicative sequences a_{n+m} <= a_n a_m with a_n >= r^n along a prefix.  Returns the
/// first index violating either property, or a.size() when none does.
inline std::size_t growth_rule_violation(const std::vector<Int>& a, const Rational& r) {
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (Rational(a[n]) < qpow(r, n)) return n;
    for (std::size_t m = 1; m + n < a.size() && m <= n; ++m)
      if (a[n + m] > a[n] * a[m]) return n + m;
  }
  return a.size();
}

// ---------------------------------------------------------------------------------------------
// Subgroup growth

struct GrowthProfile {
  std::vector<Int> c;  // c_1, c_2, ... (c[0] is c_1)
  Rational t0, t1;

  Rational eps() const { return std::min<Rational>(t1 / 2, (t0 - t1) / 2); }
  void validate() const {
    if (!(0 < t1 && t1 < t0 && t0 < 1)) throw Error(Errc::precondition, "need 0 < t1 < t0 < 1");
    for (auto& x : c)
      if (x < 0) throw Error(Errc::precondition, "filtration dimensions must be non-negative");
  }
  /// log_p |G/G_n| = c_1 + ... + c_{n-1}.
  Int log_index(std::size_t n) const {
    Int s = 0;
    for (std::size_t i = 1; i < n && i <= c.size(); ++i) s += c[i - 1];
    return s;
  }
};

/// Values at t0 of the series the chain starts from: H_X, H_R of the presentation and H_X', H_R'
/// of the presentation of G_n from the descent.
struct GrowthInputs {
  Rational HX, HR, HXn, HRn;
};

inline std::vector<std::string> growth_hypothesis_failures(const GrowthProfile& g, std::uint32_t p, std::size_t n,
                                                            const GrowthInputs& h) {
  std::vector<std::string> bad;
  if (!(0 < g.t1 && g.t1 < g.t0 && g.t0 < 1)) {
    bad.push_back("0 < t1 < t0 < 1");
    return bad;
  }
  if (n < 2 || n - 1 > g.c.size()) {
    bad.push_back("2 <= n <= " + std::to_string(g.c.size() + 1));
    return bad;
  }
  Rational e = g.eps();
  if (Rational(g.c[n - 2]) < qpow(1 / (g.t1 + e), n - 1)) bad.push_back("c_{n-1} >= (1/(t1+eps))^(n-1)");
  if (Rational(g.log_index(n)) > qpow(1 / (g.t1 - e), n - 1)) bad.push_back("log_p|G/G_n| <= (1/(t1-eps))^(n-1)");
  if (h.HX - h.HR - 1 <= 0) bad.push_back("H_X(t0) - H_R(t0) - 1 > 0");
  Rational prod = 1;
  for (std::size_t i = 1; i < n; ++i)
    prod *= qpow((1 - qpow(g.t0, p * i)) / (1 - qpow(g.t0, i)), g.c[i - 1].get_ui());
  if (h.HXn - h.HRn - 1 < (h.HX - h.HR - 1) * prod) bad.push_back("H_X'(t0) - H_R'(t0) - 1 >= (H_X(t0) - H_R(t0) - 1) prod");
  return bad;
}

/// The chain d(G_n) - 1 >= (H_X - H_R - 1) prod >= (H_X - H_R - 1) 2^((t0/(t1+eps))^(n-1)), the
/// index-p subgroup count of G_n at m = p |G/G_n|, and the exponent beta with
/// log2 log2 a_m(G) >= (log2 m)^beta.  Beta is searched over multiples of 1/den.
inline BoundLedger subgroup_growth_bound(const GrowthProfile& g, std::uint32_t p, std::size_t n, const GrowthInputs& h,
                                         unsigned long den = 100) {
  auto bad = growth_hypothesis_failures(g, p, n, h);
  if (!bad.empty()) {
    std::string msg = "growth hypotheses fail:";
    for (auto& b : bad) msg += " [" + b + "]";
    throw Error(Errc::unsatisfiable, msg);
  }
  BoundLedger L;
  L.given("t0", Quantity::exact(g.t0));
  L.given("t1", Quantity::exact(g.t1));
  L.given("p", Quantity::exact(Rational(p)));
  L.given("n", Quantity::exact(Rational(static_cast<unsigned long>(n))));
  L.record("eps", "min-half-gap", "eps = min{t1/2, (t0-t1)/2}", {L.ref("t0"), L.ref("t1")});
  std::vector<std::pair<std::string, Quantity>> prod_in{L.ref("t0"), L.ref("p")};
  for (std::size_t i = 1; i < n; ++i) {
    std::string ci = "c_" + std::to_string(i);
    L.given(ci, Quantity::exact(Rational(g.c[i - 1])), "filtration dimensions");
    prod_in.push_back(L.ref(ci));
  }
  std::vector<std::pair<std::string, Quantity>> idx_in;
  for (std::size_t i = 1; i < n; ++i) idx_in.push_back(L.ref("c_" + std::to_string(i)));
  L.record("log_p |G/G_n|", "sum", "|G/G_n| = p^(c_1 + ... + c_{n-1})", idx_in);
  L.given("H_X(t0)", Quantity::exact(h.HX));
  L.given("H_R(t0)", Quantity::exact(h.HR));
  L.given("H_X'(t0)", Quantity::exact(h.HXn));
  L.given("H_R'(t0)", Quantity::exact(h.HRn));
  L.given("1", Quantity::exact(1));
  L.record("H_X - H_R", "difference", "", {L.ref("H_X(t0)"), L.ref("H_R(t0)")});
  L.record("H_X - H_R - 1", "difference", "", {L.ref("H_X - H_R"), L.ref("1")});
  L.record("d(G_n) >=", "difference", "d(G_n) >= H_X'(t0) - H_R'(t0)", {L.ref("H_X'(t0)"), L.ref("H_R'(t0)")});
  L.record("d(G_n) - 1 >=", "difference", "", {L.ref("d(G_n) >="), L.ref("1")});
  L.record("prod", "descent-product", "prod_{i<n} ((1 - t0^(p i)) / (1 - t0^i))^(c_i)", prod_in);
  L.record("descent bound", "product", "keyformula at t0", {L.ref("H_X - H_R - 1"), L.ref("prod")});
  L.record("descent bound <= d(G_n) - 1", "at-most", "keyformula", {L.ref("descent bound"), L.ref("d(G_n) - 1 >=")});
  std::string cn = "c_" + std::to_string(n - 1);
  L.record("(1+t0^(n-1))^c_{n-1}", "one-plus-power", "", {L.ref("t0"), L.ref("n"), L.ref(cn)});
  L.record("prod >= (1+t0^(n-1))^c_{n-1}", "at-most", "the i = n-1 factor alone", {L.ref("(1+t0^(n-1))^c_{n-1}"), L.ref("prod")});
  L.record("t1+eps", "sum", "", {L.ref("t1"), L.ref("eps")});
  L.record("t0/(t1+eps)", "ratio", "", {L.ref("t0"), L.ref("t1+eps")});
  L.given("n-1", Quantity::exact(Rational(static_cast<unsigned long>(n - 1))));
  L.record("(t0/(t1+eps))^(n-1)", "rational-power", "", {L.ref("t0/(t1+eps)"), L.ref("n-1")});
  L.record("(1+t0^(n-1))^c_{n-1} >= 2^(t0/(t1+eps))^(n-1)", "power-of-two-bound", "exact rational powering",
           {L.ref("(1+t0^(n-1))^c_{n-1}"), L.ref("(t0/(t1+eps))^(n-1)")});
  L.record("t0^(n-1)", "rational-power", "", {L.ref("t0"), L.ref("n-1")});
  L.record("(1+t0^(n-1))^ceil(1/t0^(n-1)) >= 2", "binomial-two", "1 + ceil(1/s) s >= 2", {L.ref("t0^(n-1)")});
  L.record("d(G_n) - 1 lower", "maximum", "best of both bounds", {L.ref("d(G_n) - 1 >="), L.ref("descent bound")});
  L.record("d(G_n)", "sum", "", {L.ref("d(G_n) - 1 lower"), L.ref("1")});
  L.record("d", "ceil", "d(G_n) is an integer", {L.ref("d(G_n)")});
  L.record("a_m(G) >=", "hyperplane-count", "index-p subgroups of G_n: (p^d - 1)/(p - 1) hyperplanes of (Z/p)^d",
           {L.ref("p"), L.ref("d")});
  L.record("log_p m", "sum", "m = p |G/G_n|", {L.ref("log_p |G/G_n|"), L.ref("1")});
  L.record("m", "power", "", {L.ref("p"), L.ref("log_p m")});
  L.given("base 2", Quantity::exact(2));
  L.record("log2 m <=", "log-ceiling", "", {L.ref("base 2"), L.ref("m")});
  L.record("floor log2 a_m", "floor-log2", "", {L.ref("a_m(G) >=")});
  L.record("floor log2 log2 a_m", "floor-log2", "", {L.ref("floor log2 a_m")});
  L.given("den", Quantity::exact(Rational(den)));
  L.record("beta", "growth-exponent", "log2 log2 a_m(G) >= (log2 m)^beta",
           {L.ref("floor log2 log2 a_m"), L.ref("log2 m <="), L.ref("den")});
  return L;
}

}  // namespace ggs
