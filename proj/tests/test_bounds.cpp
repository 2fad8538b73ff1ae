#include "ggs/bounds.hpp"
#include "ggs/oracles.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace ggs;
using namespace testsupport;

namespace {

GrowthProfile doubling() {
  GrowthProfile g;
  for (unsigned long i = 1; i <= 6; ++i) g.c.push_back(Int(1) << i);
  g.t0 = make_q(3, 4);
  g.t1 = make_q(1, 2);
  return g;
}

Rational descent_product(const GrowthProfile& g, std::uint32_t p, std::size_t n) {
  Rational r = 1;
  for (std::size_t i = 1; i < n; ++i) {
    Rational f = (1 - qpow(g.t0, p * i)) / (1 - qpow(g.t0, i));
    r *= qpow(f, g.c[i - 1].get_ui());
  }
  return r;
}

GrowthInputs doubling_inputs() {
  // Three generators of degree 1 and one relator of degree 2 at t0 = 3/4; the descended
  // presentation meets the key formula with equality.
  GrowthInputs h{make_q(9, 4), make_q(9, 16), 0, 0};
  h.HXn = 1 + (h.HX - h.HR - 1) * descent_product(doubling(), 2, 5);
  return h;
}

}  // namespace

TEST_CASE("amenability chain examples", "[bounds]") {
  AmenabilityInput a;
  a.facts.push_back({"G", "alpha", Quantity::exact(make_q(1, 10))});
  auto L = amenability_chain(a);
  CHECK(L.get("h(G)").value() == make_q(1, 200));
  CHECK(L.replay().empty());

  AmenabilityInput s;
  s.facts.push_back({"D", "alpha", Quantity::exact(make_q(1, 5))});
  s.links.push_back({GroupRelation::subgroup, "G", "D", 4, 3});
  auto S = amenability_chain(s);
  CHECK(S.get("alpha(G)").value() == make_q(1, 30));
  CHECK(S.replay().empty());

  AmenabilityInput q;
  q.infinite = {"Q"};
  q.facts.push_back({"Q", "kappa", Quantity::interval(make_q(1, 7), make_q(1, 6))});
  q.links.push_back({GroupRelation::quotient, "G", "Q"});
  auto Q = amenability_chain(q);
  CHECK(Q.get("alpha(Q)").value() == make_q(1, 7));
  CHECK(Q.get("alpha(G)").value() == make_q(1, 7));
  CHECK(Q.get("h(G)").value() == make_q(1, 98));
  CHECK(!Q.has("kappa(G)"));
  CHECK(Q.replay().empty());
}

TEST_CASE("amenability chain keeps the best bound", "[bounds]") {
  AmenabilityInput a;
  a.infinite = {"G"};
  a.facts.push_back({"G", "kappa", Quantity::exact(make_q(1, 100))});
  a.facts.push_back({"U", "kappa", Quantity::exact(make_q(1, 25))});
  a.links.push_back({GroupRelation::regenerated, "G", "U", 9, 67});
  a.facts.push_back({"G", "h", Quantity::exact(make_q(1, 10))});
  auto L = amenability_chain(a);
  CHECK(L.get("kappa(G)").value() == make_q(1, 100));
  CHECK(L.get("kappa(G) from kappa(U)").value() == make_q(1, 1675));
  CHECK(L.get("alpha(G)").value() == make_q(1, 100));
  CHECK(L.get("h(G)").value() == make_q(1, 10));
  CHECK(L.replay().empty());
}

TEST_CASE("inconsistent provenance graphs are refused", "[bounds]") {
  AmenabilityInput c;
  c.links.push_back({GroupRelation::quotient, "A", "B"});
  c.links.push_back({GroupRelation::quotient, "B", "A"});
  CHECK_THROWS_AS(amenability_chain(c), Error);
  AmenabilityInput s;
  s.links.push_back({GroupRelation::subgroup, "A", "A", 1, 1});
  CHECK_THROWS_AS(amenability_chain(s), Error);
  AmenabilityInput z;
  z.links.push_back({GroupRelation::subgroup, "A", "B", 2, 0});
  CHECK_THROWS_AS(amenability_chain(z), Error);
  AmenabilityInput n;
  n.facts.push_back({"A", "alpha", Quantity::exact(0)});
  CHECK_THROWS_AS(amenability_chain(n), Error);
}

TEST_CASE("amenability inequalities are monotone", "[bounds][property]") {
  for (int trial = 0; trial < 50; ++trial) {
    Rational a = make_q(rnd(1, 50), 100);
    std::size_t Y = static_cast<std::size_t>(rnd(1, 9));
    Rational L = rnd(1, 5);
    auto run = [&](const Rational& alpha, const Rational& depth) {
      AmenabilityInput in;
      in.facts.push_back({"D", "alpha", Quantity::exact(alpha)});
      in.facts.push_back({"D", "h", Quantity::exact(alpha / 3)});
      in.links.push_back({GroupRelation::subgroup, "G", "D", Y, depth});
      return amenability_chain(in);
    };
    auto base = run(a, L), up = run(a + make_q(1, 100), L), deep = run(a, L + 1);
    CHECK(base.get("alpha(G)").value() <= up.get("alpha(G)").value());
    CHECK(base.get("h(G)").value() <= up.get("h(G)").value());
    CHECK(deep.get("alpha(G)").value() <= base.get("alpha(G)").value());
    CHECK(deep.get("h(G)").value() <= base.get("h(G)").value());
  }
}

TEST_CASE("Cheeger constants for two generators", "[bounds]") {
  auto L = cheeger_constants(make_q(1, 4), make_q(6, 5), 600000, 2, 2);
  INFO(L.render());
  CHECK(L.get("k0").value() == 81);
  REQUIRE(L.get("N").is_tower());
  CHECK(L.get("N").render() == "2^82 - 1");
  CHECK(L.get("N") == Quantity::power(1, 2, Quantity::exact(82), -1));
  CHECK(L.get("C").is_tower());
  CHECK(L.get("C").tower().coeff == make_q(1, 50));
  CHECK(L.replay().empty());
  // rho^k0 >= M/mu > rho^(k0-1).
  CHECK(qpow(make_q(6, 5), 81) >= Rational(2400000));
  CHECK(qpow(make_q(6, 5), 80) < Rational(2400000));
  CHECK_THROWS_AS(cheeger_constants(make_q(1, 4), 1, 600000, 2, 2), Error);
  CHECK_THROWS_AS(cheeger_constants(make_q(1, 4), make_q(6, 5), 599999, 2, 2), Error);
}

TEST_CASE("Cheeger k0 is monotone and exact", "[bounds][property]") {
  for (int trial = 0; trial < 30; ++trial) {
    Rational mu = make_q(rnd(1, 20), 10), rho = make_q(rnd(11, 30), 10), M = rnd(600000, 2000000);
    auto L = cheeger_constants(mu, rho, M, static_cast<std::size_t>(rnd(1, 4)), 3);
    auto k = L.get("k0").integer().get_ui();
    CHECK(qpow(rho, k) >= M / mu);
    CHECK(qpow(rho, k - 1) < M / mu);
    auto bigger = cheeger_constants(mu, rho, M * 2, 2, 3).get("k0").value();
    auto richer = cheeger_constants(mu * 2, rho, M, 2, 3).get("k0").value();
    CHECK(bigger >= k);
    CHECK(richer <= k);
    CHECK(L.replay().empty());
  }
  auto one = cheeger_constants(1, 2, 600000, 1, 2);
  CHECK(one.get("N").value() == one.get("k0").value() + 1);
}

TEST_CASE("tower comparisons", "[ledger]") {
  auto N = Quantity::power(1, 2, Quantity::exact(82), -1);
  CHECK(provably_le(Quantity::exact(5), N));
  CHECK(provably_le(N, Quantity::power(1, 2, Quantity::exact(82))));
  CHECK(!provably_le(Quantity::power(1, 2, Quantity::exact(82)), N));
  CHECK(provably_le(N, Quantity::power(1, 2, N)));
  CHECK(!provably_le(Quantity::power(1, 2, N), N));
  CHECK(log_ceiling(2, N) == Quantity::exact(82));
  CHECK(log_ceiling(4, Quantity::power(1, 2, Quantity::exact(100))) == Quantity::exact(100));
  CHECK(log_ceiling(2, Quantity::exact(1025)) == Quantity::exact(11));
}

TEST_CASE("index-p subgroup counts against spans", "[bounds]") {
  for (unsigned p : {2u, 3u})
    for (unsigned d = 1; d <= 3; ++d) {
      auto q = rules::apply("hyperplane-count", {Quantity::exact(p), Quantity::exact(d)});
      CHECK(q.value() == Rational(static_cast<unsigned long>(index_p_subgroups_bruteforce(p, d))));
    }
  CHECK(index_p_subgroups_bruteforce(2, 2) == 3);
  CHECK(index_p_subgroups_bruteforce(3, 3) == 13);
}

TEST_CASE("binomial bound (1+s)^ceil(1/s) >= 2", "[bounds]") {
  for (long k = 1; k <= 200; ++k) {
    Rational s = make_q(k, 200);
    CHECK(rules::apply("binomial-two", {Quantity::exact(s)}).holds());
    CHECK(qpow(1 + s, qceil(1 / s).get_ui()) >= 2);
  }
  CHECK(!rules::apply("binomial-two", {Quantity::exact(make_q(3, 2))}).holds());
}

TEST_CASE("subgroup growth chain", "[bounds]") {
  auto g = doubling();
  auto h = doubling_inputs();
  CHECK(growth_hypothesis_failures(g, 2, 5, h).empty());
  auto L = subgroup_growth_bound(g, 2, 5, h);
  INFO(L.render());
  CHECK(L.replay().empty());
  CHECK(L.get("eps").value() == make_q(1, 8));
  CHECK(L.get("log_p |G/G_n|").value() == 30);
  CHECK(L.get("prod").value() == descent_product(g, 2, 5));
  CHECK(L.get("descent bound <= d(G_n) - 1").holds());
  CHECK(L.get("prod >= (1+t0^(n-1))^c_{n-1}").holds());
  CHECK(L.get("(1+t0^(n-1))^c_{n-1} >= 2^(t0/(t1+eps))^(n-1)").holds());
  CHECK(L.get("(t0/(t1+eps))^(n-1)").value() == make_q(1296, 625));
  CHECK(L.get("(1+t0^(n-1))^ceil(1/t0^(n-1)) >= 2").holds());
  CHECK(L.get("log2 m <=").value() == 31);
  Int d = L.get("d").integer();
  CHECK(L.get("a_m(G) >=") == Quantity::power(1, 2, Quantity::exact(Rational(d)), -1));
  CHECK(L.get("floor log2 a_m").integer() == d - 1);
  Rational beta = L.get("beta").value();
  CHECK(beta > 0);
  // 31^(100 beta) <= (floor log2 log2 a)^100 < 31^(100 beta + 1).
  Int la = L.get("floor log2 log2 a_m").integer();
  unsigned long j = Rational(beta * 100).get_num().get_ui();
  CHECK(ipow(31, j) <= ipow(la, 100));
  CHECK(ipow(31, j + 1) > ipow(la, 100));
}

TEST_CASE("growth hypotheses are reported", "[bounds]") {
  auto g = doubling();
  for (auto& c : g.c) c = 0;
  auto h = doubling_inputs();
  auto bad = growth_hypothesis_failures(g, 2, 5, h);
  REQUIRE(!bad.empty());
  CHECK(bad[0] == "c_{n-1} >= (1/(t1+eps))^(n-1)");
  try {
    subgroup_growth_bound(g, 2, 5, h);
    FAIL("accepted a degenerate profile");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("c_{n-1}") != std::string::npos);
  }
  auto late = doubling();
  CHECK(!growth_hypothesis_failures(late, 2, 7, h).empty());
  GrowthInputs weak = h;
  weak.HXn = 1;
  CHECK(growth_hypothesis_failures(doubling(), 2, 5, weak).size() == 1);
}

TEST_CASE("submultiplicative growth rule on known sequences", "[bounds]") {
  std::vector<Int> free2, poly;
  for (unsigned long n = 0; n <= 10; ++n) {
    free2.push_back(Int(1) << n);
    poly.push_back(Int(n + 1));
  }
  CHECK(growth_rule_violation(free2, 2) == free2.size());
  CHECK(growth_rule_violation(poly, 1) == poly.size());
  CHECK(growth_rule_violation(poly, 2) == 2);
  std::vector<Int> jump{1, 1, 5};
  CHECK(growth_rule_violation(jump, 1) == 2);
}
