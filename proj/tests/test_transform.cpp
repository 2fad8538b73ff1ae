#include "ggs/transform.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace ggs;
using namespace testsupport;

namespace {

Presentation pres(std::vector<std::string> names, std::vector<std::string> rels, std::uint32_t p) {
  Presentation P;
  P.gens = GeneratorSet(names, p);
  for (auto& r : rels) P.relators.push_back(parse_word(r, names));
  return P;
}

Word back(const WeightedPresentation& Q, const Word& w) {
  return w.substitute([&](std::uint32_t g) { return Q.origin.at(g); });
}

/// Random presentation on d generators whose relators avoid linearity in generator 0.
WeightedPresentation random_integral(std::uint32_t p, std::size_t d, int nrel) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  Presentation P;
  P.gens = GeneratorSet(names, p);
  while (static_cast<int>(P.relators.size()) < nrel) {
    auto w = random_word(d, static_cast<int>(rnd(1, 4)), 2);
    if (w.is_identity() || is_linear_in(w, 0, p)) continue;
    P.relators.push_back(w);
  }
  std::vector<long> D;
  for (std::size_t i = 0; i < d; ++i) D.push_back(rnd(1, 3));
  return WeightedPresentation::integral(P, D, make_q(rnd(1, 9), 10));
}

}  // namespace

TEST_CASE("p_descent examples", "[transform]") {
  Rational t = make_q(1, 3);
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {}, 2), {t, t});
  auto d = p_descent(P, 0);
  CHECK(d.P.pres.gens.names == std::vector<std::string>{"y", "y.x1", "x.2"});
  CHECK(d.P.rank() == 3);
  CHECK(d.P.origin[1] == commutator(Word::gen(1), Word::gen(0)));
  CHECK(d.P.origin[2] == Word::gen(0, 2));
  CHECK(d.P.WX() - 1 == (1 + t) * (2 * t - 1));
  CHECK(d.log.all_ok());

  auto R = WeightedPresentation::weighted(pres({"x", "y"}, {"[x,y]"}, 2), {t, t});
  auto e = p_descent(R, 0);
  REQUIRE(e.P.relators().size() == 2);
  CHECK(back(e.P, e.P.relators()[0]) == commutator(Word::gen(0), Word::gen(1)));
  CHECK(back(e.P, e.P.relators()[1]) == commutator({Word::gen(0), Word::gen(1), Word::gen(0)}));

  auto L = WeightedPresentation::weighted(pres({"x", "y"}, {"x y"}, 2), {t, t});
  CHECK_THROWS_AS(p_descent(L, 0), Error);
}

TEST_CASE("p_descent rewriting and weight restriction", "[transform][property]") {
  for (std::uint32_t p : {2u, 3u}) {
    for (int trial = 0; trial < 25; ++trial) {
      std::size_t d = static_cast<std::size_t>(rnd(2, 3));
      std::vector<Rational> W;
      for (std::size_t i = 0; i < d; ++i) W.push_back(random_weight(8));
      std::vector<std::string> names{"a", "b", "c"};
      names.resize(d);
      Presentation P0;
      P0.gens = GeneratorSet(names, p);
      while (P0.relators.size() < 2) {
        auto w = random_word(d, static_cast<int>(rnd(1, 4)), 2);
        if (!w.is_identity() && !is_linear_in(w, 0, p)) P0.relators.push_back(w);
      }
      auto P = WeightedPresentation::weighted(P0, W);
      auto Q = p_descent(P, 0);
      CHECK(Q.P.rank() == p * (d - 1) + 1);
      std::vector<Word> expected;
      for (auto& r : P.relators())
        for (std::uint32_t k = 0; k < p; ++k) {
          auto w = commutator_power(r, Word::gen(0), k);
          if (!w.is_identity()) expected.push_back(w);
        }
      // Substituting the new generators back recovers [r, x, ..., x] exactly.
      std::vector<Word> got;
      for (auto& r : Q.P.relators()) got.push_back(back(Q.P, r));
      CHECK(got == expected);
      // Weights computed in the new basis agree with the restriction of W.
      for (std::size_t i = 0; i < Q.P.relators().size(); ++i) {
        auto wn = Q.P.relator_weights()[i];
        auto wo = word_weight_exact(got[i], W, p);
        if (wn.is_exact() && wo.is_exact()) CHECK(wn.value == wo.value);
      }
      for (std::size_t i = 0; i < Q.P.rank(); ++i) {
        auto wo = word_weight_exact(Q.P.origin[i], W, p);
        REQUIRE(wo.is_exact());
        CHECK(wo.value == Q.P.W[i]);
      }
      CHECK(Q.log.all_ok());
    }
  }
}

TEST_CASE("leading terms of the descended basis", "[transform][property]") {
  for (std::uint32_t p : {2u, 3u}) {
    Field f(p);
    for (std::size_t d : {2u, 3u}) {
      auto vars = make_vars(d);
      Grading g = Grading::of_weights(std::vector<Rational>{make_q(1, 2), make_q(1, 3), make_q(1, 5)});
      std::vector<std::uint32_t> rank{0, 1, 2};
      auto pol = Policy::degree_cap(p + 2);
      for (std::uint32_t y = 1; y < d; ++y)
        for (unsigned k = 1; k < p; ++k) {
          auto e = magnus_embed(commutator_power(Word::gen(y), Word::gen(0), k), f, vars, pol) - Series::one(f, vars, pol);
          Monomial want{y};
          want.insert(want.end(), k, 0);
          CHECK(*e.leading_term(g, rank) == want);
        }
      auto e = magnus_embed(Word::gen(0, p), f, vars, pol) - Series::one(f, vars, pol);
      CHECK(*e.leading_term(g, rank) == Monomial(p, 0));
    }
  }
}

TEST_CASE("change_generators examples", "[transform]") {
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {"[x,y]", "x^2"}, 2), {make_q(1, 2), make_q(1, 3)});
  auto x = Word::gen(0), y = Word::gen(1);
  auto n = change_generators(P, {x * y, y});
  CHECK(n.P.W == P.W);
  // Relators are the same elements, now written in the new basis.
  for (std::size_t i = 0; i < 2; ++i) CHECK(back(n.P, n.P.relators()[i]) == P.relators()[i]);
  CHECK(n.log.all_ok());

  CHECK_THROWS_MATCHES(change_generators(P, {x.power(2), y}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::not_basis; }));
  auto id = change_generators(P, {x, y});
  CHECK(id.log.steps[0].wx_before == id.log.steps[0].wx_after);
  CHECK(id.log.steps[0].wr_before == id.log.steps[0].wr_after);
  CHECK(id.log.steps[0].params == "identity");

  // W(y) > W(x): y -> y x keeps W(y), but x -> x y would raise W(x).
  CHECK_THROWS_MATCHES(change_generators(P, {x, y * x}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::not_good; }));
  auto Q = WeightedPresentation::weighted(pres({"x", "y"}, {}, 2), {make_q(1, 3), make_q(1, 2)});
  CHECK_THROWS_MATCHES(change_generators(Q, {x * y, y}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::not_good; }));
}

TEST_CASE("subgroup_adapt examples", "[transform]") {
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {}, 3), {make_q(1, 2), make_q(1, 4)});
  auto a = subgroup_adapt(P, Character{{1, 1}});
  CHECK(a.j == 1);
  CHECK(a.t.P.origin[0] == Word::gen(0) * Word::gen(1, 2));
  CHECK(a.t.P.origin[1] == Word::gen(1));

  auto one = subgroup_adapt(P, Character{{0, 2}});
  CHECK(one.j == 1);
  CHECK(one.t.P.origin[0] == Word::gen(0));

  auto T = WeightedPresentation::weighted(pres({"x", "y"}, {}, 3), {make_q(1, 4), make_q(1, 4)});
  CHECK(subgroup_adapt(T, Character{{1, 1}}).j == 0);
  CHECK_THROWS_AS(subgroup_adapt(T, Character{{0, 3}}), Error);
}

TEST_CASE("change_relators examples", "[transform]") {
  auto W = std::vector<Rational>{make_q(1, 2), make_q(1, 2)};
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {"x^2", "[x,y,y]"}, 2), W);
  auto c = change_relators(P, {{0, 1, 1}});
  CHECK(c.P.relators()[0] == parse_word("x^2 [x,y,y]", {"x", "y"}));
  CHECK(c.log.all_ok());
  CHECK_THROWS_AS(change_relators(P, {{0, 0, -1}}), Error);
  auto none = change_relators(P, {});
  CHECK(none.P.relators() == P.relators());
  CHECK_THROWS_MATCHES(change_relators(P, {{1, 0, 1}}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::not_good; }));
}

TEST_CASE("cleanup examples", "[transform]") {
  auto h = make_q(1, 2);
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {"y", "[x,y]"}, 2), {h, h});
  auto c = cleanup(P, {1});
  CHECK(c.P.pres.gens.names == std::vector<std::string>{"x"});
  CHECK(c.P.relators().empty());
  CHECK(c.log.all_ok());
  CHECK(cleanup(P, {}).P.relators() == P.relators());

  auto Q = WeightedPresentation::weighted(pres({"x", "y", "z"}, {"z", "x z y"}, 2), {h, h, h});
  auto q = cleanup(Q, {2});
  REQUIRE(q.P.relators().size() == 1);
  CHECK(q.P.pres.render(q.P.relators()[0]) == "x y");
  CHECK_THROWS_AS(cleanup(Q, {0}), Error);
}

TEST_CASE("pair_elimination examples", "[transform]") {
  auto h = make_q(1, 2);
  auto P = WeightedPresentation::weighted(pres({"x", "y"}, {"x"}, 2), {h, h});
  auto e = pair_elimination(P, 0, 0);
  CHECK(e.P.pres.gens.names == std::vector<std::string>{"y"});
  CHECK(e.P.relators().empty());

  auto Q = WeightedPresentation::weighted(pres({"x", "y"}, {"x [y,x]"}, 2), {h, h});
  auto f = pair_elimination(Q, 0, 0);
  CHECK(f.P.pres.gens.names == std::vector<std::string>{"y"});
  CHECK(f.P.relators().empty());
  CHECK(f.log.all_ok());

  auto B = WeightedPresentation::weighted(pres({"x", "y"}, {"[x,y]"}, 2), {h, h});
  CHECK_THROWS_AS(pair_elimination(B, 0, 0), Error);

  // Single occurrence: x = y^-1 is substituted into the remaining relators.
  auto S = WeightedPresentation::weighted(pres({"x", "y", "z"}, {"y x", "[x,z] y^2"}, 3), {h, h, h});
  auto s = pair_elimination(S, 0, 0);
  REQUIRE(s.P.relators().size() == 1);
  CHECK(s.P.relators()[0] == parse_word("[y^-1,z] y^2", {"y", "z"}));
}

TEST_CASE("descend_chain examples", "[transform]") {
  auto half = make_q(1, 2);
  auto F = WeightedPresentation::integral(pres({"a", "b", "c"}, {}, 3), {1, 1, 1}, half);
  auto one = descend_chain(F, {Character{{1, 0, 0}}});
  CHECK(one.P.rank() == 3 * 2 + 1);
  CHECK(one.P.relators().empty());
  CHECK(descend_chain(F, {}).P.pres.gens.names == F.pres.gens.names);

  // 3 generators, 1 quadratic relator at t0 = 1/2: value -1/4; descent at degree 1 with p = 2.
  auto G = WeightedPresentation::integral(pres({"a", "b", "c"}, {"[a,b]"}, 2), {1, 1, 1}, half);
  CHECK(G.ggs_value() == make_q(-1, 4));
  auto g = descend_chain(G, {Character{{0, 0, 1}}});
  REQUIRE(g.degrees == std::vector<long>{1});
  CHECK(g.P.ggs_value() <= G.ggs_value() * make_q(3, 2));
  CHECK(g.log.all_ok());

  CHECK_THROWS_AS(descend_chain(G, {Character{{1, 0}}}), Error);
  auto H = WeightedPresentation::integral(pres({"a", "b", "c"}, {"a [a,b]"}, 2), {1, 1, 1}, half);
  CHECK_THROWS_AS(descend_chain(H, {Character{{1, 0, 0}}}), Error);
}

TEST_CASE("descend_chain to the trivial subgroup of C2 x C2 with a degree floor", "[transform]") {
  auto P = WeightedPresentation::integral(pres({"a", "b"}, {"a^2", "b^2", "[a,b]"}, 2), {1, 1}, make_q(1, 2));
  auto first = descend_chain(P, {Character{{1, 0}}});
  Character second{std::vector<std::uint32_t>(first.P.rank(), 0)};
  second.values[*first.P.pres.gens.index_of("b")] = 1;
  auto r = descend_chain(P, {Character{{1, 0}}, second}, 3);
  CHECK(!r.stalled);
  for (auto d : r.P.D) CHECK(d >= 3);
  CHECK(r.log.all_ok());
  // Composed inequality: (1 - H_X' + H_R') / (1-t) <= (1 - H_X + H_R) / (1-t) * prod (1 - t^{pn}) / (1 - t^n).
  std::size_t N = 12;
  IntSeries rhs = P.series(N);
  for (auto n : r.degrees) {
    IntSeries geo(N);
    for (std::size_t e = 0; e < 2; ++e) geo[e * static_cast<std::size_t>(n)] = 1;
    rhs = rhs * geo;
  }
  CHECK(!rhs.partial_sums().first_below(r.P.series(N).partial_sums()));

  // Asking for degree >= 2 after descending to <b> is impossible: b survives in degree 1.
  auto stall = descend_chain(P, {Character{{1, 0}}}, 2);
  CHECK(stall.stalled);
}

TEST_CASE("descent bookkeeping on random integral presentations", "[transform][property]") {
  for (int trial = 0; trial < 30; ++trial) {
    std::uint32_t p = trial % 2 ? 2 : 3;
    auto P = random_integral(p, static_cast<std::size_t>(rnd(2, 3)), static_cast<int>(rnd(0, 2)));
    auto Q = p_descent(P, 0);
    Rational tau = P.W[0], c = 0;
    for (std::uint32_t k = 0; k < p; ++k) c += qpow(tau, k);
    CHECK(Q.P.WX() - 1 == c * (P.WX() - 1));
    CHECK(Q.P.WR().value <= c * P.WR().value);
    std::size_t N = 12;
    IntSeries geo(N);
    for (std::size_t e = 0; e < p; ++e)
      if (e * static_cast<std::size_t>(P.D[0]) <= N) geo[e * static_cast<std::size_t>(P.D[0])] = 1;
    CHECK(!(P.series(N) * geo).partial_sums().first_below(Q.P.series(N).partial_sums()));
    CHECK(Q.log.all_ok());
  }
}
