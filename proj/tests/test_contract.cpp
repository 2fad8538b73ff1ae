#include "ggs/contract.hpp"
#include "instances.hpp"
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

WeightedPresentation uniform(std::size_t d, Rational w, std::vector<std::string> rels, std::uint32_t p) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  return WeightedPresentation::weighted(pres(names, rels, p), std::vector<Rational>(d, w));
}

}  // namespace

TEST_CASE("contract_weights examples", "[contract]") {
  std::vector<Rational> W{make_q(1, 2), make_q(1, 3)};
  CHECK(contract_weights(W, 1) == W);
  CHECK_THROWS_AS(contract_weights(W, make_q(1, 2)), Error);
  auto x = Word::gen(0), y = Word::gen(1);
  CHECK(word_weight(x.power(2), contract_weights({make_q(1, 2)}, 2), 2).value == make_q(1, 16));
  auto c = make_q(3, 2);
  auto Wc = contract_weights(W, c);
  CHECK(word_weight(commutator(x, y), Wc, 3).value == make_q(2, 27));
  CHECK(word_weight(commutator(x, y), W, 3).value / (c * c) == make_q(2, 27));
}

TEST_CASE("contraction bounds on random words", "[contract][property]") {
  for (std::uint32_t p : {2u, 3u}) {
    for (int trial = 0; trial < 60; ++trial) {
      std::size_t d = static_cast<std::size_t>(rnd(1, 3));
      std::vector<Rational> W;
      for (std::size_t i = 0; i < d; ++i) W.push_back(random_weight(6));
      Rational c = make_q(rnd(4, 16), 4);
      auto Wc = contract_weights(W, c);
      auto f = random_word(d, static_cast<int>(rnd(1, 4)), 3);
      if (f.is_identity()) continue;
      auto wf = word_weight_exact(f, W, p), wc = word_weight_exact(f, Wc, p);
      if (!wf.is_exact() || !wc.is_exact()) continue;
      CHECK(wc.value <= wf.value / c);
      auto ld = linear_decompose(f, d, p);
      if (ld.support.empty()) {
        CHECK(wc.value <= wf.value / (c * c));
        continue;
      }
      auto wl = word_weight_exact(ld.f_L, W, p), wlc = word_weight_exact(ld.f_L, Wc, p);
      REQUIRE(wl.is_exact());
      CHECK(wlc.value == wl.value / c);
      Rational lambda = wf.value / wl.value;
      CHECK(lambda >= 1);
      if (c <= lambda) CHECK(wc.value <= wf.value / (c * c));
      if (c >= lambda) CHECK(wc.value == wlc.value);
    }
  }
}

TEST_CASE("optimize_linear_relators examples", "[contract]") {
  auto h = make_q(1, 2);
  auto none = uniform(2, h, {"[x1,x2]"}, 2);
  auto o = optimize_linear_relators(none);
  CHECK(o.cls.bad.empty());
  CHECK(o.P.relators() == none.relators());
  CHECK(o.log.all_ok());

  auto two = uniform(2, h, {"x1", "x1 x2"}, 2);
  auto t = optimize_linear_relators(two);
  REQUIRE(t.cls.bad.size() == 2);
  CHECK(t.cls.bad[0].r == 0);
  CHECK(t.cls.bad[0].x == 0);
  CHECK(t.P.relators()[1] == parse_word("x1 x2 x1", {"x1", "x2"}));
  CHECK(t.cls.bad[1].x == 1);
  CHECK(t.log.all_ok());

  auto dup = uniform(2, h, {"x1", "x1"}, 2);
  auto u = optimize_linear_relators(dup);
  CHECK(u.cls.bad.size() == 1);
  CHECK(u.P.relators()[1] == Word::gen(0, 2));
  CHECK(u.cls.good == std::vector<std::size_t>{1});
}

TEST_CASE("deepdescent4_a without linear relators is a single contraction", "[contract]") {
  auto P = uniform(25, make_q(4, 5), {"[x1,x2]", "[x3,x4]"}, 2);
  REQUIRE(P.WX() == 20);
  PresCondition target{2, make_q(1, 2), make_q(1, 2)};
  auto r = deepdescent4_a(P, 9, target);
  CHECK(r.c == 10);
  CHECK(r.c1 == 1);
  CHECK(r.P.WX() == 2);
  CHECK(r.P.WR().value <= P.WR().value / 100);
  CHECK(r.log.all_ok());
  CHECK_THROWS_AS(deepdescent4_a(P, 8, target), Error);
  CHECK_THROWS_AS(deepdescent4_a(P, 19, target), Error);
}

TEST_CASE("deepdescent4_a on random inputs", "[contract][property]") {
  std::mt19937_64 g(7);
  PresCondition target{1, make_q(1, 2), make_q(1, 2)};
  int with_bad1 = 0, with_bad2 = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::uint32_t p = trial % 2 ? 2 : 3;
    auto P = margin_instance(g, p, 3);
    auto r = deepdescent4_a(P, 3, target);
    INFO(r.log.render());
    CHECK(r.log.all_ok());
    CHECK(r.P.WX() == 1);
    CHECK(r.P.WR().value < make_q(1, 2));
    CHECK(detail::max_weight(r.P.W) < make_q(1, 2));
    CHECK(r.P.rank() == P.rank() - r.cls.bad1.size());
    with_bad1 += !r.cls.bad1.empty();
    with_bad2 += !r.cls.bad2.empty();
  }
  CHECK(with_bad1 > 0);
  CHECK(with_bad2 > 0);
}

TEST_CASE("pres_check examples", "[contract]") {
  auto half = make_q(1, 2);
  PresCondition cond{1, make_q(1, 4), make_q(1, 100)};
  auto deep = WeightedPresentation::integral(pres({"x", "y"}, {}, 2), {8, 9}, half);
  auto c = pres_check(deep, {deep.WX(), make_q(1, 4), make_q(1, 100)});
  CHECK(*c.image_sum == make_q(1, 128));
  CHECK(c.image == Verdict::satisfied);
  CHECK(c.verdict == Verdict::satisfied);

  auto edge = WeightedPresentation::integral(pres({"x", "y"}, {"[x,y]"}, 2), {1, 1}, half);
  auto e = pres_check(edge, cond);
  CHECK(e.wx_ok);
  CHECK(e.wr == make_q(1, 4));
  CHECK(!e.wr_ok);
  CHECK(e.verdict == Verdict::not_satisfied);

  auto shallow = WeightedPresentation::integral(pres({"x"}, {}, 2), {5}, half);
  auto s = pres_check(shallow, {make_q(1, 32), make_q(1, 4), make_q(1, 100)});
  CHECK(*s.image_sum == make_q(1, 16));
  CHECK(s.verdict == Verdict::not_satisfied);

  auto plain = uniform(2, half, {}, 2);
  CHECK(pres_check(plain, cond).image == Verdict::unknown);
  CHECK(pres_check(plain, cond).verdict == Verdict::unknown);
}

TEST_CASE("contracted image sum bounds the distinct values", "[contract][property]") {
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<long> D;
    for (long k = rnd(1, 3); k > 0; --k) D.push_back(rnd(2, 4));
    Rational t = make_q(1, rnd(2, 3)), c = make_q(rnd(5, 12), 4);
    if (c < 1) c = 1 + c;
    auto bound = detail::contracted_image_sum(D, t, c, make_q(1, 1000));
    // Brute force: distinct values t^n c^-l over all multisets of l <= 12 degrees.
    std::set<Rational> vals;
    std::set<long> sums{0};
    for (long l = 1; l <= 12; ++l) {
      std::set<long> next;
      for (auto s : sums)
        for (auto d : D) next.insert(s + d);
      sums = next;
      for (auto n : sums) vals.insert(qpow(t, static_cast<unsigned long>(n)) / qpow(c, static_cast<unsigned long>(l)));
    }
    Rational brute = 0;
    for (auto& v : vals) brute += v;
    CHECK(brute <= bound);
    // Never worse than summing t^n c^-l over every n >= N l.
    long N = *std::min_element(D.begin(), D.end());
    Rational q = qpow(t, static_cast<unsigned long>(N)) / c;
    CHECK(bound <= q / ((1 - q) * (1 - t)));
  }
}

TEST_CASE("deepdescent4_b produces a certified Pres presentation", "[contract]") {
  std::mt19937_64 g(11);
  PresCondition target{1, make_q(1, 2), make_q(1, 2)};
  for (int trial = 0; trial < 10; ++trial) {
    auto P = margin_instance(g, trial % 2 ? 2 : 3, 9);
    auto r = deepdescent4_b(P, 9, target);
    INFO(r.log.render());
    CHECK(r.log.all_ok());
    CHECK(r.cert.verdict == Verdict::satisfied);
    CHECK(r.P.WX() == 1);
    CHECK(pres_check(r.P, target, r.prov).verdict == Verdict::satisfied);
  }
  auto flat = uniform(40, make_q(9, 10), {}, 2);
  auto f = deepdescent4_b(flat, 9, target);
  INFO(f.log.render());
  CHECK(f.cert.wr == 0);
  CHECK(f.cert.verdict == Verdict::satisfied);
  CHECK(integral_approx({make_q(3, 10)}, make_q(1, 2)) == std::vector<long>{2});
  CHECK_THROWS_AS(deepdescent4_b(flat, 8, target), Error);
}

TEST_CASE("deepdescent3_loop examples", "[contract]") {
  auto half = make_q(1, 2);
  auto P = WeightedPresentation::integral(pres({"a", "b", "c"}, {"[a,b]"}, 2), {1, 1, 1}, half);
  auto r = deepdescent3_loop(P, fixed_chain_source({Character{{0, 0, 1}}}), 100);
  REQUIRE(r.mu.size() == 2);
  CHECK(r.mu[0] == make_q(1, 4));
  CHECK(r.lower_bound[1] == make_q(3, 8));
  CHECK(r.mu[1] >= make_q(3, 8));
  CHECK(!r.reached);
  CHECK(r.log.all_ok());

  auto z = deepdescent3_loop(P, fixed_chain_source({Character{{0, 0, 1}}}), make_q(1, 8));
  CHECK(z.reached);
  CHECK(z.mu.size() == 1);

  auto F = WeightedPresentation::integral(pres({"x", "y"}, {}, 2), {1, 1}, make_q(3, 4));
  auto f = deepdescent3_loop(F, free_chain_source(), 2);
  CHECK(f.reached);
  CHECK(f.P.WX() > 3);
  CHECK(f.log.all_ok());
  for (std::size_t k = 0; k < f.mu.size(); ++k) CHECK(f.mu[k] >= f.lower_bound[k]);

  CHECK_THROWS_AS(deepdescent3_loop(WeightedPresentation::integral(pres({"x"}, {}, 2), {1}, half), free_chain_source(), 1), Error);
}
