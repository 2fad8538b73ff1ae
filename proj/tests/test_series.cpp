#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace ggs;
using namespace testsupport;

namespace {

Series var(const Field& f, VarNames v, const Policy& p, std::uint32_t i, Elem c = 1) {
  return Series::monomial(f, v, p, {i}, c);
}

}  // namespace

TEST_CASE("field construction and irreducibility", "[series]") {
  Field f4(2, {1, 1, 1});
  CHECK(f4.order() == 4);
  CHECK(f4.tag() == "GF(2^2;x^2+x+1)");
  CHECK_THROWS_AS(Field(2, {1, 0, 1}), Error);  // x^2+1 = (x+1)^2
  CHECK_THROWS_AS(Field(4), Error);
  Field aes = Field::standard(2, 8);
  CHECK(aes.tag() == "GF(2^8;x^8+x^4+x^3+x^2+1)");
  CHECK(Field(2).tag() == "GF(2)");
  // Every nonzero element times its inverse is one.
  for (Elem a = 1; a < aes.order(); ++a) REQUIRE(aes.mul(a, aes.inv(a)) == 1);
  Field f9 = Field::standard(3, 2);
  for (Elem a = 1; a < 9; ++a) REQUIRE(f9.mul(a, f9.inv(a)) == 1);
}

TEST_CASE("tabulated F_{p^8} moduli are irreducible for small p", "[series]") {
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    Field f = Field::standard(p, 8);
    CHECK(f.m() == 8);
  }
}

TEST_CASE("series_mul examples", "[series]") {
  Field f2(2);
  auto v = make_vars({"u", "v"});
  auto pol = Policy::degree_cap(4);
  auto one = Series::one(f2, v, pol);
  auto u = var(f2, v, pol, 0), w = var(f2, v, pol, 1);
  CHECK(((one + u) * (one + u)).render() == "1 + u^2");
  CHECK(((one + u) * (one + w)).render() == "1 + u + v + u*v");

  // F_4 = F_2[x]/(x^2+x+1): lambda_2 = x, x*x = x+1.
  Field f4(2, {1, 1, 1});
  Elem l2 = f4.basis(2);
  auto a = Series::monomial(f4, v, pol, {0}, l2);
  auto b = Series::monomial(f4, v, pol, {1}, l2);
  auto prod = a * b;
  CHECK(prod.coeff({0, 1}) == f4.pack({1, 1}));
  CHECK(prod.render() == "(x+1)*u*v");

  CHECK_THROWS_AS(u * Series::one(f4, v, pol), Error);
  CHECK_THROWS_AS(u * Series::one(f2, make_vars({"a", "b"}), pol), Error);
}

TEST_CASE("series_invert examples", "[series]") {
  auto v = make_vars({"u", "v"});
  Field f2(2), f3(3);
  auto p3 = Policy::degree_cap(3);
  CHECK((Series::one(f2, v, p3) + var(f2, v, p3, 0)).inverse().render() == "1 + u + u^2 + u^3");
  CHECK((Series::one(f3, v, p3) + var(f3, v, p3, 0)).inverse().render() == "1 + 2*u + u^2 + 2*u^3");

  auto p2 = Policy::degree_cap(2);
  auto a = Series::one(f2, v, p2) + var(f2, v, p2, 0) + var(f2, v, p2, 1);
  auto ai = a.inverse();
  CHECK(ai.render() == "1 + u + v + u^2 + u*v + v*u + v^2");
  CHECK((a * ai) == Series::one(f2, v, p2));
  CHECK((ai * a) == Series::one(f2, v, p2));
  CHECK_THROWS_AS(var(f2, v, p2, 0).inverse(), Error);
}

TEST_CASE("series_weight examples", "[series]") {
  Field f5(5);
  auto v = make_vars({"u", "v"});
  Grading g = Grading::of_weights({make_q(1, 2), make_q(1, 3)});
  auto pol = Policy::degree_cap(6);
  auto uv = Series::monomial(f5, v, pol, {0, 1});
  auto vu = Series::monomial(f5, v, pol, {1, 0});
  auto w = (uv - vu).weight(g);
  CHECK(w.is_exact());
  CHECK(w.value == make_q(1, 6));
  CHECK(Series::one(f5, v, pol).weight(g).value == 1);
  CHECK(Series(f5, v, pol).weight(g).kind == WeightValue::zero);

  // u^3 + u^2 with floor theta.
  auto gp = std::make_shared<const Grading>(g);
  auto poly = [&](Rational theta) {
    auto p = Policy::with_floor(6, theta, gp);
    return Series::monomial(f5, v, p, {0, 0, 0}) + Series::monomial(f5, v, p, {0, 0});
  };
  auto lo = poly(make_q(1, 4)).weight(g);
  CHECK(lo.is_exact());
  CHECK(lo.value == make_q(1, 4));
  auto hi = poly(make_q(1, 2)).weight(g);
  CHECK(hi.kind == WeightValue::below);
  CHECK(hi.value == make_q(1, 2));
}

TEST_CASE("series_degree examples", "[series]") {
  Field f2(2);
  auto v = make_vars({"u", "v"});
  Grading g({1, 2}, {});
  auto pol = Policy::degree_cap(4);
  auto s = Series::monomial(f2, v, pol, {0, 0}) + Series::monomial(f2, v, pol, {1});
  CHECK(s.degree(g).is_exact());
  CHECK(s.degree(g).value == 2);
  CHECK(Series(f2, v, pol).degree(g).kind == DegreeValue::infinite);
  auto u5 = Series::monomial(f2, v, pol, {0, 0, 0, 0, 0});
  CHECK(u5.degree(g).kind == DegreeValue::above);
  CHECK(u5.degree(g).value == 5);
}

TEST_CASE("leading_term examples", "[series]") {
  Field f3(3);
  auto v = make_vars({"u", "v"});
  Grading g = Grading::of_weights({make_q(1, 2), make_q(1, 2)});
  auto pol = Policy::degree_cap(5);
  std::vector<std::uint32_t> rank{0, 1};  // u smallest
  auto s = Series::monomial(f3, v, pol, {0, 1}) + Series::monomial(f3, v, pol, {1, 0});
  CHECK(*s.leading_term(g, rank) == Monomial{1, 0});
  CHECK(*Series::monomial(f3, v, pol, {0, 0}, 2).leading_term(g, rank) == Monomial{0, 0});
  CHECK(!Series(f3, v, pol).leading_term(g, rank).has_value());

  // LT(embed([x_j, x_1]) - 1) = u_j u_1.
  auto v3 = make_vars(3);
  Grading g3 = Grading::of_weights({make_q(1, 3), make_q(1, 2), make_q(1, 5)});
  auto e = magnus_embed(commutator(Word::gen(1), Word::gen(0)), f3, v3, Policy::degree_cap(4)) -
           Series::one(f3, v3, Policy::degree_cap(4));
  CHECK(*e.leading_term(g3, {0, 1, 2}) == Monomial{1, 0});
}

TEST_CASE("scalar_extend_phi examples", "[series]") {
  Field f2(2);
  Field q = Field::standard(2, 8);
  // Source variables u_{1,1}(lambda_1), u_{1,1}(lambda_2), u_{2,1}(lambda_1).
  auto src = make_vars({"u11_1", "u11_2", "u21_1"});
  auto tilde = make_vars({"t11", "t21"});
  std::vector<PhiVar> map{{0, 1}, {0, 2}, {1, 1}};
  auto pol = Policy::degree_cap(4);
  auto a = Series::monomial(f2, src, pol, {1});
  auto img = scalar_extend_phi(a, q, map, tilde);
  CHECK(img.coeff({0}) == q.basis(2));
  auto b = Series::monomial(f2, src, pol, {0, 2});
  auto imgb = scalar_extend_phi(b, q, map, tilde);
  CHECK(imgb.render() == "t11*t21");
  CHECK(scalar_extend_phi(a + a, q, map, tilde).is_zero());
  std::vector<PhiVar> bad{{0, 9}, {0, 2}, {1, 1}};
  CHECK_THROWS_AS(scalar_extend_phi(a, q, bad, tilde), Error);
}

TEST_CASE("series properties on random inputs", "[series][property]") {
  std::vector<Field> fields{Field(2), Field(3), Field(5), Field(2, {1, 1, 1}), Field(3, {1, 0, 1})};
  auto v = make_vars({"a", "b", "c"});
  Grading g({1, 2, 1}, {make_q(1, 2), make_q(1, 3), make_q(2, 5)});
  std::vector<std::uint32_t> rank{0, 1, 2};
  for (auto& f : fields) {
    for (int trial = 0; trial < 40; ++trial) {
      auto big = Policy::degree_cap(12);
      auto x = random_series(f, v, big, 4, 4), y = random_series(f, v, big, 4, 4);
      if (x.is_zero() || y.is_zero()) continue;
      auto xy = x * y;
      REQUIRE(!xy.truncated());
      CHECK(xy.weight(g).value == x.weight(g).value * y.weight(g).value);
      CHECK(xy.degree(g).value == x.degree(g).value + y.degree(g).value);
      auto s = x + y;
      if (!s.is_zero()) {
        CHECK(s.weight(g).value <= std::max(x.weight(g).value, y.weight(g).value));
        CHECK(s.degree(g).value >= std::min(x.degree(g).value, y.degree(g).value));
      }
      Monomial lt = *x.leading_term(g, rank);
      Monomial lty = *y.leading_term(g, rank);
      lt.insert(lt.end(), lty.begin(), lty.end());
      CHECK(*xy.leading_term(g, rank) == lt);

      auto pol = Policy::degree_cap(5);
      auto a = random_series(f, v, pol, 5, 3, true), b = random_series(f, v, pol, 5, 3),
           c = random_series(f, v, pol, 5, 3);
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK((b + c) * a == b * a + c * a);
      auto one = Series::one(f, v, pol);
      CHECK(a * a.inverse() == one);
      CHECK(a.inverse() * a == one);
    }
  }
}

TEST_CASE("phi is a ring homomorphism on random inputs", "[series][property]") {
  Field f3(3);
  Field q(3, {2, 2, 1});  // x^2 + 2x + 2, irreducible over F_3
  auto src = make_vars({"a1", "a2", "b1", "b2"});
  auto tilde = make_vars({"a", "b"});
  std::vector<PhiVar> map{{0, 1}, {0, 2}, {1, 1}, {1, 2}};
  for (int trial = 0; trial < 60; ++trial) {
    auto pol = Policy::degree_cap(4);
    auto x = random_series(f3, src, pol, 5, 3, trial % 2), y = random_series(f3, src, pol, 5, 3);
    auto px = scalar_extend_phi(x, q, map, tilde), py = scalar_extend_phi(y, q, map, tilde);
    CHECK(scalar_extend_phi(x + y, q, map, tilde) == px + py);
    CHECK(scalar_extend_phi(x * y, q, map, tilde) == px * py);
  }
}
