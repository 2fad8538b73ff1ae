// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "ggs/bounds.hpp"
#include "ggs/contract.hpp"
#include "ggs/hilbert.hpp"
#include "ggs/io.hpp"
#include "ggs/kms.hpp"
#include "ggs/oracles.hpp"
#include "ggs/transform.hpp"
#include "instances.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace ggs;
using namespace testsupport;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

/// Collects failed expectations of one criterion.
class Expect {
 public:
  void operator()(bool cond, const std::string& what) {
    if (!cond && notes_.size() < 5) notes_.push_back(what);
    ok_ = ok_ && cond;
  }
  Outcome done(std::string detail = "") const {
    for (auto& n : notes_) detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + n;
    return {ok_, detail};
  }

 private:
  bool ok_ = true;
  std::vector<std::string> notes_;
};

std::vector<long> ones(std::size_t n) { return std::vector<long>(n, 1); }

std::string approx(const Rational& q) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", q.get_d());
  return b;
}

Outcome quillen_identity() {
  Expect ex;
  std::size_t runs = 0;
  for (std::uint32_t p : {2u, 3u, 5u}) {
    struct Case {
      FiniteGroupTable G;
      std::vector<std::vector<long>> degrees;
    };
    std::vector<Case> cases{{groups::cyclic(p), {{1}, {3}}},
                            {groups::elementary(p), {{1, 1}, {1, 2}}},
                            {groups::cyclic(p, 2), {{1}, {2}}},
                            {groups::heisenberg(p), {{1, 1}, {2, 3}}}};
    for (auto& c : cases)
      for (auto& D : c.degrees) {
        auto q = quillen_verify(c.G, D);
        std::string tag = c.G.name() + " p=" + std::to_string(p) + " D=" + std::to_string(D[0]) + (D.size() > 1 ? "," + std::to_string(D[1]) : "");
        ex(q.pass, tag + " polynomial identity");
        ex(q.lhs_at_1 == c.G.order() && q.rhs_at_1 == c.G.order(), tag + " value at t=1");
        ++runs;
      }
  }
  return ex.done(std::to_string(runs) + " group/degree pairs");
}

IntSeries dims_series(const AlgebraDims& d, std::size_t N) {
  std::vector<Rational> a;
  for (auto x : d.a) a.push_back(Rational(x));
  return IntSeries::of(a, N);
}

Outcome ggs_inequality() {
  Expect ex;
  const std::size_t N = 10;
  for (std::uint32_t p : {2u, 3u}) {
    auto free2 = quotient_algebra_dims(2, {}, ones(2), N, p);
    auto HX = IntSeries::of({0, 2}, N);
    auto zero = IntSeries::of({0}, N);
    auto hf = dims_series(free2, N);
    ex(ggs_inequality_check(HX, zero, hf, N).holds, "free algebra inequality");
    auto prod = (IntSeries::one(N) - HX) * hf;
    ex(prod == IntSeries::one(N), "free algebra equality (1 - 2t) Hilb = 1");

    auto nil = quotient_algebra_dims(1, {NCPoly{{{0, 0}, 1}}}, ones(1), N, p);
    ex(nil.a[0] == 1 && nil.a[1] == 1 && nil.a[2] == 0, "dims of F_p<u>/(u^2)");
    ex(ggs_inequality_check(IntSeries::of({0, 1}, N), IntSeries::of({0, 0, 1}, N), dims_series(nil, N), N).holds,
       "F_p<u>/(u^2) inequality");

    NCPoly comm{{{0, 1}, 1}, {{1, 0}, p - 1}};
    auto poly = quotient_algebra_dims(2, {comm}, ones(2), N, p);
    for (std::size_t n = 0; n <= N; ++n) ex(poly.a[n] == static_cast<long>(n + 1), "commutative quotient dim " + std::to_string(n));
    ex(ggs_inequality_check(HX, IntSeries::of({0, 0, 1}, N), dims_series(poly, N), N).holds, "commutative quotient inequality");
  }
  return ex.done("degree 10, p = 2, 3");
}

std::vector<Word> quadratic_relators(std::size_t n, std::size_t count) {
  std::vector<Word> R;
  for (std::uint32_t i = 0; i < n && R.size() < count; ++i)
    for (std::uint32_t j = i + 1; j < n && R.size() < count; ++j) R.push_back(commutator(Word::gen(i), Word::gen(j)));
  return R;
}

Outcome gs_threshold() {
  Expect ex;
  auto D = ones(5);
  auto six = ggs_check(D, make_q(5, 12), quadratic_relators(5, 6), 2);
  ex(six.value == make_q(-1, 24), "six relators at 5/12 give -1/24");
  ex(six.verdict == Verdict::satisfied, "six relators accepted");
  auto R7 = quadratic_relators(5, 7);
  Rational least = 1;
  for (long k = 1; k < 1000; ++k) {
    auto c = ggs_check(D, make_q(k, 1000), R7, 2);
    least = std::min(least, c.value);
    if (c.verdict != Verdict::not_satisfied) ex(false, "seven relators at t = " + std::to_string(k) + "/1000");
  }
  // 1 - 5t + 7t^2 has discriminant 25 - 28 < 0, minimum 3/28 at t = 5/14.
  ex(Rational(25 - 4 * 7) < 0, "discriminant");
  ex(ggs_check(D, make_q(5, 14), R7, 2).value == make_q(3, 28), "minimum 3/28 at 5/14");
  ex(least >= make_q(3, 28), "grid values stay above the minimum");
  return ex.done("grid minimum " + to_string(least));
}

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

Outcome descent_bookkeeping() {
  Expect ex;
  const std::size_t N = 12;
  for (int trial = 0; trial < 100; ++trial) {
    std::uint32_t p = trial % 2 ? 2 : 3;
    std::size_t d = static_cast<std::size_t>(rnd(1, 4));
    auto P = random_integral(p, d, static_cast<int>(rnd(0, 3)));
    auto Q = p_descent(P, 0);
    std::string tag = "trial " + std::to_string(trial);
    Rational c = 0;
    for (std::uint32_t k = 0; k < p; ++k) c += qpow(P.W[0], k);
    ex(Q.P.WX() - 1 == c * (P.WX() - 1), tag + " W(X')-1 = c(W(X)-1)");
    ex(Q.P.WR().value <= c * P.WR().value, tag + " W(R') <= cW(R)");
    ex(Q.P.rank() == p * (d - 1) + 1, tag + " Schreier rank p(d-1)+1");
    ex(Q.P.relators().size() <= p * P.relators().size(), tag + " at most p|R| relators");
    IntSeries geo(N);
    for (std::size_t e = 0; e < p; ++e)
      if (e * static_cast<std::size_t>(P.D[0]) <= N) geo[e * static_cast<std::size_t>(P.D[0])] = 1;
    ex(!(P.series(N) * geo).partial_sums().first_below(Q.P.series(N).partial_sums()), tag + " series inequality");
    ex(Q.log.all_ok(), tag + " transformation log");
  }
  return ex.done("100 descents, p = 2, 3");
}

Outcome contraction_pipeline() {
  Expect ex;
  std::mt19937_64 g(20240611);
  PresCondition target{12, make_q(1, 100), make_q(1, 1000)};
  const Rational M(57601);
  std::size_t largest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto P = margin_instance(g, trial % 2 ? 2 : 3, M);
    largest = std::max(largest, P.rank());
    auto r = deepdescent4_b(P, M, target);
    std::string tag = "input " + std::to_string(trial);
    ex(r.log.all_ok(), tag + " log");
    ex(r.P.WX() == 12, tag + " W(X) = 12");
    auto cert = pres_check(r.P, target, r.prov);
    ex(cert.verdict == Verdict::satisfied, tag + " pres_check");
    ex(cert.wx == 12 && cert.wr < target.delta && cert.image_sum && *cert.image_sum < target.eps, tag + " certificate fields");
  }
  return ex.done("50 inputs, up to " + std::to_string(largest) + " generators");
}

Outcome large_p_claim() {
  Expect ex;
  Rational shown = 1 - make_q(3, 2) + make_q(1, 8) + make_q(1, 3) + make_q(36, 10000) + make_q(3, 200) + make_q(1, 50);
  ex(shown == make_q(-46, 15000), "sum is -46/15000");
  ex(shown < 0, "sum is negative");
  auto P = equal_weight_instance(67, 900);
  auto r = partition_and_pad(P, 1, make_q(1, 100));
  auto c = certify_quotient_p_large(r.P, r.plan);
  ex(c.certified(), "p = 67 certificate");
  ex(c.value < 0, "1 - W(X) + W(R u R_KM) < 0");
  return ex.done("p = 67 value " + approx(c.value));
}

Outcome small_p_route() {
  Expect ex;
  auto P = dyadic_instance(2, 24570, 12);
  auto pc = pres_check(P, {12, make_q(1, 100), make_q(1, 1000)});
  ex(pc.verdict == Verdict::satisfied, "input is Pres(12, 1/100, 1/1000)");
  auto r = partition_and_pad(P, 8, make_q(1, 1000));
  auto c = certify_quotient_p_small(r.P, r.plan);
  ex(c.certified(), "small-p certificate");
  ex(c.value < 0, "1 - w(U) + w(S1) + w(S2) + w(S3) < 0");
  ex(c.wt_U == make_q(3, 2), "w(U) = 3/2");
  auto f = verify_field_congruence(KMSSpec{2, 8, std::vector<std::size_t>(9, 1)}, 4);
  ex(f.ok(), "field relator congruences for nine parts with n_i = 1");
  ex(f.truncation == 4, "truncation degree 4");
  return ex.done("value " + approx(c.value) + ", " + std::to_string(f.checked) + " field relators at degree 4");
}

Outcome kazhdan_arithmetic() {
  Expect ex;
  auto L = kazhdan_numbers(67, 1, 9, 9, 1);
  ex(L.get("kappa(Lambda,U) > 1/25").holds(), "kappa > 1/25");
  ex(L.replay().empty(), "ledger replay");
  auto r = L.get("kappa(Lambda,U)").range();
  Rational d = 1 - make_q(9, 2) * r.lo * r.lo;
  ex(d > 0 && (8 / d) * (8 / d) <= 67, "lower end squared under (2/9)(1 - 8/sqrt 67)");
  ex(r.lo > make_q(1, 25), "interval lies above 1/25");
  auto T = kazhdan_numbers(2, 8, 9, 9, 1);
  ex(T.get("property (T)").holds(), "2^8 > 64");
  return ex.done("kappa in [" + to_string(r.lo) + ", " + to_string(r.hi) + "]");
}

Outcome cheeger() {
  Expect ex;
  auto L = cheeger_constants(make_q(1, 4), make_q(6, 5), 600000, 2, 2);
  ex(L.get("k0").value() == 81, "k0 = 81");
  ex(L.get("N").render() == "2^82 - 1", "N = 2^82 - 1");
  auto j = to_json(L);
  auto back = ledger_from_json(Json::parse(j.dump()));
  ex(back.replay().empty(), "replay");
  ex(to_json(back).dump() == j.dump(), "bit-exact JSON round trip");
  return ex.done("k0 = " + L.get("k0").render() + ", N = " + L.get("N").render());
}

Outcome growth_chain() {
  Expect ex;
  const std::vector<std::vector<long>> expected{{1, 3, 7}, {1, 4, 13}};
  for (std::size_t i = 0; i < 2; ++i) {
    unsigned p = i == 0 ? 2 : 3;
    for (unsigned d = 1; d <= 3; ++d) {
      auto q = rules::apply("hyperplane-count", {Quantity::exact(p), Quantity::exact(d)});
      auto brute = index_p_subgroups_bruteforce(p, d);
      ex(q.value() == Rational(static_cast<unsigned long>(brute)), "count p=" + std::to_string(p) + " d=" + std::to_string(d));
      ex(static_cast<long>(brute) == expected[i][d - 1], "value p=" + std::to_string(p) + " d=" + std::to_string(d));
    }
  }
  auto f = parse_growth(read_file(std::string(GGS_SAMPLES_DIR) + "/doubling.growth"));
  auto L = subgroup_growth_bound(f.profile, f.p, f.n, f.inputs, f.den);
  ex(L.replay().empty(), "growth ledger replay");
  ex(L.get("(1+t0^(n-1))^c_{n-1} >= 2^(t0/(t1+eps))^(n-1)").holds(), "verified power inequality");
  auto back = ledger_from_json(Json::parse(to_json(L).dump()));
  ex(back.replay().empty(), "growth ledger JSON replay");
  return ex.done("doubling profile, d(G_n) >= " + L.get("d").render());
}

Outcome weight_oracle() {
  Expect ex;
  struct Config {
    std::uint32_t p;
    std::vector<Rational> W;
  };
  std::vector<Config> configs{{2, {make_q(1, 2), make_q(1, 3), make_q(2, 5)}},
                              {3, {make_q(1, 2), make_q(1, 3), make_q(2, 5)}},
                              {2, {make_q(1, 3), make_q(1, 4)}},
                              {5, {make_q(1, 2), make_q(1, 2)}}};
  std::mt19937_64 g(7);
  std::size_t compared = 0, total = 0;
  const Rational tail = qpow(make_q(1, 2), 9);
  for (auto& cfg : configs) {
    int done = 0;
    while (done < 200) {
      Word w;
      int len = std::uniform_int_distribution<int>(1, 5)(g);
      for (int k = 0; k < len; ++k) {
        auto gen = static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, static_cast<int>(cfg.W.size()) - 1)(g));
        long long e = std::uniform_int_distribution<int>(-3, 3)(g);
        if (e) w = w * Word::gen(gen, e);
      }
      if (w.is_identity()) continue;
      ++done;
      ++total;
      auto fast = word_weight(w, cfg.W, cfg.p, tail);
      if (!fast.is_exact()) continue;
      auto slow = weight_bruteforce(w, cfg.W, cfg.p, 8);
      // Monomials beyond depth 8 weigh at most 2^-9, so the oracle is exact above that.
      if (tail < slow) {
        ex(fast.value == slow, "p=" + std::to_string(cfg.p) + " word " + render_word(w, {"x", "y", "z"}));
        ++compared;
      }
    }
  }
  ex(compared >= total / 4, "enough exact comparisons");
  return ex.done(std::to_string(compared) + " of " + std::to_string(total) + " words compared exactly");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Quillen identity on finite p-groups", quillen_identity},
      {"GGS inequality against quotient algebra dimensions", ggs_inequality},
      {"Golod-Shafarevich threshold for five generators", gs_threshold},
      {"p-descent bookkeeping on random presentations", descent_bookkeeping},
      {"contraction to Pres(12, 1/100, 1/1000)", contraction_pipeline},
      {"large-p quotient certificate", large_p_claim},
      {"small-p field route over F_256", small_p_route},
      {"Kazhdan constant arithmetic", kazhdan_arithmetic},
      {"Cheeger constants k0 and N", cheeger},
      {"index-p counts and subgroup growth chain", growth_chain},
      {"word weights against the brute-force oracle", weight_oracle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char time[32];
    std::snprintf(time, sizeof time, "%.2fs", s);
    std::cout << (o.ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " (" << time << ")";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << std::endl;
    failed += o.ok ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
