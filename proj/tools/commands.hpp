#pragma once
// Subcommands of the `ggs` tool.  run_command returns the exit code: 0 certified/pass,
// 1 not certified, 2 refused input (parse or precondition error).

#include "ggs/contract.hpp"
#include "ggs/io.hpp"
#include "ggs/kms.hpp"
#include "ggs/oracles.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace ggs::cli {

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string out_path;
  unsigned threads = 1;
};

inline Rational flag_q(const std::string& name, const std::string& s) {
  try {
    return parse_rational(s);
  } catch (const Error&) {
    throw Error(Errc::parse, name + ": not an exact rational '" + s + "'");
  }
}

inline std::vector<long> int_list(const std::string& name, const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Rational q = flag_q(name, item);
    if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw Error(Errc::parse, name + ": '" + item + "' is not an integer");
    out.push_back(q.get_num().get_si());
  }
  if (out.empty()) throw Error(Errc::parse, name + ": empty list");
  return out;
}

inline int finish(Context& ctx, const Json& cert, bool certified) {
  if (!ctx.out_path.empty()) {
    std::ofstream f(ctx.out_path, std::ios::binary);
    if (!f) throw Error(Errc::parse, "cannot write '" + ctx.out_path + "'");
    f << dump(cert);
  }
  return certified ? 0 : 1;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::parse, "cannot write '" + path + "'");
  f << text;
}

inline Json presentation_summary(const WeightedPresentation& P) {
  Json j{{"p", P.p()}, {"generators", P.rank()}, {"relators", P.relators().size()}, {"W(X)", to_string(P.WX())}};
  auto wr = P.WR();
  j["W(R)"] = to_string(wr.value);
  j["W(R) exact"] = wr.exact;
  if (P.is_integral()) j["t0"] = to_string(*P.t0);
  return j;
}

// ---------------------------------------------------------------------------------------------

struct CheckArgs {
  std::string file, t0, floor;
  long cap = -1;
  int grid = 0;
};

inline int cmd_check(Context& ctx, const CheckArgs& a) {
  auto text = read_file(a.file);
  auto pf = parse_presentation(text);
  std::optional<Rational> t0;
  if (!a.t0.empty()) t0 = flag_q("--t0", a.t0);
  auto P = pf.to_weighted(t0);
  GGSCertificate c;
  if (P.is_integral()) {
    std::optional<long> cap;
    if (a.cap >= 0) cap = a.cap;
    c = ggs_check(P.D, *P.t0, P.relators(), P.p(), cap);
  } else {
    std::optional<Rational> floor;
    if (!a.floor.empty()) floor = flag_q("--floor", a.floor);
    c = ggs_check(P.W, P.relators(), P.p(), a.grid > 0 ? default_t_grid(a.grid) : std::vector<Rational>{}, floor, ctx.threads);
  }
  Json rel = Json::array();
  for (std::size_t i = 0; i < P.relators().size(); ++i)
    rel.push_back({{"relator", P.pres.render(P.relators()[i])}, {"weight", c.relator_weights[i]}, {"exact", bool(c.exact[i])}});
  Json sweep = Json::array();
  for (auto& s : c.sweep) sweep.push_back({{"t", to_string(s.t)}, {"D", s.D}, {"value", to_string(s.value)}, {"exact", s.exact}});
  Json body{{"presentation", presentation_summary(P)}, {"value", to_string(c.value)}, {"relators", rel}, {"sweep", sweep}};
  if (c.t0) body["t0"] = to_string(*c.t0);
  ctx.out << "1 - W(X) + W(R) " << (c.verdict == Verdict::unknown ? "<= " : "= ") << to_string(c.value) << "\n";
  for (auto& s : c.sweep) ctx.out << "  t = " << to_string(s.t) << ": " << to_string(s.value) << "\n";
  ctx.out << "verdict: " << verdict_name(c.verdict) << "\n";
  Json args{{"file", a.file}, {"t0", a.t0}, {"floor", a.floor}, {"cap", a.cap}, {"grid", a.grid}};
  return finish(ctx, certificate("check", args, digest(text), verdict_name(c.verdict), body), c.verdict == Verdict::satisfied);
}

// ---------------------------------------------------------------------------------------------

struct DescendArgs {
  std::string file, chain, t0, emit;
  long min_degree = -1;
  std::size_t N = 16;
};

/// One character per non-empty line: its values on the then-current generators, in order.
inline std::vector<Character> parse_chain(const std::string& text) {
  std::vector<Character> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    auto tk = detail::tokens(detail::strip_comment(raw));
    if (tk.empty()) continue;
    Character c;
    for (auto& t : tk) {
      Rational q;
      try {
        q = parse_rational(t.text);
      } catch (const Error&) {
        throw Error(Errc::parse, detail::located(ln, t.col, "expected a residue, got '" + t.text + "'"));
      }
      if (q.get_den() != 1 || q < 0 || !q.get_num().fits_uint_p())
        throw Error(Errc::parse, detail::located(ln, t.col, "expected a non-negative residue"));
      c.values.push_back(static_cast<std::uint32_t>(q.get_num().get_ui()));
    }
    out.push_back(c);
  }
  return out;
}

inline int cmd_descend(Context& ctx, const DescendArgs& a) {
  auto text = read_file(a.file);
  auto chain_text = read_file(a.chain);
  auto pf = parse_presentation(text);
  std::optional<Rational> t0;
  if (!a.t0.empty()) t0 = flag_q("--t0", a.t0);
  auto P = pf.to_weighted(t0);
  auto chain = parse_chain(chain_text);
  std::optional<long> m;
  if (a.min_degree >= 0) m = a.min_degree;
  auto r = descend_chain(P, chain, m, a.N);
  auto out_file = PresentationFile::from(r.P);
  std::string pres = serialize_presentation(out_file);
  if (!a.emit.empty()) write_text(a.emit, pres);
  bool ok = !r.stalled && r.log.all_ok();
  ctx.out << r.log.render();
  ctx.out << "descent degrees:";
  for (auto d : r.degrees) ctx.out << " " << d;
  ctx.out << "\nresult: " << r.P.rank() << " generators, " << r.P.relators().size() << " relators, 1 - W(X) + W(R) = "
          << to_string(r.P.ggs_value()) << "\n";
  if (r.stalled) ctx.out << "stalled: " << r.stall_reason << "\n";
  Json body{{"before", presentation_summary(P)}, {"after", presentation_summary(r.P)}, {"degrees", r.degrees},
            {"stalled", r.stalled}, {"stall_reason", r.stall_reason}, {"log", to_json(r.log)}, {"presentation", pres}};
  Json args{{"file", a.file}, {"chain", a.chain}, {"t0", a.t0}, {"min_degree", a.min_degree}, {"N", a.N}};
  return finish(ctx, certificate("descend", args, digest(text + "\n--chain--\n" + chain_text), ok ? "pass" : "fail", body), ok);
}

// ---------------------------------------------------------------------------------------------

struct ContractArgs {
  std::string file, t0, margin, w = "12", delta = "1/100", eps = "1/1000", stage = "b", chain, emit;
  bool reach = false;
};

inline int cmd_contract(Context& ctx, const ContractArgs& a) {
  auto text = read_file(a.file);
  auto pf = parse_presentation(text);
  std::optional<Rational> t0;
  if (!a.t0.empty()) t0 = flag_q("--t0", a.t0);
  auto P = pf.to_weighted(t0);
  PresCondition cond{flag_q("--w", a.w), flag_q("--delta", a.delta), flag_q("--eps", a.eps)};
  cond.validate();
  if (a.stage != "a" && a.stage != "b") throw Error(Errc::parse, "--stage must be 'a' or 'b'");
  Rational need = std::max<Rational>(cond.w * cond.w / cond.delta, cond.w / cond.eps);
  if (a.stage == "b") need *= 4;
  // Default margin: strictly between the requirement and what the input (or the loop) delivers.
  Rational M = need + 1;
  if (!a.margin.empty()) {
    M = flag_q("--margin", a.margin);
  } else if (!a.reach && a.chain.empty()) {
    Rational have = -P.ggs_value();
    if (have > need) M = (need + have) / 2;
  }
  std::string chain_text;
  Json body;
  if (a.reach || !a.chain.empty()) {
    ChainSource src = free_chain_source();
    if (!a.chain.empty()) {
      chain_text = read_file(a.chain);
      src = fixed_chain_source(parse_chain(chain_text));
    }
    auto mr = deepdescent3_loop(P, src, M);
    Json mu = Json::array(), lb = Json::array();
    for (auto& x : mr.mu) mu.push_back(to_string(x));
    for (auto& x : mr.lower_bound) lb.push_back(to_string(x));
    body["margin"] = {{"mu", mu}, {"lower_bound", lb}, {"degrees", mr.degrees}, {"reached", mr.reached}, {"log", to_json(mr.log)}};
    ctx.out << "margin loop: " << mr.degrees.size() << " descents, mu = " << to_string(mr.mu.back()) << (mr.reached ? " > " : " <= ")
            << to_string(M) << "\n";
    if (!mr.reached) {
      Json args{{"file", a.file}, {"stage", a.stage}, {"margin", to_string(M)}, {"chain", a.chain}};
      ctx.out << "verdict: not-satisfied (margin not reached)\n";
      return finish(ctx, certificate("contract", args, digest(text + chain_text), "not-satisfied", body), false);
    }
    P = mr.P;
  }
  PresCertificate cert;
  TransformLog log;
  WeightedPresentation Q;
  if (a.stage == "a") {
    auto r = deepdescent4_a(P, M, cond);
    Q = r.P;
    log = r.log;
    cert = pres_check(Q, cond);
    // Stage a promises weights below eps rather than a bound on the whole weight image.
    Rational top = detail::max_weight(Q.W);
    cert.verdict = cert.wx_ok && cert.wr_ok && top < cond.eps ? Verdict::satisfied : Verdict::not_satisfied;
    ctx.out << "largest generator weight = " << to_string(top) << "\n";
    body["max weight"] = to_string(top);
    body["c"] = to_string(r.c);
    body["c1"] = to_string(r.c1);
  } else {
    auto r = deepdescent4_b(P, M, cond);
    Q = r.P;
    log = r.log;
    cert = r.cert;
  }
  auto pres = serialize_presentation(PresentationFile::from(Q));
  if (!a.emit.empty()) write_text(a.emit, pres);
  ctx.out << log.render();
  ctx.out << "W(X) = " << to_string(cert.wx) << "\nW(R) " << (cert.wr_exact ? "= " : "<= ") << to_string(cert.wr) << "\n";
  if (cert.image_sum) ctx.out << "sum over Im(W) <= " << to_string(*cert.image_sum) << " (" << cert.image_method << ")\n";
  ctx.out << "verdict: " << verdict_name(cert.verdict) << "\n";
  body["result"] = presentation_summary(Q);
  body["log"] = to_json(log);
  body["W(X)"] = to_string(cert.wx);
  body["W(R)"] = to_string(cert.wr);
  body["W(R) exact"] = cert.wr_exact;
  body["image_sum"] = cert.image_sum ? Json(to_string(*cert.image_sum)) : Json(nullptr);
  body["image_method"] = cert.image_method;
  body["presentation"] = pres;
  Json args{{"file", a.file}, {"stage", a.stage}, {"margin", to_string(M)}, {"w", a.w}, {"delta", a.delta}, {"eps", a.eps}, {"chain", a.chain}};
  bool ok = cert.verdict == Verdict::satisfied && log.all_ok();
  return finish(ctx, certificate("contract", args, digest(text + chain_text), verdict_name(cert.verdict), body), ok);
}

// ---------------------------------------------------------------------------------------------

struct KmsBuildArgs {
  std::uint32_t p = 2;
  unsigned m = 1;
  std::string n = "1,1,1,1,1,1,1,1,1", emit;
};

inline Json counts_json(const KMSCounts& c) {
  return {{"generators", c.gens.get_str()}, {"powers", c.power.get_str()}, {"intra", c.intra.get_str()},
          {"triple", c.triple.get_str()},   {"field", c.field.get_str()},   {"relators", c.relators().get_str()}};
}

inline int cmd_kms_build(Context& ctx, const KmsBuildArgs& a) {
  KMSSpec s{a.p, a.m, {}};
  for (auto x : int_list("--n", a.n)) {
    if (x < 1) throw Error(Errc::precondition, "--n entries must be >= 1");
    s.n.push_back(static_cast<std::size_t>(x));
  }
  auto K = build_kms(s);
  auto closed = kms_relator_counts(s);
  bool ok = closed == K.counts;
  PresentationFile f;
  f.p = s.p;
  if (s.m > 1) f.field_degree = s.m;
  f.names = K.pres.gens.names;
  f.weights.assign(f.names.size(), std::nullopt);
  f.degrees.assign(f.names.size(), 1L);
  f.relators = K.pres.relators;
  f.meta.push_back({"kind", "kms"});
  f.meta.push_back({"n", a.n});
  auto pres = serialize_presentation(f);
  if (!a.emit.empty()) write_text(a.emit, pres);
  ctx.out << "generators " << K.counts.gens.get_str() << ", relators: powers " << K.counts.power.get_str() << ", intra "
          << K.counts.intra.get_str() << ", triple " << K.counts.triple.get_str() << ", field " << K.counts.field.get_str() << "\n";
  ctx.out << "property (T) hypothesis |F| > (k-1)^2: " << (s.property_T() ? "holds" : "fails") << "\n";
  Json body{{"counts", counts_json(K.counts)}, {"closed_form", counts_json(closed)}, {"property_T", s.property_T()},
            {"presentation_digest", digest(pres)}};
  Json args{{"p", a.p}, {"m", a.m}, {"n", a.n}};
  return finish(ctx, certificate("kms build", args, digest(args.dump()), ok ? "pass" : "fail", body), ok);
}

struct KmsCertifyArgs {
  std::string file, t0, eps, w, delta, cond_eps;
  unsigned m = 0;
  std::size_t parts = 9, cap = 4;
};

inline int cmd_kms_certify(Context& ctx, const KmsCertifyArgs& a) {
  auto text = read_file(a.file);
  auto pf = parse_presentation(text);
  std::optional<Rational> t0;
  if (!a.t0.empty()) t0 = flag_q("--t0", a.t0);
  auto P = pf.to_weighted(t0);
  unsigned m = a.m ? a.m : pf.field_degree.value_or(1);
  bool large = m == 1;
  PresCondition cond = large ? PresCondition{make_q(3, 2), make_q(1, 50), make_q(1, 100)} : PresCondition{12, make_q(1, 100), make_q(1, 1000)};
  if (!a.w.empty()) cond.w = flag_q("--w", a.w);
  if (!a.delta.empty()) cond.delta = flag_q("--delta", a.delta);
  if (!a.cond_eps.empty()) cond.eps = flag_q("--eps", a.cond_eps);
  Rational eps = a.eps.empty() ? cond.eps : flag_q("--part-eps", a.eps);
  auto part = partition_and_pad(P, m, eps, a.parts);
  Json plan{{"m", m},
            {"parts", part.plan.parts.size()},
            {"padding", part.plan.padding.size()},
            {"tolerance", to_string(part.plan.tolerance)},
            {"bound", to_string(part.plan.bound)},
            {"contraction", to_string(part.plan.contraction)}};
  Json pw = Json::array();
  for (auto& x : part.plan.part_weights) pw.push_back(to_string(x));
  plan["part_weights"] = pw;
  Json body{{"plan", plan}, {"log", to_json(part.log)}};
  bool ok = false;
  std::string verdict;
  auto checks_json = [](const std::vector<Check>& cs) {
    Json j = Json::array();
    for (auto& c : cs) j.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
    return j;
  };
  if (large) {
    auto c = certify_quotient_p_large(part.P, part.plan, cond);
    ctx.out << c.render();
    ok = c.certified();
    verdict = verdict_name(c.verdict);
    body["route"] = "prime field";
    body["value"] = to_string(c.value);
    body["chain"] = to_string(c.chain);
    body["estimate"] = to_string(c.estimate);
    body["W(X)"] = to_string(c.wx);
    body["W(R)"] = to_string(c.wr);
    body["W(R_KM)"] = {{"powers", to_string(c.km.power)}, {"intra", to_string(c.km.intra)}, {"triple", to_string(c.km.triple)}};
    body["checks"] = checks_json(c.checks);
  } else {
    auto c = certify_quotient_p_small(part.P, part.plan, cond, a.cap);
    ctx.out << c.render();
    ok = c.certified();
    verdict = verdict_name(c.verdict);
    body["route"] = "extension field";
    body["value"] = to_string(c.value);
    body["chain"] = to_string(c.chain);
    body["closing"] = to_string(c.closing);
    body["w~(U~)"] = to_string(c.wt_U);
    body["w~(S)"] = {to_string(c.s1), to_string(c.s2), to_string(c.s3)};
    body["congruences"] = {{"field", c.field.checked}, {"representatives", c.nilp.checked}, {"truncation", c.field.truncation},
                           {"failures", c.field.failures}};
    body["checks"] = checks_json(c.checks);
  }
  Json args{{"file", a.file}, {"m", m}, {"parts", a.parts}, {"eps", to_string(eps)}, {"cap", a.cap}};
  return finish(ctx, certificate("kms certify", args, digest(text), verdict, body), ok);
}

struct KazhdanArgs {
  std::uint32_t p = 67;
  unsigned m = 1;
  std::size_t k = 9, nx = 9, max_n = 1;
};

inline int ledger_result(Context& ctx, const std::string& command, const Json& args, const BoundLedger& L) {
  ctx.out << L.render();
  auto bad = L.replay();
  ctx.out << "replay: " << (bad.empty() ? "ok" : "fails at " + bad) << "\n";
  Json body{{"ledger", to_json(L)}, {"replay", bad.empty() ? "ok" : bad}};
  return finish(ctx, certificate(command, args, digest(args.dump()), bad.empty() ? "pass" : "fail", body), bad.empty());
}

inline int cmd_kms_kazhdan(Context& ctx, const KazhdanArgs& a) {
  auto L = kazhdan_numbers(a.p, a.m, a.k, a.nx, a.max_n);
  return ledger_result(ctx, "kms kazhdan", {{"p", a.p}, {"m", a.m}, {"k", a.k}, {"nx", a.nx}, {"max_n", a.max_n}}, L);
}

// ---------------------------------------------------------------------------------------------

struct CheegerArgs {
  std::string mu = "1/4", rho = "6/5", M = "600000";
  std::size_t nx = 2;
  std::uint32_t p = 2;
};

inline int cmd_bounds_cheeger(Context& ctx, const CheegerArgs& a) {
  auto L = cheeger_constants(flag_q("--mu", a.mu), flag_q("--rho", a.rho), flag_q("--M", a.M), a.nx, a.p);
  return ledger_result(ctx, "bounds cheeger", {{"mu", a.mu}, {"rho", a.rho}, {"M", a.M}, {"nx", a.nx}, {"p", a.p}}, L);
}

inline int cmd_bounds_growth(Context& ctx, const std::string& file) {
  auto text = read_file(file);
  auto g = parse_growth(text);
  auto bad = growth_hypothesis_failures(g.profile, g.p, g.n, g.inputs);
  if (!bad.empty()) {
    ctx.out << "hypotheses fail:\n";
    for (auto& b : bad) ctx.out << "  " << b << "\n";
    Json body{{"failures", bad}};
    return finish(ctx, certificate("bounds growth", {{"file", file}}, digest(text), "not-satisfied", body), false);
  }
  auto L = subgroup_growth_bound(g.profile, g.p, g.n, g.inputs, g.den);
  ctx.out << L.render();
  auto r = L.replay();
  ctx.out << "replay: " << (r.empty() ? "ok" : "fails at " + r) << "\n";
  Json body{{"ledger", to_json(L)}, {"replay", r.empty() ? "ok" : r}};
  return finish(ctx, certificate("bounds growth", {{"file", file}}, digest(text), r.empty() ? "pass" : "fail", body), r.empty());
}

// ---------------------------------------------------------------------------------------------

struct QuillenArgs {
  std::string group = "heisenberg", degrees;
  std::uint32_t p = 2;
};

inline int cmd_oracle_quillen(Context& ctx, const QuillenArgs& a) {
  if (!detail::is_prime_u32(a.p)) throw Error(Errc::precondition, "p must be prime");
  auto G = groups::by_name(a.group, a.p);
  std::vector<long> D = a.degrees.empty() ? std::vector<long>(G.gens().size(), 1) : int_list("--degrees", a.degrees);
  auto F = finite_group_filtration(G, D);
  auto r = quillen_compare(F.a, F.c, G.p(), G.order());
  r.pass = r.pass && F.conditions_hold;
  ctx.out << G.name() << ", |G| = " << G.order() << "\nc_n:";
  for (auto c : F.c) ctx.out << " " << c;
  ctx.out << "\nsum a_n t^n = " << r.lhs.render() << "\nproduct     = " << r.rhs.render() << "\n";
  if (!F.conditions_hold) ctx.out << "filtration condition fails: " << F.failure << "\n";
  ctx.out << (r.pass ? "pass" : "fail") << "\n";
  Json body{{"order", G.order()}, {"c", F.c}, {"a", F.a}, {"lhs", to_json(r.lhs)}, {"rhs", to_json(r.rhs)},
            {"first_mismatch", r.first_mismatch ? Json(*r.first_mismatch) : Json(nullptr)}, {"conditions", F.conditions_hold}};
  Json args{{"group", a.group}, {"p", a.p}, {"degrees", D}};
  return finish(ctx, certificate("oracle quillen", args, digest(args.dump()), r.pass ? "pass" : "fail", body), r.pass);
}

/// Noncommutative polynomial in u0, u1, ...:  terms joined by + and -, each an optional
/// integer coefficient followed by u<i> or u<i>^k factors, or 1.
inline NCPoly parse_ncpoly(const std::string& s, std::size_t nvars, std::uint32_t p) {
  NCPoly out;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) { return Error(Errc::parse, msg + " at column " + std::to_string(i + 1) + " in '" + s + "'"); };
  auto skip = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  auto number = [&]() -> long {
    std::size_t st = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (st == i) throw fail("expected a number");
    return std::stol(s.substr(st, i - st));
  };
  bool first = true;
  while (true) {
    skip();
    if (i >= s.size()) break;
    long sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
      skip();
    } else if (!first) {
      throw fail("expected '+' or '-'");
    }
    first = false;
    long coeff = 1;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) coeff = number();
    std::vector<std::uint32_t> mono;
    while (true) {
      skip();
      if (i >= s.size() || s[i] != 'u') break;
      ++i;
      long v = number();
      if (v < 0 || static_cast<std::size_t>(v) >= nvars) throw fail("variable out of range");
      long e = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        e = number();
      }
      mono.insert(mono.end(), static_cast<std::size_t>(e), static_cast<std::uint32_t>(v));
    }
    long c = ((sign * coeff) % static_cast<long>(p) + p) % static_cast<long>(p);
    auto& slot = out[mono];
    slot = static_cast<std::uint32_t>((slot + c) % p);
    if (slot == 0) out.erase(mono);
  }
  if (first) throw fail("empty polynomial");
  return out;
}

struct AlgebraArgs {
  std::size_t vars = 2, N = 8;
  std::uint32_t p = 2;
  std::vector<std::string> rels;
  std::string degrees;
};

inline int cmd_oracle_algebra(Context& ctx, const AlgebraArgs& a) {
  if (!detail::is_prime_u32(a.p)) throw Error(Errc::precondition, "p must be prime");
  std::vector<long> deg = a.degrees.empty() ? std::vector<long>(a.vars, 1) : int_list("--degrees", a.degrees);
  std::vector<NCPoly> S;
  for (auto& r : a.rels) S.push_back(parse_ncpoly(r, a.vars, a.p));
  auto dims = quotient_algebra_dims(a.vars, S, deg, a.N, a.p);
  std::vector<Rational> hx(a.N + 1, 0), hr(a.N + 1, 0), ha;
  for (auto d : deg)
    if (static_cast<std::size_t>(d) <= a.N) hx[d] += 1;
  for (auto& s : S) {
    std::size_t low = a.N + 1;
    for (auto& [m, c] : s) {
      std::size_t d = 0;
      for (auto v : m) d += static_cast<std::size_t>(deg[v]);
      low = std::min(low, d);
    }
    if (low <= a.N) hr[low] += 1;
  }
  for (auto x : dims.a) ha.push_back(Rational(x));
  auto rep = ggs_inequality_check(IntSeries::of(hx, a.N), IntSeries::of(hr, a.N), IntSeries::of(ha, a.N), a.N);
  ctx.out << "dim A_n:";
  for (auto x : dims.a) ctx.out << " " << x;
  ctx.out << "\n(1 - H_U + H_S) Hilb_A / (1 - t) >= 1 / (1 - t): " << (rep.holds ? "holds" : "fails");
  if (rep.first_failure) ctx.out << " at degree " << *rep.first_failure;
  ctx.out << "\n";
  Json body{{"a", dims.a}, {"ideal", dims.ideal}, {"free", dims.free}, {"spanning", dims.spanning}, {"inequality", rep.holds},
            {"first_failure", rep.first_failure ? Json(*rep.first_failure) : Json(nullptr)}, {"lhs", to_json(rep.lhs)}};
  Json args{{"vars", a.vars}, {"N", a.N}, {"p", a.p}, {"rel", a.rels}, {"degrees", deg}};
  return finish(ctx, certificate("oracle algebra", args, digest(args.dump()), rep.holds ? "pass" : "fail", body), rep.holds);
}

struct WeightArgs {
  std::string word, weights;
  std::uint32_t p = 2;
  std::size_t depth = 8;
};

inline int cmd_oracle_weight(Context& ctx, const WeightArgs& a) {
  if (!detail::is_prime_u32(a.p)) throw Error(Errc::precondition, "p must be prime");
  std::vector<std::string> names;
  std::vector<Rational> W;
  std::stringstream ss(a.weights);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Errc::parse, "--weights: expected name=a/b, got '" + item + "'");
    names.push_back(item.substr(0, eq));
    W.push_back(flag_q("--weights", item.substr(eq + 1)));
    if (W.back() <= 0 || W.back() >= 1) throw Error(Errc::precondition, "weights must lie in (0,1)");
  }
  if (names.empty()) throw Error(Errc::parse, "--weights is empty");
  auto w = parse_word(a.word, names);
  Rational maxw = *std::max_element(W.begin(), W.end());
  Rational theta = qpow(maxw, a.depth + 1);
  auto fast = word_weight(w, W, a.p, theta);
  auto slow = weight_bruteforce(w, W, a.p, a.depth);
  // Beyond the depth every monomial weighs at most theta, so both agree whenever either exceeds it.
  bool agree = fast.is_exact() ? fast.value == slow : slow <= theta;
  ctx.out << "series weight: " << fast.str() << "\nexpansion to length " << a.depth << ": " << to_string(slow) << "\n"
          << (agree ? "agree" : "disagree") << "\n";
  Json body{{"series", fast.str()}, {"expansion", to_string(slow)}, {"floor", to_string(theta)}, {"agree", agree}};
  Json args{{"word", a.word}, {"weights", a.weights}, {"p", a.p}, {"depth", a.depth}};
  return finish(ctx, certificate("oracle weight", args, digest(args.dump()), agree ? "pass" : "fail", body), agree);
}

// ---------------------------------------------------------------------------------------------

inline int run_command(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Golod-Shafarevich presentations: checks, descents, contractions, KMS quotients and bounds", "ggs"};
  app.require_subcommand(1);
  Context ctx{out, err, {}, 1};
  auto common = [&](CLI::App* s) {
    s->add_option("--out", ctx.out_path, "write the JSON certificate here");
    s->add_option("--threads", ctx.threads, "worker threads for batch evaluation")->check(CLI::Range(1u, 256u));
  };
  std::function<int()> action;

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "evaluate 1 - W(X) + W(R) for a presentation");
  check->add_option("file", ca.file, ".pres file")->required();
  check->add_option("--t0", ca.t0, "t0 for degree inputs (a/b)");
  check->add_option("--floor", ca.floor, "relator weight floor (a/b)");
  check->add_option("--cap", ca.cap, "degree cap for degree inputs");
  check->add_option("--grid", ca.grid, "levels of the t-grid sweep for weight inputs");
  common(check);
  check->callback([&] { action = [&] { return cmd_check(ctx, ca); }; });

  DescendArgs da;
  auto* descend = app.add_subcommand("descend", "descend along a chain of index-p characters");
  descend->add_option("file", da.file, ".pres file")->required();
  descend->add_option("--chain", da.chain, "character file, one character per line")->required();
  descend->add_option("--min-degree", da.min_degree, "eliminate pairs until every degree is at least this");
  descend->add_option("--t0", da.t0, "t0 (a/b)");
  descend->add_option("--cap", da.N, "series truncation used by the descent checks");
  descend->add_option("--emit", da.emit, "write the descended presentation here");
  common(descend);
  descend->callback([&] { action = [&] { return cmd_descend(ctx, da); }; });

  ContractArgs xa;
  auto* contract_cmd = app.add_subcommand("contract", "contract to Pres(w, delta, eps)");
  contract_cmd->add_option("file", xa.file, ".pres file")->required();
  contract_cmd->add_option("--t0", xa.t0, "t0 (a/b)");
  contract_cmd->add_option("--margin", xa.margin, "claimed M with 1 - W(X) + W(R) < -M (default: midway between the required bound and the actual margin)");
  contract_cmd->add_option("--w", xa.w, "target W(X)");
  contract_cmd->add_option("--delta", xa.delta, "target bound for W(R)");
  contract_cmd->add_option("--eps", xa.eps, "target bound for the weight image sum");
  contract_cmd->add_option("--stage", xa.stage, "a: weights below eps; b: full Pres certificate")->check(CLI::IsMember({"a", "b"}));
  contract_cmd->add_option("--chain", xa.chain, "characters for the margin loop");
  contract_cmd->add_flag("--reach", xa.reach, "descend until the margin holds before contracting");
  contract_cmd->add_option("--emit", xa.emit, "write the contracted presentation here");
  common(contract_cmd);
  contract_cmd->callback([&] { action = [&] { return cmd_contract(ctx, xa); }; });

  auto* kms = app.add_subcommand("kms", "Kac-Moody-Steinberg presentations and quotient certificates");
  kms->require_subcommand(1);
  KmsBuildArgs kb;
  auto* kbuild = kms->add_subcommand("build", "build a KMS presentation");
  kbuild->add_option("--p", kb.p, "prime");
  kbuild->add_option("--m", kb.m, "extension degree");
  kbuild->add_option("--n", kb.n, "root subgroup ranks, comma separated");
  kbuild->add_option("--emit", kb.emit, "write the presentation here");
  common(kbuild);
  kbuild->callback([&] { action = [&] { return cmd_kms_build(ctx, kb); }; });
  KmsCertifyArgs kc;
  auto* kcert = kms->add_subcommand("certify", "partition, pad and certify the combined quotient");
  kcert->add_option("file", kc.file, ".pres file")->required();
  kcert->add_option("--t0", kc.t0, "t0 (a/b)");
  kcert->add_option("--m", kc.m, "group size (1: prime-field route; >1: extension-field route)");
  kcert->add_option("--parts", kc.parts, "number of parts");
  kcert->add_option("--part-eps", kc.eps, "partition bound (default: the condition's eps)");
  kcert->add_option("--w", kc.w, "condition w");
  kcert->add_option("--delta", kc.delta, "condition delta");
  kcert->add_option("--eps", kc.cond_eps, "condition eps");
  kcert->add_option("--cap", kc.cap, "truncation degree for the congruence checks");
  common(kcert);
  kcert->callback([&] { action = [&] { return cmd_kms_certify(ctx, kc); }; });
  KazhdanArgs kz;
  auto* kkaz = kms->add_subcommand("kazhdan", "Kazhdan constant arithmetic");
  kkaz->add_option("--p", kz.p, "prime");
  kkaz->add_option("--m", kz.m, "extension degree");
  kkaz->add_option("--k", kz.k, "number of root subgroups");
  kkaz->add_option("--nx", kz.nx, "generators");
  kkaz->add_option("--max-n", kz.max_n, "largest root subgroup rank");
  common(kkaz);
  kkaz->callback([&] { action = [&] { return cmd_kms_kazhdan(ctx, kz); }; });

  auto* bounds = app.add_subcommand("bounds", "bound ledgers");
  bounds->require_subcommand(1);
  CheegerArgs cg;
  auto* cheeger = bounds->add_subcommand("cheeger", "Cheeger constant chain");
  cheeger->add_option("--mu", cg.mu, "mu (a/b)");
  cheeger->add_option("--rho", cg.rho, "rho (a/b)");
  cheeger->add_option("--M", cg.M, "M");
  cheeger->add_option("--nx", cg.nx, "|X|");
  cheeger->add_option("--p", cg.p, "prime");
  common(cheeger);
  cheeger->callback([&] { action = [&] { return cmd_bounds_cheeger(ctx, cg); }; });
  std::string growth_file;
  auto* growth = bounds->add_subcommand("growth", "subgroup growth bound from a growth profile file");
  growth->add_option("file", growth_file, "growth profile")->required();
  common(growth);
  growth->callback([&] { action = [&] { return cmd_bounds_growth(ctx, growth_file); }; });

  auto* oracle = app.add_subcommand("oracle", "brute-force oracles");
  oracle->require_subcommand(1);
  QuillenArgs qa;
  auto* oq = oracle->add_subcommand("quillen", "Quillen identity on a built-in finite group");
  oq->add_option("--group", qa.group, "cyclic | cyclic2 | elementary | heisenberg");
  oq->add_option("--p", qa.p, "prime");
  oq->add_option("--degrees", qa.degrees, "generator degrees, comma separated");
  common(oq);
  oq->callback([&] { action = [&] { return cmd_oracle_quillen(ctx, qa); }; });
  AlgebraArgs aa;
  auto* oa = oracle->add_subcommand("algebra", "graded dimensions of F_p<<U>>/I by row reduction");
  oa->add_option("--vars", aa.vars, "number of variables u0, u1, ...");
  oa->add_option("--rel", aa.rels, "ideal generator, e.g. 'u0u1 - u1u0' (repeatable)");
  oa->add_option("--p", aa.p, "prime");
  oa->add_option("--cap", aa.N, "truncation degree");
  oa->add_option("--degrees", aa.degrees, "variable degrees, comma separated");
  common(oa);
  oa->callback([&] { action = [&] { return cmd_oracle_algebra(ctx, aa); }; });
  WeightArgs wa;
  auto* ow = oracle->add_subcommand("weight", "word weight by full expansion");
  ow->add_option("--word", wa.word, "word")->required();
  ow->add_option("--weights", wa.weights, "name=a/b, comma separated")->required();
  ow->add_option("--p", wa.p, "prime");
  ow->add_option("--depth", wa.depth, "expansion length");
  common(ow);
  ow->callback([&] { action = [&] { return cmd_oracle_weight(ctx, wa); }; });

  std::vector<const char*> cargv{"ggs"};
  for (auto& s : argv) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  try {
    return action ? action() : 2;
  } catch (const Error& e) {
    err << "ggs: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    err << "ggs: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ggs::cli
