#pragma once
// Presentation files (.pres), growth-profile files, and the JSON certificate envelope.
//
// .pres is line based; '#' starts a comment:
//   p 3
//   field 3^2            (optional extension, used by the KMS algebra route)
//   t0 1/2               (optional; turns degrees into weights t0^D)
//   gen x weight 1/2 degree 1
//   rel [x,y,x]
//   meta source hand-written

#include "ggs/bounds.hpp"
#include "ggs/transform.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace ggs {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "ggs 1.0.0";
inline constexpr const char* kCertificateSchema = "ggs-certificate/1";

struct PresentationFile {
  std::uint32_t p = 2;
  std::optional<unsigned> field_degree;  // q = p^field_degree
  std::optional<Rational> t0;
  std::vector<std::string> names;
  std::vector<std::optional<Rational>> weights;
  std::vector<std::optional<long>> degrees;
  std::vector<Word> relators;
  std::vector<std::pair<std::string, std::string>> meta;

  bool has_weights() const { return !names.empty() && weights.front().has_value(); }
  bool has_degrees() const { return !names.empty() && degrees.front().has_value(); }

  bool operator==(const PresentationFile& o) const {
    return p == o.p && field_degree == o.field_degree && t0 == o.t0 && names == o.names && weights == o.weights &&
           degrees == o.degrees && relators == o.relators && meta == o.meta;
  }

  Presentation presentation() const {
    Presentation P;
    P.gens = GeneratorSet(names, p);
    P.relators = relators;
    return P;
  }

  /// Integral when every generator has a degree and a t0 is known (the override wins), else weighted.
  WeightedPresentation to_weighted(std::optional<Rational> t0_override = std::nullopt) const {
    auto t = t0_override ? t0_override : t0;
    if (has_degrees() && t) {
      std::vector<long> D;
      for (auto& d : degrees) D.push_back(*d);
      auto wp = WeightedPresentation::integral(presentation(), D, *t);
      if (has_weights())
        for (std::size_t i = 0; i < names.size(); ++i)
          if (*weights[i] != wp.W[i])
            throw Error(Errc::precondition, "weight of " + names[i] + " is not t0^degree = " + to_string(wp.W[i]));
      return wp;
    }
    if (t0_override) throw Error(Errc::precondition, "--t0 needs generator degrees");
    if (!has_weights()) throw Error(Errc::precondition, "degrees without t0: pass --t0 or add a t0 line");
    std::vector<Rational> W;
    for (auto& w : weights) W.push_back(*w);
    return WeightedPresentation::weighted(presentation(), W);
  }

  static PresentationFile from(const WeightedPresentation& P) {
    PresentationFile f;
    f.p = P.p();
    f.names = P.pres.gens.names;
    f.relators = P.relators();
    if (P.is_integral()) {
      f.t0 = P.t0;
      for (auto d : P.D) f.degrees.push_back(d);
      f.weights.assign(f.names.size(), std::nullopt);
    } else {
      for (auto& w : P.W) f.weights.push_back(w);
      f.degrees.assign(f.names.size(), std::nullopt);
    }
    return f;
  }
};

namespace detail {

inline std::string located(std::size_t line, std::size_t col, const std::string& msg) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg;
}

struct Token {
  std::string text;
  std::size_t col;  // 1-based
};

inline std::vector<Token> tokens(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t st = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(st, i - st), st + 1});
  }
  return out;
}

inline std::string strip_comment(const std::string& s) {
  auto h = s.find('#');
  return h == std::string::npos ? s : s.substr(0, h);
}

}  // namespace detail

inline PresentationFile parse_presentation(std::string_view text) {
  PresentationFile f;
  bool have_p = false;
  std::vector<std::pair<std::size_t, std::pair<std::size_t, std::string>>> rel_text;  // line, (col, text)
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t ln = 0;
  auto fail = [&](std::size_t col, const std::string& msg) -> Error { return Error(Errc::parse, detail::located(ln, col, msg)); };
  auto rational_at = [&](const detail::Token& t) {
    try {
      return parse_rational(t.text);
    } catch (const Error&) {
      throw fail(t.col, "not a rational: '" + t.text + "'");
    }
  };
  auto integer_at = [&](const detail::Token& t) -> long {
    Rational q = rational_at(t);
    if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw fail(t.col, "expected an integer, got '" + t.text + "'");
    return q.get_num().get_si();
  };
  while (std::getline(in, raw)) {
    ++ln;
    std::string line = detail::strip_comment(raw);
    auto tk = detail::tokens(line);
    if (tk.empty()) continue;
    const std::string& key = tk[0].text;
    if (key == "p") {
      if (tk.size() != 2) throw fail(tk[0].col, "expected 'p <prime>'");
      long p = integer_at(tk[1]);
      if (p < 2 || p > 4294967295L || !detail::is_prime_u32(static_cast<std::uint32_t>(p))) throw fail(tk[1].col, "p must be prime");
      f.p = static_cast<std::uint32_t>(p);
      have_p = true;
    } else if (key == "field") {
      if (tk.size() != 2) throw fail(tk[0].col, "expected 'field <p>^<m>'");
      auto caret = tk[1].text.find('^');
      if (caret == std::string::npos) throw fail(tk[1].col, "expected <p>^<m>");
      detail::Token base{tk[1].text.substr(0, caret), tk[1].col}, ex{tk[1].text.substr(caret + 1), tk[1].col + caret + 1};
      long b = integer_at(base), m = integer_at(ex);
      if (!have_p || b != static_cast<long>(f.p)) throw fail(base.col, "field characteristic must equal p (declare p first)");
      if (m < 1 || m > 64) throw fail(ex.col, "extension degree must lie in 1..64");
      f.field_degree = static_cast<unsigned>(m);
    } else if (key == "t0") {
      if (tk.size() != 2) throw fail(tk[0].col, "expected 't0 <a/b>'");
      Rational t = rational_at(tk[1]);
      if (t <= 0 || t >= 1) throw fail(tk[1].col, "t0 must lie in (0,1)");
      f.t0 = t;
    } else if (key == "gen") {
      if (tk.size() < 2) throw fail(tk[0].col, "expected 'gen <name> [weight a/b] [degree n]'");
      const std::string& name = tk[1].text;
      bool ok = std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_';
      for (char c : name) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'');
      if (!ok) throw fail(tk[1].col, "invalid generator name '" + name + "'");
      if (std::find(f.names.begin(), f.names.end(), name) != f.names.end())
        throw fail(tk[1].col, "duplicate generator name '" + name + "'");
      std::optional<Rational> w;
      std::optional<long> d;
      for (std::size_t i = 2; i < tk.size(); i += 2) {
        if (i + 1 >= tk.size()) throw fail(tk[i].col, "missing value after '" + tk[i].text + "'");
        if (tk[i].text == "weight") {
          Rational q = rational_at(tk[i + 1]);
          if (q <= 0 || q >= 1) throw fail(tk[i + 1].col, "weight " + to_string(q) + " outside (0,1)");
          w = q;
        } else if (tk[i].text == "degree") {
          long n = integer_at(tk[i + 1]);
          if (n < 1) throw fail(tk[i + 1].col, "degree must be >= 1");
          d = n;
        } else {
          throw fail(tk[i].col, "unknown generator attribute '" + tk[i].text + "'");
        }
      }
      if (!w && !d) throw fail(tk[1].col, "generator needs a weight or a degree");
      if (!f.names.empty() && (w.has_value() != f.has_weights() || d.has_value() != f.has_degrees()))
        throw fail(tk[1].col, "every generator must carry the same attributes (weight and/or degree)");
      f.names.push_back(name);
      f.weights.push_back(w);
      f.degrees.push_back(d);
    } else if (key == "rel") {
      auto at = line.find("rel") + 3;
      while (at < line.size() && std::isspace(static_cast<unsigned char>(line[at]))) ++at;
      if (at >= line.size()) throw fail(tk[0].col, "empty relator");
      rel_text.push_back({ln, {at + 1, line.substr(at)}});
    } else if (key == "meta") {
      if (tk.size() < 2) throw fail(tk[0].col, "expected 'meta <key> <value>'");
      auto at = line.find(tk[1].text, tk[1].col - 1) + tk[1].text.size();
      std::string value = at < line.size() ? line.substr(at) : "";
      auto b = value.find_first_not_of(" \t"), e = value.find_last_not_of(" \t\r");
      f.meta.push_back({tk[1].text, b == std::string::npos ? "" : value.substr(b, e - b + 1)});
    } else {
      throw fail(tk[0].col, "unknown directive '" + key + "'");
    }
  }
  if (!have_p) throw Error(Errc::parse, "missing 'p' line");
  if (f.names.empty()) throw Error(Errc::parse, "no generators");
  for (auto& [l, ct] : rel_text) {
    try {
      f.relators.push_back(parse_word(ct.second, f.names));
    } catch (const WordParseError& e) {
      std::string msg = e.what();
      auto cut = msg.find(" at column ");
      msg = msg.substr(std::string(errc_name(Errc::parse)).size() + 2, cut - std::string(errc_name(Errc::parse)).size() - 2);
      throw Error(Errc::parse, detail::located(l, ct.first + e.column() - 1, msg));
    }
  }
  return f;
}

inline std::string serialize_presentation(const PresentationFile& f) {
  std::ostringstream os;
  os << "p " << f.p << "\n";
  if (f.field_degree) os << "field " << f.p << "^" << *f.field_degree << "\n";
  if (f.t0) os << "t0 " << to_string(*f.t0) << "\n";
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    os << "gen " << f.names[i];
    if (f.weights[i]) os << " weight " << to_string(*f.weights[i]);
    if (f.degrees[i]) os << " degree " << *f.degrees[i];
    os << "\n";
  }
  for (auto& r : f.relators) os << "rel " << render_word(r, f.names) << "\n";
  for (auto& [k, v] : f.meta) os << "meta " << k << (v.empty() ? "" : " " + v) << "\n";
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::parse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------------------------
// Growth profiles: key-value lines  p, n, t0, t1, c (list), HX, HR, HXn, HRn, den (optional).

struct GrowthFile {
  GrowthProfile profile;
  std::uint32_t p = 2;
  std::size_t n = 2;
  GrowthInputs inputs;
  unsigned long den = 100;
};

inline GrowthFile parse_growth(std::string_view text) {
  GrowthFile g;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    auto tk = detail::tokens(detail::strip_comment(raw));
    if (tk.empty()) continue;
    auto fail = [&](std::size_t col, const std::string& msg) { return Error(Errc::parse, detail::located(ln, col, msg)); };
    auto q = [&](std::size_t i) {
      if (i >= tk.size()) throw fail(tk[0].col, "missing value");
      try {
        return parse_rational(tk[i].text);
      } catch (const Error&) {
        throw fail(tk[i].col, "not a rational: '" + tk[i].text + "'");
      }
    };
    auto whole = [&](std::size_t i) {
      Rational r = q(i);
      if (r.get_den() != 1 || r < 0) throw fail(tk[i].col, "expected a non-negative integer");
      return Int(r.get_num());
    };
    const std::string& key = tk[0].text;
    if (!seen.insert(key).second) throw fail(tk[0].col, "duplicate key '" + key + "'");
    if (key == "c") {
      for (std::size_t i = 1; i < tk.size(); ++i) g.profile.c.push_back(whole(i));
      continue;
    }
    if (tk.size() != 2) throw fail(tk[0].col, "expected '" + key + " <value>'");
    if (key == "p") g.p = static_cast<std::uint32_t>(whole(1).get_ui());
    else if (key == "n") g.n = whole(1).get_ui();
    else if (key == "den") g.den = whole(1).get_ui();
    else if (key == "t0") g.profile.t0 = q(1);
    else if (key == "t1") g.profile.t1 = q(1);
    else if (key == "HX") g.inputs.HX = q(1);
    else if (key == "HR") g.inputs.HR = q(1);
    else if (key == "HXn") g.inputs.HXn = q(1);
    else if (key == "HRn") g.inputs.HRn = q(1);
    else throw fail(tk[0].col, "unknown key '" + key + "'");
  }
  for (const char* k : {"p", "n", "t0", "t1", "c", "HX", "HR", "HXn", "HRn"})
    if (!seen.count(k)) throw Error(Errc::parse, std::string("missing key '") + k + "'");
  return g;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline Json to_json(const Rational& q) { return to_string(q); }

inline Json to_json(const Quantity& q) {
  if (q.is_exact()) return Json{{"exact", to_string(q.value())}};
  if (q.is_interval()) return Json{{"interval", {to_string(q.range().lo), to_string(q.range().hi)}}};
  if (q.is_truth()) return Json{{"truth", q.holds()}};
  auto& t = q.tower();
  return Json{{"tower",
               {{"coeff", to_string(t.coeff)}, {"base", t.base.get_str()}, {"exponent", to_json(*t.exponent)}, {"offset", to_string(t.offset)}}}};
}

inline Quantity quantity_from_json(const Json& j) {
  if (j.contains("exact")) return Quantity::exact(parse_rational(j.at("exact").get<std::string>()));
  if (j.contains("interval")) return Quantity::interval(parse_rational(j.at("interval")[0].get<std::string>()),
                                                        parse_rational(j.at("interval")[1].get<std::string>()));
  if (j.contains("truth")) return Quantity::truth(j.at("truth").get<bool>());
  if (j.contains("tower")) {
    auto& t = j.at("tower");
    return Quantity{Tower{parse_rational(t.at("coeff").get<std::string>()), Int(t.at("base").get<std::string>()),
                          std::make_shared<const Quantity>(quantity_from_json(t.at("exponent"))),
                          parse_rational(t.at("offset").get<std::string>())}};
  }
  throw Error(Errc::parse, "unrecognized quantity: " + j.dump());
}

inline Json to_json(const BoundLedger& L) {
  Json steps = Json::array();
  for (auto& s : L.steps()) {
    Json in = Json::array();
    for (auto& [n, q] : s.inputs) in.push_back({{"name", n}, {"value", to_json(q)}});
    steps.push_back({{"name", s.name}, {"rule", s.rule}, {"ref", s.ref}, {"inputs", in}, {"output", to_json(s.output)},
                     {"shown", s.output.render()}});
  }
  return steps;
}

inline BoundLedger ledger_from_json(const Json& j) {
  BoundLedger L;
  for (auto& s : j) {
    LedgerStep st;
    st.name = s.at("name").get<std::string>();
    st.rule = s.at("rule").get<std::string>();
    st.ref = s.at("ref").get<std::string>();
    for (auto& i : s.at("inputs")) st.inputs.push_back({i.at("name").get<std::string>(), quantity_from_json(i.at("value"))});
    st.output = quantity_from_json(s.at("output"));
    L.push(std::move(st));
  }
  return L;
}

inline Json to_json(const TransformLog& log) {
  Json steps = Json::array();
  for (auto& s : log.steps) {
    Json checks = Json::array();
    for (auto& c : s.checks) checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
    steps.push_back({{"kind", step_name(s.kind)},
                     {"params", s.params},
                     {"W(X)", {to_string(s.wx_before), to_string(s.wx_after)}},
                     {"W(R)", {to_string(s.wr_before), to_string(s.wr_after)}},
                     {"W(R) exact", s.wr_exact},
                     {"checks", checks}});
  }
  return steps;
}

inline Json to_json(const IntSeries& s) {
  Json a = Json::array();
  for (std::size_t k = 0; k <= s.N(); ++k) a.push_back(to_string(s[k]));
  return a;
}

/// FNV-1a 64-bit, hex.  Identifies inputs; not a security hash.
inline std::string digest(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Versioned envelope; keys are emitted sorted, so equal inputs give identical bytes.
inline Json certificate(const std::string& command, const Json& args, const std::string& input_digest, const std::string& verdict,
                        Json body) {
  return Json{{"schema", kCertificateSchema}, {"tool", kToolVersion}, {"command", command}, {"arguments", args},
              {"input", input_digest},        {"verdict", verdict},   {"result", std::move(body)}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ggs
