#pragma once
// Free group words, the Magnus embedding x_i -> 1+u_i, and the weight/degree calculus on F(X).

#include "ggs/series.hpp"

#include <cctype>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ggs {

struct Syllable {
  std::uint32_t gen;
  long long exp;
  bool operator==(const Syllable& o) const { return gen == o.gen && exp == o.exp; }
};

/// Freely reduced word; the empty word is the identity.
class Word {
 public:
  Word() = default;
  static Word gen(std::uint32_t g, long long e = 1) {
    Word w;
    if (e != 0) w.s_.push_back({g, e});
    return w;
  }
  static Word from_syllables(const std::vector<Syllable>& s) {
    Word w;
    for (auto& x : s) w.push(x);
    return w;
  }

  const std::vector<Syllable>& syllables() const { return s_; }
  bool is_identity() const { return s_.empty(); }
  std::size_t length() const {
    std::size_t n = 0;
    for (auto& x : s_) n += static_cast<std::size_t>(x.exp < 0 ? -x.exp : x.exp);
    return n;
  }
  bool operator==(const Word& o) const { return s_ == o.s_; }
  bool operator!=(const Word& o) const { return !(*this == o); }
  bool operator<(const Word& o) const {
    return std::lexicographical_compare(s_.begin(), s_.end(), o.s_.begin(), o.s_.end(),
                                        [](const Syllable& a, const Syllable& b) {
                                          return a.gen != b.gen ? a.gen < b.gen : a.exp < b.exp;
                                        });
  }

  Word operator*(const Word& o) const {
    Word r = *this;
    for (auto& x : o.s_) r.push(x);
    return r;
  }
  Word inverse() const {
    Word r;
    for (auto it = s_.rbegin(); it != s_.rend(); ++it) r.s_.push_back({it->gen, -it->exp});
    return r;
  }
  Word power(long long k) const {
    if (k < 0) return inverse().power(-k);
    if (s_.size() == 1) return gen(s_[0].gen, s_[0].exp * k);
    Word r, b = *this;
    while (k) {
      if (k & 1) r = r * b;
      b = b * b;
      k >>= 1;
    }
    return r;
  }
  /// Exponent sum of generator g.
  long long exponent_sum(std::uint32_t g) const {
    long long t = 0;
    for (auto& x : s_)
      if (x.gen == g) t += x.exp;
    return t;
  }
  /// Sorted distinct generators occurring in the word.
  std::vector<std::uint32_t> support() const {
    std::vector<std::uint32_t> v;
    for (auto& x : s_) v.push_back(x.gen);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }
  /// Apply a substitution gen -> word.
  template <class F>
  Word substitute(F&& image) const {
    Word r;
    for (auto& x : s_) r = r * Word(image(x.gen)).power(x.exp);
    return r;
  }

 private:
  void push(Syllable x) {
    if (x.exp == 0) return;
    if (!s_.empty() && s_.back().gen == x.gen) {
      s_.back().exp += x.exp;
      if (s_.back().exp == 0) s_.pop_back();
    } else {
      s_.push_back(x);
    }
  }
  std::vector<Syllable> s_;
};

/// [a,b] = a^-1 b^-1 a b.
inline Word commutator(const Word& a, const Word& b) { return a.inverse() * b.inverse() * a * b; }

/// Left-normed [w1, w2, ..., wk] = [[w1,w2],...,wk].
inline Word commutator(const std::vector<Word>& ws) {
  if (ws.empty()) return Word();
  Word acc = ws[0];
  for (std::size_t i = 1; i < ws.size(); ++i) acc = commutator(acc, ws[i]);
  return acc;
}

/// [w, x, ..., x] with k copies of x.
inline Word commutator_power(const Word& w, const Word& x, unsigned k) {
  Word acc = w;
  for (unsigned i = 0; i < k; ++i) acc = commutator(acc, x);
  return acc;
}

/// The ordered generating set X of a free pro-p group.
struct GeneratorSet {
  std::vector<std::string> names;
  std::uint32_t p = 2;

  GeneratorSet() = default;
  GeneratorSet(std::vector<std::string> n, std::uint32_t prime) : names(std::move(n)), p(prime) {
    if (names.empty()) throw Error(Errc::precondition, "generating set must be nonempty");
    std::unordered_map<std::string, int> seen;
    for (auto& s : names)
      if (seen[s]++) throw Error(Errc::parse, "duplicate generator name '" + s + "'");
    if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
  }
  std::size_t size() const { return names.size(); }
  std::optional<std::uint32_t> index_of(std::string_view n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
};

inline std::string render_word(const Word& w, const std::vector<std::string>& names) {
  if (w.is_identity()) return "1";
  std::string s;
  for (auto& x : w.syllables()) {
    if (!s.empty()) s += " ";
    s += names.at(x.gen);
    if (x.exp != 1) s += "^" + std::to_string(x.exp);
  }
  return s;
}

/// A grammar error inside a word; `column` is 1-based within the word text.
class WordParseError : public Error {
 public:
  WordParseError(const std::string& msg, std::size_t column) : Error(Errc::parse, msg), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// word := atom+ ; atom := name | name '^' int | '[' word (',' word)+ ']'.  `1` is the identity.
/// Also accepted: optional '*' between atoms, '(' word ')' groups, and '^' after a group.
class WordParser {
 public:
  WordParser(std::string_view text, const std::vector<std::string>& names) : t_(text), names_(names) {}

  Word parse() {
    Word w = word();
    skip();
    if (i_ != t_.size()) fail("unexpected '" + std::string(1, t_[i_]) + "'");
    return w;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw WordParseError(msg + " at column " + std::to_string(i_ + 1) + " in '" + std::string(t_) + "'", i_ + 1);
  }
  void skip() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }
  bool ident_start(char c) const { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  bool ident_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
  }

  Word word() {
    Word w;
    bool any = false;
    while (true) {
      skip();
      if (i_ >= t_.size()) break;
      char c = t_[i_];
      if (c == '*' && any) {
        ++i_;
        continue;
      }
      if (c == ',' || c == ']' || c == ')') break;
      w = w * atom();
      any = true;
    }
    if (!any) fail("expected a word");
    return w;
  }

  long long integer() {
    skip();
    std::size_t st = i_;
    if (i_ < t_.size() && (t_[i_] == '-' || t_[i_] == '+')) ++i_;
    while (i_ < t_.size() && std::isdigit(static_cast<unsigned char>(t_[i_]))) ++i_;
    if (st == i_ || (i_ == st + 1 && !std::isdigit(static_cast<unsigned char>(t_[st])))) fail("expected an integer");
    try {
      return std::stoll(std::string(t_.substr(st, i_ - st)));
    } catch (const std::exception&) {
      fail("integer out of range");
    }
  }

  Word exponent(Word base) {
    skip();
    if (i_ < t_.size() && t_[i_] == '^') {
      ++i_;
      return base.power(integer());
    }
    return base;
  }

  Word atom() {
    skip();
    char c = t_[i_];
    if (c == '[') {
      ++i_;
      std::vector<Word> parts{word()};
      skip();
      while (i_ < t_.size() && t_[i_] == ',') {
        ++i_;
        parts.push_back(word());
        skip();
      }
      if (i_ >= t_.size() || t_[i_] != ']') fail("expected ']'");
      ++i_;
      if (parts.size() < 2) fail("commutator needs at least two entries");
      return exponent(commutator(parts));
    }
    if (c == '(') {
      ++i_;
      Word w = word();
      skip();
      if (i_ >= t_.size() || t_[i_] != ')') fail("expected ')'");
      ++i_;
      return exponent(w);
    }
    if (c == '1' && (i_ + 1 >= t_.size() || !std::isdigit(static_cast<unsigned char>(t_[i_ + 1])))) {
      ++i_;
      return exponent(Word());
    }
    if (!ident_start(c)) fail("unexpected '" + std::string(1, c) + "'");
    std::size_t st = i_;
    while (i_ < t_.size() && ident_char(t_[i_])) ++i_;
    std::string name(t_.substr(st, i_ - st));
    std::size_t g = names_.size();
    for (std::size_t k = 0; k < names_.size(); ++k)
      if (names_[k] == name) g = k;
    if (g == names_.size()) {
      i_ = st;
      fail("unknown generator '" + name + "'");
    }
    return exponent(Word::gen(static_cast<std::uint32_t>(g)));
  }

  std::string_view t_;
  const std::vector<std::string>& names_;
  std::size_t i_ = 0;
};

inline Word parse_word(std::string_view text, const std::vector<std::string>& names) {
  return WordParser(text, names).parse();
}

namespace detail {

// binom(n, k) mod p for small n, k < p.
inline std::uint32_t small_binom(std::uint64_t n, std::uint64_t k, std::uint32_t p) {
  if (k > n) return 0;
  std::uint64_t num = 1, den = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    num = num * ((n - i) % p) % p;
    den = den * ((i + 1) % p) % p;
  }
  return static_cast<std::uint32_t>(num * inv_mod(static_cast<std::uint32_t>(den), p) % p);
}

// Lucas: binom(n, k) mod p.
inline std::uint32_t binom_mod(std::uint64_t n, std::uint64_t k, std::uint32_t p) {
  std::uint64_t r = 1;
  while (k > 0 || n > 0) {
    std::uint64_t nd = n % p, kd = k % p;
    if (kd > nd) return 0;
    r = r * small_binom(nd, kd, p) % p;
    n /= p;
    k /= p;
  }
  return static_cast<std::uint32_t>(r);
}

}  // namespace detail

/// Coefficients of (1+u)^e mod p up to u^cap; negative e uses the geometric inverse.
inline std::vector<Elem> one_plus_u_power(long long e, std::size_t cap, std::uint32_t p) {
  std::vector<Elem> c(cap + 1, 0);
  for (std::size_t k = 0; k <= cap; ++k) {
    if (e >= 0) {
      c[k] = detail::binom_mod(static_cast<std::uint64_t>(e), k, p);
    } else {
      std::uint64_t n = static_cast<std::uint64_t>(-e) + k - 1;
      Elem b = k == 0 ? 1 : detail::binom_mod(n, k, p);
      c[k] = (k % 2 == 1 && b != 0) ? p - b : b;
    }
  }
  while (c.size() > 1 && c.back() == 0) c.pop_back();
  return c;
}

/// Image of f under x_i -> 1+u_i (variables indexed by generator index), truncated by pol.
inline Series magnus_embed(const Word& f, const Field& fp, VarNames vars, const Policy& pol) {
  Series s = Series::one(fp, std::move(vars), pol);
  for (auto& x : f.syllables()) {
    if (x.gen >= s.nvars()) throw Error(Errc::malformed, "generator index out of range");
    s = s.mul_univariate(x.gen, one_plus_u_power(x.exp, pol.cap, fp.p()));
  }
  return s;
}

/// A word restated over its own support: local generator indices 0..k-1.
struct LocalWord {
  Word word;
  std::vector<std::uint32_t> globals;  // local index -> global generator
};

inline LocalWord localize(const Word& f) {
  LocalWord lw;
  lw.globals = f.support();
  std::unordered_map<std::uint32_t, std::uint32_t> idx;
  for (std::uint32_t i = 0; i < lw.globals.size(); ++i) idx[lw.globals[i]] = i;
  std::vector<Syllable> s;
  for (auto& x : f.syllables()) s.push_back({idx[x.gen], x.exp});
  lw.word = Word::from_syllables(s);
  return lw;
}

/// Default weight floor: (min generator weight)^8.
inline Rational default_floor(const std::vector<Rational>& W) {
  Rational m = W.at(0);
  for (auto& w : W)
    if (w < m) m = w;
  return qpow(m, 8);
}

/// W(f) = w(embed(f) - 1), exact whenever it is >= theta.
inline WeightValue word_weight(const Word& f, const std::vector<Rational>& W, std::uint32_t p,
                               std::optional<Rational> theta = std::nullopt) {
  if (f.is_identity()) return WeightValue::make_zero();
  Rational th = theta ? *theta : default_floor(W);
  auto lw = localize(f);
  std::vector<Rational> lwts;
  Rational maxw = 0;
  for (auto g : lw.globals) {
    lwts.push_back(W.at(g));
    if (W[g] > maxw) maxw = W[g];
  }
  // Smallest L with maxw^L < theta; longer monomials are below the floor.
  std::size_t L = 1;
  Rational acc = maxw;
  while (acc >= th) {
    acc *= maxw;
    ++L;
  }
  auto g = std::make_shared<const Grading>(Grading::of_weights(lwts));
  Field fp(p);
  Series e = magnus_embed(lw.word, fp, make_vars(lw.globals.size()), Policy::with_floor(L - 1, th, g));
  e = e - Series::one(fp, e.vars(), e.policy());
  auto r = e.weight(*g);
  if (r.kind == WeightValue::zero) return WeightValue::make_below(th);  // nontrivial word: cannot be 0
  return r;
}

/// Weight with an adaptive floor: deepens maxw^2, maxw^4, ... down to theta^(2^(rounds-1)),
/// so cheap cases never pay for the deepest expansion.
inline WeightValue word_weight_exact(const Word& f, const std::vector<Rational>& W, std::uint32_t p,
                                     std::optional<Rational> theta = std::nullopt, int rounds = 4) {
  if (f.is_identity()) return WeightValue::make_zero();
  Rational last = theta ? *theta : default_floor(W);
  for (int i = 1; i < rounds; ++i) last *= last;
  Rational maxw = 0;
  for (auto g : f.support()) maxw = std::max(maxw, W.at(g));
  Rational th = maxw * maxw;
  while (true) {
    if (th < last) th = last;
    auto r = word_weight(f, W, p, th);
    if (r.kind != WeightValue::below || th == last) return r;
    th *= th;
  }
}

/// d(f) = min graded degree of embed(f) - 1 with d(u_i) = D(x_i); exact if <= cap.
inline DegreeValue word_degree(const Word& f, const std::vector<long>& D, std::uint32_t p,
                               std::optional<long> cap = std::nullopt) {
  if (f.is_identity()) return {DegreeValue::infinite, 0};
  long sumD = 0;
  for (auto d : D) sumD += d;
  // Default cap; a syllable x^(p^v m) starts at degree p^v D(x), so high p-powers widen it.
  long C = 2 * std::max<long>(p, sumD);
  if (!cap) {
    long widen = 1;
    for (auto& s : f.syllables()) {
      long long e = s.exp < 0 ? -s.exp : s.exp;
      long q = 1;
      while (e % p == 0 && q < 1024) e /= p, q *= p;
      widen = std::max(widen, q);
    }
    C *= widen;
  } else {
    C = *cap;
  }
  auto lw = localize(f);
  std::vector<long> ld;
  std::vector<Rational> lwts;
  for (auto g : lw.globals) {
    ld.push_back(D.at(g));
    lwts.push_back(qpow(Rational(1, 2), static_cast<unsigned long>(D[g])));
  }
  auto g = std::make_shared<const Grading>(Grading(ld, lwts));
  Field fp(p);
  // Iterative deepening: the graded-degree cap is realized as the floor 2^-cap.
  for (long c = std::min<long>(C, 8);; c = std::min<long>(C, 2 * c)) {
    Policy pol = Policy::with_floor(static_cast<std::size_t>(c), qpow(Rational(1, 2), static_cast<unsigned long>(c)), g);
    Series e = magnus_embed(lw.word, fp, make_vars(lw.globals.size()), pol);
    long best = -1;
    for (auto& [m, coef] : e.terms())
      if (!m.empty()) {
        long d = g->degree(m);
        if (best < 0 || d < best) best = d;
      }
    if (best >= 0) return {DegreeValue::exact, best};
    if (c >= C) return {DegreeValue::above, C + 1};
  }
}

/// f = f_L f_Q with f_L = x_1^k_1 ... x_d^k_d (0 <= k_i < p) and f_Q in the Frattini subgroup.
struct LinearDecomposition {
  Word f_L;
  Word f_Q;
  std::vector<std::uint32_t> exps;     // k_i
  std::vector<std::uint32_t> support;  // generators with k_i != 0
};

inline LinearDecomposition linear_decompose(const Word& f, std::size_t ngens, std::uint32_t p) {
  LinearDecomposition d;
  d.exps.assign(ngens, 0);
  for (auto& x : f.syllables()) {
    long long k = (d.exps[x.gen] + x.exp) % static_cast<long long>(p);
    if (k < 0) k += p;
    d.exps[x.gen] = static_cast<std::uint32_t>(k);
  }
  for (std::uint32_t i = 0; i < ngens; ++i)
    if (d.exps[i]) {
      d.f_L = d.f_L * Word::gen(i, d.exps[i]);
      d.support.push_back(i);
    }
  d.f_Q = d.f_L.inverse() * f;
  return d;
}

/// Linear Magnus coefficients of f (coefficient of u_i in embed(f)), an independent cross-check.
inline std::vector<std::uint32_t> magnus_linear_coeffs(const Word& f, std::size_t ngens, std::uint32_t p) {
  auto lw = localize(f);
  Field fp(p);
  Series e = magnus_embed(lw.word, fp, make_vars(lw.globals.size()), Policy::degree_cap(1));
  std::vector<std::uint32_t> c(ngens, 0);
  for (std::uint32_t i = 0; i < lw.globals.size(); ++i) c[lw.globals[i]] = static_cast<std::uint32_t>(e.coeff({i}));
  return c;
}

inline bool is_linear_in(const Word& f, std::uint32_t x, std::uint32_t p) {
  long long k = f.exponent_sum(x) % static_cast<long long>(p);
  return k != 0;
}

/// Nonzero exponent sums mod p, keyed by generator: the image of f in F/Phi(F).
inline std::map<std::uint32_t, std::uint32_t> linear_part(const Word& f, std::uint32_t p) {
  std::map<std::uint32_t, long long> acc;
  for (auto& x : f.syllables()) acc[x.gen] += x.exp;
  std::map<std::uint32_t, std::uint32_t> out;
  for (auto& [g, e] : acc) {
    long long k = e % static_cast<long long>(p);
    if (k < 0) k += p;
    if (k) out[g] = static_cast<std::uint32_t>(k);
  }
  return out;
}

inline bool is_linear(const Word& f, std::size_t ngens, std::uint32_t p) {
  for (auto& [g, e] : linear_part(f, p))
    if (g < ngens) return true;
  return false;
}

/// D(x) = least integer with t^D(x) <= W(x), so t^D(x) <= W(x) < t^(D(x)-1).
inline std::vector<long> integral_approx(const std::vector<Rational>& W, const Rational& t) {
  if (t <= 0 || t >= 1) throw Error(Errc::precondition, "t must lie in (0,1)");
  std::vector<long> D;
  for (auto& w : W) {
    if (w <= 0 || w >= 1) throw Error(Errc::precondition, "weights must lie in (0,1)");
    long d = 1;
    Rational acc = t;
    while (acc > w) {
      acc *= t;
      ++d;
    }
    D.push_back(d);
  }
  return D;
}

/// The (D,t)-weight function on generators: W(x) = t^D(x).
inline std::vector<Rational> integral_weights(const std::vector<long>& D, const Rational& t) {
  std::vector<Rational> W;
  for (auto d : D) W.push_back(qpow(t, static_cast<unsigned long>(d)));
  return W;
}

}  // namespace ggs
