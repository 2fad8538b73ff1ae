#pragma once
// Finite fields F_p and F_{p^m}; elements are packed base-p digit vectors in a uint64.

#include "ggs/rational.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace ggs {

using Elem = std::uint64_t;

namespace detail {

inline bool is_prime_u32(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Polynomials over F_p as coefficient vectors, low degree first.
using Poly = std::vector<std::uint32_t>;

inline void poly_trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  std::int64_t t = 0, nt = 1, r = p, nr = a % p;
  while (nr) {
    std::int64_t q = r / nr;
    t -= q * nt;
    std::swap(t, nt);
    r -= q * nr;
    std::swap(r, nr);
  }
  if (r != 1) throw Error(Errc::non_unit, "zero has no inverse");
  return static_cast<std::uint32_t>(t < 0 ? t + p : t);
}

// Remainder of a modulo monic m.
inline Poly poly_rem(Poly a, const Poly& m, std::uint32_t p) {
  poly_trim(a);
  const std::size_t dm = m.size() - 1;
  while (a.size() > dm) {
    std::uint64_t lead = a.back();
    std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i)
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + (p - lead) * m[i]) % p);
    poly_trim(a);
  }
  return a;
}

}  // namespace detail

/// FieldSpec: prime p, extension degree m, monic modulus (low degree first).
/// The basis is the power basis lambda_j = x^(j-1), so lambda_1 = 1.
class Field {
 public:
  Field() : Field(2) {}

  explicit Field(std::uint32_t p) : p_(p), m_(1), modulus_{0, 1} {
    if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
    q_ = p;
  }

  Field(std::uint32_t p, std::vector<std::uint32_t> modulus) : p_(p), modulus_(std::move(modulus)) {
    if (!detail::is_prime_u32(p)) throw Error(Errc::precondition, "p must be prime");
    detail::poly_trim(modulus_);
    if (modulus_.size() < 2 || modulus_.back() != 1)
      throw Error(Errc::precondition, "modulus must be monic of degree >= 1");
    for (auto c : modulus_)
      if (c >= p) throw Error(Errc::precondition, "modulus coefficient out of range");
    m_ = static_cast<unsigned>(modulus_.size() - 1);
    if (m_ > 16) throw Error(Errc::precondition, "extension degree above 16 unsupported");
    unsigned __int128 q = 1;
    for (unsigned i = 0; i < m_; ++i) q *= p;
    if (q >= (static_cast<unsigned __int128>(1) << 62))
      throw Error(Errc::precondition, "field order too large for packed elements");
    q_ = static_cast<std::uint64_t>(q);
    if (m_ > 1 && !irreducible(modulus_, p_))
      throw Error(Errc::precondition, "modulus is reducible over F_" + std::to_string(p));
    if (m_ > 1 && q_ <= (1u << 16)) build_tables();
  }

  /// Fixed reproducible F_{p^8} moduli for p <= 61; any m for p = 2 uses a known table.
  static Field standard(std::uint32_t p, unsigned m) {
    if (m == 1) return Field(p);
    if (m == 8) {
      static const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> table = {
          {2, {1, 0, 1, 1, 1, 0, 0, 0, 1}}, {3, {2, 0, 1, 0, 0, 0, 0, 0, 1}},
          {5, {2, 0, 0, 0, 0, 0, 0, 0, 1}}, {7, {3, 1, 0, 0, 0, 0, 0, 0, 1}},
          {11, {4, 1, 0, 0, 0, 0, 0, 0, 1}}, {13, {2, 0, 0, 0, 0, 0, 0, 0, 1}},
          {17, {3, 0, 0, 0, 0, 0, 0, 0, 1}}, {19, {2, 1, 0, 0, 0, 0, 0, 0, 1}},
          {23, {5, 1, 0, 0, 0, 0, 0, 0, 1}}, {29, {2, 0, 0, 0, 0, 0, 0, 0, 1}},
          {31, {4, 1, 0, 0, 0, 0, 0, 0, 1}}, {37, {2, 0, 0, 0, 0, 0, 0, 0, 1}},
          {41, {3, 0, 0, 0, 0, 0, 0, 0, 1}}, {43, {9, 2, 0, 0, 0, 0, 0, 0, 1}},
          {47, {9, 1, 0, 0, 0, 0, 0, 0, 1}}, {53, {2, 0, 0, 0, 0, 0, 0, 0, 1}},
          {59, {12, 1, 0, 0, 0, 0, 0, 0, 1}}, {61, {2, 0, 0, 0, 0, 0, 0, 0, 1}},
      };
      for (auto& [pp, mod] : table)
        if (pp == p) return Field(p, mod);
      throw Error(Errc::precondition, "no tabulated F_{p^8} modulus for p=" + std::to_string(p));
    }
    // Otherwise: first irreducible x^m + a x + b in lexicographic (a, b) order.
    for (std::uint32_t a = 0; a < p; ++a)
      for (std::uint32_t b = 1; b < p; ++b) {
        std::vector<std::uint32_t> mod(m + 1, 0);
        mod[0] = b;
        mod[1] = a;
        mod[m] = 1;
        if (irreducible(mod, p)) return Field(p, mod);
      }
    throw Error(Errc::precondition, "no trinomial modulus found");
  }

  /// Exhaustive trial division by every monic polynomial of degree 1..deg/2.
  static bool irreducible(const std::vector<std::uint32_t>& f, std::uint32_t p) {
    const std::size_t n = f.size() - 1;
    if (n <= 1) return true;
    if (f[0] == 0) return false;
    for (std::size_t d = 1; d <= n / 2; ++d) {
      detail::Poly g(d + 1, 0);
      g[d] = 1;
      // Odometer over the d low coefficients.
      while (true) {
        if (detail::poly_rem(f, g, p).empty()) return false;
        std::size_t i = 0;
        while (i < d && ++g[i] == p) g[i++] = 0;
        if (i == d) break;
      }
    }
    return true;
  }

  std::uint32_t p() const { return p_; }
  unsigned m() const { return m_; }
  std::uint64_t order() const { return q_; }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }
  bool operator==(const Field& o) const { return p_ == o.p_ && modulus_ == o.modulus_ && m_ == o.m_; }
  bool operator!=(const Field& o) const { return !(*this == o); }

  Elem zero() const { return 0; }
  Elem one() const { return 1; }
  Elem from_int(long long v) const {
    long long r = v % static_cast<long long>(p_);
    if (r < 0) r += p_;
    return static_cast<Elem>(r);
  }
  /// lambda_j = x^(j-1), j = 1..m.
  Elem basis(unsigned j) const {
    if (j < 1 || j > m_) throw Error(Errc::malformed, "basis index out of range");
    Elem e = 1;
    for (unsigned i = 1; i < j; ++i) e *= p_;
    return e;
  }
  /// Coordinates of e in the basis lambda_1..lambda_m.
  std::vector<std::uint32_t> coords(Elem e) const {
    std::vector<std::uint32_t> c(m_);
    for (unsigned i = 0; i < m_; ++i) {
      c[i] = static_cast<std::uint32_t>(e % p_);
      e /= p_;
    }
    return c;
  }
  Elem pack(const std::vector<std::uint32_t>& c) const {
    Elem e = 0;
    for (std::size_t i = c.size(); i-- > 0;) e = e * p_ + (i < m_ ? c[i] % p_ : 0);
    return e;
  }

  Elem add(Elem a, Elem b) const {
    if (m_ == 1) return (a + b) % p_;
    if (p_ == 2) return a ^ b;
    Elem r = 0, mul = 1;
    for (unsigned i = 0; i < m_; ++i) {
      r += ((a % p_ + b % p_) % p_) * mul;
      a /= p_;
      b /= p_;
      mul *= p_;
    }
    return r;
  }
  Elem neg(Elem a) const {
    if (m_ == 1) return a == 0 ? 0 : p_ - a;
    if (p_ == 2) return a;
    Elem r = 0, mul = 1;
    for (unsigned i = 0; i < m_; ++i) {
      Elem d = a % p_;
      r += (d == 0 ? 0 : p_ - d) * mul;
      a /= p_;
      mul *= p_;
    }
    return r;
  }
  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }
  Elem mul(Elem a, Elem b) const {
    if (m_ == 1) return static_cast<Elem>((static_cast<unsigned __int128>(a) * b) % p_);
    if (a == 0 || b == 0) return 0;
    if (tables_) {
      auto& t = *tables_;
      std::uint32_t s = t.log[a] + t.log[b];
      if (s >= q_ - 1) s -= static_cast<std::uint32_t>(q_ - 1);
      return t.exp[s];
    }
    return slow_mul(a, b);
  }
  Elem inv(Elem a) const {
    if (a == 0) throw Error(Errc::non_unit, "zero has no inverse");
    if (m_ == 1) return detail::inv_mod(static_cast<std::uint32_t>(a), p_);
    if (tables_) {
      auto& t = *tables_;
      std::uint32_t l = t.log[a];
      return t.exp[l == 0 ? 0 : static_cast<std::uint32_t>(q_ - 1) - l];
    }
    return pow(a, q_ - 2);
  }
  Elem pow(Elem a, std::uint64_t e) const {
    Elem r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  /// "GF(2)" or "GF(2^8;x^8+x^4+x^3+x^2+1)".
  std::string tag() const {
    if (m_ == 1) return "GF(" + std::to_string(p_) + ")";
    return "GF(" + std::to_string(p_) + "^" + std::to_string(m_) + ";" + render_poly(modulus_) + ")";
  }
  /// Element as a polynomial in x (prime field: plain residue).
  std::string render(Elem e) const {
    if (m_ == 1) return std::to_string(e);
    auto c = coords(e);
    detail::poly_trim(c);
    if (c.empty()) return "0";
    return render_poly(c);
  }

 private:
  struct Tables {
    std::vector<std::uint32_t> log;
    std::vector<Elem> exp;
  };

  static std::string render_poly(const std::vector<std::uint32_t>& c) {
    std::string s;
    for (std::size_t i = c.size(); i-- > 0;) {
      if (c[i] == 0) continue;
      if (!s.empty()) s += "+";
      if (i == 0 || c[i] != 1) s += std::to_string(c[i]);
      if (i > 0) {
        if (c[i] != 1) s += "*";
        s += "x";
        if (i > 1) s += "^" + std::to_string(i);
      }
    }
    return s.empty() ? "0" : s;
  }

  Elem slow_mul(Elem a, Elem b) const {
    auto ca = coords(a), cb = coords(b);
    detail::Poly prod(2 * m_ - 1, 0);
    for (unsigned i = 0; i < m_; ++i)
      if (ca[i])
        for (unsigned j = 0; j < m_; ++j)
          prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + std::uint64_t(ca[i]) * cb[j]) % p_);
    auto r = detail::poly_rem(prod, modulus_, p_);
    r.resize(m_, 0);
    return pack(r);
  }

  void build_tables() {
    // Find a generator of the multiplicative group by brute force.
    auto t = std::make_shared<Tables>();
    t->log.assign(q_, 0);
    t->exp.assign(q_ - 1, 0);
    for (Elem g = 2; g < q_; ++g) {
      std::vector<char> seen(q_, 0);
      Elem x = 1;
      std::uint64_t k = 0;
      bool ok = true;
      for (; k < q_ - 1; ++k) {
        if (seen[x]) {
          ok = false;
          break;
        }
        seen[x] = 1;
        t->exp[k] = x;
        t->log[x] = static_cast<std::uint32_t>(k);
        x = slow_mul(x, g);
      }
      if (ok && x == 1) {
        tables_ = t;
        return;
      }
    }
    throw Error(Errc::precondition, "no primitive element found");
  }

  std::uint32_t p_;
  unsigned m_;
  std::vector<std::uint32_t> modulus_;
  std::uint64_t q_ = 0;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace ggs
