#pragma once
// Shared helpers for the unit tests: seeded random series, words and weights.

#include "ggs/words.hpp"

#include <random>

namespace testsupport {

using namespace ggs;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline long rnd(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng()); }

inline Series random_series(const Field& f, VarNames vars, const Policy& pol, int nterms, int maxlen,
                            bool unit = false) {
  Series s(f, vars, pol);
  if (unit) s.put({}, 1 + static_cast<Elem>(rnd(0, static_cast<long>(std::min<std::uint64_t>(f.order(), 1000)) - 2)));
  for (int i = 0; i < nterms; ++i) {
    Monomial m;
    long len = rnd(1, maxlen);
    for (long k = 0; k < len; ++k) m.push_back(static_cast<std::uint32_t>(rnd(0, static_cast<long>(vars->size()) - 1)));
    Elem c = static_cast<Elem>(rnd(1, static_cast<long>(std::min<std::uint64_t>(f.order(), 1u << 20)) - 1));
    s.put(m, c);
  }
  return s;
}

inline Word random_word(std::size_t ngens, int syllables, int maxexp) {
  std::vector<Syllable> s;
  for (int i = 0; i < syllables; ++i) {
    long long e = rnd(1, maxexp) * (rnd(0, 1) ? 1 : -1);
    s.push_back({static_cast<std::uint32_t>(rnd(0, static_cast<long>(ngens) - 1)), e});
  }
  return Word::from_syllables(s);
}

/// Random weight k/den with 1 <= k < den.
inline Rational random_weight(long den) { return make_q(rnd(1, den - 1), den); }

}  // namespace testsupport
