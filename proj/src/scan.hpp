// Internal: exhaustive subset scans over a domain Y of at most 20 atoms.
#pragma once

#include <cstdint>
#include <vector>

#include "gexp/core.hpp"

namespace gexp::detail {

using Mask = std::uint32_t;
using Wide = __int128;

/// Y in ascending atom order with weights over a common denominator and the
/// local K-saturation of each singleton.
struct LocalView {
  std::vector<Atom> atoms;
  std::vector<Mask> nbr;          // r(K·{y_j}) ∩ Y as a local mask
  std::vector<mpz_class> w;       // mu(y_j) * denom
  mpz_class denom;
  bool fits64 = false;            // every scaled weight sum < 2^62
  std::vector<std::int64_t> w64;
  std::size_t k() const { return atoms.size(); }
  Mask full() const { return k() == 32 ? ~Mask{0} : ((Mask{1} << k()) - 1); }
  AtomSet to_set(Mask m, std::size_t universe) const;
};

LocalView make_local(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet* k);

/// Per-mask tables: union of singleton saturations, and the scaled measure.
struct MaskTables {
  std::vector<Mask> sat;
  std::vector<std::int64_t> m64;   // when fits64
  std::vector<mpz_class> mz;       // otherwise
  bool fast = false;
  explicit MaskTables(const LocalView& v, bool with_sat = true);
};

/// Lexicographic order of the sorted member lists of two masks.
inline bool lex_less_mask(Mask a, Mask b) {
  if (a == b) return false;
  Mask d = (a ^ b) & (~(a ^ b) + 1);
  int pos = __builtin_ctz(d);
  auto above = [pos](Mask x) { return pos == 31 ? Mask{0} : (x >> (pos + 1)); };
  if (a & d) return above(b) != 0;
  return above(a) == 0;
}

/// True when |num| and den of q are below 2^62.
bool small_rational(const Rational& q);
inline std::int64_t to64(const mpz_class& z) { return static_cast<std::int64_t>(z.get_si()); }

}  // namespace gexp::detail
