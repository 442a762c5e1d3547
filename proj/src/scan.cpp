#include "scan.hpp"

namespace gexp::detail {

AtomSet LocalView::to_set(Mask m, std::size_t universe) const {
  AtomSet s(universe);
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (m >> j & 1u) s.insert(atoms[j]);
  return s;
}

bool small_rational(const Rational& q) {
  return mpz_sizeinbase(q.get_num().get_mpz_t(), 2) < 62 && mpz_sizeinbase(q.get_den().get_mpz_t(), 2) < 62;
}

LocalView make_local(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet* k) {
  LocalView v;
  v.atoms = y.to_vector();
  if (v.atoms.size() > 32) fail(ErrorCode::internal, "local view limited to 32 atoms");
  std::vector<std::size_t> local(mu.size(), npos);
  for (std::size_t j = 0; j < v.atoms.size(); ++j) local[v.atoms[j]] = j;
  v.denom = 1;
  for (Atom a : v.atoms) mpz_lcm(v.denom.get_mpz_t(), v.denom.get_mpz_t(), mu.weight(a).get_den().get_mpz_t());
  mpz_class total = 0;
  for (Atom a : v.atoms) {
    mpz_class s = mu.weight(a).get_num() * (v.denom / mu.weight(a).get_den());
    total += s;
    v.w.push_back(s);
  }
  v.fits64 = mpz_sizeinbase(total.get_mpz_t(), 2) < 62;
  if (v.fits64)
    for (auto& s : v.w) v.w64.push_back(to64(s));
  v.nbr.assign(v.atoms.size(), 0);
  if (k) {
    for (const auto& p : k->pieces)
      for (std::size_t j = 0; j < v.atoms.size(); ++j) {
        Atom t = p.tau(v.atoms[j]);
        if (t != npos && local[t] != npos) v.nbr[j] |= Mask{1} << local[t];
      }
  }
  return v;
}

MaskTables::MaskTables(const LocalView& v, bool with_sat) {
  const std::size_t n = std::size_t{1} << v.k();
  fast = v.fits64;
  if (with_sat) sat.assign(n, 0);
  if (fast) m64.assign(n, 0);
  else mz.assign(n, 0);
  for (std::size_t m = 1; m < n; ++m) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(m));
    const std::size_t rest = m & (m - 1);
    if (with_sat) sat[m] = sat[rest] | v.nbr[low];
    if (fast) m64[m] = m64[rest] + v.w64[low];
    else mz[m] = mz[rest] + v.w[low];
  }
}

}  // namespace gexp::detail
