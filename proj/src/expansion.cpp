#include "gexp/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "scan.hpp"

namespace gexp {

using detail::Mask;
using detail::Wide;

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::proven: return "Proven";
    case Verdict::refuted: return "Refuted";
    case Verdict::unknown: return "Unknown";
  }
  return "?";
}

const char* method_name(Method m) { return m == Method::exact ? "exact" : "randomized"; }

Rational expansion_ratio(const AtomicMeasureSpace& mu, const DecomposableSet& k, const AtomSet& a,
                         const AtomSet& y) {
  Rational ma = mu.measure(a);
  if (ma == 0) fail(ErrorCode::degenerate_set, "expansion ratio of a null set");
  AtomSet b = (saturate(k, a) - a) & y;
  return mu.measure(b) / ma;
}

namespace {

void check_levels(const Rational& alpha_lo, const Rational& beta_hi) {
  if (alpha_lo < 0 || beta_hi <= 0 || alpha_lo > beta_hi || beta_hi >= 1)
    fail(ErrorCode::invalid_range, "need 0 <= alpha_lo <= beta_hi < 1, got alpha_lo=" + to_string(alpha_lo) +
                                       " beta_hi=" + to_string(beta_hi));
}

// Products and comparisons in either int64/int128 or GMP arithmetic.
inline Wide mul(std::int64_t a, std::int64_t b) { return static_cast<Wide>(a) * b; }
inline mpz_class mul(const mpz_class& a, const mpz_class& b) { return a * b; }

template <class W>
W conv(const mpz_class& z);
template <>
std::int64_t conv<std::int64_t>(const mpz_class& z) { return detail::to64(z); }
template <>
mpz_class conv<mpz_class>(const mpz_class& z) { return z; }

template <class W>
const std::vector<W>& meas(const detail::MaskTables& t);
template <>
const std::vector<std::int64_t>& meas<std::int64_t>(const detail::MaskTables& t) { return t.m64; }
template <>
const std::vector<mpz_class>& meas<mpz_class>(const detail::MaskTables& t) { return t.mz; }

template <class W>
void exact_certify(const detail::LocalView& v, const detail::MaskTables& t, const Rational& c,
                   const Rational& alpha_lo, const Rational& beta_hi, std::size_t universe, Certificate& cert) {
  const auto& m = meas<W>(t);
  const W cn = conv<W>(c.get_num()), cd = conv<W>(c.get_den());
  const W an = conv<W>(alpha_lo.get_num()), ad = conv<W>(alpha_lo.get_den());
  const W bn = conv<W>(beta_hi.get_num()), bd = conv<W>(beta_hi.get_den());
  const Mask full = v.full();
  const W my = m[full];
  const auto lo = mul(an, my), hi = mul(bn, my);
  bool have_worst = false, have_wit = false;
  Mask worst = 0, wit = 0;
  W wb{}, wa{};  // worst boundary and measure
  W xb{}, xa{};  // witness boundary and measure
  const bool strict = cert.comparison == Comparison::strict;
  std::uint64_t checked = 0;
  const std::size_t n = std::size_t{1} << v.k();
  for (std::size_t s = 1; s < n; ++s) {
    const Mask a = static_cast<Mask>(s);
    const W& ma = m[a];
    const auto sa = mul(ad, ma);
    if (sa < lo) continue;
    const auto sb = mul(bd, ma);
    if (sb > hi) continue;
    ++checked;
    const W& bnd = m[t.sat[a] & ~a & full];
    // worst ratio: bnd/ma < wb/wa, ties to the lexicographically smaller set
    if (!have_worst) {
      have_worst = true;
      worst = a, wb = bnd, wa = ma;
    } else {
      const auto l = mul(bnd, wa), r = mul(wb, ma);
      if (l < r || (l == r && detail::lex_less_mask(a, worst))) worst = a, wb = bnd, wa = ma;
    }
    const auto lhs = mul(bnd, cd), rhs = mul(cn, ma);
    const bool bad = strict ? !(lhs > rhs) : lhs < rhs;
    if (bad) {
      if (!have_wit) {
        have_wit = true;
        wit = a, xb = bnd, xa = ma;
      } else {
        const auto l = mul(bnd, xa), r = mul(xb, ma);
        if (l < r || (l == r && detail::lex_less_mask(a, wit))) wit = a, xb = bnd, xa = ma;
      }
    }
  }
  cert.sets_checked = checked;
  auto ratio = [](const W& b, const W& a) {
    Rational q;
    if constexpr (std::is_same_v<W, std::int64_t>) q = Rational(mpz_class(static_cast<long>(b)), mpz_class(static_cast<long>(a)));
    else q = Rational(b, a);
    q.canonicalize();
    return q;
  };
  if (have_worst) {
    cert.worst = v.to_set(worst, universe);
    cert.worst_ratio = ratio(wb, wa);
  }
  if (have_wit) {
    cert.verdict = Verdict::refuted;
    cert.witness = v.to_set(wit, universe);
    cert.witness_ratio = ratio(xb, xa);
  } else {
    cert.verdict = Verdict::proven;
    if (!have_worst) cert.note = "no admissible sets";
  }
}

struct SampleEval {
  const AtomicMeasureSpace& mu;
  const std::vector<Atom>& atoms;
  std::vector<AtomSet> sat;  // singleton saturations intersected with Y
  Rational my, lo, hi;
  bool admissible(const Rational& ma) const { return ma > 0 && ma >= lo && ma <= hi; }
  Rational measure(const std::vector<char>& in) const {
    Rational s = 0;
    for (std::size_t j = 0; j < atoms.size(); ++j)
      if (in[j]) s += mu.weight(atoms[j]);
    return s;
  }
  AtomSet set(const std::vector<char>& in) const {
    AtomSet a(mu.size());
    for (std::size_t j = 0; j < atoms.size(); ++j)
      if (in[j]) a.insert(atoms[j]);
    return a;
  }
  Rational boundary(const std::vector<char>& in) const {
    AtomSet a = set(in);
    AtomSet s(mu.size());
    for (std::size_t j = 0; j < atoms.size(); ++j)
      if (in[j]) s |= sat[j];
    return mu.measure(s - a);
  }
};

void randomized_certify(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                        const Rational& c, const ScanOptions& opt, Certificate& cert) {
  cert.method = Method::randomized;
  cert.seed = opt.seed;
  const auto atoms = y.to_vector();
  SampleEval ev{mu, atoms, {}, mu.measure(y), 0, 0};
  ev.lo = cert.alpha_lo * ev.my;
  ev.hi = cert.beta_hi * ev.my;
  for (Atom a : atoms) ev.sat.push_back(saturate(k, AtomSet(mu.size(), {a})) & y);
  std::mt19937_64 rng(opt.seed);
  const std::size_t n = atoms.size();
  const bool strict = cert.comparison == Comparison::strict;
  bool have_worst = false, have_wit = false;
  std::vector<char> cur(n, 0);
  Rational cur_ratio;
  bool cur_ok = false;
  auto consider = [&](const std::vector<char>& in) -> std::optional<Rational> {
    Rational ma = ev.measure(in);
    if (!ev.admissible(ma)) return std::nullopt;
    ++cert.sets_checked;
    Rational r = ev.boundary(in) / ma;
    AtomSet s = ev.set(in);
    if (!have_worst || r < cert.worst_ratio || (r == cert.worst_ratio && lex_less(s, *cert.worst))) {
      have_worst = true;
      cert.worst = s;
      cert.worst_ratio = r;
    }
    bool bad = strict ? r <= c : r < c;
    if (bad && (!have_wit || r < cert.witness_ratio)) {
      have_wit = true;
      cert.witness = s;
      cert.witness_ratio = r;
    }
    return r;
  };
  for (std::uint64_t it = 0; it < 2 * opt.budget && n > 0; ++it) {
    if (it % 2 == 0 || !cur_ok) {
      std::uniform_int_distribution<std::size_t> sz(1, n);
      std::size_t s = sz(rng);
      std::vector<std::size_t> idx(n);
      for (std::size_t j = 0; j < n; ++j) idx[j] = j;
      std::shuffle(idx.begin(), idx.end(), rng);
      std::vector<char> in(n, 0);
      for (std::size_t j = 0; j < s; ++j) in[idx[j]] = 1;
      auto r = consider(in);
      if (r && (!cur_ok || *r < cur_ratio)) cur = in, cur_ratio = *r, cur_ok = true;
    } else {
      // greedy boundary-minimizing single-atom move from the current set
      std::vector<char> best;
      Rational best_r;
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<char> in = cur;
        in[j] ^= 1;
        auto r = consider(in);
        if (r && (best.empty() || *r < best_r)) best = in, best_r = *r;
      }
      if (!best.empty() && best_r < cur_ratio) cur = best, cur_ratio = best_r;
      else cur_ok = false;
    }
  }
  cert.verdict = have_wit ? Verdict::refuted : Verdict::unknown;
  cert.note = "sampled";
}

}  // namespace

Certificate certify_expansion(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                              const Rational& c, const Rational& alpha_lo, const Rational& beta_hi,
                              const ScanOptions& opt) {
  check_levels(alpha_lo, beta_hi);
  if (y.empty()) fail(ErrorCode::degenerate_domain, "empty domain");
  if (opt.exact_limit > kMaxExactLimit)
    fail(ErrorCode::invalid_argument, "exact_limit above the hard cap of 20");
  Certificate cert;
  cert.C = c;
  cert.alpha_lo = alpha_lo;
  cert.beta_hi = beta_hi;
  cert.comparison = opt.comparison;
  if (y.count() > opt.exact_limit) {
    randomized_certify(mu, y, k, c, opt, cert);
    return cert;
  }
  auto v = detail::make_local(mu, y, &k);
  detail::MaskTables t(v);
  const bool fast = t.fast && detail::small_rational(c) && detail::small_rational(alpha_lo) &&
                    detail::small_rational(beta_hi);
  if (fast) {
    exact_certify<std::int64_t>(v, t, c, alpha_lo, beta_hi, mu.size(), cert);
  } else {
    if (t.fast) {  // constants too large for the 64-bit path; rebuild with GMP weights
      detail::LocalView v2 = v;
      v2.fits64 = false;
      detail::MaskTables t2(v2);
      exact_certify<mpz_class>(v2, t2, c, alpha_lo, beta_hi, mu.size(), cert);
    } else {
      exact_certify<mpz_class>(v, t, c, alpha_lo, beta_hi, mu.size(), cert);
    }
  }
  return cert;
}

const ExpansionLevel& ExpansionParams::at(const Rational& alpha, const AtomicMeasureSpace& mu) const {
  Rational floor = mu.weight(0);
  for (const auto& w : mu.weights()) floor = rmin(floor, w);
  floor /= mu.total_mass();
  const Rational eff = rmax(alpha, floor);
  const ExpansionLevel* best = nullptr;
  for (const auto& l : levels)
    if (l.alpha <= eff && (!best || l.alpha > best->alpha)) best = &l;
  if (!best) fail(ErrorCode::missing_level, "no expansion level at or below alpha=" + to_string(alpha));
  return *best;
}

void ExpansionParams::add(ExpansionLevel level) {
  levels.push_back(std::move(level));
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
}

AsymptoticCertificate certify_asymptotic(const AtomicMeasureSpace& mu, const ExpansionParams& params,
                                         const ScanOptions& opt) {
  AsymptoticCertificate out;
  const AtomSet all = AtomSet::full(mu.size());
  bool unknown = false, refuted = false;
  for (const auto& l : params.levels) {
    out.levels.push_back(certify_expansion(mu, all, l.K, l.C, l.alpha, Rational(1, 2), opt));
    refuted |= out.levels.back().verdict == Verdict::refuted;
    unknown |= out.levels.back().verdict == Verdict::unknown;
  }
  out.verdict = refuted ? Verdict::refuted : unknown ? Verdict::unknown : Verdict::proven;
  return out;
}

std::vector<Rational> default_alphas(const AtomicMeasureSpace& mu) {
  Rational floor = mu.weight(0);
  for (const auto& w : mu.weights()) floor = rmin(floor, w);
  floor /= mu.total_mass();
  std::vector<Rational> out;
  for (Rational a(1, 2); a > floor; a /= 2) out.push_back(a);
  if (floor <= Rational(1, 2)) out.push_back(floor);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ExpansionParams ball_schedule(const MeasuredGroupoid& m, const std::vector<Rational>& alphas,
                              const ScanOptions& opt) {
  if (m.atoms() > opt.exact_limit)
    fail(ErrorCode::invalid_argument, "ball schedule needs an exhaustive scan; raise exact_limit");
  std::set<Rational> radii(m.length.values.begin(), m.length.values.end());
  std::map<Rational, DecomposableSet> cache;
  ExpansionParams params;
  const AtomSet all = AtomSet::full(m.atoms());
  ScanOptions strict = opt;
  strict.comparison = Comparison::strict;
  for (const auto& alpha : alphas) {
    for (const auto& r : radii) {
      auto it = cache.find(r);
      if (it == cache.end()) it = cache.emplace(r, ball_decomposition(m, r)).first;
      auto cert = certify_expansion(m.mu, all, it->second, 0, alpha, Rational(1, 2), strict);
      if (cert.verdict != Verdict::proven) continue;
      Rational c = cert.worst ? cert.worst_ratio * Rational(99, 100) : Rational(1);
      params.add(ExpansionLevel{alpha, c, it->second});
      break;
    }
  }
  return params;
}

DecomposableSet normalize_pieces(const MeasuredGroupoid& m, const DecomposableSet& k) {
  const auto& g = m.groupoid;
  struct Hash {
    std::size_t operator()(const ElementSet& s) const { return s.hash(); }
  };
  std::unordered_map<ElementSet, std::size_t, Hash> seen;
  std::vector<Bisection> pieces;
  for (const auto& p : k.pieces) {
    if (p.members().empty()) continue;
    if (seen.emplace(p.members(), pieces.size()).second) pieces.push_back(p);
  }
  DecomposableSet out;
  out.length_bound = k.length_bound;
  auto u = seen.find(g.unit_set());
  if (u != seen.end()) out.unital_index = u->second;
  std::vector<std::size_t> sig(pieces.size(), npos);
  bool sym = true;
  for (std::size_t i = 0; i < pieces.size() && sym; ++i) {
    auto it = seen.find(inverse_set(g, pieces[i].members()));
    if (it == seen.end()) sym = false;
    else sig[i] = it->second;
  }
  if (sym) out.sigma = std::move(sig);
  out.pieces = std::move(pieces);
  return out;
}

BoostResult boost_beta(const MeasuredGroupoid& m, const ExpansionParams& params, const Rational& alpha,
                       const Rational& beta) {
  if (beta < Rational(1, 2) || beta >= 1)
    fail(ErrorCode::invalid_range, "beta must lie in [1/2, 1), got " + to_string(beta));
  if (alpha <= 0 || alpha > Rational(1, 2))
    fail(ErrorCode::invalid_range, "alpha must lie in (0, 1/2], got " + to_string(alpha));
  BoostResult b;
  b.alpha = alpha;
  b.beta = beta;
  b.alpha_prime = (1 - beta) / 2;
  const auto& la = params.at(alpha, m.mu);
  const auto& lp = params.at(b.alpha_prime, m.mu);
  b.alpha_level = la.alpha;
  b.alpha_prime_level = lp.alpha;
  const Rational q = (1 - beta) / (2 * beta);
  b.C = rmin(la.C, rmin(q * lp.C, q));
  b.K = normalize_pieces(m, union_decomposables(m, la.K, lp.K));
  return b;
}

PowerResult boost_power(const MeasuredGroupoid& m, const DecomposableSet& k1, const Rational& c1,
                        const Rational& alpha, const Rational& beta, std::size_t piece_cap) {
  if (c1 <= 0) fail(ErrorCode::invalid_range, "C' must be positive");
  if (alpha <= 0 || alpha > Rational(1, 2)) fail(ErrorCode::invalid_range, "alpha must lie in (0, 1/2]");
  if (beta <= 0 || beta > 1) fail(ErrorCode::invalid_range, "beta must lie in (0, 1]");
  PowerResult out;
  out.m = min_power_at_least(1 + c1, 1 / (alpha * beta));
  const std::size_t n1 = std::max<std::size_t>(k1.piece_count(), 1);
  out.nominal_pieces_log2 = static_cast<double>(out.m) * std::log2(static_cast<double>(n1));
  out.nominal_length = k1.length_bound * Rational(static_cast<unsigned long>(out.m));
  const auto& g = m.groupoid;
  if (out.m == 0) {
    out.K = make_decomposable(m, {Bisection(g, g.unit_set())}, std::vector<std::size_t>{0}, 0);
    return out;
  }
  if (out.nominal_pieces_log2 <= std::log2(static_cast<double>(piece_cap))) {
    DecomposableSet k = k1;
    for (std::uint64_t i = 1; i < out.m; ++i) k = normalize_pieces(m, compose_decomposables(m, k, k1));
    out.K = std::move(k);
    out.K.length_bound = out.nominal_length;
    return out;
  }
  out.redecomposed = true;
  out.K = decompose_unital_symmetric(m, power(g, k1.elements(g.size()), out.m));
  return out;
}

FolnerResult maximal_folner(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                            const Rational& eps, const ScanOptions& opt) {
  if (y.empty()) fail(ErrorCode::degenerate_domain, "empty domain");
  FolnerResult res;
  res.epsilon = eps;
  res.F = AtomSet(mu.size());
  res.boundary = 0;
  const Rational my = mu.measure(y);
  if (y.count() > opt.exact_limit) {
    res.maximal = FolnerMode::greedy_local;
    auto atoms = y.to_vector();
    std::vector<AtomSet> sat;
    for (Atom a : atoms) sat.push_back(saturate(k, AtomSet(mu.size(), {a})) & y);
    AtomSet s(mu.size());
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (res.F.contains(atoms[j])) continue;
        AtomSet f = res.F;
        f.insert(atoms[j]);
        Rational mf = mu.measure(f);
        if (2 * mf > my) continue;
        AtomSet sf = s | sat[j];
        Rational b = mu.measure(sf - f);
        if (b <= eps * mf) {
          res.F = f, s = sf, res.boundary = b;
          grew = true;
          break;
        }
      }
    }
    return res;
  }
  auto v = detail::make_local(mu, y, &k);
  v.fits64 = false;  // exact rational comparisons via GMP
  detail::MaskTables t(v);
  const Mask full = v.full();
  const mpz_class& mY = t.mz[full];
  const mpz_class en = eps.get_num(), ed = eps.get_den();
  Mask best = 0;
  const std::size_t n = std::size_t{1} << v.k();
  for (std::size_t s = 1; s < n; ++s) {
    const Mask f = static_cast<Mask>(s);
    const mpz_class& mf = t.mz[f];
    if (2 * mf > mY) continue;
    if (t.mz[t.sat[f] & ~f & full] * ed > en * mf) continue;
    if (mf > t.mz[best] || (mf == t.mz[best] && detail::lex_less_mask(f, best))) best = f;
  }
  res.F = v.to_set(best, mu.size());
  res.boundary = Rational(t.mz[t.sat[best] & ~best & full], v.denom);
  res.boundary.canonicalize();
  // consequence of maximality: sets outside F keep expanding relative to F
  const Mask rest = full & ~best;
  bool ok = true;
  for (Mask a = rest; a != 0 && ok; a = (a - 1) & rest) {
    const mpz_class& ma = t.mz[a];
    if (2 * ma > mY - 2 * t.mz[best]) continue;
    const mpz_class& b = t.mz[t.sat[a] & ~a & full & ~best];
    if (!(b * ed > en * ma)) {
      ok = false;
      res.post_witness = v.to_set(a, mu.size());
    }
  }
  res.post_check = ok;
  return res;
}

bool ratio_bound_holds(const AtomicMeasureSpace& mu, const ExpansionDomain& d) {
  return minimal_theta(mu, d.Y, d.K) <= d.theta;
}

Rational minimal_theta(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k) {
  Rational theta = 1;
  for (const auto& p : k.pieces)
    y.for_each([&](Atom x) {
      Atom t = p.tau(x);
      if (t == npos || !y.contains(t)) return;
      Rational r = mu.weight(t) / mu.weight(x);
      theta = rmax(theta, rmax(r, 1 / r));
    });
  return theta;
}

StructureStep structure_step(const MeasuredGroupoid& m, const ExpansionParams& params, const Rational& c,
                             std::size_t n, const StructureOptions& opt) {
  if (c <= 0 || c >= Rational(1, 2)) fail(ErrorCode::invalid_range, "C must lie in (0, 1/2)");
  if (n == 0) fail(ErrorCode::invalid_range, "exhaustion index n starts at 1");
  MeasuredGroupoid pm{m.groupoid, m.length, m.mu.normalized()};
  const auto& mu = pm.mu;
  const auto& g = pm.groupoid;
  StructureStep st;
  st.n = n;
  const Rational n1(static_cast<unsigned long>(n + 1));
  st.alpha_n = c / ((4 + 2 * c) * n1);
  // subset-relative expansion at beta = 1/2 via the beta-extension at level
  // alpha_n/2 and the power with (1+C')^m >= 2/alpha_n
  st.boost = boost_beta(pm, params, st.alpha_n / 2, 1 - (1 - c) / 4);
  st.power = boost_power(pm, st.boost.K, st.boost.C, st.alpha_n, Rational(1, 2));
  const DecomposableSet& kn = st.power.K;
  const std::size_t nn = kn.piece_count();
  const Rational theta = Rational(static_cast<unsigned long>(nn)) * n1;
  st.Z = AtomSet(g.atom_count());
  for (const auto& p : kn.pieces)
    p.domain().for_each([&](Atom x) {
      Atom t = p.tau(x);
      if (mu.weight(t) / mu.weight(x) < 1 / theta) st.Z.insert(t);
    });
  st.X = st.Z.complement();
  if (st.X.empty()) fail(ErrorCode::invariant_violation, "every atom has a bad ratio");
  st.folner = maximal_folner(mu, st.X, kn, c, opt.scan);
  const Rational mx = mu.measure(st.X);
  if (!(mu.measure(st.folner.F) < st.alpha_n * mx))
    fail(ErrorCode::invariant_violation, "Folner set too large at n=" + std::to_string(n) +
                                             "; the supplied levels do not certify expansion");
  st.domain.Y = st.X - st.folner.F;
  st.domain.C = c / 2;
  st.domain.N = nn;
  st.domain.L = st.power.nominal_length;
  st.domain.K = kn;
  st.domain.theta = theta;
  st.length_actual = max_length(pm.length, kn.elements(g.size()));
  st.measure = mu.measure(st.domain.Y);
  st.measure_bound = (1 - st.alpha_n) * Rational(static_cast<unsigned long>(n)) / n1;
  if (!(st.measure > st.measure_bound))
    fail(ErrorCode::invariant_violation, "exhaustion measure bound fails at n=" + std::to_string(n));
  st.ratio_bound_ok = ratio_bound_holds(mu, st.domain);
  const bool exact_folner = st.folner.maximal == FolnerMode::exact;
  if (!st.domain.Y.empty() && st.domain.Y.count() <= opt.scan.exact_limit) {
    ScanOptions strict = opt.scan;
    strict.comparison = Comparison::strict;
    st.recertified = certify_expansion(mu, st.domain.Y, kn, st.domain.C, 0, Rational(1, 2), strict);
  }
  if (st.recertified && st.recertified->verdict == Verdict::refuted) st.verdict = Verdict::refuted;
  else if (st.recertified && exact_folner && st.ratio_bound_ok) st.verdict = Verdict::proven;
  else st.verdict = Verdict::unknown;
  return st;
}

std::vector<StructureStep> structure_exhaustion(const MeasuredGroupoid& m, const ExpansionParams& params,
                                                const Rational& c, std::size_t n_max,
                                                const StructureOptions& opt) {
  std::vector<StructureStep> out;
  for (std::size_t n = std::max<std::size_t>(opt.n_min, 1); n <= n_max; ++n)
    out.push_back(structure_step(m, params, c, n, opt));
  return out;
}

std::vector<ElementSet> family_closure(const FiniteGroupoid& g, const RestrictedFamily& fam) {
  struct Hash {
    std::size_t operator()(const ElementSet& s) const { return s.hash(); }
  };
  std::vector<ElementSet> members;
  std::unordered_map<ElementSet, std::size_t, Hash> seen;
  auto add = [&](ElementSet s) {
    if (s.empty() || members.size() >= fam.size_cap) return;
    if (seen.emplace(s, members.size()).second) members.push_back(std::move(s));
  };
  add(g.unit_set());
  for (const auto& s : fam.generators) {
    Bisection(g, s);  // generators must be bisections
    add(s);
    add(inverse_set(g, s));
  }
  std::size_t done = 0;
  for (std::size_t depth = 0; depth < fam.depth_cap; ++depth) {
    const std::size_t end = members.size();
    for (std::size_t i = 0; i < end; ++i)
      for (std::size_t j = (i < done ? done : 0); j < end; ++j) {
        add(product(g, members[i], members[j]));
        add(product(g, members[j], members[i]));
      }
    if (members.size() == end) break;
    done = end;
  }
  return members;
}

RestrictedParams restrict_family(const MeasuredGroupoid& m, const ExpansionParams& params,
                                 const RestrictedFamily& fam) {
  RestrictedParams out;
  out.params = params;
  if (fam.all_bisections) {
    for (std::size_t l = 0; l < params.levels.size(); ++l)
      for (std::size_t i = 0; i < params.levels[l].K.piece_count(); ++i) out.proofs.push_back({l, i, npos});
    return out;
  }
  out.closure = family_closure(m.groupoid, fam);
  for (std::size_t l = 0; l < params.levels.size(); ++l) {
    const auto& k = params.levels[l].K;
    for (std::size_t i = 0; i < k.piece_count(); ++i) {
      std::size_t found = npos;
      for (std::size_t j = 0; j < out.closure.size() && found == npos; ++j)
        if (k.pieces[i].members().subset_of(out.closure[j])) found = j;
      if (found == npos)
        fail(ErrorCode::outside_family, "piece " + std::to_string(i) + " of level alpha=" +
                                            to_string(params.levels[l].alpha) +
                                            " is outside the family closure");
      out.proofs.push_back({l, i, found});
    }
  }
  return out;
}

}  // namespace gexp
