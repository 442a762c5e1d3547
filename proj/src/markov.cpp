#include "gexp/markov.hpp"

#include <algorithm>
#include <random>

#include "scan.hpp"

namespace gexp {

Real to_real(const Rational& q) {
  const auto& n = q.get_num();
  const auto& d = q.get_den();
  if (mpz_fits_slong_p(n.get_mpz_t()) && mpz_fits_slong_p(d.get_mpz_t()))
    return Real(n.get_si()) / Real(d.get_si());
  return Real(n.get_str()) / Real(d.get_str());
}

std::size_t MarkovKernelBundle::local(Atom a) const {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), a);
  return it != atoms.end() && *it == a ? static_cast<std::size_t>(it - atoms.begin()) : npos;
}

Real MarkovKernelBundle::mu_tilde_of(const AtomSet& a) const {
  Real s = 0;
  a.for_each([&](Atom x) {
    auto i = local(x);
    if (i != npos) s += mu_tilde[i];
  });
  return s;
}

Eigen::MatrixXd MarkovKernelBundle::laplacian() const {
  const std::size_t n = k();
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(static_cast<long>(n), static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(static_cast<long>(i), static_cast<long>(j)) -= static_cast<double>(P(i, j));
  return d;
}

namespace {

void check_reversible(MarkovKernelBundle& b) {
  const std::size_t n = b.k();
  Real worst = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Real a = b.mu_tilde[i] * b.P(i, j), c = b.mu_tilde[j] * b.P(j, i);
      Real scale = std::max(Real(1e-300), std::max(abs(a), abs(c)));
      worst = std::max(worst, Real(abs(a - c) / scale));
    }
  b.reversibility_error = worst;
  if (b.pi_exact) {
    const auto& p = *b.pi_exact;
    const auto& m = *b.mu_tilde_exact;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (m[i] * p[i * n + j] != m[j] * p[j * n + i])
          fail(ErrorCode::invariant_violation, "kernel is not reversible for mu~ (exact check)");
  }
  if (worst > Real(1e-12)) fail(ErrorCode::numerical_failure, "kernel reversibility error above 1e-12");
}

}  // namespace

MarkovKernelBundle build_kernel(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k) {
  if (!k.unital()) fail(ErrorCode::not_unital, "kernel needs a unital decomposition");
  if (!k.symmetric()) fail(ErrorCode::not_symmetric, "kernel needs a symmetric decomposition");
  if (y.empty()) fail(ErrorCode::degenerate_domain, "empty domain");
  MarkovKernelBundle b;
  b.Y = y;
  b.atoms = y.to_vector();
  b.K = k;
  const std::size_t n = b.k();
  b.pi.assign(n * n, Real(0));
  b.sigma.assign(n, Real(0));
  b.mu_tilde.assign(n, Real(0));
  std::vector<Rational> pe(n * n, Rational(0)), se(n, Rational(0));
  bool exact = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Atom x = b.atoms[i];
    b.mu.push_back(mu.weight(x));
    for (const auto& p : k.pieces) {
      const Atom t = p.tau(x);
      if (t == npos || !y.contains(t)) continue;
      const std::size_t j = b.local(t);
      const Rational r = mu.weight(t) / mu.weight(x);
      Rational root;
      Real s;
      if (exact_sqrt(r, root)) {
        s = to_real(root);
        if (exact) pe[i * n + j] += root, se[i] += root;
      } else {
        s = sqrt(to_real(r));
        exact = false;
      }
      b.pi[i * n + j] += s;
      b.sigma[i] += s;
    }
    for (std::size_t j = 0; j < n; ++j) b.pi[i * n + j] /= b.sigma[i];
    b.mu_tilde[i] = b.sigma[i] * to_real(b.mu[i]);
  }
  if (exact) {
    std::vector<Rational> mt(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) pe[i * n + j] /= se[i];
      mt[i] = se[i] * b.mu[i];
    }
    b.pi_exact = std::move(pe);
    b.sigma_exact = std::move(se);
    b.mu_tilde_exact = std::move(mt);
  }
  check_reversible(b);
  return b;
}

MarkovKernelBundle kernel_from_flow(const std::vector<std::vector<Rational>>& q) {
  const std::size_t n = q.size();
  MarkovKernelBundle b;
  b.Y = AtomSet::full(n);
  for (std::size_t i = 0; i < n; ++i) b.atoms.push_back(i);
  std::vector<Rational> pe(n * n), mt(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i].size() != n) fail(ErrorCode::invalid_argument, "flow matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      if (q[i][j] < 0 || q[i][j] != q[j][i]) fail(ErrorCode::invalid_argument, "flow must be symmetric and nonnegative");
      mt[i] += q[i][j];
    }
    if (mt[i] <= 0) fail(ErrorCode::invalid_argument, "flow row with zero mass");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pe[i * n + j] = q[i][j] / mt[i];
  b.mu = mt;
  b.sigma.assign(n, Real(1));
  b.sigma_exact = std::vector<Rational>(n, Rational(1));
  for (std::size_t i = 0; i < n; ++i) {
    b.mu_tilde.push_back(to_real(mt[i]));
    for (std::size_t j = 0; j < n; ++j) b.pi.push_back(to_real(pe[i * n + j]));
  }
  b.pi_exact = std::move(pe);
  b.mu_tilde_exact = std::move(mt);
  check_reversible(b);
  return b;
}

Real boundary_size(const MarkovKernelBundle& b, const AtomSet& a) {
  Real s = 0;
  const std::size_t n = b.k();
  for (std::size_t i = 0; i < n; ++i) {
    if (!a.contains(b.atoms[i])) continue;
    Real row = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (!a.contains(b.atoms[j])) row += b.P(i, j);
    s += row * b.mu_tilde[i];
  }
  return s;
}

std::optional<Rational> boundary_size_exact(const MarkovKernelBundle& b, const AtomSet& a) {
  if (!b.pi_exact) return std::nullopt;
  const std::size_t n = b.k();
  Rational s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!a.contains(b.atoms[i])) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (!a.contains(b.atoms[j])) s += (*b.pi_exact)[i * n + j] * (*b.mu_tilde_exact)[i];
  }
  return s;
}

namespace {

// Exhaustive infimum of boundary/mass over 0 < m(A) <= m(Y)/2, computed with
// the incremental rule d[A+j] = d[A] + Q(j, outside) - Q(A, j).
template <class T>
bool cheeger_scan(const std::vector<T>& flow, const std::vector<T>& mass, std::size_t n, T& best_num,
                  T& best_den, detail::Mask& best) {
  const std::size_t total = std::size_t{1} << n;
  std::vector<T> bd(total), m(total);
  bd[0] = 0;
  m[0] = 0;
  T my = 0;
  for (std::size_t i = 0; i < n; ++i) my += mass[i];
  bool have = false;
  for (std::size_t s = 1; s < total; ++s) {
    const std::size_t j = static_cast<std::size_t>(__builtin_ctzll(s));
    const std::size_t rest = s & (s - 1);
    T add = 0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == j) continue;
      if (s >> y & 1u) add -= flow[y * n + j];  // y in rest
      else add += flow[j * n + y];
    }
    bd[s] = bd[rest] + add;
    m[s] = m[rest] + mass[j];
    if (2 * m[s] > my) continue;
    const auto mask = static_cast<detail::Mask>(s);
    if (!have || bd[s] * best_den < best_num * m[s] ||
        (bd[s] * best_den == best_num * m[s] && detail::lex_less_mask(mask, best))) {
      have = true;
      best_num = bd[s];
      best_den = m[s];
      best = mask;
    }
  }
  return have;
}

AtomSet mask_set(const MarkovKernelBundle& b, detail::Mask m, std::size_t universe) {
  AtomSet s(universe);
  for (std::size_t j = 0; j < b.k(); ++j)
    if (m >> j & 1u) s.insert(b.atoms[j]);
  return s;
}

}  // namespace

namespace {

// Sweep cut along the second eigenvector: prefixes of the atoms sorted by
// the Fiedler function, each scored as a set or by its complement.
std::optional<std::pair<Real, AtomSet>> sweep_cut(const MarkovKernelBundle& b) {
  const long n = static_cast<long>(b.k());
  if (n < 2) return std::nullopt;
  Eigen::MatrixXd m(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      const Real a = b.mu_tilde[ui] * b.P(ui, uj), c = b.mu_tilde[uj] * b.P(uj, ui);
      m(i, j) = static_cast<double>((a + c) / 2 / sqrt(b.mu_tilde[ui] * b.mu_tilde[uj]));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd v = es.eigenvectors().col(n - 2);  // eigenvalues ascend
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> f(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    f[i] = v(static_cast<long>(i)) / static_cast<double>(sqrt(b.mu_tilde[i]));
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return f[x] < f[y]; });
  const Real total = b.mu_tilde_of(b.Y);
  std::vector<char> in(order.size(), 0);
  Real boundary = 0, mass = 0;
  std::optional<std::pair<Real, std::size_t>> best;  // ratio, prefix length
  bool best_complement = false;
  for (std::size_t t = 0; t + 1 < order.size(); ++t) {
    const std::size_t x = order[t];
    for (std::size_t y = 0; y < order.size(); ++y) {
      if (y == x) continue;
      const Real fl = b.mu_tilde[x] * b.P(x, y);
      if (in[y]) boundary -= fl;
      else boundary += fl;
    }
    in[x] = 1;
    mass += b.mu_tilde[x];
    const bool prefix_ok = 2 * mass <= total;
    const Real m_side = prefix_ok ? mass : total - mass;
    if (m_side <= 0 || 2 * m_side > total) continue;
    const Real r = boundary / m_side;
    if (!best || r < best->first) {
      best = {r, t + 1};
      best_complement = !prefix_ok;
    }
  }
  if (!best) return std::nullopt;
  AtomSet a(b.Y.universe());
  for (std::size_t t = 0; t < best->second; ++t) a.insert(b.atoms[order[t]]);
  if (best_complement) a = b.Y - a;
  return std::make_pair(best->first, a);
}

}  // namespace

CheegerResult cheeger(const MarkovKernelBundle& b, const ScanOptions& opt) {
  CheegerResult res;
  const std::size_t n = b.k();
  const std::size_t universe = b.Y.universe();
  if (n <= opt.exact_limit) {
    res.exact = true;
    detail::Mask best = 0;
    if (b.pi_exact) {
      std::vector<Rational> flow(n * n), mass = *b.mu_tilde_exact;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) flow[i * n + j] = mass[i] * (*b.pi_exact)[i * n + j];
      Rational num, den;
      if (cheeger_scan<Rational>(flow, mass, n, num, den, best)) {
        res.value_exact = num / den;
        res.value = to_real(*res.value_exact);
        res.argmin = mask_set(b, best, universe);
      } else {
        res.vacuous = true;
      }
    } else {
      std::vector<Real> flow(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) flow[i * n + j] = b.mu_tilde[i] * b.P(i, j);
      Real num, den;
      if (cheeger_scan<Real>(flow, b.mu_tilde, n, num, den, best)) {
        res.value = num / den;
        res.argmin = mask_set(b, best, universe);
      } else {
        res.vacuous = true;
      }
    }
    if (res.vacuous) res.value = std::numeric_limits<Real>::infinity();
    res.lo = res.hi = res.value;
    return res;
  }
  // interval from the spectral gap plus a sampled upper bound
  const auto spec = spectral_gap(b);
  const double gap = spec.laplacian_gap;
  res.lo = Real(std::max(0.0, gap / 2 - spec.eigen_tolerance));
  res.hi = Real(std::sqrt(std::max(0.0, 2 * gap)) + spec.eigen_tolerance);
  std::mt19937_64 rng(opt.seed);
  const Real my = b.mu_tilde_of(b.Y);
  std::bernoulli_distribution coin(0.5);
  for (std::uint64_t it = 0; it < opt.budget; ++it) {
    AtomSet a(universe);
    for (Atom x : b.atoms)
      if (coin(rng)) a.insert(x);
    Real m = b.mu_tilde_of(a);
    if (m <= 0 || 2 * m > my) {
      a = b.Y - a;
      m = my - m;
      if (m <= 0 || 2 * m > my) continue;
    }
    Real r = boundary_size(b, a) / m;
    if (!res.sampled_upper || r < *res.sampled_upper) {
      res.sampled_upper = r;
      res.argmin = a;
    }
  }
  if (auto sw = sweep_cut(b)) {
    // score the sweep set exactly as the samples are scored
    const Real r = boundary_size(b, sw->second) / b.mu_tilde_of(sw->second);
    if (!res.sampled_upper || r < *res.sampled_upper) {
      res.sampled_upper = r;
      res.argmin = sw->second;
    }
  }
  if (res.sampled_upper && *res.sampled_upper < res.hi) res.hi = *res.sampled_upper;
  return res;
}

SpectralReport spectral_gap(const MarkovKernelBundle& b) {
  SpectralReport rep;
  const long n = static_cast<long>(b.k());
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd v(n);
  Real resid = 0;
  for (long i = 0; i < n; ++i) {
    Real row = 0;
    for (long j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      row += b.P(ui, uj);
      // D^{1/2} P D^{-1/2}, symmetric by reversibility
      Real a = b.mu_tilde[ui] * b.P(ui, uj), c = b.mu_tilde[uj] * b.P(uj, ui);
      m(i, j) = static_cast<double>((a + c) / 2 / sqrt(b.mu_tilde[ui] * b.mu_tilde[uj]));
    }
    resid = std::max(resid, Real(abs(row - 1)));
    v(i) = static_cast<double>(sqrt(b.mu_tilde[static_cast<std::size_t>(i)]));
  }
  rep.constant_residual = static_cast<double>(resid);
  if (rep.constant_residual > 1e-12) fail(ErrorCode::numerical_failure, "constants are not fixed by the kernel");
  v.normalize();
  if ((m * v - v).lpNorm<Eigen::Infinity>() > 1e-10)
    fail(ErrorCode::numerical_failure, "constant function is not an eigenvector with eigenvalue 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(m, Eigen::EigenvaluesOnly);
  if (full.info() != Eigen::Success) fail(ErrorCode::numerical_failure, "eigensolver did not converge");
  for (long i = 0; i < n; ++i) rep.spectrum.push_back(full.eigenvalues()(i));
  for (double e : rep.spectrum)
    if (e < -1 - 1e-9 || e > 1 + 1e-9) fail(ErrorCode::numerical_failure, "spectrum outside [-1, 1]");
  if (n == 1) {
    rep.lambda = -1;  // no nonzero function orthogonal to constants
    rep.laplacian_gap = 2;
    return rep;
  }
  // orthonormal basis of the complement of v from a Householder reflection
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd basis = q.rightCols(n - 1);
  Eigen::MatrixXd restricted = basis.transpose() * m * basis;
  restricted = (restricted + restricted.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(restricted, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::numerical_failure, "eigensolver did not converge");
  rep.lambda = es.eigenvalues().maxCoeff();
  rep.laplacian_gap = 1 - rep.lambda;
  return rep;
}

SandwichCheck sandwich(const CheegerResult& c, const SpectralReport& s, double tol) {
  SandwichCheck out;
  out.kappa = static_cast<double>(c.value);
  out.gap = s.laplacian_gap;
  if (c.vacuous) {
    out.lower_ok = out.upper_ok = true;
    return out;
  }
  out.lower_ok = out.kappa * out.kappa / 2 <= out.gap + tol;
  out.upper_ok = out.gap <= 2 * out.kappa + tol;
  return out;
}

MarkovCertificate markov_domain_check(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                                      const Rational& c, const ScanOptions& opt) {
  MarkovCertificate cert;
  cert.C = c;
  auto b = build_kernel(mu, y, k);
  cert.cheeger = cheeger(b, opt);
  const auto& ch = cert.cheeger;
  if (ch.exact) {
    cert.method = Method::exact;
    if (ch.vacuous) {
      cert.verdict = Verdict::proven;
    } else if (ch.value_exact) {
      cert.verdict = *ch.value_exact > c ? Verdict::proven : Verdict::refuted;
    } else {
      const Real diff = ch.value - to_real(c);
      cert.verdict = diff > Real(1e-28) ? Verdict::proven : diff < Real(-1e-28) ? Verdict::refuted : Verdict::unknown;
    }
    if (cert.verdict == Verdict::refuted) cert.witness = ch.argmin;
    return cert;
  }
  cert.method = Method::randomized;
  if (ch.lo > to_real(c)) cert.verdict = Verdict::proven;
  else if (ch.sampled_upper && *ch.sampled_upper < to_real(c)) {
    cert.verdict = Verdict::refuted;
    cert.witness = ch.argmin;
  } else {
    cert.verdict = Verdict::unknown;
  }
  return cert;
}

ToMarkov expansion_to_markov(const AtomicMeasureSpace& mu, const ExpansionDomain& d, const ScanOptions& opt) {
  ToMarkov out;
  out.domain.Y = d.Y;
  out.domain.kappa = d.C / (Rational(static_cast<unsigned long>(d.N)) * d.theta);
  out.domain.N = d.N;
  out.domain.L = d.L;
  out.domain.K = d.K;
  out.domain.theta = d.theta;
  if (d.Y.count() <= opt.exact_limit) out.recertified = markov_domain_check(mu, d.Y, d.K, out.domain.kappa, opt);
  return out;
}

ToExpansion markov_to_expansion(const AtomicMeasureSpace& mu, const MarkovDomain& d, const ScanOptions& opt) {
  ToExpansion out;
  out.domain.Y = d.Y;
  const Rational denom = Rational(static_cast<unsigned long>(d.N)) * sqrt_upper(d.theta) + d.kappa;
  out.domain.C = d.kappa / denom;
  out.domain.N = d.N;
  out.domain.L = d.L;
  out.domain.K = d.K;
  out.domain.theta = d.theta;
  if (d.Y.count() <= opt.exact_limit) {
    ScanOptions strict = opt;
    strict.comparison = Comparison::strict;
    out.recertified = certify_expansion(mu, d.Y, d.K, out.domain.C, 0, Rational(1, 2), strict);
  }
  return out;
}

}  // namespace gexp
