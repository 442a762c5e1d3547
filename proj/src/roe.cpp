#include "gexp/roe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/SVD>

namespace gexp {

namespace {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<double> sqrt_weights(const AtomicMeasureSpace& mu) {
  auto w = mu.as_doubles();
  for (auto& x : w) x = std::sqrt(x);
  return w;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0;
  bool real = true;
  for (Eigen::Index i = 0; i < m.size() && real; ++i) real = m.data()[i].imag() == 0;
  if (real) {
    Eigen::MatrixXd r = m.real();
    if (r.isZero(0)) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    return svd.singularValues()(0);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

void require_same_space(const WeightedOperator& a, const WeightedOperator& b) {
  if (a.size() != b.size() || a.space.weights() != b.space.weights())
    fail(ErrorCode::invalid_argument, "operators act on different spaces");
}

}  // namespace

double WeightedOperator::norm() const {
  const auto s = sqrt_weights(space);
  Eigen::MatrixXcd w = matrix;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) *= s[i] / s[j];
  return spectral_norm(w);
}

WeightedOperator WeightedOperator::adjoint() const {
  const auto d = space.as_doubles();
  Eigen::MatrixXcd a = matrix.adjoint();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) *= d[j] / d[i];
  return {std::move(a), space};
}

WeightedOperator WeightedOperator::compress(const AtomSet& a, const AtomSet& b) const {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(matrix.rows(), matrix.cols());
  a.for_each([&](Atom x) {
    b.for_each([&](Atom y) { c(x, y) = matrix(x, y); });
  });
  return {std::move(c), space};
}

std::complex<double> WeightedOperator::inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
  const auto d = space.as_doubles();
  std::complex<double> s = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += f(i) * std::conj(g(i)) * d[i];
  return s;
}

WeightedOperator operator*(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_space(a, b);
  return {a.matrix * b.matrix, a.space};
}

WeightedOperator operator-(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_space(a, b);
  return {a.matrix - b.matrix, a.space};
}

double block_norm(const Eigen::MatrixXcd& m, const std::vector<double>& sqrt_mu, const std::vector<Atom>& rows,
                  const std::vector<Atom>& cols) {
  if (rows.empty() || cols.empty()) return 0;
  Eigen::MatrixXcd w(rows.size(), cols.size());
  bool zero = true;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      w(i, j) = m(rows[i], cols[j]) * (sqrt_mu[rows[i]] / sqrt_mu[cols[j]]);
      if (w(i, j) != 0.0) zero = false;
    }
  return zero ? 0.0 : spectral_norm(w);
}

AtomSet Relation::saturate(const AtomSet& a) const {
  AtomSet out(reach.size());
  a.for_each([&](Atom y) { out |= reach[y]; });
  return out;
}

Relation relation_of(const DecomposableSet& k, std::size_t atoms) {
  Relation rel;
  rel.reach.assign(atoms, AtomSet(atoms));
  for (const auto& p : k.pieces)
    p.domain().for_each([&](Atom y) { rel.reach[y].insert(p.tau(y)); });
  return rel;
}

Relation relation_of(const FiniteGroupoid& g, const ElementSet& s) {
  Relation rel;
  rel.reach.assign(g.atom_count(), AtomSet(g.atom_count()));
  s.for_each([&](Element e) { rel.reach[g.s(e)].insert(g.r(e)); });
  return rel;
}

PropagationCheck check_propagation(const WeightedOperator& t, const Relation& rel) {
  if (rel.size() != t.size()) fail(ErrorCode::invalid_argument, "relation and operator sizes differ");
  PropagationCheck out;
  const auto n = t.size();
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      if (t.matrix(x, y) != 0.0 && !rel.reach[y].contains(x)) {
        out.ok = false;
        out.counterexample = {x, y};
        return out;
      }
  return out;
}

QuasiLocalReport quasi_local_norm(const WeightedOperator& t, const Relation& rel, const ScanOptions& opt) {
  const std::size_t n = t.size();
  if (rel.size() != n) fail(ErrorCode::invalid_argument, "relation and operator sizes differ");
  const auto s = sqrt_weights(t.space);
  QuasiLocalReport rep;
  rep.seed = opt.seed;
  auto evaluate = [&](const AtomSet& a, AtomSet& b) {
    b = rel.saturate(a).complement();
    return block_norm(t.matrix, s, a.to_vector(), b.to_vector());
  };
  auto record = [&](double v, const AtomSet& a, const AtomSet& b) {
    if (!rep.witness_A || v > rep.value) {
      rep.value = v;
      rep.witness_A = a;
      rep.witness_B = b;
    }
  };
  const std::size_t limit = std::min(opt.exact_limit, kMaxExactLimit);
  if (n <= limit) {
    rep.method = Method::exact;
    const std::uint32_t full = n == 32 ? 0xffffffffu : ((1u << n) - 1);
    std::vector<std::uint32_t> reach(n, 0), sat(std::size_t{1} << n, 0);
    for (std::size_t y = 0; y < n; ++y) rel.reach[y].for_each([&](Atom x) { reach[y] |= 1u << x; });
    std::vector<Atom> rows, cols;
    for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
      const int low = std::countr_zero(mask);
      sat[mask] = sat[mask & (mask - 1)] | reach[low];
      const std::uint32_t bmask = full & ~sat[mask];
      rows.clear();
      cols.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1u) rows.push_back(i);
        if (bmask >> i & 1u) cols.push_back(i);
      }
      const double v = block_norm(t.matrix, s, rows, cols);
      ++rep.sets_checked;
      if (!rep.witness_A || v > rep.value) {
        rep.value = v;
        rep.witness_A = AtomSet::from(n, rows);
        rep.witness_B = AtomSet::from(n, cols);
      }
    }
    return rep;
  }
  rep.method = Method::randomized;
  std::mt19937_64 rng(opt.seed);
  std::bernoulli_distribution coin(0.5);
  for (std::uint64_t it = 0; it < opt.budget; ++it) {
    AtomSet a(n);
    for (std::size_t i = 0; i < n; ++i)
      if (coin(rng)) a.insert(i);
    if (a.empty()) a.insert(static_cast<std::size_t>(rng() % n));
    AtomSet b;
    double v = evaluate(a, b);
    ++rep.sets_checked;
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        AtomSet c = a;
        if (c.contains(i)) c.erase(i); else c.insert(i);
        if (c.empty()) continue;
        AtomSet cb;
        const double w = evaluate(c, cb);
        ++rep.sets_checked;
        if (w > v) {
          a = std::move(c);
          b = std::move(cb);
          v = w;
          improved = true;
        }
      }
    }
    record(v, a, b);
  }
  return rep;
}

WeightedOperator averaging_projection(const AtomicMeasureSpace& mu, const AtomSet& y) {
  const Rational my = mu.measure(y);
  if (my == 0) fail(ErrorCode::degenerate_domain, "averaging projection on a null set");
  const std::size_t n = mu.size();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  std::vector<double> col(n, 0.0);
  y.for_each([&](Atom b) { col[b] = to_double(mu.weight(b) / my); });
  y.for_each([&](Atom a) {
    y.for_each([&](Atom b) { p(a, b) = col[b]; });
  });
  return {std::move(p), mu};
}

namespace {

std::vector<Rational> exact_density(const AtomicMeasureSpace& mu, const Eigen::VectorXcd& xi) {
  std::vector<Rational> nu(mu.size());
  Rational total = 0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    nu[x] = from_double(std::norm(xi(x))) * mu.weight(x);
    total += nu[x];
  }
  if (total == 0) fail(ErrorCode::not_normalized, "xi vanishes identically");
  for (auto& v : nu) v /= total;
  return nu;
}

}  // namespace

ProjectionData rank_one(const AtomicMeasureSpace& mu, const Eigen::VectorXcd& xi) {
  const std::size_t n = mu.size();
  if (static_cast<std::size_t>(xi.size()) != n) fail(ErrorCode::invalid_argument, "xi has the wrong length");
  const auto d = mu.as_doubles();
  double sq = 0;
  for (std::size_t x = 0; x < n; ++x) sq += std::norm(xi(x)) * d[x];
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "xi has weighted norm " << std::sqrt(sq);
    fail(ErrorCode::not_normalized, os.str());
  }
  ProjectionData pd;
  pd.xi = xi;
  pd.nu = exact_density(mu, xi);
  pd.Z = AtomSet(n);
  pd.Y = AtomSet(n);
  for (std::size_t x = 0; x < n; ++x) {
    if (xi(x) == 0.0) pd.Z.insert(x);
    else pd.Y.insert(x);
  }
  pd.y_atoms = pd.Y.to_vector();
  Eigen::MatrixXcd p(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) p(x, y) = xi(x) * std::conj(xi(y)) * d[y];
  pd.P = {std::move(p), mu};
  pd.Q = Eigen::MatrixXcd::Zero(n, pd.y_atoms.size());
  for (std::size_t j = 0; j < pd.y_atoms.size(); ++j) pd.Q(pd.y_atoms[j], j) = 1.0;
  return pd;
}

WeightedOperator ProjectionData::reduced() const {
  std::vector<Rational> w;
  for (auto a : y_atoms) w.push_back(P.space.weight(a));
  // Q* is restriction to Y in the weighted inner product
  Eigen::MatrixXcd r = Q.transpose() * P.matrix * Q;
  return {std::move(r), AtomicMeasureSpace(std::move(w))};
}

AtomicMeasureSpace ProjectionData::nu_on_Y() const {
  std::vector<Rational> w;
  for (auto a : y_atoms) w.push_back(nu[a]);
  return AtomicMeasureSpace(std::move(w));
}

WeightedOperator MeasureChange::conjugate(const WeightedOperator& t) const {
  if (t.size() != static_cast<std::size_t>(xi.size())) fail(ErrorCode::invalid_argument, "size mismatch");
  Eigen::MatrixXcd m = t.matrix;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) *= xi(i) / xi(j);
  return {std::move(m), mu};
}

double MeasureChange::unitarity_defect() const {
  // matrix of U between orthonormal bases of L^2(nu) and L^2(mu)
  const auto dm = mu.as_doubles();
  const auto dn = nu.as_doubles();
  const Eigen::Index n = xi.size();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) u(i, i) = xi(i) * std::sqrt(dm[i] / dn[i]);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  return std::max(spectral_norm(u.adjoint() * u - id), spectral_norm(u * u.adjoint() - id));
}

MeasureChange change_measure_unitary(const AtomicMeasureSpace& mu, const Eigen::VectorXcd& xi) {
  if (static_cast<std::size_t>(xi.size()) != mu.size()) fail(ErrorCode::invalid_argument, "xi has the wrong length");
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    if (xi(i) == 0.0) fail(ErrorCode::has_zero_set, "xi vanishes at atom " + std::to_string(i));
  return MeasureChange{xi, mu, AtomicMeasureSpace(exact_density(mu, xi))};
}

Reduction reduce_to(const MeasuredGroupoid& m, const AtomSet& y, const std::optional<std::vector<Rational>>& weights) {
  const auto& g = m.groupoid;
  if (y.empty()) fail(ErrorCode::degenerate_domain, "reduction to an empty set");
  Reduction red;
  red.atom_map = y.to_vector();
  std::vector<Element> local(g.size(), npos);
  for (Element e = 0; e < g.size(); ++e)
    if (y.contains(g.s(e)) && y.contains(g.r(e))) {
      local[e] = red.element_map.size();
      red.element_map.push_back(e);
    }
  const auto& src = g.tables();
  GroupoidTables t;
  t.element_count = red.element_map.size();
  for (auto a : red.atom_map) t.units.push_back(local[g.unit_of(a)]);
  for (auto e : red.element_map) {
    t.source.push_back(local[src.source[e]]);
    t.range.push_back(local[src.range[e]]);
    t.inverse.push_back(local[src.inverse[e]]);
    if (!src.labels.empty()) t.labels.push_back(src.labels[e]);
  }
  for (const auto& c : src.compose)
    if (local[c.left] != npos && local[c.right] != npos && local[c.result] != npos)
      t.compose.push_back({local[c.left], local[c.right], local[c.result]});
  red.groupoid.groupoid = FiniteGroupoid(std::move(t));
  for (auto e : red.element_map) red.groupoid.length.values.push_back(m.length(e));
  if (weights) {
    if (weights->size() != red.atom_map.size()) fail(ErrorCode::invalid_argument, "one weight per atom of Y");
    red.groupoid.mu = AtomicMeasureSpace(*weights);
  } else {
    std::vector<Rational> w;
    for (auto a : red.atom_map) w.push_back(m.mu.weight(a));
    red.groupoid.mu = AtomicMeasureSpace(std::move(w));
  }
  return red;
}

WeightedOperator markov_approximant(const MarkovKernelBundle& b, const AtomicMeasureSpace& mu, std::uint64_t m) {
  const std::size_t k = b.k();
  MatL a(k, k), s = MatL::Identity(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      a(i, j) = static_cast<long double>(b.P(i, j)) / 2 + (i == j ? 0.5L : 0.0L);
  for (std::uint64_t e = m; e; e >>= 1) {
    if (e & 1) s = s * a;
    if (e > 1) a = a * a;
  }
  Rational my = 0;
  for (const auto& w : b.mu) my += w;
  Real mt = 0;
  for (const auto& w : b.mu_tilde) mt += w;
  const long double scale = static_cast<long double>(mt / to_real(my));
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(mu.size(), mu.size());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      t(b.atoms[i], b.atoms[j]) = static_cast<double>(scale * s(i, j) / static_cast<long double>(b.sigma[j]));
  return {std::move(t), mu};
}

namespace {

Real a_priori_bound(std::size_t n, const Rational& theta, const Rational& cn, std::uint64_t m) {
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  const Real c = to_real(cn);
  const Real base = 1 - c * c / 4;
  return Real(static_cast<unsigned long>(n)) * sqrt(to_real(theta)) * pow(base, Real(m));
}

std::uint64_t minimal_m(std::size_t n, const Rational& theta, const Rational& cn, double eps) {
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  const Real half = Real(eps) / 2;
  const Real lead = Real(static_cast<unsigned long>(n)) * sqrt(to_real(theta));
  if (lead < half) return 0;
  const Real c = to_real(cn);
  const Real base = 1 - c * c / 4;
  if (!(base < 1)) fail(ErrorCode::numerical_failure, "Markov constant too small to resolve");
  Real guess = log(half / lead) / log(base);
  if (guess > Real(1e18)) fail(ErrorCode::insufficient_instruments, "required power exceeds 1e18");
  auto m = static_cast<std::uint64_t>(guess);
  while (a_priori_bound(n, theta, cn, m) >= half) ++m;
  while (m > 0 && a_priori_bound(n, theta, cn, m - 1) < half) --m;
  return m;
}

std::vector<std::size_t> n_ladder(std::size_t n_max) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= std::min<std::size_t>(8, n_max); ++n) out.push_back(n);
  for (std::size_t n = 16; n <= n_max; n *= 2) out.push_back(n);
  return out;
}

}  // namespace

ApproxResult approximate_projection(const MeasuredGroupoid& m, double eps, const ApproxOptions& opt) {
  if (!(eps > 0)) fail(ErrorCode::invalid_range, "epsilon must be positive");
  MeasuredGroupoid pm{m.groupoid, m.length, m.mu.normalized()};
  const auto& g = pm.groupoid;
  const std::size_t atoms = pm.atoms();
  const AtomSet all = AtomSet::full(atoms);
  ApproxResult out;
  out.target = averaging_projection(pm.mu, all);
  if (atoms == 1) {
    out.T = out.target;
    out.K_declared = g.unit_set();
    out.Y = all;
    out.propagation_ok = true;
    out.N_n = 1;
    out.theta_n = 1;
    return out;
  }
  ExpansionParams params;
  if (opt.params) {
    params = *opt.params;
  } else {
    ScanOptions sched = opt.scan;
    sched.exact_limit = std::max(sched.exact_limit, std::min(atoms, kMaxExactLimit));
    params = ball_schedule(pm, default_alphas(pm.mu), sched);
  }
  const Rational e = from_double(eps);
  const Rational need = e * e / 4;
  StructureOptions sopt;
  sopt.scan = opt.scan;
  std::optional<StructureStep> chosen;
  std::optional<Rational> best_outside;
  std::string last_error;
  for (auto n : n_ladder(opt.n_max)) {
    StructureStep st;
    try {
      st = structure_step(pm, params, opt.C, n, sopt);
    } catch (const Error& err) {
      last_error = err.what();
      if (err.code() == ErrorCode::missing_level) break;  // larger n needs finer levels
      continue;
    }
    const Rational outside = 1 - st.measure;
    if (!best_outside || outside < *best_outside) best_outside = outside;
    if (outside < need) {
      chosen = std::move(st);
      break;
    }
  }
  if (!chosen) {
    std::ostringstream os;
    if (best_outside)
      os << "exhaustion reaches only eps > " << 2 * std::sqrt(to_double(*best_outside));
    else
      os << "no exhaustion domain available (" << last_error << ")";
    fail(ErrorCode::insufficient_instruments, os.str());
  }
  const auto& st = *chosen;
  out.n = st.n;
  out.Y = st.domain.Y;
  out.N_n = st.domain.N;
  out.L_n = st.domain.L;
  out.theta_n = st.domain.theta;
  out.domain_term = std::sqrt(to_double(1 - st.measure));

  auto tm = expansion_to_markov(pm.mu, st.domain, opt.scan);
  out.C_n = tm.domain.kappa;
  if (tm.recertified) {
    out.kappa_check = tm.recertified;
    if (tm.recertified->verdict != Verdict::proven)
      fail(ErrorCode::invariant_violation, "Markov constant not certified on Y_n");
  }
  const auto bundle = build_kernel(pm.mu, out.Y, st.domain.K);
  out.m = minimal_m(out.N_n, out.theta_n, out.C_n, eps);
  out.a_priori = static_cast<double>(a_priori_bound(out.N_n, out.theta_n, out.C_n, out.m));
  out.nominal_pieces_log2 = static_cast<double>(out.m) * std::log2(static_cast<double>(out.N_n));
  out.nominal_length = Rational(static_cast<unsigned long>(out.m)) * out.L_n;
  out.T = markov_approximant(bundle, pm.mu, out.m);
  out.K_declared = power(g, st.domain.K.elements(g.size()), out.m);
  out.propagation_ok = check_propagation(out.T, relation_of(g, out.K_declared)).ok;
  out.measured_error = (out.T - out.target).norm();
  if (!out.propagation_ok) fail(ErrorCode::invariant_violation, "approximant leaves its declared support");
  if (!(out.measured_error < eps)) {
    std::ostringstream os;
    os << "measured error " << out.measured_error << " is not below " << eps;
    fail(ErrorCode::numerical_failure, os.str());
  }
  return out;
}

ApproxResult approximate_rank_one(const MeasuredGroupoid& m, const Eigen::VectorXcd& xi, double eps,
                                  const ApproxOptions& opt) {
  MeasuredGroupoid pm{m.groupoid, m.length, m.mu.normalized()};
  const auto& g = pm.groupoid;
  const auto pd = rank_one(pm.mu, xi);
  const auto nu = pd.nu_on_Y();
  auto red = reduce_to(pm, pd.Y, nu.weights());
  auto sub = approximate_projection(red.groupoid, eps, opt);

  std::vector<Rational> wy;
  Eigen::VectorXcd xy(pd.y_atoms.size());
  for (std::size_t i = 0; i < pd.y_atoms.size(); ++i) {
    wy.push_back(pm.mu.weight(pd.y_atoms[i]));
    xy(i) = xi(pd.y_atoms[i]);
  }
  const MeasureChange u{xy, AtomicMeasureSpace(std::move(wy)), nu};
  const auto ty = u.conjugate(sub.T);

  ApproxResult out = sub;
  const std::size_t n = pm.atoms();
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < pd.y_atoms.size(); ++i)
    for (std::size_t j = 0; j < pd.y_atoms.size(); ++j) t(pd.y_atoms[i], pd.y_atoms[j]) = ty.matrix(i, j);
  out.T = {std::move(t), pm.mu};
  out.target = pd.P;
  out.K_declared = ElementSet(g.size());
  sub.K_declared.for_each([&](Element e) { out.K_declared.insert(red.element_map[e]); });
  out.Y = AtomSet(n);
  sub.Y.for_each([&](Atom a) { out.Y.insert(pd.y_atoms[a]); });
  out.propagation_ok = check_propagation(out.T, relation_of(g, out.K_declared)).ok;
  out.measured_error = (out.T - out.target).norm();
  if (!out.propagation_ok) fail(ErrorCode::invariant_violation, "approximant leaves its declared support");
  if (!(out.measured_error < eps)) {
    std::ostringstream os;
    os << "measured error " << out.measured_error << " is not below " << eps;
    fail(ErrorCode::numerical_failure, os.str());
  }
  return out;
}

double QuasiLocalLevel::eps() const { return std::sqrt(to_double(eps_squared)); }

ExpansionParams quasi_local_to_expansion(const QuasiLocalParams& q, const std::vector<Rational>& alphas) {
  ExpansionParams out;
  for (const auto& alpha : alphas) {
    const QuasiLocalLevel* pick = nullptr;
    for (const auto& lvl : q.levels)
      if (lvl.eps_squared <= alpha / 4 && (!pick || lvl.eps_squared > pick->eps_squared)) pick = &lvl;
    if (pick) out.add(ExpansionLevel{alpha, Rational(1, 2), pick->K});
  }
  return out;
}

namespace {

DecomposableSet decomposable_power(const MeasuredGroupoid& m, const DecomposableSet& k, std::uint64_t e,
                                   std::size_t piece_cap) {
  const double nominal = static_cast<double>(e) * std::log2(static_cast<double>(k.piece_count()));
  if (nominal <= std::log2(static_cast<double>(piece_cap))) {
    DecomposableSet acc = k;
    for (std::uint64_t i = 1; i < e; ++i) acc = normalize_pieces(m, compose_decomposables(m, acc, k));
    return acc;
  }
  const auto& g = m.groupoid;
  auto out = decompose_unital_symmetric(m, power(g, k.elements(g.size()), e));
  out.length_bound = rmin(out.length_bound, Rational(static_cast<unsigned long>(e)) * k.length_bound);
  return out;
}

}  // namespace

QuasiLocalParams expansion_to_quasi_local(const MeasuredGroupoid& m, const ExpansionParams& params,
                                          const std::vector<Rational>& eps, std::size_t piece_cap) {
  QuasiLocalParams out;
  for (const auto& e : eps) {
    if (e <= 0 || e > Rational(1, 2)) fail(ErrorCode::invalid_range, "eps must lie in (0, 1/2]");
    const auto& lvl = params.at(e, m.mu);
    const Rational base = 1 + lvl.C;
    const Rational target = Rational(1, 2) / e;
    std::uint64_t n = min_power_at_least(base, target);
    Rational p = 1;
    for (std::uint64_t i = 0; i < n; ++i) p *= base;
    if (p == target) ++n;  // strict inequality
    if (n == 0) n = 1;
    QuasiLocalLevel q;
    q.eps_squared = e;
    q.n = n;
    q.K = decomposable_power(m, lvl.K, 2 * n, piece_cap);
    out.levels.push_back(std::move(q));
  }
  return out;
}

QuasiLocalCheck certify_quasi_local(const WeightedOperator& t, const QuasiLocalParams& q, const ScanOptions& opt) {
  QuasiLocalCheck out;
  for (const auto& lvl : q.levels) {
    auto rep = quasi_local_norm(t, relation_of(lvl.K, t.size()), opt);
    if (!(rep.value < lvl.eps())) out.ok = false;
    out.reports.push_back(std::move(rep));
  }
  return out;
}

QuasiLocalParams ball_quasi_local_schedule(const MeasuredGroupoid& m, const WeightedOperator& t,
                                           const std::vector<double>& eps, const ScanOptions& opt) {
  std::set<Rational> radii(m.length.values.begin(), m.length.values.end());
  std::map<Rational, std::pair<DecomposableSet, double>> cache;
  QuasiLocalParams out;
  for (double e : eps) {
    for (const auto& r : radii) {
      auto it = cache.find(r);
      if (it == cache.end()) {
        auto k = ball_decomposition(m, r);
        const double v = quasi_local_norm(t, relation_of(k, t.size()), opt).value;
        it = cache.emplace(r, std::make_pair(std::move(k), v)).first;
      }
      if (it->second.second < e) {
        const Rational q = from_double(e);
        out.levels.push_back(QuasiLocalLevel{q * q, it->second.first, 0});
        break;
      }
    }
  }
  return out;
}

WeightedOperator family_assemble(const std::vector<WeightedOperator>& blocks) {
  std::size_t n = 0;
  std::vector<Rational> w;
  for (const auto& b : blocks) {
    n += b.size();
    w.insert(w.end(), b.space.weights().begin(), b.space.weights().end());
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    m.block(off, off, b.size(), b.size()) = b.matrix;
    off += b.size();
  }
  return {std::move(m), AtomicMeasureSpace(std::move(w))};
}

}  // namespace gexp
