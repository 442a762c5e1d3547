#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gexp/core.hpp"
#include "gexp/expansion.hpp"
#include "gexp/markov.hpp"

namespace gexp {

/// Dense operator on L^2(atoms, mu) with <f,g> = sum f(x) conj(g(x)) mu(x).
struct WeightedOperator {
  Eigen::MatrixXcd matrix;
  AtomicMeasureSpace space;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  /// Largest singular value of D^{1/2} M D^{-1/2}.
  double norm() const;
  /// D^{-1} M^H D.
  WeightedOperator adjoint() const;
  /// chi_A T chi_B.
  WeightedOperator compress(const AtomSet& a, const AtomSet& b) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const { return matrix * f; }
  std::complex<double> inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const;
};

WeightedOperator operator*(const WeightedOperator& a, const WeightedOperator& b);
WeightedOperator operator-(const WeightedOperator& a, const WeightedOperator& b);

/// Weighted norm of the block rows A × columns B of M.
double block_norm(const Eigen::MatrixXcd& m, const std::vector<double>& sqrt_mu, const std::vector<Atom>& rows,
                  const std::vector<Atom>& cols);

/// Atomic relation of a set of arrows: reach[y] = r(K·{y}).
struct Relation {
  std::vector<AtomSet> reach;
  std::size_t size() const { return reach.size(); }
  AtomSet saturate(const AtomSet& a) const;
};

Relation relation_of(const DecomposableSet& k, std::size_t atoms);
Relation relation_of(const FiniteGroupoid& g, const ElementSet& s);

struct PropagationCheck {
  bool ok = true;
  std::optional<std::pair<Atom, Atom>> counterexample;  // (x, y) with T[x,y] != 0, x not in r(K·y)
};

/// Exact entrywise test: T[x,y] = 0 whenever x ∉ r(K·{y}).
PropagationCheck check_propagation(const WeightedOperator& t, const Relation& rel);

struct QuasiLocalReport {
  double value = 0;  // sup ||chi_A T chi_B|| over B = complement of r(K·A)
  Method method = Method::exact;
  std::optional<AtomSet> witness_A, witness_B;
  std::uint64_t sets_checked = 0;
  std::uint64_t seed = 0;
};

/// Exhaustive over nonempty A when atoms <= exact_limit, else random subsets
/// plus single-flip hill climbing.
QuasiLocalReport quasi_local_norm(const WeightedOperator& t, const Relation& rel, const ScanOptions& opt = {});

/// P_Y f = (<f,chi_Y>/mu(Y)) chi_Y. DegenerateDomain when Y is empty.
WeightedOperator averaging_projection(const AtomicMeasureSpace& mu, const AtomSet& y);

struct ProjectionData {
  Eigen::VectorXcd xi;
  WeightedOperator P;             // |xi><xi|
  std::vector<Rational> nu;       // |xi|^2 mu, exact from the doubles, total 1
  AtomSet Z, Y;                   // zero set and its complement
  Eigen::MatrixXcd Q;             // inclusion L^2(Y) -> L^2(atoms), atoms × |Y|
  std::vector<Atom> y_atoms;
  /// Q* P Q as an operator on L^2(Y, mu|_Y).
  WeightedOperator reduced() const;
  AtomicMeasureSpace nu_on_Y() const;
};

/// NotNormalized when the weighted norm of xi differs from 1 by more than 1e-12.
ProjectionData rank_one(const AtomicMeasureSpace& mu, const Eigen::VectorXcd& xi);

/// U: L^2(nu) -> L^2(mu), f ↦ f xi, with d nu = |xi|^2 d mu.
struct MeasureChange {
  Eigen::VectorXcd xi;
  AtomicMeasureSpace mu, nu;
  /// U T U* = diag(xi) T diag(1/xi), moved from L^2(nu) to L^2(mu).
  WeightedOperator conjugate(const WeightedOperator& t) const;
  /// ||U*U - I|| and ||UU* - I|| in the respective weighted norms.
  double unitarity_defect() const;
};

/// HasZeroSet when some xi(x) = 0.
MeasureChange change_measure_unitary(const AtomicMeasureSpace& mu, const Eigen::VectorXcd& xi);

/// Reduction groupoid G|_Y = {g : s(g), r(g) ∈ Y} with maps back to G.
struct Reduction {
  MeasuredGroupoid groupoid;
  std::vector<Element> element_map;  // reduced element -> original
  std::vector<Atom> atom_map;        // reduced atom -> original
};

/// The measure of the result is mu restricted to Y, or `weights` when given
/// (one per atom of Y, in increasing atom order).
Reduction reduce_to(const MeasuredGroupoid& m, const AtomSet& y,
                    const std::optional<std::vector<Rational>>& weights = std::nullopt);

struct ApproxOptions {
  Rational C = Rational(1, 4);  // structure constant in (0, 1/2)
  std::size_t n_max = 64;
  ScanOptions scan;
  std::optional<ExpansionParams> params;  // default: ball_schedule on default_alphas
};

struct ApproxResult {
  WeightedOperator T;
  WeightedOperator target;
  ElementSet K_declared;
  std::size_t n = 0;
  std::uint64_t m = 0;
  Rational C_n;       // Markov constant (C/2)/(N_n theta_n)
  std::size_t N_n = 0;
  Rational L_n;
  Rational theta_n;
  AtomSet Y;
  double a_priori = 0;      // N_n sqrt(theta_n) (1 - C_n^2/4)^m
  double domain_term = 0;   // sqrt(mu(G \ Y_n))
  double measured_error = 0;
  bool propagation_ok = false;
  std::optional<MarkovCertificate> kappa_check;
  double nominal_pieces_log2 = 0;  // log2(N_n^m)
  Rational nominal_length;          // m L_n
};

/// Markov approximant (mu~(Y)/mu(Y)) I (1/2 + 1/2 Pi)^m I* on the full space.
WeightedOperator markov_approximant(const MarkovKernelBundle& b, const AtomicMeasureSpace& mu, std::uint64_t m);

/// Finite-propagation approximation of P_G within eps.
/// InsufficientInstruments when no exhaustion domain reaches eps.
ApproxResult approximate_projection(const MeasuredGroupoid& m, double eps, const ApproxOptions& opt = {});
/// Same for the rank-one projection onto a unit vector xi, through the
/// zero-set reduction and the measure change.
ApproxResult approximate_rank_one(const MeasuredGroupoid& m, const Eigen::VectorXcd& xi, double eps,
                                  const ApproxOptions& opt = {});

/// One quasi-local level: ||chi_A T chi_B|| < sqrt(eps_squared) whenever
/// B misses r(K·A).
struct QuasiLocalLevel {
  Rational eps_squared;
  DecomposableSet K;
  std::uint64_t n = 0;  // exponent used by the expansion-to-quasi-local direction
  double eps() const;
};

struct QuasiLocalParams {
  std::vector<QuasiLocalLevel> levels;
};

/// Quasi-local parameters of P_G -> expansion parameters: for each alpha the
/// level with eps <= sqrt(alpha)/2, C = 1/2. Alphas without a level are skipped.
ExpansionParams quasi_local_to_expansion(const QuasiLocalParams& q, const std::vector<Rational>& alphas);
/// Expansion parameters -> quasi-local parameters of P_G: for each eps in
/// (0,1/2], n minimal with (1+C_eps)^n eps > 1/2 and K = K_eps^{2n}; the
/// resulting level bounds norms by sqrt(eps).
QuasiLocalParams expansion_to_quasi_local(const MeasuredGroupoid& m, const ExpansionParams& params,
                                          const std::vector<Rational>& eps, std::size_t piece_cap = 4096);

struct QuasiLocalCheck {
  bool ok = true;
  std::vector<QuasiLocalReport> reports;
};
QuasiLocalCheck certify_quasi_local(const WeightedOperator& t, const QuasiLocalParams& q, const ScanOptions& opt = {});

/// For each eps the smallest ball radius whose quasi-local norm is < eps.
/// Radii run over the distinct element lengths.
QuasiLocalParams ball_quasi_local_schedule(const MeasuredGroupoid& m, const WeightedOperator& t,
                                           const std::vector<double>& eps, const ScanOptions& opt = {});

/// Block-diagonal operator on the disjoint union of the block spaces.
WeightedOperator family_assemble(const std::vector<WeightedOperator>& blocks);

}  // namespace gexp
