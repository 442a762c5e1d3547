#pragma once

#include <boost/multiprecision/float128.hpp>

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gexp/core.hpp"
#include "gexp/expansion.hpp"

namespace gexp {

/// 113-bit mantissa float used for square roots of Radon-Nikodym ratios.
using Real = boost::multiprecision::float128;

Real to_real(const Rational& q);

/// Normalized local Markov kernel on Y with its reversing measure. Vectors
/// and matrices are indexed by the position of the atom in `atoms`.
struct MarkovKernelBundle {
  AtomSet Y;
  std::vector<Atom> atoms;
  DecomposableSet K;
  std::vector<Real> pi;        // row-major k×k
  std::vector<Real> sigma;
  std::vector<Real> mu_tilde;
  std::vector<Rational> mu;    // mu restricted to Y
  // Exact values, present when every ratio used is a rational square.
  std::optional<std::vector<Rational>> pi_exact, sigma_exact, mu_tilde_exact;
  Real reversibility_error = 0;

  std::size_t k() const { return atoms.size(); }
  const Real& P(std::size_t i, std::size_t j) const { return pi[i * atoms.size() + j]; }
  /// Position of atom a in `atoms`, npos outside Y.
  std::size_t local(Atom a) const;
  Real mu_tilde_of(const AtomSet& a) const;
  /// Delta = 1 - P as a dense matrix.
  Eigen::MatrixXd laplacian() const;
};

/// Pi(x,.) = (1/sigma(x)) sum_i R(K_i,x)^{1/2} delta_{tau_i x} over pieces
/// with tau_i x ∈ Y. NotUnital / NotSymmetric when metadata is missing.
MarkovKernelBundle build_kernel(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k);

/// sum_{x∈A} Pi(x, Y\A) mu~(x).
Real boundary_size(const MarkovKernelBundle& b, const AtomSet& a);
std::optional<Rational> boundary_size_exact(const MarkovKernelBundle& b, const AtomSet& a);

struct CheegerResult {
  bool exact = false;
  Real value = 0;                      // exact-mode infimum
  std::optional<Rational> value_exact; // when the bundle is rational
  std::optional<AtomSet> argmin;
  Real lo = 0, hi = 0;                 // interval (equal to value in exact mode)
  std::optional<Real> sampled_upper;
  bool vacuous = false;                // no set with 0 < mu~(A) <= mu~(Y)/2
};

CheegerResult cheeger(const MarkovKernelBundle& b, const ScanOptions& opt = {});

struct SpectralReport {
  double lambda = -1;           // sup of spectrum on functions orthogonal to constants
  double laplacian_gap = 2;     // 1 - lambda
  double eigen_tolerance = 1e-10;
  std::vector<double> spectrum; // full spectrum of P, ascending
  double constant_residual = 0; // |P1 - 1|_inf
};

SpectralReport spectral_gap(const MarkovKernelBundle& b);

struct SandwichCheck {
  bool lower_ok = false, upper_ok = false;  // kappa^2/2 <= 1-lambda, 1-lambda <= 2 kappa
  double kappa = 0, gap = 0;
};
SandwichCheck sandwich(const CheegerResult& c, const SpectralReport& s, double tol = 1e-9);

struct MarkovCertificate {
  Verdict verdict = Verdict::unknown;
  Method method = Method::exact;
  Rational C;
  CheegerResult cheeger;
  std::optional<AtomSet> witness;
};

/// Proven iff kappa > C (strict).
MarkovCertificate markov_domain_check(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                                      const Rational& c, const ScanOptions& opt = {});

struct MarkovDomain {
  AtomSet Y;
  Rational kappa;
  std::size_t N = 0;
  Rational L;
  DecomposableSet K;
  Rational theta;
};

struct ToMarkov {
  MarkovDomain domain;
  std::optional<MarkovCertificate> recertified;
};
struct ToExpansion {
  ExpansionDomain domain;
  std::optional<Certificate> recertified;
};

/// Constant C/(N theta); re-certified exhaustively when |Y| <= exact_limit.
ToMarkov expansion_to_markov(const AtomicMeasureSpace& mu, const ExpansionDomain& d, const ScanOptions& opt = {});
/// Constant kappa/(N sqrt(theta) + kappa), rounded down to a rational.
ToExpansion markov_to_expansion(const AtomicMeasureSpace& mu, const MarkovDomain& d, const ScanOptions& opt = {});

/// Reversible kernel from a symmetric nonnegative flow matrix Q:
/// Pi(x,y) = Q(x,y)/sum_z Q(x,z), stationary measure the row sums.
MarkovKernelBundle kernel_from_flow(const std::vector<std::vector<Rational>>& q);

}  // namespace gexp
