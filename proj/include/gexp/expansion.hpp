#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gexp/core.hpp"

namespace gexp {

enum class Verdict { proven, refuted, unknown };
enum class Method { exact, randomized };
/// strict: admissible sets must satisfy ratio > C. non_strict: ratio >= C.
enum class Comparison { strict, non_strict };

const char* verdict_name(Verdict v);
const char* method_name(Method m);

struct ScanOptions {
  std::size_t exact_limit = 14;  // exhaustive up to this many atoms in Y
  std::uint64_t budget = 2000;   // randomized mode runs 2*budget iterations
  std::uint64_t seed = 1;
  Comparison comparison = Comparison::strict;
};

/// Hard cap on exhaustive subset enumeration.
inline constexpr std::size_t kMaxExactLimit = 20;

struct Certificate {
  Verdict verdict = Verdict::unknown;
  Method method = Method::exact;
  Rational C, alpha_lo, beta_hi;
  Comparison comparison = Comparison::strict;
  std::optional<AtomSet> witness;  // refuting set
  Rational witness_ratio;
  std::optional<AtomSet> worst;    // admissible set of smallest ratio seen
  Rational worst_ratio;
  std::uint64_t sets_checked = 0;
  std::uint64_t seed = 0;
  std::string note;
};

/// mu((r(K·A) \ A) ∩ Y) / mu(A). DegenerateSet when mu(A) = 0.
Rational expansion_ratio(const AtomicMeasureSpace& mu, const DecomposableSet& k, const AtomSet& a,
                         const AtomSet& y);

/// Tests mu((r(K·A)\A)∩Y) > C mu(A) for every A ⊆ Y with
/// alpha_lo mu(Y) <= mu(A) <= beta_hi mu(Y), mu(A) > 0. alpha_lo = 0 admits
/// every nonempty A.
Certificate certify_expansion(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                              const Rational& c, const Rational& alpha_lo, const Rational& beta_hi,
                              const ScanOptions& opt = {});

struct ExpansionLevel {
  Rational alpha;
  Rational C;
  DecomposableSet K;
  std::size_t N() const { return K.piece_count(); }
  Rational L() const { return K.length_bound; }
};

/// Expansion parameters: one level per alpha, sorted by alpha ascending.
struct ExpansionParams {
  std::vector<ExpansionLevel> levels;
  /// Level with the largest alpha_s <= alpha; a level certified at alpha_s
  /// also covers every alpha >= alpha_s. When alpha is below the smallest
  /// atom fraction min mu(x)/mu(total), the comparison uses that fraction.
  const ExpansionLevel& at(const Rational& alpha, const AtomicMeasureSpace& mu) const;
  void add(ExpansionLevel level);
};

struct AsymptoticCertificate {
  Verdict verdict = Verdict::proven;
  std::vector<Certificate> levels;
};

AsymptoticCertificate certify_asymptotic(const AtomicMeasureSpace& mu, const ExpansionParams& params,
                                         const ScanOptions& opt = {});

/// Builds a schedule from the ball family: for each alpha, the smallest ball
/// radius whose exact worst ratio over alpha <= mu(A)/mu(total) <= 1/2 is
/// positive, with C_alpha = 99/100 of that worst ratio. Levels with no such
/// ball are omitted. Requires atom count <= exact_limit.
ExpansionParams ball_schedule(const MeasuredGroupoid& m, const std::vector<Rational>& alphas,
                              const ScanOptions& opt = {});
/// Dyadic alphas 1/2, 1/4, ... down to the smallest atom fraction.
std::vector<Rational> default_alphas(const AtomicMeasureSpace& mu);

struct BoostResult {
  Rational C;
  DecomposableSet K;
  Rational alpha, beta, alpha_prime;
  Rational alpha_level, alpha_prime_level;  // schedule levels actually used
};

/// Extends a level from mu(A) <= mu/2 to mu(A) <= beta mu: with
/// alpha' = (1-beta)/2, C = min{C_a, (1-beta)/(2beta) C_a', (1-beta)/(2beta)}
/// and K = K_a ∪ K_a'. InvalidRange unless 1/2 <= beta < 1.
BoostResult boost_beta(const MeasuredGroupoid& m, const ExpansionParams& params, const Rational& alpha,
                       const Rational& beta);

struct PowerResult {
  std::uint64_t m = 0;            // exponent
  DecomposableSet K;              // (K')^m
  double nominal_pieces_log2 = 0;  // log2(N'^m)
  Rational nominal_length;         // m L'
  bool redecomposed = false;       // true when pieces were recolored
};

/// m = min integer with (1+C')^m >= 1/(alpha beta); K = (K')^m. Powers are
/// formed piece by piece while N'^m <= piece_cap, otherwise the element set
/// (K')^m is recolored with decompose_unital_symmetric.
PowerResult boost_power(const MeasuredGroupoid& m, const DecomposableSet& k1, const Rational& c1,
                        const Rational& alpha, const Rational& beta, std::size_t piece_cap = 4096);

/// Drops duplicate pieces and recomputes the unital index and sigma by
/// matching element sets.
DecomposableSet normalize_pieces(const MeasuredGroupoid& m, const DecomposableSet& k);

enum class FolnerMode { exact, greedy_local };

struct FolnerResult {
  AtomSet F;
  Rational epsilon;
  FolnerMode maximal = FolnerMode::exact;
  Rational boundary;  // mu((r(K·F)\F)∩Y)
  std::optional<bool> post_check;  // maximal-Folner consequence, exact mode
  std::optional<AtomSet> post_witness;
};

/// Exact mode (|Y| <= exact_limit): a Folner set of maximum measure, ties to
/// the lexicographically smallest. Otherwise single-atom greedy growth.
FolnerResult maximal_folner(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k,
                            const Rational& eps, const ScanOptions& opt = {});

struct ExpansionDomain {
  AtomSet Y;
  Rational C;
  std::size_t N = 0;
  Rational L;
  DecomposableSet K;
  Rational theta;
};

/// Every x ∈ Y and piece i with tau_i(x) ∈ Y has 1/theta <= R(K_i,x) <= theta.
bool ratio_bound_holds(const AtomicMeasureSpace& mu, const ExpansionDomain& d);
/// Smallest theta >= 1 satisfying ratio_bound_holds.
Rational minimal_theta(const AtomicMeasureSpace& mu, const AtomSet& y, const DecomposableSet& k);

struct StructureStep {
  std::size_t n = 0;
  Rational alpha_n;
  BoostResult boost;        // K' and C' of the beta-extension
  PowerResult power;        // K_n = (K')^m
  AtomSet Z, X;
  FolnerResult folner;      // F_n inside X_n
  ExpansionDomain domain;   // Y_n with (C/2, N_n, L_n, theta_n)
  Rational measure;         // mu(Y_n), probability-normalized
  Rational measure_bound;   // (1 - alpha_n) n/(n+1)
  Rational length_actual;   // max length over K_n
  std::optional<Certificate> recertified;
  bool ratio_bound_ok = false;
  Verdict verdict = Verdict::unknown;
};

struct StructureOptions {
  ScanOptions scan;
  std::size_t n_min = 1;
};

/// Constructive exhaustion by domains of (C/2)-expansion. mu is normalized
/// to a probability first. MissingLevel if params lack a needed level.
std::vector<StructureStep> structure_exhaustion(const MeasuredGroupoid& m, const ExpansionParams& params,
                                                const Rational& c, std::size_t n_max,
                                                const StructureOptions& opt = {});
StructureStep structure_step(const MeasuredGroupoid& m, const ExpansionParams& params, const Rational& c,
                             std::size_t n, const StructureOptions& opt = {});

/// Family of bisections closed under composition and inverse up to a depth.
struct RestrictedFamily {
  bool all_bisections = false;
  std::vector<ElementSet> generators;
  std::size_t depth_cap = 4;
  std::size_t size_cap = 200000;
};

struct FamilyMembership {
  std::size_t level = 0, piece = 0;
  std::size_t member = 0;  // index into the closure that contains the piece
};

struct RestrictedParams {
  ExpansionParams params;
  std::vector<FamilyMembership> proofs;
  std::vector<ElementSet> closure;
};

/// Closure of generators ∪ {units} under products and inverses, depth-capped.
std::vector<ElementSet> family_closure(const FiniteGroupoid& g, const RestrictedFamily& fam);

/// Attaches membership proofs (each piece is a sub-bisection of a closure
/// member); OutsideFamily on the first piece that is not.
RestrictedParams restrict_family(const MeasuredGroupoid& m, const ExpansionParams& params,
                                 const RestrictedFamily& fam);

}  // namespace gexp
