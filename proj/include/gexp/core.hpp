#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gexp/error.hpp"
#include "gexp/index_set.hpp"
#include "gexp/rational.hpp"

namespace gexp {

using Element = std::size_t;
using Atom = std::size_t;
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct ComposeEntry {
  Element left, right, result;
};

/// Raw tables of a finite groupoid. source/range/inverse are indexed by
/// element; source and range hold unit elements.
struct GroupoidTables {
  std::size_t element_count = 0;
  std::vector<Element> units;
  std::vector<Element> source;
  std::vector<Element> range;
  std::vector<Element> inverse;
  std::vector<ComposeEntry> compose;
  std::vector<std::string> labels;  // optional, for reports
};

/// Finite groupoid over elements 0..M-1. Construction only checks table
/// shapes; the axioms are checked by validate(), which reports rather than
/// throws. Atoms are the units, numbered in the order of `units`.
class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;
  explicit FiniteGroupoid(GroupoidTables t);

  std::size_t size() const noexcept { return t_.element_count; }
  std::size_t atom_count() const noexcept { return t_.units.size(); }
  const GroupoidTables& tables() const noexcept { return t_; }

  Element unit_of(Atom a) const { return t_.units[a]; }
  /// npos when u is not a unit.
  Atom atom_of(Element u) const { return u < atom_index_.size() ? atom_index_[u] : npos; }
  bool is_unit(Element g) const { return atom_of(g) != npos; }

  Element source(Element g) const { return t_.source[g]; }
  Element range(Element g) const { return t_.range[g]; }
  Atom s(Element g) const { return atom_of(t_.source[g]); }
  Atom r(Element g) const { return atom_of(t_.range[g]); }
  Element inverse(Element g) const { return t_.inverse[g]; }
  std::optional<Element> compose(Element a, Element b) const;

  /// Elements grouped by source atom (computed once).
  const std::vector<std::vector<Element>>& by_source() const noexcept { return by_source_; }
  std::string label(Element g) const;

  ElementSet unit_set() const;
  ElementSet all_elements() const { return ElementSet::full(size()); }

 private:
  GroupoidTables t_;
  std::vector<Atom> atom_index_;
  std::unordered_map<std::uint64_t, Element> table_;
  std::vector<std::vector<Element>> by_source_;
};

struct LengthFunction {
  std::vector<Rational> values;
  const Rational& operator()(Element g) const { return values[g]; }
};

/// Integer coarsening: inf{n in N : l(g) <= n}.
std::uint64_t coarse_length(const Rational& l);

/// Strictly positive rational weights on atoms.
class AtomicMeasureSpace {
 public:
  AtomicMeasureSpace() = default;
  explicit AtomicMeasureSpace(std::vector<Rational> weights);
  static AtomicMeasureSpace uniform(std::size_t n);           // probability
  static AtomicMeasureSpace counting(std::size_t n);

  std::size_t size() const noexcept { return w_.size(); }
  const Rational& weight(Atom a) const { return w_[a]; }
  const std::vector<Rational>& weights() const noexcept { return w_; }
  const Rational& total_mass() const noexcept { return total_; }
  bool is_probability() const { return total_ == 1; }
  Rational measure(const AtomSet& a) const;
  AtomicMeasureSpace normalized() const;
  std::vector<double> as_doubles() const;

 private:
  std::vector<Rational> w_;
  Rational total_;
};

/// A groupoid together with its length function and measure on the unit space.
struct MeasuredGroupoid {
  FiniteGroupoid groupoid;
  LengthFunction length;
  AtomicMeasureSpace mu;
  std::size_t atoms() const { return groupoid.atom_count(); }
};

class Bisection {
 public:
  Bisection() = default;
  /// Throws invalid_argument if s or r fails to be injective on `members`.
  Bisection(const FiniteGroupoid& g, ElementSet members);

  const ElementSet& members() const noexcept { return members_; }
  const AtomSet& domain() const noexcept { return dom_; }   // s(K)
  const AtomSet& codomain() const noexcept { return ran_; } // r(K)
  /// tau_K(x), npos outside s(K).
  Atom tau(Atom x) const { return tau_[x]; }
  /// The member with source x, npos outside s(K).
  Element at_source(Atom x) const { return by_source_[x]; }
  AtomSet image(const AtomSet& a) const;
  std::size_t size() const { return members_.count(); }

 private:
  ElementSet members_;
  AtomSet dom_, ran_;
  std::vector<Atom> tau_;
  std::vector<Element> by_source_;
};

/// Finite union of bisections with optional unital/symmetric metadata.
struct DecomposableSet {
  std::vector<Bisection> pieces;
  std::optional<std::vector<std::size_t>> sigma;   // K_{sigma(i)} = K_i^{-1}
  std::optional<std::size_t> unital_index;         // piece equal to the unit set
  Rational length_bound;                           // >= max length over pieces

  std::size_t piece_count() const { return pieces.size(); }
  ElementSet elements(std::size_t element_count) const;
  bool unital() const { return unital_index.has_value(); }
  bool symmetric() const { return sigma.has_value(); }
};

/// Builds a DecomposableSet and checks the metadata invariants; throws
/// invalid_argument on a mismatch.
DecomposableSet make_decomposable(const MeasuredGroupoid& m, std::vector<Bisection> pieces,
                                  std::optional<std::vector<std::size_t>> sigma,
                                  std::optional<std::size_t> unital_index);

Rational max_length(const LengthFunction& l, const ElementSet& s);

struct Violation {
  std::string axiom;
  std::vector<Element> witness;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every groupoid axiom; each violation carries a witness.
ValidationReport validate(const FiniteGroupoid& g);
/// Length-function axioms (zero on units, symmetric, subadditive, >= 0).
ValidationReport validate_length(const FiniteGroupoid& g, const LengthFunction& l);
/// Both of the above plus weights-per-atom shape.
ValidationReport validate(const MeasuredGroupoid& m);

ElementSet ball(const FiniteGroupoid& g, const LengthFunction& l, const Rational& n);

/// r(K·A) = union over pieces of tau_i(A ∩ s(K_i)).
AtomSet saturate(const DecomposableSet& k, const AtomSet& a);
/// r(S·A) for a bare element set.
AtomSet saturate(const FiniteGroupoid& g, const ElementSet& s, const AtomSet& a);

/// Set product S1·S2 = {g1 g2 : s(g1) = r(g2)}.
ElementSet product(const FiniteGroupoid& g, const ElementSet& s1, const ElementSet& s2);
ElementSet inverse_set(const FiniteGroupoid& g, const ElementSet& s);
/// S^m by repeated squaring; S^0 = units.
ElementSet power(const FiniteGroupoid& g, const ElementSet& s, std::uint64_t m);

DecomposableSet compose_decomposables(const MeasuredGroupoid& m, const DecomposableSet& k1,
                                      const DecomposableSet& k2);
DecomposableSet invert_decomposable(const MeasuredGroupoid& m, const DecomposableSet& k);
DecomposableSet union_decomposables(const MeasuredGroupoid& m, const DecomposableSet& k1,
                                    const DecomposableSet& k2);

/// Greedy coloring of the conflict graph (shared source or range), elements
/// in index order. At most 1 + max conflict degree pieces.
DecomposableSet decompose(const MeasuredGroupoid& m, const ElementSet& s);

/// Unit piece first, then symmetric coloring of the rest. Requires S to
/// contain every unit and be closed under inverse.
DecomposableSet decompose_unital_symmetric(const MeasuredGroupoid& m, const ElementSet& s);

/// decompose_unital_symmetric(ball(radius)).
DecomposableSet ball_decomposition(const MeasuredGroupoid& m, const Rational& radius);

/// Radon-Nikodym ratios mu(tau_i x)/mu(x) per piece.
class RNTable {
 public:
  RNTable(const DecomposableSet& k, const AtomicMeasureSpace& mu);
  /// Ratio for piece i at x in s(K_i).
  const Rational& ratio(std::size_t piece, Atom x) const;
  bool defined(std::size_t piece, Atom x) const;
  std::size_t piece_count() const { return table_.size(); }

 private:
  std::vector<std::vector<std::optional<Rational>>> table_;
};

RNTable rn_table(const DecomposableSet& k, const AtomicMeasureSpace& mu);

}  // namespace gexp
