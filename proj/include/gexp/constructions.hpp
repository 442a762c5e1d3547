#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gexp/core.hpp"

namespace gexp {

/// Distances between finitely many points; nullopt marks points in different
/// blocks (infinitely far apart).
struct FiniteMetricSpace {
  std::vector<std::vector<std::optional<Rational>>> dist;
  std::size_t size() const { return dist.size(); }
};

/// Throws invalid_argument unless the table is a (possibly disconnected) metric.
void check_metric(const FiniteMetricSpace& x);

using Edge = std::pair<std::size_t, std::size_t>;

/// Shortest-path metric of an undirected graph with unit edge lengths.
FiniteMetricSpace graph_metric(std::size_t n, const std::vector<Edge>& edges);
std::vector<Edge> cycle_edges(std::size_t n);
std::vector<Edge> complete_edges(std::size_t n);
std::vector<Edge> path_edges(std::size_t n);

using Permutation = std::vector<std::size_t>;

/// Group elements as explicit permutations of the points, with word lengths.
struct GroupAction {
  std::size_t points = 0;
  std::vector<Permutation> elements;
  std::vector<Rational> lengths;
  std::vector<Rational> weights;  // base measure on points
};

/// Throws invalid_argument unless the permutations form a group and the
/// lengths are a proper group length.
void check_action(const GroupAction& a);

/// Closes `generators` (and their inverses) under composition by BFS; word
/// length is the BFS depth. Element 0 is the identity.
GroupAction action_from_generators(std::size_t points, const std::vector<Permutation>& generators,
                                   std::vector<Rational> weights);

/// Elements X×X (units first, then off-diagonal pairs within a block in
/// row-major order); l(x,y) = d(x,y).
MeasuredGroupoid pair_groupoid(const FiniteMetricSpace& x, const AtomicMeasureSpace& mu);

/// X ⋊ Γ with s(x,γ) = γ^-1 x, r(x,γ) = x and l(x,γ) = l_Γ(γ). Element (x,γ)
/// has index γ·|X| + x.
MeasuredGroupoid transformation_groupoid(const GroupAction& a);

/// One transformation groupoid per quotient, each with normalized counting
/// measure. `quotients[i]` lists the generator permutations on the i-th
/// quotient's points.
std::vector<MeasuredGroupoid> quotient_family(const std::vector<std::vector<Permutation>>& quotients);

struct FamilyUnion {
  MeasuredGroupoid whole;
  std::vector<std::size_t> atom_offset;     // first atom of each block
  std::vector<std::size_t> element_offset;  // first element of each block
  std::size_t block_of_atom(Atom a) const;
};

/// Disjoint union; no arrows between blocks. Weights are concatenated as given.
FamilyUnion family_union(const std::vector<MeasuredGroupoid>& blocks);

/// Restricts an element set of the union to block b, reindexed into that block.
ElementSet restrict_to_block(const FamilyUnion& u, const MeasuredGroupoid& block, std::size_t b,
                             const ElementSet& s);

// Built-in instances (uniform probability measure unless stated).
MeasuredGroupoid pair_cycle(std::size_t n);
MeasuredGroupoid pair_complete(std::size_t n);
MeasuredGroupoid pair_path(std::size_t n);
/// Z/n acting on itself by rotation, generators ±1.
MeasuredGroupoid action_zn(std::size_t n);
/// Pair groupoid of K_n with one extra pendant atom attached to atom 0,
/// pendant weight w and the rest sharing 1 - w uniformly.
MeasuredGroupoid pair_complete_with_pendant(std::size_t n, const Rational& w);

}  // namespace gexp
