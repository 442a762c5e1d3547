#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gexp/expansion.hpp"
#include "gexp/rational.hpp"

namespace gexp {

using GVertex = std::uint32_t;
using GEdge = std::uint32_t;

/// Finite window of a directed graph. True out/in degrees may exceed the
/// edges present in the window; a vertex is complete in a direction when
/// all of its edges in that direction are present.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  /// edges are (source, range). Degrees default to the window degrees and
  /// total_mass to the sum of b.
  DirectedGraph(std::size_t vertices, std::vector<std::pair<GVertex, GVertex>> edges, std::vector<Rational> b,
                std::optional<std::vector<std::size_t>> out_degree = std::nullopt,
                std::optional<std::vector<std::size_t>> in_degree = std::nullopt,
                std::optional<Rational> total_mass = std::nullopt);

  std::size_t vertex_count() const { return b_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  GVertex source(GEdge e) const { return edges_[e].first; }
  GVertex range(GEdge e) const { return edges_[e].second; }
  const std::vector<GEdge>& out_edges(GVertex v) const { return out_[v]; }
  const std::vector<GEdge>& in_edges(GVertex v) const { return in_[v]; }
  /// s-deg(v) in the full graph.
  std::size_t sdeg(GVertex v) const { return out_deg_[v]; }
  bool out_complete(GVertex v) const { return out_[v].size() == out_deg_[v]; }
  bool in_complete(GVertex v) const { return in_[v].size() == in_deg_[v]; }
  bool terminal(GVertex v) const { return out_deg_[v] == 0; }
  const Rational& weight(GVertex v) const { return b_[v]; }
  const Rational& total_mass() const { return total_; }
  /// Smallest C >= 1 with b_w/C <= b_v <= C b_w across every edge.
  Rational weight_ratio_bound() const;

 private:
  std::vector<std::pair<GVertex, GVertex>> edges_;
  std::vector<Rational> b_;
  std::vector<std::size_t> out_deg_, in_deg_;
  std::vector<std::vector<GEdge>> out_, in_;
  Rational total_;
};

/// Finite path; a length-0 path is the vertex `start`.
struct Path {
  GVertex start = 0;
  std::vector<GEdge> edges;
  auto operator<=>(const Path&) const = default;
  bool operator==(const Path&) const = default;
  GVertex end(const DirectedGraph& g) const { return edges.empty() ? start : g.range(edges.back()); }
  std::size_t length() const { return edges.size(); }
};

/// InvalidPath unless the edges compose from `start` and the cylinder is nonempty.
void check_path(const DirectedGraph& g, const Path& p);
/// b_v prod 1/s-deg(s(alpha_i)).
Rational cylinder_measure(const DirectedGraph& g, const Path& p);

/// Finite union of cylinder sets, kept prefix-free with complete sibling
/// groups merged into their parent.
class CylinderUnion {
 public:
  CylinderUnion() = default;
  static CylinderUnion make(const DirectedGraph& g, std::vector<Path> paths);

  const std::vector<Path>& cylinders() const { return paths_; }
  bool empty() const { return paths_.empty(); }
  bool operator==(const CylinderUnion&) const = default;
  /// Every cylinder of `other` lies inside this union.
  bool contains(const CylinderUnion& other) const;

 private:
  std::vector<Path> paths_;
};

Rational cylinder_measure(const DirectedGraph& g, const CylinderUnion& a);
CylinderUnion unite(const DirectedGraph& g, const CylinderUnion& a, const CylinderUnion& b);
/// Z(v) split into its one-edge extensions. WindowExceeded at incomplete v.
std::vector<Path> refine(const DirectedGraph& g, const Path& p);

/// r(B_1·A): A, every one-edge prepend and the drop of the first edge.
CylinderUnion b1_saturate(const DirectedGraph& g, const CylinderUnion& a);
/// r(B_n·A) = b1_saturate applied n times.
CylinderUnion bn_saturate(const DirectedGraph& g, const CylinderUnion& a, std::size_t n);

struct GraphCertificate {
  Verdict verdict = Verdict::unknown;
  Method method = Method::exact;
  Rational C, alpha;
  Comparison comparison = Comparison::strict;
  std::optional<CylinderUnion> witness;
  Rational witness_measure, witness_saturated;
  std::size_t atoms = 0;              // cylinders in the enumeration partition
  std::uint64_t sets_checked = 0;
  std::uint64_t seed = 0;
  Rational weight_ratio;              // weight_ratio_bound() of the graph
  bool weight_ratio_finite = true;
};

/// Leaves of the depth-capped refinement of every vertex cylinder in the
/// window. Vertex cylinders at out-incomplete vertices are dropped.
std::vector<Path> depth_partition(const DirectedGraph& g, std::size_t depth_cap);

/// Tests mu(r(B_1·A)) > (1+C) mu(A) for unions A of partition cylinders with
/// alpha <= mu(A)/total <= 1/2, exhaustively up to exact_limit cylinders,
/// otherwise by seeded sampling; `candidates` are always tested.
/// WindowExceeded when depth_cap >= vertex_count.
GraphCertificate expansion_check_cylinders(const DirectedGraph& g, const Rational& c, const Rational& alpha,
                                           std::size_t depth_cap, const ScanOptions& opt = {},
                                           const std::vector<CylinderUnion>& candidates = {});

/// V = {0..M-1}, E = {(n, n+i) : 1 <= i <= k}, b_n = 1/2^{n+1}, total mass 1.
DirectedGraph graph617(std::size_t k, std::size_t window);

/// mu(Z_{0,n}) for n = 0..n_max by the path-count recursion.
std::vector<Rational> z0n_measures(std::size_t k, std::size_t n_max);

struct Witness617 {
  std::size_t p = 0, n_p = 0;
  Rational mu_Z0np;
  CylinderUnion A;
  Rational mu_A, mu_saturated, boundary;
  bool z_bound_ok = false;       // mu(Z_{0,n_p}) >= 1/(k+1)
  bool lower_ok = false;         // mu(A_p) > mu(Z_{0,n_p})/k and > 1/(k(k+1))
  bool upper_ok = false;         // mu(A_p) <= 1/k
  bool half_ok = false;          // mu(A_p) <= 1/2
  bool boundary_ok = false;      // mu(r(B_1·A_p)) = mu(A_p) + 1/2^{n_p+2}
};

struct Report617 {
  std::size_t k = 0, window = 0;
  DirectedGraph graph;
  std::vector<Rational> z0n;
  bool recursion_ok = false;     // recursion identity for every n computed
  std::vector<Witness617> witnesses;
  bool boundaries_decrease = false;
};

/// Builds the windowed graph and the witnesses A_p for p = 1..p_max (k >= 2).
/// WindowExceeded unless n_{p_max} + 1 < M - k.
Report617 example617(std::size_t k, std::size_t window, std::size_t p_max);

/// ||chi_A P_G chi_B||^2 = mu(A) mu(B) for B the complement of r(B_L·A),
/// probability-normalized by total_mass.
Rational averaging_block_norm_sq(const DirectedGraph& g, const CylinderUnion& a, std::size_t radius);

}  // namespace gexp
