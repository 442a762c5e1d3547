#include "gexp/graphgpd.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>

#include "gexp/error.hpp"

namespace gexp {

DirectedGraph::DirectedGraph(std::size_t vertices, std::vector<std::pair<GVertex, GVertex>> edges,
                             std::vector<Rational> b, std::optional<std::vector<std::size_t>> out_degree,
                             std::optional<std::vector<std::size_t>> in_degree, std::optional<Rational> total_mass)
    : edges_(std::move(edges)), b_(std::move(b)), out_(vertices), in_(vertices) {
  if (b_.size() != vertices) fail(ErrorCode::invalid_argument, "one weight b_v per vertex");
  for (const auto& w : b_)
    if (w <= 0) fail(ErrorCode::invalid_argument, "vertex weights must be positive");
  for (GEdge e = 0; e < edges_.size(); ++e) {
    const auto [s, r] = edges_[e];
    if (s >= vertices || r >= vertices) fail(ErrorCode::invalid_argument, "edge endpoint outside the window");
    out_[s].push_back(e);
    in_[r].push_back(e);
  }
  auto degrees = [&](const std::optional<std::vector<std::size_t>>& given, const std::vector<std::vector<GEdge>>& adj,
                     const char* what) {
    std::vector<std::size_t> d(vertices);
    for (std::size_t v = 0; v < vertices; ++v) d[v] = adj[v].size();
    if (given) {
      if (given->size() != vertices) fail(ErrorCode::invalid_argument, std::string("one ") + what + " per vertex");
      for (std::size_t v = 0; v < vertices; ++v) {
        if ((*given)[v] < d[v])
          fail(ErrorCode::invalid_argument, std::string(what) + " below the edges present at vertex " +
                                                std::to_string(v));
        d[v] = (*given)[v];
      }
    }
    return d;
  };
  out_deg_ = degrees(out_degree, out_, "out-degree");
  in_deg_ = degrees(in_degree, in_, "in-degree");
  Rational sum = 0;
  for (const auto& w : b_) sum += w;
  total_ = total_mass ? *total_mass : sum;
  if (total_ < sum) fail(ErrorCode::invalid_argument, "total mass below the window weights");
}

Rational DirectedGraph::weight_ratio_bound() const {
  Rational c = 1;
  for (const auto& [s, r] : edges_) c = rmax(c, rmax(b_[s] / b_[r], b_[r] / b_[s]));
  return c;
}

void check_path(const DirectedGraph& g, const Path& p) {
  if (p.start >= g.vertex_count()) fail(ErrorCode::invalid_path, "start vertex outside the window");
  GVertex at = p.start;
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    const GEdge e = p.edges[i];
    if (e >= g.edge_count()) fail(ErrorCode::invalid_path, "unknown edge " + std::to_string(e));
    if (g.source(e) != at)
      fail(ErrorCode::invalid_path, "edge " + std::to_string(i) + " does not start where the path is");
    at = g.range(e);
  }
  if (g.terminal(at)) fail(ErrorCode::invalid_path, "path ends at a terminal vertex; its cylinder is empty");
}

Rational cylinder_measure(const DirectedGraph& g, const Path& p) {
  Rational m = g.weight(p.start);
  for (auto e : p.edges) m /= static_cast<unsigned long>(g.sdeg(g.source(e)));
  return m;
}

namespace {

bool is_prefix(const Path& a, const Path& b) {
  return a.start == b.start && a.edges.size() <= b.edges.size() &&
         std::equal(a.edges.begin(), a.edges.end(), b.edges.begin());
}

}  // namespace

CylinderUnion CylinderUnion::make(const DirectedGraph& g, std::vector<Path> paths) {
  for (const auto& p : paths) check_path(g, p);
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  // prefix-free: in sorted order a kept prefix is always the last kept path
  std::vector<Path> kept;
  for (auto& p : paths)
    if (kept.empty() || !is_prefix(kept.back(), p)) kept.push_back(std::move(p));
  // merge complete sibling groups, deepest first
  std::size_t max_len = 0;
  for (const auto& p : kept) max_len = std::max(max_len, p.length());
  std::vector<std::vector<Path>> by_len(max_len + 1);
  for (auto& p : kept) by_len[p.length()].push_back(std::move(p));
  for (std::size_t len = max_len; len >= 1; --len) {
    std::map<Path, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < by_len[len].size(); ++i) {
      Path parent{by_len[len][i].start, {by_len[len][i].edges.begin(), by_len[len][i].edges.end() - 1}};
      groups[std::move(parent)].push_back(i);
    }
    std::vector<bool> drop(by_len[len].size(), false);
    for (auto& [parent, members] : groups) {
      const GVertex v = parent.end(g);
      if (g.out_complete(v) && members.size() == g.sdeg(v)) {
        for (auto i : members) drop[i] = true;
        by_len[len - 1].push_back(parent);
      }
    }
    std::vector<Path> rest;
    for (std::size_t i = 0; i < by_len[len].size(); ++i)
      if (!drop[i]) rest.push_back(std::move(by_len[len][i]));
    by_len[len] = std::move(rest);
  }
  CylinderUnion u;
  for (auto& level : by_len)
    for (auto& p : level) u.paths_.push_back(std::move(p));
  std::sort(u.paths_.begin(), u.paths_.end());
  return u;
}

bool CylinderUnion::contains(const CylinderUnion& other) const {
  for (const auto& q : other.paths_) {
    bool found = false;
    Path pre{q.start, {}};
    for (std::size_t len = 0; len <= q.length() && !found; ++len) {
      if (len > 0) pre.edges.push_back(q.edges[len - 1]);
      found = std::binary_search(paths_.begin(), paths_.end(), pre);
    }
    if (!found) return false;
  }
  return true;
}

Rational cylinder_measure(const DirectedGraph& g, const CylinderUnion& a) {
  Rational m = 0;
  for (const auto& p : a.cylinders()) m += cylinder_measure(g, p);
  return m;
}

CylinderUnion unite(const DirectedGraph& g, const CylinderUnion& a, const CylinderUnion& b) {
  std::vector<Path> all = a.cylinders();
  all.insert(all.end(), b.cylinders().begin(), b.cylinders().end());
  return CylinderUnion::make(g, std::move(all));
}

std::vector<Path> refine(const DirectedGraph& g, const Path& p) {
  const GVertex v = p.end(g);
  if (!g.out_complete(v))
    fail(ErrorCode::window_exceeded, "vertex " + std::to_string(v) + " has out-edges outside the window");
  std::vector<Path> out;
  for (auto e : g.out_edges(v)) {
    if (g.terminal(g.range(e))) continue;
    Path c = p;
    c.edges.push_back(e);
    out.push_back(std::move(c));
  }
  return out;
}

CylinderUnion b1_saturate(const DirectedGraph& g, const CylinderUnion& a) {
  std::vector<Path> out = a.cylinders();
  for (const auto& p : a.cylinders()) {
    if (!g.in_complete(p.start))
      fail(ErrorCode::window_exceeded, "vertex " + std::to_string(p.start) + " has in-edges outside the window");
    for (auto e : g.in_edges(p.start)) {
      Path q{g.source(e), {e}};
      q.edges.insert(q.edges.end(), p.edges.begin(), p.edges.end());
      out.push_back(std::move(q));
    }
    if (p.length() >= 1) {
      out.push_back(Path{g.range(p.edges[0]), {p.edges.begin() + 1, p.edges.end()}});
    } else {
      for (const auto& c : refine(g, p)) out.push_back(Path{g.range(c.edges[0]), {}});
    }
  }
  return CylinderUnion::make(g, std::move(out));
}

CylinderUnion bn_saturate(const DirectedGraph& g, const CylinderUnion& a, std::size_t n) {
  CylinderUnion cur = a;
  for (std::size_t i = 0; i < n; ++i) cur = b1_saturate(g, cur);
  return cur;
}

std::vector<Path> depth_partition(const DirectedGraph& g, std::size_t depth_cap) {
  std::vector<Path> leaves;
  std::vector<Path> stack;
  for (GVertex v = static_cast<GVertex>(g.vertex_count()); v-- > 0;)
    if (g.out_complete(v) && !g.terminal(v)) stack.push_back(Path{v, {}});
  while (!stack.empty()) {
    Path p = std::move(stack.back());
    stack.pop_back();
    if (p.length() < depth_cap && g.out_complete(p.end(g))) {
      auto kids = refine(g, p);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
    } else {
      leaves.push_back(std::move(p));
    }
  }
  return leaves;
}

GraphCertificate expansion_check_cylinders(const DirectedGraph& g, const Rational& c, const Rational& alpha,
                                           std::size_t depth_cap, const ScanOptions& opt,
                                           const std::vector<CylinderUnion>& candidates) {
  if (depth_cap >= g.vertex_count())
    fail(ErrorCode::window_exceeded, "window of " + std::to_string(g.vertex_count()) +
                                         " vertices is too small for depth " + std::to_string(depth_cap));
  if (alpha < 0 || alpha > Rational(1, 2)) fail(ErrorCode::invalid_range, "alpha must lie in [0, 1/2]");
  GraphCertificate cert;
  cert.C = c;
  cert.alpha = alpha;
  cert.comparison = opt.comparison;
  cert.seed = opt.seed;
  cert.weight_ratio = g.weight_ratio_bound();
  const Rational total = g.total_mass();
  const Rational lo = alpha * total, hi = total / 2;
  const auto atoms = depth_partition(g, depth_cap);
  cert.atoms = atoms.size();
  std::vector<Rational> am;
  for (const auto& p : atoms) am.push_back(cylinder_measure(g, p));

  std::optional<Rational> worst;  // smallest mu(r(B_1 A))/mu(A) among failures
  auto test = [&](const CylinderUnion& a, const Rational& ma) {
    if (ma == 0 || ma < lo || ma > hi) return;
    ++cert.sets_checked;
    const auto sat = b1_saturate(g, a);
    const Rational ms = cylinder_measure(g, sat);
    const Rational rhs = (1 + c) * ma;
    const bool ok = opt.comparison == Comparison::strict ? ms > rhs : ms >= rhs;
    if (ok) return;
    const Rational ratio = ms / ma;
    if (!worst || ratio < *worst) {
      worst = ratio;
      cert.witness = a;
      cert.witness_measure = ma;
      cert.witness_saturated = ms;
    }
  };
  for (const auto& a : candidates) test(a, cylinder_measure(g, a));

  const std::size_t limit = std::min(opt.exact_limit, kMaxExactLimit);
  const std::size_t n = atoms.size();
  if (n <= limit) {
    cert.method = Method::exact;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      Rational ma = 0;
      std::vector<Path> ps;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) {
          ma += am[i];
          ps.push_back(atoms[i]);
        }
      if (ma < lo || ma > hi) continue;
      test(CylinderUnion::make(g, std::move(ps)), ma);
    }
    cert.verdict = cert.witness ? Verdict::refuted : Verdict::proven;
    return cert;
  }
  cert.method = Method::randomized;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t it = 0; it < opt.budget; ++it) {
    const double q = unit(rng);
    Rational ma = 0;
    std::vector<Path> ps;
    for (std::size_t i = 0; i < n; ++i)
      if (unit(rng) < q) {
        ma += am[i];
        ps.push_back(atoms[i]);
      }
    if (ps.empty() || ma < lo || ma > hi) continue;
    test(CylinderUnion::make(g, std::move(ps)), ma);
  }
  cert.verdict = cert.witness ? Verdict::refuted : Verdict::unknown;
  return cert;
}

DirectedGraph graph617(std::size_t k, std::size_t window) {
  if (k == 0) fail(ErrorCode::invalid_argument, "k must be positive");
  if (window == 0) fail(ErrorCode::invalid_argument, "empty window");
  std::vector<std::pair<GVertex, GVertex>> edges;
  std::vector<Rational> b(window);
  std::vector<std::size_t> out(window, k), in(window);
  Rational w(1, 2);
  for (std::size_t n = 0; n < window; ++n) {
    b[n] = w;
    w /= 2;
    in[n] = std::min(n, k);
    for (std::size_t i = 1; i <= k; ++i)
      if (n + i < window) edges.emplace_back(static_cast<GVertex>(n), static_cast<GVertex>(n + i));
  }
  return DirectedGraph(window, std::move(edges), std::move(b), out, in, Rational(1));
}

std::vector<Rational> z0n_measures(std::size_t k, std::size_t n_max) {
  // f(n) = sum over paths 0 -> n of k^{-length}; mu(Z_{0,n}) = f(n)/2
  std::vector<Rational> f(n_max + 1, 0);
  f[0] = 1;
  for (std::size_t n = 1; n <= n_max; ++n)
    for (std::size_t i = 1; i <= k && i <= n; ++i) f[n] += f[n - i] / static_cast<unsigned long>(k);
  for (auto& x : f) x /= 2;
  return f;
}

Report617 example617(std::size_t k, std::size_t window, std::size_t p_max) {
  if (k < 2) fail(ErrorCode::invalid_argument, "the non-expansion witnesses need k >= 2");
  Report617 rep;
  rep.k = k;
  rep.window = window;
  rep.graph = graph617(k, window);
  const auto& g = rep.graph;
  rep.z0n = z0n_measures(k, (p_max + 1) * k);
  const Rational kk(static_cast<unsigned long>(k));
  rep.recursion_ok = true;
  for (std::size_t n = 0; n < rep.z0n.size(); ++n) {
    Rational s = rep.z0n[n];
    for (std::size_t j = 1; j < k && j <= n; ++j) s += Rational(static_cast<unsigned long>(k - j)) / kk * rep.z0n[n - j];
    if (s != Rational(1, 2)) rep.recursion_ok = false;
  }
  const Rational bound = Rational(1) / (kk + 1);
  for (std::size_t p = 1; p <= p_max; ++p) {
    Witness617 w;
    w.p = p;
    w.n_p = 0;
    for (std::size_t n = p * k + 1; n <= (p + 1) * k; ++n)
      if (rep.z0n[n] >= bound) {
        w.n_p = n;
        break;
      }
    if (w.n_p == 0) fail(ErrorCode::invariant_violation, "no n_p with mu(Z_{0,n}) >= 1/(k+1)");
    if (w.n_p + 1 + k >= window)
      fail(ErrorCode::window_exceeded, "window " + std::to_string(window) + " too small for n_p = " +
                                           std::to_string(w.n_p));
    w.mu_Z0np = rep.z0n[w.n_p];
    w.z_bound_ok = w.mu_Z0np >= bound;
    GEdge ap = 0;
    bool found = false;
    for (auto e : g.out_edges(static_cast<GVertex>(w.n_p)))
      if (g.range(e) == w.n_p + 1) {
        ap = e;
        found = true;
      }
    if (!found) fail(ErrorCode::window_exceeded, "edge (n_p, n_p+1) outside the window");
    // every path m -> n_p with m <= n_p, followed by (n_p, n_p+1)
    std::vector<Path> paths;
    for (GVertex m = 0; m <= w.n_p; ++m) {
      std::vector<Path> stack{Path{m, {}}};
      while (!stack.empty()) {
        Path cur = std::move(stack.back());
        stack.pop_back();
        const GVertex v = cur.end(g);
        if (v == w.n_p) {
          cur.edges.push_back(ap);
          paths.push_back(std::move(cur));
          continue;
        }
        for (auto e : g.out_edges(v))
          if (g.range(e) <= w.n_p) {
            Path nxt = cur;
            nxt.edges.push_back(e);
            stack.push_back(std::move(nxt));
          }
      }
    }
    w.A = CylinderUnion::make(g, std::move(paths));
    w.mu_A = cylinder_measure(g, w.A);
    w.mu_saturated = cylinder_measure(g, b1_saturate(g, w.A));
    w.boundary = w.mu_saturated - w.mu_A;
    Rational tail(1);
    for (std::size_t i = 0; i < w.n_p + 2; ++i) tail /= 2;
    w.lower_ok = w.mu_A > w.mu_Z0np / kk && w.mu_A > Rational(1) / (kk * (kk + 1));
    w.upper_ok = w.mu_A <= Rational(1) / kk;
    w.half_ok = w.mu_A <= Rational(1, 2);
    w.boundary_ok = w.boundary == tail;
    rep.witnesses.push_back(std::move(w));
  }
  rep.boundaries_decrease = true;
  for (std::size_t i = 1; i < rep.witnesses.size(); ++i)
    if (!(rep.witnesses[i].boundary < rep.witnesses[i - 1].boundary)) rep.boundaries_decrease = false;
  return rep;
}

Rational averaging_block_norm_sq(const DirectedGraph& g, const CylinderUnion& a, std::size_t radius) {
  const Rational total = g.total_mass();
  const auto sat = bn_saturate(g, a, radius);
  return (cylinder_measure(g, a) / total) * (1 - cylinder_measure(g, sat) / total);
}

}  // namespace gexp
