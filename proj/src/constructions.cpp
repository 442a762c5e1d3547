#include "gexp/constructions.hpp"

#include <deque>
#include <map>

namespace gexp {

void check_metric(const FiniteMetricSpace& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (x.dist[i].size() != n) fail(ErrorCode::invalid_argument, "distance matrix is not square");
    if (!x.dist[i][i] || *x.dist[i][i] != 0)
      fail(ErrorCode::invalid_argument, "d(x,x) must be 0 at point " + std::to_string(i));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& dij = x.dist[i][j];
      if (dij != x.dist[j][i]) fail(ErrorCode::invalid_argument, "distance matrix is not symmetric");
      if (dij && i != j && *dij <= 0) fail(ErrorCode::invalid_argument, "distinct points at distance <= 0");
      for (std::size_t k = 0; k < n; ++k) {
        const auto& dik = x.dist[i][k];
        const auto& dkj = x.dist[k][j];
        if (dik && dkj && (!dij || *dij > *dik + *dkj))
          fail(ErrorCode::invalid_argument, "triangle inequality fails at (" + std::to_string(i) + "," +
                                                std::to_string(k) + "," + std::to_string(j) + ")");
      }
    }
}

FiniteMetricSpace graph_metric(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) fail(ErrorCode::invalid_argument, "edge endpoint out of range");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  FiniteMetricSpace x;
  x.dist.assign(n, std::vector<std::optional<Rational>>(n));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<long> d(n, -1);
    std::deque<std::size_t> q{s};
    d[s] = 0;
    while (!q.empty()) {
      auto v = q.front();
      q.pop_front();
      for (auto w : adj[v])
        if (d[w] < 0) {
          d[w] = d[v] + 1;
          q.push_back(w);
        }
    }
    for (std::size_t t = 0; t < n; ++t)
      if (d[t] >= 0) x.dist[s][t] = Rational(d[t]);
  }
  return x;
}

std::vector<Edge> cycle_edges(std::size_t n) {
  std::vector<Edge> e;
  if (n == 2) return {{0, 1}};
  for (std::size_t i = 0; n > 2 && i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return e;
}

std::vector<Edge> complete_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

std::vector<Edge> path_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

namespace {

Permutation compose_perm(const Permutation& a, const Permutation& b) {  // a∘b
  Permutation c(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) c[i] = a[b[i]];
  return c;
}

Permutation invert_perm(const Permutation& a) {
  Permutation c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[a[i]] = i;
  return c;
}

bool is_perm(const Permutation& p, std::size_t n) {
  if (p.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto v : p) {
    if (v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace

void check_action(const GroupAction& a) {
  const std::size_t g = a.elements.size();
  if (a.lengths.size() != g) fail(ErrorCode::invalid_argument, "one length per group element required");
  if (a.weights.size() != a.points) fail(ErrorCode::invalid_argument, "one weight per point required");
  std::map<Permutation, std::size_t> index;
  for (std::size_t i = 0; i < g; ++i) {
    if (!is_perm(a.elements[i], a.points))
      fail(ErrorCode::invalid_argument, "group element " + std::to_string(i) + " is not a permutation");
    if (!index.emplace(a.elements[i], i).second)
      fail(ErrorCode::invalid_argument, "group element " + std::to_string(i) + " repeats a permutation");
  }
  Permutation id(a.points);
  for (std::size_t i = 0; i < a.points; ++i) id[i] = i;
  auto idit = index.find(id);
  if (idit == index.end()) fail(ErrorCode::invalid_argument, "identity permutation missing");
  if (a.lengths[idit->second] != 0) fail(ErrorCode::invalid_argument, "identity must have length 0");
  for (std::size_t i = 0; i < g; ++i) {
    if (a.lengths[i] < 0) fail(ErrorCode::invalid_argument, "negative group length");
    auto inv = index.find(invert_perm(a.elements[i]));
    if (inv == index.end()) fail(ErrorCode::invalid_argument, "inverse missing for element " + std::to_string(i));
    if (a.lengths[inv->second] != a.lengths[i]) fail(ErrorCode::invalid_argument, "group length not symmetric");
    for (std::size_t j = 0; j < g; ++j) {
      auto pr = index.find(compose_perm(a.elements[i], a.elements[j]));
      if (pr == index.end()) fail(ErrorCode::invalid_argument, "permutations not closed under composition");
      if (a.lengths[pr->second] > a.lengths[i] + a.lengths[j])
        fail(ErrorCode::invalid_argument, "group length not subadditive");
    }
  }
}

GroupAction action_from_generators(std::size_t points, const std::vector<Permutation>& generators,
                                   std::vector<Rational> weights) {
  std::vector<Permutation> gens;
  for (const auto& p : generators) {
    if (!is_perm(p, points)) fail(ErrorCode::invalid_argument, "generator is not a permutation");
    gens.push_back(p);
    gens.push_back(invert_perm(p));
  }
  GroupAction a;
  a.points = points;
  a.weights = std::move(weights);
  Permutation id(points);
  for (std::size_t i = 0; i < points; ++i) id[i] = i;
  std::map<Permutation, std::size_t> seen{{id, 0}};
  a.elements.push_back(id);
  a.lengths.push_back(0);
  std::deque<std::size_t> q{0};
  while (!q.empty()) {
    std::size_t cur = q.front();
    q.pop_front();
    for (const auto& s : gens) {
      Permutation nxt = compose_perm(s, a.elements[cur]);
      if (seen.count(nxt)) continue;
      seen.emplace(nxt, a.elements.size());
      a.lengths.push_back(a.lengths[cur] + 1);
      a.elements.push_back(std::move(nxt));
      q.push_back(a.elements.size() - 1);
    }
  }
  return a;
}

MeasuredGroupoid pair_groupoid(const FiniteMetricSpace& x, const AtomicMeasureSpace& mu) {
  check_metric(x);
  const std::size_t n = x.size();
  if (mu.size() != n) fail(ErrorCode::invalid_argument, "one weight per point required");
  std::vector<std::vector<Element>> idx(n, std::vector<Element>(n, npos));
  GroupoidTables t;
  LengthFunction len;
  for (std::size_t i = 0; i < n; ++i) {
    idx[i][i] = i;
    t.units.push_back(i);
    t.labels.push_back("(" + std::to_string(i) + "," + std::to_string(i) + ")");
    len.values.emplace_back(0);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && x.dist[i][j]) {
        idx[i][j] = t.labels.size();
        t.labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
        len.values.push_back(*x.dist[i][j]);
      }
  const std::size_t m = t.labels.size();
  t.element_count = m;
  t.source.resize(m);
  t.range.resize(m);
  t.inverse.resize(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Element e = idx[i][j];
      if (e == npos) continue;
      t.range[e] = i;
      t.source[e] = j;
      t.inverse[e] = idx[j][i];
      for (std::size_t k = 0; k < n; ++k)
        if (idx[j][k] != npos) t.compose.push_back({e, idx[j][k], idx[i][k]});
    }
  return MeasuredGroupoid{FiniteGroupoid(std::move(t)), std::move(len), mu};
}

MeasuredGroupoid transformation_groupoid(const GroupAction& a) {
  check_action(a);
  const std::size_t n = a.points, g = a.elements.size();
  std::map<Permutation, std::size_t> index;
  for (std::size_t i = 0; i < g; ++i) index[a.elements[i]] = i;
  std::vector<std::size_t> inv(g);
  std::vector<std::vector<std::size_t>> mul(g, std::vector<std::size_t>(g));
  for (std::size_t i = 0; i < g; ++i) {
    inv[i] = index.at(invert_perm(a.elements[i]));
    for (std::size_t j = 0; j < g; ++j) mul[i][j] = index.at(compose_perm(a.elements[i], a.elements[j]));
  }
  Permutation id(n);
  for (std::size_t i = 0; i < n; ++i) id[i] = i;
  const std::size_t e0 = index.at(id);
  auto el = [n](std::size_t x, std::size_t gi) { return gi * n + x; };

  GroupoidTables t;
  t.element_count = n * g;
  t.source.resize(t.element_count);
  t.range.resize(t.element_count);
  t.inverse.resize(t.element_count);
  LengthFunction len;
  len.values.resize(t.element_count);
  for (std::size_t x = 0; x < n; ++x) t.units.push_back(el(x, e0));
  for (std::size_t gi = 0; gi < g; ++gi) {
    const Permutation ginv = a.elements[inv[gi]];
    for (std::size_t x = 0; x < n; ++x) {
      Element e = el(x, gi);
      std::size_t y = ginv[x];  // γ^-1 x
      t.range[e] = el(x, e0);
      t.source[e] = el(y, e0);
      t.inverse[e] = el(y, inv[gi]);
      len.values[e] = a.lengths[gi];
      t.labels.push_back("(" + std::to_string(x) + ",g" + std::to_string(gi) + ")");
      // (x,γ)(γ^-1 x, η) = (x, γη)
      for (std::size_t hi = 0; hi < g; ++hi) t.compose.push_back({e, el(y, hi), el(x, mul[gi][hi])});
    }
  }
  return MeasuredGroupoid{FiniteGroupoid(std::move(t)), std::move(len), AtomicMeasureSpace(a.weights)};
}

std::vector<MeasuredGroupoid> quotient_family(const std::vector<std::vector<Permutation>>& quotients) {
  std::vector<MeasuredGroupoid> out;
  for (const auto& gens : quotients) {
    if (gens.empty()) fail(ErrorCode::invalid_argument, "quotient needs at least one generator");
    const std::size_t n = gens.front().size();
    std::vector<Rational> w(n, Rational(1, static_cast<unsigned long>(n)));
    out.push_back(transformation_groupoid(action_from_generators(n, gens, std::move(w))));
  }
  return out;
}

std::size_t FamilyUnion::block_of_atom(Atom a) const {
  std::size_t b = 0;
  while (b + 1 < atom_offset.size() && atom_offset[b + 1] <= a) ++b;
  return b;
}

FamilyUnion family_union(const std::vector<MeasuredGroupoid>& blocks) {
  FamilyUnion u;
  GroupoidTables t;
  LengthFunction len;
  std::vector<Rational> w;
  std::size_t eoff = 0, aoff = 0;
  for (const auto& b : blocks) {
    const auto& bt = b.groupoid.tables();
    u.atom_offset.push_back(aoff);
    u.element_offset.push_back(eoff);
    for (auto e : bt.units) t.units.push_back(e + eoff);
    for (std::size_t e = 0; e < bt.element_count; ++e) {
      t.source.push_back(bt.source[e] + eoff);
      t.range.push_back(bt.range[e] + eoff);
      t.inverse.push_back(bt.inverse[e] + eoff);
      t.labels.push_back("b" + std::to_string(u.atom_offset.size() - 1) + ":" + b.groupoid.label(e));
      len.values.push_back(b.length(e));
    }
    for (const auto& c : bt.compose) t.compose.push_back({c.left + eoff, c.right + eoff, c.result + eoff});
    for (const auto& x : b.mu.weights()) w.push_back(x);
    eoff += bt.element_count;
    aoff += bt.units.size();
  }
  t.element_count = eoff;
  u.whole = MeasuredGroupoid{FiniteGroupoid(std::move(t)), std::move(len), AtomicMeasureSpace(std::move(w))};
  return u;
}

ElementSet restrict_to_block(const FamilyUnion& u, const MeasuredGroupoid& block, std::size_t b,
                             const ElementSet& s) {
  ElementSet out(block.groupoid.size());
  const std::size_t off = u.element_offset[b];
  s.for_each([&](Element e) {
    if (e >= off && e < off + block.groupoid.size()) out.insert(e - off);
  });
  return out;
}

MeasuredGroupoid pair_cycle(std::size_t n) {
  return pair_groupoid(graph_metric(n, cycle_edges(n)), AtomicMeasureSpace::uniform(n));
}

MeasuredGroupoid pair_complete(std::size_t n) {
  return pair_groupoid(graph_metric(n, complete_edges(n)), AtomicMeasureSpace::uniform(n));
}

MeasuredGroupoid pair_path(std::size_t n) {
  return pair_groupoid(graph_metric(n, path_edges(n)), AtomicMeasureSpace::uniform(n));
}

MeasuredGroupoid action_zn(std::size_t n) {
  Permutation shift(n);
  for (std::size_t i = 0; i < n; ++i) shift[i] = (i + 1) % n;
  return transformation_groupoid(
      action_from_generators(n, {shift}, std::vector<Rational>(n, Rational(1, static_cast<unsigned long>(n)))));
}

MeasuredGroupoid pair_complete_with_pendant(std::size_t n, const Rational& w) {
  auto edges = complete_edges(n);
  edges.emplace_back(0, n);
  std::vector<Rational> weights(n, (1 - w) / static_cast<unsigned long>(n));
  weights.push_back(w);
  return pair_groupoid(graph_metric(n + 1, edges), AtomicMeasureSpace(std::move(weights)));
}

}  // namespace gexp
