#include "gexp/core.hpp"

#include <algorithm>
#include <sstream>

namespace gexp {

namespace {
std::uint64_t key(Element a, Element b, std::size_t m) {
  return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(m) + b;
}
}  // namespace

FiniteGroupoid::FiniteGroupoid(GroupoidTables t) : t_(std::move(t)) {
  const std::size_t m = t_.element_count;
  if (t_.source.size() != m || t_.range.size() != m || t_.inverse.size() != m)
    fail(ErrorCode::invalid_argument, "source/range/inverse tables must have one entry per element");
  if (!t_.labels.empty() && t_.labels.size() != m)
    fail(ErrorCode::invalid_argument, "labels must have one entry per element");
  atom_index_.assign(m, npos);
  for (std::size_t a = 0; a < t_.units.size(); ++a) {
    Element u = t_.units[a];
    if (u >= m) fail(ErrorCode::invalid_argument, "unit index out of range");
    if (atom_index_[u] != npos) fail(ErrorCode::invalid_argument, "unit listed twice");
    atom_index_[u] = a;
  }
  for (Element g = 0; g < m; ++g) {
    if (t_.source[g] >= m || t_.range[g] >= m || t_.inverse[g] >= m)
      fail(ErrorCode::invalid_argument, "table entry out of range at element " + std::to_string(g));
  }
  table_.reserve(t_.compose.size() * 2);
  for (const auto& c : t_.compose) {
    if (c.left >= m || c.right >= m || c.result >= m)
      fail(ErrorCode::invalid_argument, "composition entry out of range");
    table_[key(c.left, c.right, m)] = c.result;
  }
  by_source_.assign(t_.units.size(), {});
  for (Element g = 0; g < m; ++g) {
    Atom x = s(g);
    if (x != npos) by_source_[x].push_back(g);
  }
}

std::optional<Element> FiniteGroupoid::compose(Element a, Element b) const {
  auto it = table_.find(key(a, b, t_.element_count));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::string FiniteGroupoid::label(Element g) const {
  if (!t_.labels.empty()) return t_.labels[g];
  return std::to_string(g);
}

ElementSet FiniteGroupoid::unit_set() const {
  ElementSet u(size());
  for (Element e : t_.units) u.insert(e);
  return u;
}

std::uint64_t coarse_length(const Rational& l) {
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), l.get_num().get_mpz_t(), l.get_den().get_mpz_t());
  return c.get_ui();
}

AtomicMeasureSpace::AtomicMeasureSpace(std::vector<Rational> weights) : w_(std::move(weights)) {
  total_ = 0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (w_[i] <= 0)
      fail(ErrorCode::invalid_argument,
           "atom " + std::to_string(i) + " has non-positive weight " + to_string(w_[i]));
    total_ += w_[i];
  }
}

AtomicMeasureSpace AtomicMeasureSpace::uniform(std::size_t n) {
  return AtomicMeasureSpace(std::vector<Rational>(n, Rational(1, static_cast<unsigned long>(n))));
}

AtomicMeasureSpace AtomicMeasureSpace::counting(std::size_t n) {
  return AtomicMeasureSpace(std::vector<Rational>(n, Rational(1)));
}

Rational AtomicMeasureSpace::measure(const AtomSet& a) const {
  Rational s = 0;
  a.for_each([&](std::size_t i) { s += w_[i]; });
  return s;
}

AtomicMeasureSpace AtomicMeasureSpace::normalized() const {
  std::vector<Rational> w = w_;
  for (auto& x : w) x /= total_;
  return AtomicMeasureSpace(std::move(w));
}

std::vector<double> AtomicMeasureSpace::as_doubles() const {
  std::vector<double> out;
  out.reserve(w_.size());
  for (const auto& x : w_) out.push_back(to_double(x));
  return out;
}

Bisection::Bisection(const FiniteGroupoid& g, ElementSet members)
    : members_(std::move(members)),
      dom_(g.atom_count()),
      ran_(g.atom_count()),
      tau_(g.atom_count(), npos),
      by_source_(g.atom_count(), npos) {
  bool ok = true;
  Element bad = npos;
  members_.for_each([&](Element e) {
    if (!ok) return;
    Atom x = g.s(e), y = g.r(e);
    if (x == npos || y == npos || dom_.contains(x) || ran_.contains(y)) {
      ok = false;
      bad = e;
      return;
    }
    dom_.insert(x);
    ran_.insert(y);
    tau_[x] = y;
    by_source_[x] = e;
  });
  if (!ok)
    fail(ErrorCode::invalid_argument, "not a bisection: element " + g.label(bad) +
                                          " repeats a source or range");
}

AtomSet Bisection::image(const AtomSet& a) const {
  AtomSet out(tau_.size());
  a.for_each([&](Atom x) {
    if (tau_[x] != npos) out.insert(tau_[x]);
  });
  return out;
}

ElementSet DecomposableSet::elements(std::size_t element_count) const {
  ElementSet u(element_count);
  for (const auto& p : pieces) u |= p.members();
  return u;
}

Rational max_length(const LengthFunction& l, const ElementSet& s) {
  Rational m = 0;
  s.for_each([&](Element e) {
    if (l(e) > m) m = l(e);
  });
  return m;
}

DecomposableSet make_decomposable(const MeasuredGroupoid& m, std::vector<Bisection> pieces,
                                  std::optional<std::vector<std::size_t>> sigma,
                                  std::optional<std::size_t> unital_index) {
  const auto& g = m.groupoid;
  DecomposableSet k;
  k.length_bound = 0;
  for (const auto& p : pieces) k.length_bound = rmax(k.length_bound, max_length(m.length, p.members()));
  if (unital_index) {
    if (*unital_index >= pieces.size() || !(pieces[*unital_index].members() == g.unit_set()))
      fail(ErrorCode::invalid_argument, "unital piece is not the unit set");
  }
  if (sigma) {
    if (sigma->size() != pieces.size()) fail(ErrorCode::invalid_argument, "sigma has wrong length");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      std::size_t j = (*sigma)[i];
      if (j >= pieces.size() ||
          !(inverse_set(g, pieces[i].members()) == pieces[j].members()))
        fail(ErrorCode::invalid_argument, "sigma does not pair piece " + std::to_string(i) +
                                              " with its inverse");
    }
  }
  k.pieces = std::move(pieces);
  k.sigma = std::move(sigma);
  k.unital_index = unital_index;
  return k;
}

namespace {
void add(ValidationReport& rep, std::string axiom, std::vector<Element> w, std::string detail) {
  rep.violations.push_back({std::move(axiom), std::move(w), std::move(detail)});
}
}  // namespace

ValidationReport validate(const FiniteGroupoid& g) {
  ValidationReport rep;
  const std::size_t m = g.size();
  for (Atom a = 0; a < g.atom_count(); ++a) {
    Element u = g.unit_of(a);
    if (g.source(u) != u || g.range(u) != u) add(rep, "unit-endpoints", {u}, "s(u) and r(u) must equal u");
    if (g.inverse(u) != u) add(rep, "unit-inverse", {u}, "u^-1 must equal u");
  }
  for (Element e = 0; e < m; ++e) {
    if (!g.is_unit(g.source(e))) add(rep, "source-is-unit", {e}, "source is not a unit");
    if (!g.is_unit(g.range(e))) add(rep, "range-is-unit", {e}, "range is not a unit");
    Element inv = g.inverse(e);
    if (g.inverse(inv) != e) add(rep, "involution", {e}, "(g^-1)^-1 != g");
    if (g.source(inv) != g.range(e) || g.range(inv) != g.source(e))
      add(rep, "inverse-endpoints", {e}, "s(g^-1) != r(g) or r(g^-1) != s(g)");
  }
  if (!rep.ok()) return rep;  // the rest assumes endpoints are units

  // composability: defined iff s(a) = r(b), with correct endpoints
  for (const auto& c : g.tables().compose) {
    if (g.source(c.left) != g.range(c.right))
      add(rep, "composable-only", {c.left, c.right}, "composition defined on a non-composable pair");
  }
  const auto& by_src = g.by_source();
  std::vector<std::vector<Element>> by_rng(g.atom_count());
  for (Element e = 0; e < m; ++e) by_rng[g.r(e)].push_back(e);
  for (Element b = 0; b < m; ++b) {
    for (Element a : by_src[g.r(b)]) {
      auto ab = g.compose(a, b);
      if (!ab) {
        add(rep, "composition-total", {a, b}, "composable pair has no product");
        continue;
      }
      if (g.source(*ab) != g.source(b) || g.range(*ab) != g.range(a))
        add(rep, "product-endpoints", {a, b}, "s(ab) != s(b) or r(ab) != r(a)");
    }
    auto lu = g.compose(g.range(b), b);
    if (!lu || *lu != b) add(rep, "left-unit", {b}, "r(g)g != g");
    auto ru = g.compose(b, g.source(b));
    if (!ru || *ru != b) add(rep, "right-unit", {b}, "g s(g) != g");
    auto gi = g.compose(b, g.inverse(b));
    if (!gi || *gi != g.range(b)) add(rep, "inverse-product", {b}, "g g^-1 != r(g)");
    auto ig = g.compose(g.inverse(b), b);
    if (!ig || *ig != g.source(b)) add(rep, "inverse-product", {b}, "g^-1 g != s(g)");
  }
  if (!rep.ok()) return rep;
  // associativity over all composable triples (a, b, c): s(a)=r(b), s(b)=r(c)
  for (Element c = 0; c < m; ++c) {
    for (Element b : by_src[g.r(c)]) {
      Element bc = *g.compose(b, c);
      for (Element a : by_src[g.r(b)]) {
        Element ab = *g.compose(a, b);
        if (*g.compose(ab, c) != *g.compose(a, bc)) {
          add(rep, "associativity", {a, b, c}, "(ab)c != a(bc)");
        }
      }
    }
  }
  return rep;
}

ValidationReport validate_length(const FiniteGroupoid& g, const LengthFunction& l) {
  ValidationReport rep;
  if (l.values.size() != g.size()) {
    add(rep, "length-shape", {}, "length table must have one entry per element");
    return rep;
  }
  for (Element e = 0; e < g.size(); ++e) {
    if (l(e) < 0) add(rep, "length-nonnegative", {e}, "negative length");
    if (g.is_unit(e) && l(e) != 0) add(rep, "length-units", {e}, "length of a unit must be 0");
    if (l(g.inverse(e)) != l(e)) add(rep, "length-symmetric", {e}, "l(g^-1) != l(g)");
  }
  for (const auto& c : g.tables().compose) {
    if (l(c.result) > l(c.left) + l(c.right))
      add(rep, "length-subadditive", {c.left, c.right}, "l(ab) > l(a) + l(b)");
  }
  return rep;
}

ValidationReport validate(const MeasuredGroupoid& m) {
  ValidationReport rep = validate(m.groupoid);
  auto lr = validate_length(m.groupoid, m.length);
  rep.violations.insert(rep.violations.end(), lr.violations.begin(), lr.violations.end());
  if (m.mu.size() != m.groupoid.atom_count())
    add(rep, "measure-shape", {}, "weights must have one entry per unit");
  return rep;
}

ElementSet ball(const FiniteGroupoid& g, const LengthFunction& l, const Rational& n) {
  ElementSet b(g.size());
  for (Element e = 0; e < g.size(); ++e)
    if (l(e) <= n) b.insert(e);
  return b;
}

AtomSet saturate(const DecomposableSet& k, const AtomSet& a) {
  AtomSet out(a.universe());
  for (const auto& p : k.pieces) out |= p.image(a);
  return out;
}

AtomSet saturate(const FiniteGroupoid& g, const ElementSet& s, const AtomSet& a) {
  AtomSet out(g.atom_count());
  s.for_each([&](Element e) {
    if (a.contains(g.s(e))) out.insert(g.r(e));
  });
  return out;
}

ElementSet product(const FiniteGroupoid& g, const ElementSet& s1, const ElementSet& s2) {
  std::vector<std::vector<Element>> left(g.atom_count());
  s1.for_each([&](Element e) { left[g.s(e)].push_back(e); });
  ElementSet out(g.size());
  s2.for_each([&](Element b) {
    for (Element a : left[g.r(b)]) {
      auto ab = g.compose(a, b);
      if (!ab) fail(ErrorCode::invalid_argument, "composition table incomplete");
      out.insert(*ab);
    }
  });
  return out;
}

ElementSet inverse_set(const FiniteGroupoid& g, const ElementSet& s) {
  ElementSet out(g.size());
  s.for_each([&](Element e) { out.insert(g.inverse(e)); });
  return out;
}

ElementSet power(const FiniteGroupoid& g, const ElementSet& s, std::uint64_t m) {
  ElementSet result = g.unit_set();
  for (std::uint64_t i = 0; i < m; ++i) {
    ElementSet next = product(g, result, s);
    if (next == result) break;  // S^(k+1) = S^k fixes every later power
    result = std::move(next);
  }
  return result;
}

namespace {

Bisection piece_product(const FiniteGroupoid& g, const Bisection& a, const Bisection& b) {
  ElementSet out(g.size());
  b.members().for_each([&](Element y) {
    Element x = a.at_source(g.r(y));
    if (x != npos) out.insert(*g.compose(x, y));
  });
  return Bisection(g, std::move(out));
}

}  // namespace

DecomposableSet compose_decomposables(const MeasuredGroupoid& m, const DecomposableSet& k1,
                                      const DecomposableSet& k2) {
  const auto& g = m.groupoid;
  const std::size_t n1 = k1.pieces.size(), n2 = k2.pieces.size();
  std::vector<std::size_t> slot(n1 * n2, npos);
  std::vector<Bisection> pieces;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      Bisection p = piece_product(g, k1.pieces[i], k2.pieces[j]);
      if (p.members().empty()) continue;
      slot[i * n2 + j] = pieces.size();
      pieces.push_back(std::move(p));
    }
  DecomposableSet k;
  k.length_bound = k1.length_bound + k2.length_bound;
  bool same = k1.pieces.size() == k2.pieces.size() && k1.sigma == k2.sigma &&
              k1.unital_index == k2.unital_index;
  for (std::size_t i = 0; same && i < n1; ++i)
    same = k1.pieces[i].members() == k2.pieces[i].members();
  if (same && k1.unital_index) k.unital_index = slot[*k1.unital_index * n2 + *k1.unital_index];
  if (same && k1.sigma) {
    std::vector<std::size_t> sig(pieces.size());
    const auto& s = *k1.sigma;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j)
        if (slot[i * n2 + j] != npos) sig[slot[i * n2 + j]] = slot[s[j] * n2 + s[i]];
    k.sigma = std::move(sig);
  }
  k.pieces = std::move(pieces);
  return k;
}

DecomposableSet invert_decomposable(const MeasuredGroupoid& m, const DecomposableSet& k) {
  DecomposableSet out;
  for (const auto& p : k.pieces)
    out.pieces.emplace_back(m.groupoid, inverse_set(m.groupoid, p.members()));
  out.sigma = k.sigma;  // K_i^-1 inverted is K_sigma(i)^-1
  out.unital_index = k.unital_index;
  out.length_bound = k.length_bound;
  return out;
}

DecomposableSet union_decomposables(const MeasuredGroupoid& m, const DecomposableSet& k1,
                                    const DecomposableSet& k2) {
  const auto& g = m.groupoid;
  DecomposableSet out;
  out.pieces = k1.pieces;
  out.pieces.insert(out.pieces.end(), k2.pieces.begin(), k2.pieces.end());
  out.length_bound = rmax(k1.length_bound, k2.length_bound);
  out.unital_index = k1.unital_index ? k1.unital_index
                     : k2.unital_index ? std::optional<std::size_t>(*k2.unital_index + k1.pieces.size())
                                       : std::nullopt;
  // symmetric if every piece's inverse appears somewhere among the pieces
  const std::size_t n = out.pieces.size();
  std::vector<std::size_t> sig(n, npos);
  for (std::size_t i = 0; i < n; ++i) {
    ElementSet inv = inverse_set(g, out.pieces[i].members());
    for (std::size_t j = 0; j < n; ++j)
      if (out.pieces[j].members() == inv) {
        sig[i] = j;
        break;
      }
  }
  if (std::find(sig.begin(), sig.end(), npos) == sig.end()) out.sigma = std::move(sig);
  return out;
}

namespace {

struct ColorClass {
  ElementSet members;
  AtomSet src, rng;
};

bool fits(const ColorClass& c, Atom x, Atom y) { return !c.src.contains(x) && !c.rng.contains(y); }

void put(ColorClass& c, Element e, Atom x, Atom y) {
  c.members.insert(e);
  c.src.insert(x);
  c.rng.insert(y);
}

std::vector<ColorClass> greedy(const FiniteGroupoid& g, const ElementSet& s) {
  std::vector<ColorClass> classes;
  s.for_each([&](Element e) {
    Atom x = g.s(e), y = g.r(e);
    for (auto& c : classes)
      if (fits(c, x, y)) {
        put(c, e, x, y);
        return;
      }
    ColorClass c{ElementSet(g.size()), AtomSet(g.atom_count()), AtomSet(g.atom_count())};
    put(c, e, x, y);
    classes.push_back(std::move(c));
  });
  return classes;
}

}  // namespace

DecomposableSet decompose(const MeasuredGroupoid& m, const ElementSet& s) {
  std::vector<Bisection> pieces;
  for (auto& c : greedy(m.groupoid, s)) pieces.emplace_back(m.groupoid, std::move(c.members));
  return make_decomposable(m, std::move(pieces), std::nullopt, std::nullopt);
}

DecomposableSet decompose_unital_symmetric(const MeasuredGroupoid& m, const ElementSet& s) {
  const auto& g = m.groupoid;
  const ElementSet units = g.unit_set();
  if (!units.subset_of(s)) fail(ErrorCode::not_unital, "set does not contain every unit");
  if (!(inverse_set(g, s) == s)) fail(ErrorCode::not_symmetric, "set is not closed under inverse");
  const ElementSet rest = s - units;

  std::vector<Bisection> pieces;
  pieces.emplace_back(g, units);
  std::vector<std::size_t> sigma{0};

  // plain greedy first; accept it when the classes happen to be inverse-closed
  auto plain = greedy(g, rest);
  std::vector<std::size_t> pairing(plain.size(), npos);
  bool closed = true;
  for (std::size_t i = 0; i < plain.size() && closed; ++i) {
    ElementSet inv = inverse_set(g, plain[i].members);
    for (std::size_t j = 0; j < plain.size(); ++j)
      if (plain[j].members == inv) {
        pairing[i] = j;
        break;
      }
    closed = pairing[i] != npos;
  }
  if (closed) {
    for (std::size_t i = 0; i < plain.size(); ++i) {
      pieces.emplace_back(g, std::move(plain[i].members));
      sigma.push_back(pairing[i] + 1);
    }
    return make_decomposable(m, std::move(pieces), std::move(sigma), 0);
  }

  // paired coloring: self-inverse arrows get self-inverse classes, every other
  // arrow is colored through the representative of {g, g^-1} with smaller index
  std::vector<ColorClass> selfinv, paired;
  auto place = [&](std::vector<ColorClass>& classes, Element e) {
    Atom x = g.s(e), y = g.r(e);
    for (auto& c : classes)
      if (fits(c, x, y)) {
        put(c, e, x, y);
        return;
      }
    ColorClass c{ElementSet(g.size()), AtomSet(g.atom_count()), AtomSet(g.atom_count())};
    put(c, e, x, y);
    classes.push_back(std::move(c));
  };
  rest.for_each([&](Element e) {
    Element inv = g.inverse(e);
    if (inv == e) place(selfinv, e);
    else if (e < inv) place(paired, e);
  });
  for (auto& c : selfinv) {
    sigma.push_back(pieces.size());
    pieces.emplace_back(g, std::move(c.members));
  }
  for (auto& c : paired) {
    ElementSet inv = inverse_set(g, c.members);
    std::size_t i = pieces.size();
    pieces.emplace_back(g, std::move(c.members));
    pieces.emplace_back(g, std::move(inv));
    sigma.push_back(i + 1);
    sigma.push_back(i);
  }
  return make_decomposable(m, std::move(pieces), std::move(sigma), 0);
}

DecomposableSet ball_decomposition(const MeasuredGroupoid& m, const Rational& radius) {
  return decompose_unital_symmetric(m, ball(m.groupoid, m.length, radius));
}

RNTable::RNTable(const DecomposableSet& k, const AtomicMeasureSpace& mu) {
  table_.resize(k.pieces.size());
  for (std::size_t i = 0; i < k.pieces.size(); ++i) {
    table_[i].assign(mu.size(), std::nullopt);
    k.pieces[i].domain().for_each([&](Atom x) {
      table_[i][x] = mu.weight(k.pieces[i].tau(x)) / mu.weight(x);
    });
  }
}

const Rational& RNTable::ratio(std::size_t piece, Atom x) const {
  const auto& v = table_.at(piece).at(x);
  if (!v) fail(ErrorCode::invalid_argument, "atom outside the source of the piece");
  return *v;
}

bool RNTable::defined(std::size_t piece, Atom x) const {
  return piece < table_.size() && x < table_[piece].size() && table_[piece][x].has_value();
}

RNTable rn_table(const DecomposableSet& k, const AtomicMeasureSpace& mu) { return RNTable(k, mu); }

}  // namespace gexp
