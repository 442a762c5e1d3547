#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "gexp/constructions.hpp"
#include "gexp/core.hpp"

using namespace gexp;

namespace {

AtomSet brute_saturate(const MeasuredGroupoid& m, const ElementSet& s, const AtomSet& a) {
  AtomSet out(m.atoms());
  s.for_each([&](Element e) {
    if (a.contains(m.groupoid.s(e))) out.insert(m.groupoid.r(e));
  });
  return out;
}

bool has_axiom(const ValidationReport& r, const std::string& axiom) {
  for (const auto& v : r.violations)
    if (v.axiom == axiom) return true;
  return false;
}

// Z/3 as a one-object groupoid: elements 0 (unit), 1, 2.
GroupoidTables z3_tables() {
  GroupoidTables t;
  t.element_count = 3;
  t.units = {0};
  t.source = {0, 0, 0};
  t.range = {0, 0, 0};
  t.inverse = {0, 2, 1};
  for (Element a = 0; a < 3; ++a)
    for (Element b = 0; b < 3; ++b) t.compose.push_back({a, b, (a + b) % 3});
  return t;
}

}  // namespace

TEST_CASE("rational parsing is exact") {
  CHECK(parse_rational("0.99") == Rational(99, 100));
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("1e-3") == Rational(1, 1000));
  CHECK(parse_rational(" -2 ") == Rational(-2));
  CHECK(to_string(Rational(4, 6)) == "2/3");
  CHECK(to_string(Rational(5)) == "5");
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK(from_double(0.5) == Rational(1, 2));
}

TEST_CASE("rational square roots bracket the true value") {
  Rational r;
  CHECK(exact_sqrt(Rational(9, 16), r));
  CHECK(r == Rational(3, 4));
  CHECK_FALSE(exact_sqrt(Rational(2), r));
  const Rational hi = sqrt_upper(2), lo = sqrt_lower(2);
  CHECK(hi * hi >= 2);
  CHECK(lo * lo <= 2);
  CHECK(hi - lo < Rational(1, 1000000));
  CHECK(min_power_at_least(Rational(3, 2), 10) == 6);  // 1.5^5 < 10 <= 1.5^6
  CHECK(coarse_length(Rational(3, 2)) == 2);
  CHECK(coarse_length(Rational(2)) == 2);
  CHECK(coarse_length(Rational(0)) == 0);
}

TEST_CASE("index sets") {
  AtomSet a(70, {0, 5, 69});
  CHECK(a.count() == 3);
  CHECK(a.complement().count() == 67);
  CHECK((a | AtomSet(70, {1})).count() == 4);
  CHECK((a & AtomSet(70, {5, 6})).to_vector() == std::vector<std::size_t>{5});
  CHECK(AtomSet(70, {5}).subset_of(a));
  CHECK(lex_less(AtomSet(70, {0, 9}), AtomSet(70, {1})));
}

TEST_CASE("validation accepts a group and reports broken tables") {
  const FiniteGroupoid z3(z3_tables());
  CHECK(validate(z3).ok());
  auto t = z3_tables();
  t.inverse = {0, 1, 2};  // 1 is not self-inverse in Z/3
  const auto rep = validate(FiniteGroupoid(t));
  CHECK_FALSE(rep.ok());
  CHECK(has_axiom(rep, "inverse-product"));
  auto t2 = z3_tables();
  t2.compose.pop_back();  // 2*2 missing
  CHECK(has_axiom(validate(FiniteGroupoid(t2)), "composition-total"));
  auto t3 = z3_tables();
  for (auto& c : t3.compose)
    if (c.left == 1 && c.right == 1) c.result = 0;
  CHECK_FALSE(validate(FiniteGroupoid(t3)).ok());
  auto bad = z3_tables();
  bad.source = {0, 0};
  CHECK_THROWS_AS(FiniteGroupoid{bad}, Error);
}

TEST_CASE("length validation") {
  auto m = pair_cycle(6);
  CHECK(validate(m).ok());
  m.length.values[6] = m.length.values[6] + 1;  // first off-diagonal pair; breaks symmetry
  const auto rep = validate_length(m.groupoid, m.length);
  CHECK(has_axiom(rep, "length-symmetric"));
  m.length.values[0] = 1;
  CHECK(has_axiom(validate_length(m.groupoid, m.length), "length-units"));
}

TEST_CASE("measure space") {
  AtomicMeasureSpace mu({Rational(1), Rational(3)});
  CHECK(mu.total_mass() == 4);
  CHECK_FALSE(mu.is_probability());
  CHECK(mu.normalized().weight(1) == Rational(3, 4));
  CHECK(mu.measure(AtomSet(2, {0})) == 1);
  CHECK(AtomicMeasureSpace::uniform(4).weight(2) == Rational(1, 4));
  CHECK_THROWS_AS(AtomicMeasureSpace({Rational(1), Rational(0)}), Error);
}

TEST_CASE("balls and saturations match brute force") {
  for (const auto& m : {pair_cycle(9), pair_path(7), action_zn(8), pair_complete_with_pendant(5, Rational(1, 50))}) {
    for (const Rational r : {Rational(0), Rational(1), Rational(2), Rational(3)}) {
      const auto b = ball(m.groupoid, m.length, r);
      for (Element e = 0; e < m.groupoid.size(); ++e) CHECK(b.contains(e) == (m.length(e) <= r));
      const auto k = ball_decomposition(m, r);
      CHECK(k.unital());
      CHECK(k.symmetric());
      CHECK(k.elements(m.groupoid.size()) == b);
      CHECK(k.length_bound >= max_length(m.length, b));
      std::mt19937 rng(static_cast<unsigned>(m.atoms()));
      for (int t = 0; t < 30; ++t) {
        AtomSet a(m.atoms());
        for (Atom x = 0; x < m.atoms(); ++x)
          if (rng() & 1u) a.insert(x);
        CHECK(saturate(k, a) == brute_saturate(m, b, a));
        CHECK(saturate(m.groupoid, b, a) == brute_saturate(m, b, a));
      }
    }
  }
}

TEST_CASE("products, inverses and powers") {
  const auto m = pair_path(8);
  const auto b1 = ball(m.groupoid, m.length, 1);
  // on a path the shortest-path metric is geodesic, so B_1^n = B_n
  for (std::uint64_t n = 0; n <= 7; ++n)
    CHECK(power(m.groupoid, b1, n) == ball(m.groupoid, m.length, Rational(static_cast<unsigned long>(n))));
  CHECK(inverse_set(m.groupoid, b1) == b1);
  CHECK(product(m.groupoid, b1, b1) == ball(m.groupoid, m.length, 2));
  CHECK(power(m.groupoid, b1, 0) == m.groupoid.unit_set());
}

TEST_CASE("bisections") {
  const auto m = pair_complete(4);
  const auto& g = m.groupoid;
  // elements with source 0 all have distinct ranges but the same source
  ElementSet from0(g.size());
  for (Element e : g.by_source()[0]) from0.insert(e);
  CHECK_THROWS_AS(Bisection(g, from0), Error);
  // a single arrow 0 -> 1
  Element e01 = npos;
  for (Element e : g.by_source()[0])
    if (g.r(e) == 1) e01 = e;
  REQUIRE(e01 != npos);
  const Bisection b(g, ElementSet(g.size(), {e01}));
  CHECK(b.tau(0) == 1);
  CHECK(b.tau(2) == npos);
  CHECK(b.image(AtomSet(4, {0, 2})) == AtomSet(4, {1}));
}

TEST_CASE("decompositions cover the set with bisections") {
  for (const auto& m : {pair_complete(6), pair_cycle(10), action_zn(7)}) {
    const auto s = ball(m.groupoid, m.length, 2);
    const auto k = decompose(m, s);
    ElementSet cover(m.groupoid.size());
    for (const auto& p : k.pieces) {
      CHECK_FALSE(cover.intersects(p.members()));
      cover |= p.members();
    }
    CHECK(cover == s);
    const auto us = decompose_unital_symmetric(m, s);
    REQUIRE(us.unital());
    CHECK(us.pieces[*us.unital_index].members() == m.groupoid.unit_set());
    REQUIRE(us.symmetric());
    for (std::size_t i = 0; i < us.piece_count(); ++i)
      CHECK(us.pieces[(*us.sigma)[i]].members() == inverse_set(m.groupoid, us.pieces[i].members()));
  }
  const auto m = pair_complete(4);
  ElementSet no_units(m.groupoid.size());
  for (Element e = 0; e < m.groupoid.size(); ++e)
    if (!m.groupoid.is_unit(e)) no_units.insert(e);
  CHECK_THROWS_AS(decompose_unital_symmetric(m, no_units), Error);
}

TEST_CASE("composition of decomposable sets follows the element product") {
  const auto m = pair_cycle(8);
  const auto k1 = ball_decomposition(m, 1);
  const auto k2 = compose_decomposables(m, k1, k1);
  CHECK(k2.elements(m.groupoid.size()) == product(m.groupoid, k1.elements(m.groupoid.size()), k1.elements(m.groupoid.size())));
  const auto inv = invert_decomposable(m, k1);
  CHECK(inv.elements(m.groupoid.size()) == k1.elements(m.groupoid.size()));
  const auto u = union_decomposables(m, k1, ball_decomposition(m, 2));
  CHECK(u.elements(m.groupoid.size()) == ball(m.groupoid, m.length, 2));
}

TEST_CASE("Radon-Nikodym table") {
  const auto m = pair_complete_with_pendant(4, Rational(1, 10));
  const auto k = ball_decomposition(m, 1);
  const auto rn = rn_table(k, m.mu);
  for (std::size_t i = 0; i < k.piece_count(); ++i)
    for (Atom x = 0; x < m.atoms(); ++x) {
      const Atom t = k.pieces[i].tau(x);
      CHECK(rn.defined(i, x) == (t != npos));
      if (t != npos) CHECK(rn.ratio(i, x) == m.mu.weight(t) / m.mu.weight(x));
    }
}
