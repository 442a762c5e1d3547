#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gexp/constructions.hpp"

using namespace gexp;

TEST_CASE("graph metrics") {
  const auto c = graph_metric(6, cycle_edges(6));
  CHECK(*c.dist[0][3] == 3);
  CHECK(*c.dist[0][5] == 1);
  CHECK(*c.dist[1][4] == 3);
  const auto p = graph_metric(5, path_edges(5));
  CHECK(*p.dist[0][4] == 4);
  // two components: no finite distance across
  const auto two = graph_metric(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(two.dist[0][2].has_value());
  CHECK_NOTHROW(check_metric(two));
  FiniteMetricSpace bad = c;
  bad.dist[0][3] = Rational(10);
  bad.dist[3][0] = Rational(10);
  CHECK_THROWS_AS(check_metric(bad), Error);
}

TEST_CASE("pair groupoid layout and axioms") {
  const auto m = pair_cycle(5);
  CHECK(m.atoms() == 5);
  CHECK(m.groupoid.size() == 25);
  CHECK(validate(m).ok());
  for (Atom x = 0; x < 5; ++x) CHECK(m.groupoid.unit_of(x) == x);  // units first
  for (Element e = 0; e < m.groupoid.size(); ++e) {
    const Atom s = m.groupoid.s(e), r = m.groupoid.r(e);
    const std::size_t d = std::min<std::size_t>((r + 5 - s) % 5, (s + 5 - r) % 5);
    CHECK(m.length(e) == Rational(static_cast<unsigned long>(d)));
  }
  // disconnected metric: no arrows across blocks
  const auto two = pair_groupoid(graph_metric(4, {{0, 1}, {2, 3}}), AtomicMeasureSpace::uniform(4));
  CHECK(two.groupoid.size() == 8);
  CHECK(validate(two).ok());
}

TEST_CASE("actions and transformation groupoids") {
  const auto a = action_from_generators(6, {{1, 2, 3, 4, 5, 0}}, std::vector<Rational>(6, Rational(1, 6)));
  CHECK(a.elements.size() == 6);
  CHECK(a.elements[0] == Permutation{0, 1, 2, 3, 4, 5});
  std::vector<Rational> lens = a.lengths;
  std::sort(lens.begin(), lens.end());
  CHECK(lens == std::vector<Rational>{0, 1, 1, 2, 2, 3});
  CHECK_NOTHROW(check_action(a));
  const auto t = transformation_groupoid(a);
  CHECK(validate(t).ok());
  CHECK(t.groupoid.size() == 36);
  for (std::size_t g = 0; g < a.elements.size(); ++g)
    for (std::size_t x = 0; x < 6; ++x) {
      const Element e = g * 6 + x;
      CHECK(t.groupoid.r(e) == x);
      // s(x, g) = g^{-1} x
      CHECK(a.elements[g][t.groupoid.s(e)] == x);
      CHECK(t.length(e) == a.lengths[g]);
    }
  GroupAction broken = a;
  broken.elements.pop_back();
  broken.lengths.pop_back();
  CHECK_THROWS_AS(check_action(broken), Error);
}

TEST_CASE("built-ins") {
  CHECK(validate(action_zn(7)).ok());
  CHECK(action_zn(7).mu.is_probability());
  const auto p = pair_complete_with_pendant(6, Rational(1, 50));
  CHECK(p.atoms() == 7);
  CHECK(p.mu.is_probability());
  CHECK(p.mu.weight(6) == Rational(1, 50));
  CHECK(p.mu.weight(0) == Rational(49, 300));
  CHECK(validate(p).ok());
}

TEST_CASE("family unions keep blocks apart") {
  const auto u = family_union({pair_complete(3), pair_cycle(4)});
  CHECK(u.whole.atoms() == 7);
  CHECK(u.whole.groupoid.size() == 9 + 16);
  CHECK(validate(u.whole).ok());
  CHECK(u.atom_offset == std::vector<std::size_t>{0, 3});
  for (Element e = 0; e < u.whole.groupoid.size(); ++e)
    CHECK(u.block_of_atom(u.whole.groupoid.s(e)) == u.block_of_atom(u.whole.groupoid.r(e)));
  CHECK(u.whole.mu.total_mass() == 2);  // weights are concatenated as given
  const auto all = u.whole.groupoid.all_elements();
  CHECK(restrict_to_block(u, pair_cycle(4), 1, all).count() == 16);
}

TEST_CASE("quotient family") {
  // Z/4 and Z/6 by rotation
  const auto fam = quotient_family({{{1, 2, 3, 0}}, {{1, 2, 3, 4, 5, 0}}});
  REQUIRE(fam.size() == 2);
  CHECK(fam[0].atoms() == 4);
  CHECK(fam[1].groupoid.size() == 36);
  CHECK(fam[1].mu.is_probability());
}
