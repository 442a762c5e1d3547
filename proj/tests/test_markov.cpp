#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gexp/constructions.hpp"
#include "gexp/markov.hpp"

using namespace gexp;

TEST_CASE("kernel rows sum to one and the kernel is reversible") {
  for (const auto& m : {pair_cycle(9), pair_complete_with_pendant(5, Rational(1, 20)), action_zn(7)}) {
    for (const Rational r : {Rational(1), Rational(2)}) {
      const auto b = build_kernel(m.mu, AtomSet::full(m.atoms()), ball_decomposition(m, r));
      for (std::size_t i = 0; i < b.k(); ++i) {
        Real row = 0;
        for (std::size_t j = 0; j < b.k(); ++j) {
          row += b.P(i, j);
          CHECK(abs(b.mu_tilde[i] * b.P(i, j) - b.mu_tilde[j] * b.P(j, i)) < Real(1e-30));
        }
        CHECK(abs(row - 1) < Real(1e-30));
      }
      CHECK(b.reversibility_error < Real(1e-30));
    }
  }
}

TEST_CASE("kernel needs unital symmetric metadata") {
  const auto m = pair_cycle(6);
  const auto plain = decompose(m, ball(m.groupoid, m.length, 1));
  CHECK_THROWS_AS(build_kernel(m.mu, AtomSet::full(6), plain), Error);
}

TEST_CASE("cycle spectrum matches the closed form") {
  // uniform cycle, B_1: step to x-1, x, x+1 with probability 1/3 each
  for (std::size_t n : {5u, 8u, 12u}) {
    const auto m = pair_cycle(n);
    const auto b = build_kernel(m.mu, AtomSet::full(n), ball_decomposition(m, 1));
    const auto sp = spectral_gap(b);
    const double expect = (1 + 2 * std::cos(2 * std::numbers::pi / static_cast<double>(n))) / 3;
    CHECK(sp.lambda == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sp.constant_residual < 1e-12);
    // Cheeger constant of an arc of floor(n/2) atoms: two boundary steps of 1/3
    const auto ch = cheeger(b);
    REQUIRE(ch.value_exact.has_value());
    CHECK(*ch.value_exact == Rational(2, 3) / Rational(static_cast<unsigned long>(n / 2)));
    const auto sw = sandwich(ch, sp);
    CHECK(sw.lower_ok);
    CHECK(sw.upper_ok);
  }
}

TEST_CASE("Cheeger constant against a brute-force oracle on flows") {
  const std::vector<std::vector<Rational>> q{{2, 1, 0, 0, 3}, {1, 1, 4, 0, 0}, {0, 4, 5, 1, 0}, {0, 0, 1, 1, 2}, {3, 0, 0, 2, 1}};
  const auto b = kernel_from_flow(q);
  const std::size_t k = q.size();
  std::vector<Rational> pi(k, 0);
  Rational total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) pi[i] += q[i][j];
    total += pi[i];
  }
  std::optional<Rational> best;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    Rational pa = 0, cut = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1u) {
        pa += pi[i];
        for (std::size_t j = 0; j < k; ++j)
          if (!(mask >> j & 1u)) cut += q[i][j];
      }
    if (2 * pa > total) continue;
    if (!best || cut / pa < *best) best = cut / pa;
  }
  const auto ch = cheeger(b);
  REQUIRE(ch.value_exact.has_value());
  CHECK(*ch.value_exact == *best);
  REQUIRE(ch.argmin.has_value());
  CHECK(boundary_size_exact(b, *ch.argmin).has_value());
}

TEST_CASE("sampled Cheeger gives an interval") {
  const auto m = pair_cycle(24);
  const auto b = build_kernel(m.mu, AtomSet::full(24), ball_decomposition(m, 1));
  ScanOptions s;
  s.exact_limit = 12;
  const auto ch = cheeger(b, s);
  CHECK_FALSE(ch.exact);
  CHECK(ch.lo <= ch.hi);
  CHECK(ch.hi <= Real(Rational(2, 3).get_d() / 6 + 1e-12));  // an arc of 6 is a valid upper bound
}

TEST_CASE("transfer between expansion and Markov constants") {
  const auto m = pair_complete_with_pendant(6, Rational(1, 30));
  const auto k = ball_decomposition(m, 1);
  ExpansionDomain d;
  d.Y = AtomSet::full(m.atoms());
  d.K = k;
  d.N = k.piece_count();
  d.L = k.length_bound;
  d.theta = minimal_theta(m.mu, d.Y, k);
  const auto ce = certify_expansion(m.mu, d.Y, k, 0, 0, Rational(1, 2));
  d.C = ce.worst_ratio / 2;
  const auto tm = expansion_to_markov(m.mu, d);
  CHECK(tm.domain.kappa == d.C / (Rational(static_cast<unsigned long>(d.N)) * d.theta));
  REQUIRE(tm.recertified.has_value());
  CHECK(tm.recertified->verdict == Verdict::proven);
  const auto te = markov_to_expansion(m.mu, tm.domain);
  CHECK(te.domain.C > 0);
  REQUIRE(te.recertified.has_value());
  CHECK(te.recertified->verdict == Verdict::proven);
  // kappa > C check
  const auto mc = markov_domain_check(m.mu, d.Y, k, tm.domain.kappa);
  CHECK(mc.verdict == Verdict::proven);
  const auto too_big = markov_domain_check(m.mu, d.Y, k, Rational(10));
  CHECK(too_big.verdict == Verdict::refuted);
}

TEST_CASE("flow kernels reject bad input") {
  CHECK_THROWS_AS(kernel_from_flow({{1, 2}, {3, 1}}), Error);  // not symmetric
  CHECK_THROWS_AS(kernel_from_flow({{0, 0}, {0, 1}}), Error);  // empty row
}
