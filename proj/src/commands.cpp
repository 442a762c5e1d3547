#include "commands.hpp"

#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "gexp/constructions.hpp"

namespace gexp::cmd {

namespace {

using io::Json;

// ---------- option helpers ----------

bool has(const Json& o, const char* key) { return o.is_object() && o.contains(key) && !o.at(key).is_null(); }

Rational orat(const Json& o, const char* key, const Rational& def) {
  return has(o, key) ? io::rational_from(o.at(key)) : def;
}

std::uint64_t ouint(const Json& o, const char* key, std::uint64_t def) {
  if (!has(o, key)) return def;
  const Json& v = o.at(key);
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) return v.get<std::uint64_t>();
  if (v.is_string()) return std::stoull(v.get<std::string>());
  fail(ErrorCode::invalid_argument, std::string("option ") + key + " must be a non-negative integer");
}

std::vector<double> ladder(const Json& o, std::vector<double> def) {
  if (!has(o, "epsilon_ladder")) return def;
  const Json& v = o.at("epsilon_ladder");
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(to_double(io::rational_from(x)));
  } else if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(to_double(parse_rational(item)));
  } else {
    out.push_back(to_double(io::rational_from(v)));
  }
  for (double e : out)
    if (!(e > 0)) fail(ErrorCode::invalid_range, "epsilon values must be positive");
  if (out.empty()) fail(ErrorCode::invalid_argument, "empty epsilon ladder");
  return out;
}

const std::vector<double> kFullLadder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

ScanOptions scan_from(const Json& o) {
  ScanOptions s;
  s.exact_limit = ouint(o, "exact_limit", s.exact_limit);
  if (s.exact_limit > kMaxExactLimit)
    fail(ErrorCode::invalid_range, "exact_limit is capped at " + std::to_string(kMaxExactLimit));
  s.budget = ouint(o, "budget", s.budget);
  s.seed = ouint(o, "seed", s.seed);
  if (has(o, "comparison")) {
    const auto c = o.at("comparison").get<std::string>();
    if (c == "strict") s.comparison = Comparison::strict;
    else if (c == "non_strict") s.comparison = Comparison::non_strict;
    else fail(ErrorCode::invalid_argument, "comparison must be strict or non_strict");
  }
  return s;
}

Json scan_json(const ScanOptions& s) {
  return Json{{"exact_limit", s.exact_limit},
              {"budget", s.budget},
              {"seed", s.seed},
              {"comparison", s.comparison == Comparison::strict ? "strict" : "non_strict"}};
}

AtomSet domain_from(const Json& o, std::size_t atoms) {
  return has(o, "Y") ? io::atom_set_from(o.at("Y"), atoms) : AtomSet::full(atoms);
}

MeasuredGroupoid normalized(const MeasuredGroupoid& m) { return {m.groupoid, m.length, m.mu.normalized()}; }

std::string rs(const Rational& q) { return to_string(q); }

std::string set_str(const AtomSet& a) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  a.for_each([&](Atom x) {
    os << (first ? "" : ",") << x;
    first = false;
  });
  os << '}';
  return os.str();
}

Verdict verdict_from(const std::string& s) {
  if (s == verdict_name(Verdict::proven)) return Verdict::proven;
  if (s == verdict_name(Verdict::refuted)) return Verdict::refuted;
  return Verdict::unknown;
}

Outcome envelope(const std::string& command, const MeasuredGroupoid* inst, const Json& options, const ScanOptions& s) {
  Outcome out;
  out.certificate["format"] = "gexpcert/1";
  out.certificate["command"] = command;
  out.certificate["instance"] = inst ? io::gpd_to_json(*inst) : Json(nullptr);
  out.certificate["options"] = options.is_null() ? Json::object() : options;
  out.certificate["scan"] = scan_json(s);
  out.certificate["seed"] = s.seed;
  return out;
}

void finish(Outcome& out, Verdict v, std::ostringstream& table) {
  out.verdict = v;
  out.certificate["verdict"] = verdict_name(v);
  table << "verdict: " << verdict_name(v) << '\n';
  out.table = table.str();
}

const MeasuredGroupoid& need(const MeasuredGroupoid* inst, const std::string& command) {
  if (!inst) fail(ErrorCode::invalid_argument, command + " needs an instance");
  return *inst;
}

// ---------- commands ----------

Outcome cmd_validate(const MeasuredGroupoid& m, const Json& o) {
  auto out = envelope("validate", &m, o, scan_from(o));
  const auto rep = validate(m);
  Json v = Json::array();
  std::ostringstream t;
  t << "atoms: " << m.atoms() << ", elements: " << m.groupoid.size() << '\n';
  for (const auto& x : rep.violations) {
    v.push_back({{"axiom", x.axiom}, {"witness", x.witness}, {"detail", x.detail}});
    t << "violation " << x.axiom << ": " << x.detail << '\n';
  }
  out.certificate["result"] = {{"ok", rep.ok()}, {"violations", v}};
  finish(out, rep.ok() ? Verdict::proven : Verdict::refuted, t);
  return out;
}

Outcome cmd_certify_expansion(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("certify-expansion", &m, o, s);
  const Rational radius = orat(o, "radius", 1);
  const Rational c = orat(o, "C", Rational(1, 2));
  const Rational alpha = orat(o, "alpha", 0);
  const Rational beta = orat(o, "beta", Rational(1, 2));
  const AtomSet y = domain_from(o, m.atoms());
  const auto k = ball_decomposition(m, radius);
  const auto cert = certify_expansion(m.mu, y, k, c, alpha, beta, s);
  std::ostringstream t;
  t << "K = B_" << rs(radius) << " (N = " << k.piece_count() << ", L = " << rs(k.length_bound) << ")\n";
  t << "C = " << rs(c) << ", range [" << rs(alpha) << ", " << rs(beta) << "] of mu(Y), method "
    << method_name(cert.method) << ", sets checked " << cert.sets_checked << '\n';
  if (cert.worst) t << "worst ratio " << rs(cert.worst_ratio) << " at " << set_str(*cert.worst) << '\n';
  if (cert.witness) t << "witness " << set_str(*cert.witness) << " ratio " << rs(cert.witness_ratio) << '\n';
  out.certificate["result"] = io::to_json(cert);
  out.certificate["result"]["K"] = {{"radius", rs(radius)}, {"N", k.piece_count()}, {"L", rs(k.length_bound)}};
  if (has(o, "csv") && o.at("csv").get<bool>() && y.count() <= s.exact_limit) {
    std::ostringstream csv;
    csv << "size,measure,ratio\n";
    const auto ya = y.to_vector();
    const Rational my = m.mu.measure(y);
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << ya.size()); ++mask) {
      AtomSet a(m.atoms());
      for (std::size_t i = 0; i < ya.size(); ++i)
        if (mask >> i & 1u) a.insert(ya[i]);
      const Rational ma = m.mu.measure(a);
      if (ma < alpha * my || ma > beta * my) continue;
      csv << a.count() << ',' << to_double(ma) << ',' << to_double(expansion_ratio(m.mu, k, a, y)) << '\n';
    }
    out.csv = csv.str();
  }
  finish(out, cert.verdict, t);
  return out;
}

ExpansionParams schedule_from(const MeasuredGroupoid& m, const Json& o, const ScanOptions& s,
                              std::vector<Rational>& alphas) {
  if (has(o, "schedule")) {
    ExpansionParams p;
    for (const auto& l : o.at("schedule")) {
      const Rational a = io::rational_from(l.at("alpha"));
      p.add(ExpansionLevel{a, io::rational_from(l.at("C")), ball_decomposition(m, io::rational_from(l.at("radius")))});
      alphas.push_back(a);
    }
    return p;
  }
  if (has(o, "alpha")) {
    const Json& a = o.at("alpha");
    if (a.is_array())
      for (const auto& x : a) alphas.push_back(io::rational_from(x));
    else
      alphas.push_back(io::rational_from(a));
  } else {
    alphas = default_alphas(m.mu);
  }
  return ball_schedule(m, alphas, s);
}

Outcome cmd_certify_asymptotic(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("certify-asymptotic", &m, o, s);
  std::vector<Rational> alphas;
  const auto params = schedule_from(m, o, s, alphas);
  auto cert = certify_asymptotic(m.mu, params, s);
  std::ostringstream t;
  Json res = io::to_json(cert);
  Json missing = Json::array();
  Verdict v = cert.verdict;
  std::set<Rational> radii(m.length.values.begin(), m.length.values.end());
  for (const auto& a : alphas) {
    bool found = false;
    for (const auto& l : params.levels) found |= l.alpha == a;
    if (found) continue;
    // no ball expands at this level: exhibit a set that no ball moves
    const auto k = ball_decomposition(m, *radii.rbegin());
    const auto c = certify_expansion(m.mu, AtomSet::full(m.atoms()), k, 0, a, Rational(1, 2), s);
    missing.push_back({{"alpha", rs(a)}, {"largest_ball", io::to_json(c)}});
    t << "alpha " << rs(a) << ": no ball expands";
    if (c.witness) t << ", witness " << set_str(*c.witness);
    t << '\n';
    v = Verdict::refuted;
  }
  for (std::size_t i = 0; i < params.levels.size(); ++i) {
    const auto& l = params.levels[i];
    res["levels"][i]["N"] = l.N();
    res["levels"][i]["L"] = rs(l.L());
    t << "alpha " << rs(l.alpha) << ": C = " << rs(l.C) << ", N = " << l.N() << ", L = " << rs(l.L()) << ", "
      << verdict_name(cert.levels[i].verdict) << '\n';
  }
  res["missing"] = std::move(missing);
  out.certificate["result"] = std::move(res);
  finish(out, v, t);
  return out;
}

Outcome cmd_folner(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("folner", &m, o, s);
  const Rational radius = orat(o, "radius", 1);
  const Rational eps = has(o, "epsilon") ? orat(o, "epsilon", 0) : orat(o, "C", Rational(1, 2));
  const AtomSet y = domain_from(o, m.atoms());
  const auto k = ball_decomposition(m, radius);
  const auto f = maximal_folner(m.mu, y, k, eps, s);
  std::ostringstream t;
  t << "K = B_" << rs(radius) << ", epsilon = " << rs(eps) << '\n';
  t << "maximal Folner set " << set_str(f.F) << " boundary " << rs(f.boundary) << '\n';
  if (f.post_check) t << "post-check " << (*f.post_check ? "passed" : "failed") << '\n';
  out.certificate["result"] = io::to_json(f);
  finish(out, f.F.empty() ? Verdict::proven : Verdict::refuted, t);
  return out;
}

Outcome cmd_structure(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("structure", &m, o, s);
  const Rational c = orat(o, "C", Rational(1, 4));
  const auto n_max = ouint(o, "n_max", 3);
  const MeasuredGroupoid pm = normalized(m);
  std::vector<Rational> alphas;
  ScanOptions sched = s;
  sched.exact_limit = std::max(sched.exact_limit, std::min(m.atoms(), kMaxExactLimit));
  const auto params = schedule_from(pm, o, sched, alphas);
  StructureOptions so;
  so.scan = s;
  const auto steps = structure_exhaustion(pm, params, c, n_max, so);
  Json arr = Json::array();
  std::ostringstream t;
  Verdict v = Verdict::proven;
  t << "n  mu(Y_n)        bound          N    theta   verdict\n";
  for (const auto& st : steps) {
    arr.push_back(io::to_json(st));
    t << std::setw(2) << st.n << "  " << std::setw(13) << rs(st.measure) << "  " << std::setw(13)
      << rs(st.measure_bound) << "  " << std::setw(3) << st.domain.N << "  " << std::setw(6) << rs(st.domain.theta)
      << "  " << verdict_name(st.verdict) << '\n';
    if (st.verdict == Verdict::refuted) v = Verdict::refuted;
    else if (st.verdict == Verdict::unknown && v == Verdict::proven) v = Verdict::unknown;
  }
  out.certificate["result"] = {{"C", rs(c)}, {"steps", arr}};
  finish(out, v, t);
  return out;
}

Outcome cmd_markov(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("markov", &m, o, s);
  const Rational radius = orat(o, "radius", 1);
  const AtomSet y = domain_from(o, m.atoms());
  const auto k = ball_decomposition(m, radius);
  const auto b = build_kernel(m.mu, y, k);
  const auto ch = cheeger(b, s);
  const auto sp = spectral_gap(b);
  const auto sw = sandwich(ch, sp);
  Json kernel = Json::array();
  for (std::size_t i = 0; i < b.k(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < b.k(); ++j) row.push_back(static_cast<double>(b.P(i, j)));
    kernel.push_back(std::move(row));
  }
  Json mt = Json::array();
  for (const auto& x : b.mu_tilde) mt.push_back(static_cast<double>(x));
  std::ostringstream t;
  t << "K = B_" << rs(radius) << " (N = " << k.piece_count() << "), |Y| = " << b.k() << '\n';
  t << "kappa = " << (ch.value_exact ? rs(*ch.value_exact) : std::to_string(static_cast<double>(ch.value)))
    << (ch.exact ? " (exact)" : " (interval)") << '\n';
  t << "lambda = " << std::setprecision(12) << sp.lambda << ", 1 - lambda = " << sp.laplacian_gap << '\n';
  t << "sandwich kappa^2/2 <= 1-lambda: " << (sw.lower_ok ? "ok" : "FAIL")
    << ", 1-lambda <= 2 kappa: " << (sw.upper_ok ? "ok" : "FAIL") << '\n';
  Verdict v = sw.lower_ok && sw.upper_ok ? Verdict::proven : Verdict::refuted;
  Json res = {{"atoms", b.atoms},
              {"K", {{"radius", rs(radius)}, {"N", k.piece_count()}}},
              {"cheeger", io::to_json(ch)},
              {"spectral", io::to_json(sp)},
              {"sandwich", {{"lower_ok", sw.lower_ok}, {"upper_ok", sw.upper_ok}}},
              {"kernel", kernel},
              {"mu_tilde", mt},
              {"reversibility_error", static_cast<double>(b.reversibility_error)}};
  if (has(o, "C")) {
    const auto mc = markov_domain_check(m.mu, y, k, orat(o, "C", 0), s);
    res["domain_check"] = verdict_name(mc.verdict);
    t << "kappa > " << rs(orat(o, "C", 0)) << ": " << verdict_name(mc.verdict) << '\n';
    if (mc.verdict != Verdict::proven) v = mc.verdict;
  }
  out.certificate["result"] = std::move(res);
  finish(out, v, t);
  return out;
}

Outcome cmd_quasilocal(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("quasilocal", &m, o, s);
  const auto pm = normalized(m);
  const auto eps = ladder(o, kFullLadder);
  const auto p = averaging_projection(pm.mu, AtomSet::full(pm.atoms()));
  std::set<Rational> radii(pm.length.values.begin(), pm.length.values.end());
  Json per_radius = Json::array();
  std::vector<std::pair<Rational, double>> values;
  std::ostringstream t;
  for (const auto& r : radii) {
    const auto k = ball_decomposition(pm, r);
    const auto rep = quasi_local_norm(p, relation_of(k, pm.atoms()), s);
    values.emplace_back(r, rep.value);
    Json j = io::to_json(rep);
    j["radius"] = rs(r);
    j["N"] = k.piece_count();
    per_radius.push_back(std::move(j));
    t << "B_" << rs(r) << " (N = " << k.piece_count() << "): sup ||chi_A P chi_B|| = " << rep.value << '\n';
  }
  Json levels = Json::array();
  Verdict v = Verdict::proven;
  for (double e : eps) {
    Json lv = {{"epsilon", e}};
    bool found = false;
    for (const auto& [r, val] : values)
      if (val < e) {
        lv["radius"] = rs(r);
        found = true;
        break;
      }
    if (!found) {
      lv["radius"] = nullptr;
      v = Verdict::refuted;
    }
    t << "eps " << e << ": " << (found ? "radius " + lv["radius"].get<std::string>() : std::string("no ball")) << '\n';
    levels.push_back(std::move(lv));
  }
  out.certificate["result"] = {{"balls", per_radius}, {"levels", levels}};
  finish(out, v, t);
  return out;
}

Outcome cmd_approx(const MeasuredGroupoid& m, const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("approx-projection", &m, o, s);
  const auto eps = ladder(o, kFullLadder);
  ApproxOptions ao;
  ao.C = orat(o, "C", Rational(1, 4));
  ao.n_max = ouint(o, "n_max", ao.n_max);
  ao.scan = s;
  Json rows = Json::array();
  std::ostringstream t;
  Verdict v = Verdict::proven;
  t << "eps       n  m            N    theta   a priori     sqrt(mu(G\\Y))  measured     propagation\n";
  for (double e : eps) {
    try {
      const auto r = approximate_projection(m, e, ao);
      Json j = io::to_json(r);
      j["epsilon"] = e;
      rows.push_back(std::move(j));
      t << std::setw(8) << e << "  " << r.n << "  " << std::setw(11) << r.m << "  " << std::setw(3) << r.N_n << "  "
        << std::setw(6) << rs(r.theta_n) << "  " << std::setw(11) << r.a_priori << "  " << std::setw(13)
        << r.domain_term << "  " << std::setw(11) << r.measured_error << "  " << (r.propagation_ok ? "ok" : "FAIL")
        << '\n';
    } catch (const Error& err) {
      if (err.code() != ErrorCode::insufficient_instruments && err.code() != ErrorCode::missing_level) throw;
      rows.push_back({{"epsilon", e}, {"error", error_code_name(err.code())}, {"message", err.what()}});
      t << std::setw(8) << e << "  insufficient instruments: " << err.what() << '\n';
      v = Verdict::refuted;
    }
  }
  out.certificate["result"] = {{"C", rs(ao.C)}, {"rows", rows}};
  finish(out, v, t);
  return out;
}

Outcome cmd_example(const MeasuredGroupoid& m, const Json& o) {
  auto out = envelope("example", &m, o, scan_from(o));
  const auto rep = validate(m);
  std::ostringstream t;
  t << "atoms: " << m.atoms() << ", elements: " << m.groupoid.size() << ", valid: " << (rep.ok() ? "yes" : "no")
    << '\n';
  out.certificate["result"] = {{"atoms", m.atoms()}, {"elements", m.groupoid.size()}, {"valid", rep.ok()}};
  finish(out, rep.ok() ? Verdict::proven : Verdict::refuted, t);
  return out;
}

Outcome cmd_graph617(const Json& o) {
  auto s = scan_from(o);
  const auto k = ouint(o, "k", 2);
  const auto window = ouint(o, "M", k == 1 ? 12 : 30);
  auto out = envelope("graph617", nullptr, o, s);
  std::ostringstream t;
  if (k == 1) {
    if (!has(o, "comparison")) s.comparison = Comparison::non_strict;
    out.certificate["scan"] = scan_json(s);
    const auto g = graph617(1, window);
    const auto depth = ouint(o, "depth", std::min<std::uint64_t>(10, window - 2));
    const auto cert = expansion_check_cylinders(g, orat(o, "C", Rational(1, 2)), orat(o, "alpha", 0), depth, s);
    t << "k = 1, window " << window << ", depth " << depth << ": " << cert.sets_checked << " unions of "
      << cert.atoms << " cylinders checked, comparison "
      << (s.comparison == Comparison::strict ? "strict" : "non-strict") << '\n';
    if (cert.witness)
      t << "counterexample: mu(A) = " << rs(cert.witness_measure) << ", mu(r(B1 A)) = " << rs(cert.witness_saturated)
        << '\n';
    out.certificate["result"] = io::to_json(cert);
    finish(out, cert.verdict, t);
    return out;
  }
  const auto p_max = ouint(o, "p", 5);
  const auto rep = example617(k, window, p_max);
  t << "k = " << k << ", window " << window << ", recursion identity " << (rep.recursion_ok ? "holds" : "FAILS")
    << '\n';
  t << "p  n_p  mu(Z_0,n_p)      mu(A_p)                    boundary        identities\n";
  bool all = rep.recursion_ok && rep.boundaries_decrease;
  for (const auto& w : rep.witnesses) {
    const bool ok = w.z_bound_ok && w.lower_ok && w.upper_ok && w.half_ok && w.boundary_ok;
    all = all && ok;
    t << w.p << "  " << std::setw(3) << w.n_p << "  " << std::setw(15) << rs(w.mu_Z0np) << "  " << std::setw(25)
      << rs(w.mu_A) << "  " << std::setw(14) << rs(w.boundary) << "  " << (ok ? "exact" : "FAIL") << '\n';
  }
  t << "boundaries strictly decrease: " << (rep.boundaries_decrease ? "yes" : "no") << '\n';
  out.certificate["result"] = io::to_json(rep);
  finish(out, all ? Verdict::refuted : Verdict::unknown, t);
  return out;
}

Outcome cmd_family(const Json& o) {
  const auto s = scan_from(o);
  auto out = envelope("family", nullptr, o, s);
  std::ostringstream t;
  const auto eps = ladder(o, {1e-1, 1e-2, 1e-3});
  if (has(o, "graph617")) {
    const Json& gspec = o.at("graph617");
    const auto k = ouint(gspec, "k", 2);
    const auto window = ouint(gspec, "M", 30);
    const auto p_max = ouint(gspec, "p_max", 4);
    std::vector<std::uint64_t> radii;
    if (has(o, "radii")) radii = o.at("radii").get<std::vector<std::uint64_t>>();
    else radii = {1, 2, 3, 4};
    const auto rep = example617(k, window, p_max);
    Json rows = Json::array();
    bool uniform_fails = true;
    for (auto L : radii) {
      // largest ||chi_A P chi_B||^2 over the blocks, A = A_p, B off r(B_L A_p)
      Rational best = -1;
      std::size_t best_p = 0;
      Json per = Json::array();
      for (const auto& w : rep.witnesses) {
        const Rational v = averaging_block_norm_sq(rep.graph, w.A, L);
        per.push_back({{"p", w.p}, {"norm_sq", rs(v)}});
        if (v > best) {
          best = v;
          best_p = w.p;
        }
      }
      Json lv = Json::array();
      for (double e : eps) {
        const Rational e2 = from_double(e) * from_double(e);
        const bool fails = best >= e2;
        uniform_fails = uniform_fails && fails;
        lv.push_back({{"epsilon", e}, {"fails", fails}});
      }
      rows.push_back({{"L", L}, {"blocks", per}, {"worst_p", best_p}, {"worst_norm_sq", rs(best)}, {"levels", lv}});
      t << "L = " << L << ": worst block p = " << best_p << ", ||chi_A P chi_B||^2 = " << rs(best) << " ~ "
        << to_double(best) << '\n';
    }
    out.certificate["result"] = {{"graph617", rows}};
    finish(out, uniform_fails ? Verdict::refuted : Verdict::proven, t);
    return out;
  }
  if (!has(o, "blocks")) fail(ErrorCode::invalid_argument, "family needs \"blocks\" or \"graph617\"");
  std::vector<MeasuredGroupoid> blocks;
  for (const auto& b : o.at("blocks")) blocks.push_back(normalized(io::instance_from_spec(b)));
  if (blocks.empty()) fail(ErrorCode::invalid_argument, "empty family");
  const auto u = family_union(blocks);
  std::vector<WeightedOperator> ps;
  for (const auto& b : blocks) ps.push_back(averaging_projection(b.mu, AtomSet::full(b.atoms())));
  const auto p = family_assemble(ps);
  std::set<Rational> radii;
  for (const auto& b : blocks) radii.insert(b.length.values.begin(), b.length.values.end());
  Json rows = Json::array();
  std::vector<std::pair<Rational, double>> common;
  for (const auto& r : radii) {
    double worst = 0;
    Json per = Json::array();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto rep = quasi_local_norm(ps[i], relation_of(ball_decomposition(blocks[i], r), blocks[i].atoms()), s);
      worst = std::max(worst, rep.value);
      per.push_back(rep.value);
    }
    const auto ball_u = ball(u.whole.groupoid, u.whole.length, r);
    const auto rep_u = quasi_local_norm(p, relation_of(u.whole.groupoid, ball_u), s);
    rows.push_back({{"radius", rs(r)}, {"blocks", per}, {"max_block", worst}, {"union", io::to_json(rep_u)}});
    common.emplace_back(r, std::max(worst, rep_u.value));
    t << "B_" << rs(r) << ": max block value " << worst << ", union value " << rep_u.value << '\n';
  }
  Json levels = Json::array();
  Verdict v = Verdict::proven;
  for (double e : eps) {
    Json lv = {{"epsilon", e}, {"radius", nullptr}};
    for (const auto& [r, val] : common)
      if (val < e) {
        lv["radius"] = rs(r);
        break;
      }
    if (lv["radius"].is_null()) v = Verdict::refuted;
    t << "eps " << e << ": " << (lv["radius"].is_null() ? std::string("no common ball") : "common radius " + lv["radius"].get<std::string>()) << '\n';
    levels.push_back(std::move(lv));
  }
  out.certificate["instance"] = io::gpd_to_json(u.whole);
  out.certificate["result"] = {{"balls", rows}, {"levels", levels}};
  finish(out, v, t);
  return out;
}

// ---------- verification ----------

struct Checks {
  Json list = Json::array();
  bool ok = true;
  void add(const std::string& what, bool pass) {
    list.push_back({{"check", what}, {"ok", pass}});
    ok = ok && pass;
  }
};

bool admissible_compare(const Rational& ratio, const Rational& c, Comparison cmp) {
  return cmp == Comparison::strict ? ratio > c : ratio >= c;
}

void verify_expansion_cert(Checks& ch, const MeasuredGroupoid& m, const DecomposableSet& k, const AtomSet& y,
                           const Json& cert, const std::string& tag) {
  const Rational c = io::rational_from(cert.at("C"));
  const Rational lo = io::rational_from(cert.at("alpha_lo")), hi = io::rational_from(cert.at("beta_hi"));
  const auto cmp = cert.at("comparison").get<std::string>() == "strict" ? Comparison::strict : Comparison::non_strict;
  const Rational my = m.mu.measure(y);
  auto in_range = [&](const AtomSet& a) {
    const Rational ma = m.mu.measure(a);
    return ma > 0 && ma >= lo * my && ma <= hi * my && a.subset_of(y);
  };
  const Verdict v = verdict_from(cert.at("verdict").get<std::string>());
  if (!cert.at("witness").is_null()) {
    const auto w = io::atom_set_from(cert.at("witness"), m.atoms());
    const Rational r = expansion_ratio(m.mu, k, w, y);
    ch.add(tag + "witness ratio", r == io::rational_from(cert.at("witness_ratio")));
    ch.add(tag + "witness admissible and refuting", in_range(w) && !admissible_compare(r, c, cmp));
    ch.add(tag + "verdict refuted", v == Verdict::refuted);
  }
  if (!cert.at("worst").is_null()) {
    const auto w = io::atom_set_from(cert.at("worst"), m.atoms());
    const Rational r = expansion_ratio(m.mu, k, w, y);
    ch.add(tag + "worst ratio", r == io::rational_from(cert.at("worst_ratio")) && in_range(w));
    if (v == Verdict::proven) ch.add(tag + "worst ratio clears C", admissible_compare(r, c, cmp));
  }
}

Outcome verify(const Json& o) {
  if (!has(o, "certificate")) fail(ErrorCode::invalid_argument, "verify needs a certificate");
  Json cert = o.at("certificate");
  if (cert.is_string()) cert = io::parse_json(cert.get<std::string>(), "certificate");
  if (!cert.is_object() || cert.value("format", "") != "gexpcert/1") fail(ErrorCode::parse, "not a gexpcert/1 document");
  const std::string command = cert.at("command").get<std::string>();
  const Json& opts = cert.at("options");
  const Json& res = cert.at("result");
  std::optional<MeasuredGroupoid> m;
  if (!cert.at("instance").is_null()) m = io::gpd_from_json(cert.at("instance"));
  Outcome out;
  out.certificate["format"] = "gexpcert/1";
  out.certificate["command"] = "verify";
  out.certificate["of"] = command;
  Checks ch;
  std::ostringstream t;
  const Verdict claimed = verdict_from(cert.at("verdict").get<std::string>());

  if (command == "validate" || command == "example") {
    const bool ok = validate(*m).ok();
    ch.add("validation", (ok ? Verdict::proven : Verdict::refuted) == claimed);
  } else if (command == "certify-expansion") {
    const auto k = ball_decomposition(*m, orat(opts, "radius", 1));
    verify_expansion_cert(ch, *m, k, domain_from(opts, m->atoms()), res, "");
  } else if (command == "certify-asymptotic") {
    // the levels record C and alpha; rebuild K from the ball radius of each level
    std::set<Rational> radii(m->length.values.begin(), m->length.values.end());
    for (std::size_t i = 0; i < res.at("levels").size(); ++i) {
      const Json& lv = res.at("levels")[i];
      const auto tag = "level " + std::to_string(i) + ": ";
      // the ball with the recorded piece count and length bound
      std::optional<DecomposableSet> k;
      for (const auto& r : radii) {
        auto cand = ball_decomposition(*m, r);
        if (cand.piece_count() == lv.at("N").get<std::size_t>() && rs(cand.length_bound) == lv.at("L").get<std::string>()) {
          k = std::move(cand);
          break;
        }
      }
      ch.add(tag + "ball found", k.has_value());
      if (k) verify_expansion_cert(ch, *m, *k, AtomSet::full(m->atoms()), lv, tag);
    }
    for (const auto& miss : res.at("missing")) {
      const auto k = ball_decomposition(*m, *radii.rbegin());
      verify_expansion_cert(ch, *m, k, AtomSet::full(m->atoms()), miss.at("largest_ball"), "missing: ");
    }
  } else if (command == "folner") {
    const auto k = ball_decomposition(*m, orat(opts, "radius", 1));
    const auto y = domain_from(opts, m->atoms());
    const auto f = io::atom_set_from(res.at("F"), m->atoms());
    const Rational eps = io::rational_from(res.at("epsilon"));
    const Rational bd = m->mu.measure((saturate(k, f) - f) & y);
    ch.add("boundary", bd == io::rational_from(res.at("boundary")));
    ch.add("Folner inequality", bd <= eps * m->mu.measure(f));
    ch.add("verdict", (f.empty() ? Verdict::proven : Verdict::refuted) == claimed);
  } else if (command == "structure") {
    const auto pm = normalized(*m);
    const Rational c = io::rational_from(res.at("C"));
    for (const auto& st : res.at("steps")) {
      const auto n = st.at("n").get<std::size_t>();
      const auto y = io::atom_set_from(st.at("Y"), m->atoms());
      const Rational mu_y = pm.mu.measure(y);
      const Rational an = c / ((4 + 2 * c) * Rational(static_cast<unsigned long>(n + 1)));
      const Rational bound = (1 - an) * Rational(static_cast<unsigned long>(n), static_cast<unsigned long>(n + 1));
      const auto tag = "n = " + std::to_string(n) + ": ";
      ch.add(tag + "measure", mu_y == io::rational_from(st.at("measure")));
      ch.add(tag + "measure bound", mu_y > bound && bound == io::rational_from(st.at("measure_bound")));
    }
  } else if (command == "markov") {
    const auto k = ball_decomposition(*m, io::rational_from(res.at("K").at("radius")));
    const auto b = build_kernel(m->mu, domain_from(opts, m->atoms()), k);
    const Json& c = res.at("cheeger");
    if (!c.at("argmin").is_null() && c.at("exact").get<bool>()) {
      const auto a = io::atom_set_from(c.at("argmin"), m->atoms());
      const Real val = boundary_size(b, a) / b.mu_tilde_of(a);
      ch.add("cheeger argmin ratio", boost::multiprecision::abs(val - Real(c.at("value").get<double>())) < 1e-12);
      if (!c.at("value_exact").is_null()) {
        const auto ex = boundary_size_exact(b, a);
        Rational mt = 0;
        if (b.mu_tilde_exact)
          a.for_each([&](Atom x) { mt += (*b.mu_tilde_exact)[b.local(x)]; });
        ch.add("cheeger exact value", ex && mt > 0 && *ex / mt == io::rational_from(c.at("value_exact")));
      }
    }
    const auto sp = spectral_gap(b);
    ch.add("spectral gap", std::abs(sp.lambda - res.at("spectral").at("lambda").get<double>()) < 1e-10);
    const double kappa = c.at("value").get<double>(), gap = sp.laplacian_gap;
    if (c.at("exact").get<bool>()) ch.add("sandwich", kappa * kappa / 2 <= gap + 1e-9 && gap <= 2 * kappa + 1e-9);
  } else if (command == "quasilocal") {
    const auto pm = normalized(*m);
    const auto p = averaging_projection(pm.mu, AtomSet::full(pm.atoms()));
    std::vector<double> sq;
    for (const auto& w : pm.mu.as_doubles()) sq.push_back(std::sqrt(w));
    std::map<std::string, double> value;
    for (const auto& bj : res.at("balls")) {
      const auto r = bj.at("radius").get<std::string>();
      value[r] = bj.at("value").get<double>();
      if (bj.at("A").is_null()) continue;
      const auto k = ball_decomposition(pm, parse_rational(r));
      const auto a = io::atom_set_from(bj.at("A"), pm.atoms());
      const auto bset = io::atom_set_from(bj.at("B"), pm.atoms());
      ch.add("B_" + r + " complement", bset == relation_of(k, pm.atoms()).saturate(a).complement());
      const double v = block_norm(p.matrix, sq, a.to_vector(), bset.to_vector());
      ch.add("B_" + r + " witness value", std::abs(v - value[r]) < 1e-12);
    }
    for (const auto& lv : res.at("levels"))
      if (!lv.at("radius").is_null())
        ch.add("level " + std::to_string(lv.at("epsilon").get<double>()),
               value[lv.at("radius").get<std::string>()] < lv.at("epsilon").get<double>());
  } else if (command == "approx-projection") {
    const auto pm = normalized(*m);
    const auto p = averaging_projection(pm.mu, AtomSet::full(pm.atoms()));
    for (const auto& row : res.at("rows")) {
      const double e = row.at("epsilon").get<double>();
      const auto tag = "eps " + std::to_string(e) + ": ";
      if (row.contains("error")) {
        ch.add(tag + "recorded failure", claimed == Verdict::refuted);
        continue;
      }
      const WeightedOperator tm{io::matrix_from(row.at("T")), pm.mu};
      ch.add(tag + "measured error", (tm - p).norm() < e);
      const auto kd = io::element_set_from(row.at("K_declared"), pm.groupoid.size());
      ch.add(tag + "propagation", check_propagation(tm, relation_of(pm.groupoid, kd)).ok);
      using boost::multiprecision::pow;
      using boost::multiprecision::sqrt;
      const Real cn = to_real(io::rational_from(row.at("C_n")));
      const Real bound = Real(row.at("N_n").get<unsigned long>()) * sqrt(to_real(io::rational_from(row.at("theta_n")))) *
                         pow(1 - cn * cn / 4, Real(row.at("m").get<std::uint64_t>()));
      ch.add(tag + "a priori bound", bound < Real(e) / 2);
    }
  } else if (command == "graph617") {
    const auto k = ouint(opts, "k", 2);
    if (k >= 2) {
      const auto rep = example617(k, ouint(opts, "M", 30), ouint(opts, "p", 5));
      ch.add("recursion", rep.recursion_ok == res.at("recursion_ok").get<bool>());
      for (std::size_t i = 0; i < rep.witnesses.size(); ++i) {
        const auto& w = rep.witnesses[i];
        const Json& jw = res.at("witnesses").at(i);
        ch.add("p = " + std::to_string(w.p),
               rs(w.mu_A) == jw.at("mu_A").get<std::string>() && rs(w.boundary) == jw.at("boundary").get<std::string>() &&
                   w.n_p == jw.at("n_p").get<std::size_t>());
      }
    } else {
      auto redo = cmd_graph617(opts);
      ch.add("rerun", redo.verdict == claimed && redo.certificate["result"]["sets_checked"] == res.at("sets_checked"));
    }
  } else if (command == "family") {
    auto redo = cmd_family(opts);
    ch.add("rerun", redo.verdict == claimed && redo.certificate["result"] == res);
  } else {
    fail(ErrorCode::invalid_argument, "cannot verify command \"" + command + "\"");
  }
  if (m) out.certificate["instance_atoms"] = m->atoms();
  out.certificate["checks"] = ch.list;
  out.certificate["ok"] = ch.ok;
  for (const auto& c : ch.list) t << (c.at("ok").get<bool>() ? "ok    " : "FAIL  ") << c.at("check").get<std::string>() << '\n';
  finish(out, ch.ok ? Verdict::proven : Verdict::refuted, t);
  return out;
}

}  // namespace

Outcome run(const std::string& command, const MeasuredGroupoid* inst, const Json& options) {
  const Json o = options.is_null() ? Json::object() : options;
  if (!o.is_object()) fail(ErrorCode::invalid_argument, "options must be a JSON object");
  if (command == "validate") return cmd_validate(need(inst, command), o);
  if (command == "certify-expansion") return cmd_certify_expansion(need(inst, command), o);
  if (command == "certify-asymptotic") return cmd_certify_asymptotic(need(inst, command), o);
  if (command == "folner") return cmd_folner(need(inst, command), o);
  if (command == "structure") return cmd_structure(need(inst, command), o);
  if (command == "markov") return cmd_markov(need(inst, command), o);
  if (command == "quasilocal") return cmd_quasilocal(need(inst, command), o);
  if (command == "approx-projection") return cmd_approx(need(inst, command), o);
  if (command == "example") return cmd_example(need(inst, command), o);
  if (command == "graph617") return cmd_graph617(o);
  if (command == "family") return cmd_family(o);
  if (command == "verify") return verify(o);
  fail(ErrorCode::invalid_argument, "unknown command \"" + command + "\"");
}

}  // namespace gexp::cmd
