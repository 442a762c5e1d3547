#include "gexp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gexp/constructions.hpp"

namespace gexp::io {

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << what << ": line " << line << ", column " << col << ": " << e.what();
    fail(ErrorCode::parse, os.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp);
    out << data;
    if (!out) fail(ErrorCode::io, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorCode::io, "cannot rename into " + path);
}

Rational rational_from(const Json& j) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number()) return parse_rational(j.dump());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("bad rational: ") + e.what());
  }
  fail(ErrorCode::parse, "expected a number or \"p/q\" string, got " + j.dump());
}

Json rational_json(const Rational& q) { return to_string(q); }

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::parse, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::vector<std::size_t> index_array(const Json& j, const char* key) {
  const Json& a = field(j, key);
  if (!a.is_array()) fail(ErrorCode::parse, std::string("\"") + key + "\" must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : a) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(ErrorCode::parse, std::string("\"") + key + "\" holds a non-index " + v.dump());
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::vector<Rational> rational_array(const Json& a, const char* key) {
  if (!a.is_array()) fail(ErrorCode::parse, std::string("\"") + key + "\" must be an array");
  std::vector<Rational> out;
  for (const auto& v : a) out.push_back(rational_from(v));
  return out;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (j.is_object() && j.contains(key) && !j.at(key).is_null()) return j.at(key).get<T>();
  return fallback;
}

}  // namespace

MeasuredGroupoid gpd_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::parse, "instance must be an object");
  if (get_or<std::string>(j, "format", "") != "gpd/1") fail(ErrorCode::parse, "format must be \"gpd/1\"");
  GroupoidTables t;
  const Json& el = field(j, "elements");
  if (el.is_array()) {
    t.element_count = el.size();
    for (const auto& l : el) t.labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
  } else if (el.is_number_unsigned() || el.is_number_integer()) {
    t.element_count = el.get<std::size_t>();
  } else {
    fail(ErrorCode::parse, "\"elements\" must be a count or a label array");
  }
  t.units = index_array(j, "units");
  t.source = index_array(j, "source");
  t.range = index_array(j, "range");
  t.inverse = index_array(j, "inverse");
  for (const auto& c : field(j, "compose")) {
    if (!c.is_array() || c.size() != 3) fail(ErrorCode::parse, "compose entries are [left, right, result]");
    t.compose.push_back({c[0].get<std::size_t>(), c[1].get<std::size_t>(), c[2].get<std::size_t>()});
  }
  auto check_len = [&](std::size_t n, const char* key) {
    if (n != t.element_count)
      fail(ErrorCode::parse, std::string("\"") + key + "\" needs one entry per element");
  };
  check_len(t.source.size(), "source");
  check_len(t.range.size(), "range");
  check_len(t.inverse.size(), "inverse");
  for (auto v : t.source)
    if (v >= t.element_count) fail(ErrorCode::parse, "source entry out of range");
  for (auto v : t.range)
    if (v >= t.element_count) fail(ErrorCode::parse, "range entry out of range");
  for (auto v : t.inverse)
    if (v >= t.element_count) fail(ErrorCode::parse, "inverse entry out of range");
  for (auto v : t.units)
    if (v >= t.element_count) fail(ErrorCode::parse, "unit out of range");
  for (const auto& c : t.compose)
    if (c.left >= t.element_count || c.right >= t.element_count || c.result >= t.element_count)
      fail(ErrorCode::parse, "compose entry out of range");
  MeasuredGroupoid m;
  const auto n_units = t.units.size();
  m.groupoid = FiniteGroupoid(std::move(t));
  m.length.values = rational_array(field(j, "length"), "length");
  check_len(m.length.values.size(), "length");
  auto w = rational_array(field(j, "weights"), "weights");
  if (w.size() != n_units) fail(ErrorCode::parse, "\"weights\" needs one entry per unit");
  m.mu = AtomicMeasureSpace(std::move(w));
  return m;
}

Json gpd_to_json(const MeasuredGroupoid& m) {
  const auto& t = m.groupoid.tables();
  Json j;
  j["format"] = "gpd/1";
  if (t.labels.size() == t.element_count && !t.labels.empty())
    j["elements"] = t.labels;
  else
    j["elements"] = t.element_count;
  j["units"] = t.units;
  j["source"] = t.source;
  j["range"] = t.range;
  j["inverse"] = t.inverse;
  Json comp = Json::array();
  for (const auto& c : t.compose) comp.push_back({c.left, c.right, c.result});
  j["compose"] = std::move(comp);
  Json len = Json::array();
  for (const auto& l : m.length.values) len.push_back(rational_json(l));
  j["length"] = std::move(len);
  Json w = Json::array();
  for (const auto& x : m.mu.weights()) w.push_back(rational_json(x));
  j["weights"] = std::move(w);
  return j;
}

MeasuredGroupoid load_gpd(const std::string& path) { return gpd_from_json(parse_json(read_file(path), path)); }

MeasuredGroupoid builtin_instance(const std::string& name, std::size_t n, const Rational& w) {
  if (n == 0) fail(ErrorCode::invalid_argument, "instance size must be positive");
  if (name == "pair-cycle") return pair_cycle(n);
  if (name == "pair-complete") return pair_complete(n);
  if (name == "pair-path") return pair_path(n);
  if (name == "action-zn") return action_zn(n);
  if (name == "pendant") return pair_complete_with_pendant(n, w);
  fail(ErrorCode::invalid_argument, "unknown built-in instance \"" + name + "\"");
}

MeasuredGroupoid instance_from_spec(const Json& spec) {
  if (spec.is_string()) return load_gpd(spec.get<std::string>());
  if (!spec.is_object()) fail(ErrorCode::parse, "instance spec must be an object or a file name");
  if (spec.contains("format")) return gpd_from_json(spec);
  if (spec.contains("file")) return load_gpd(spec.at("file").get<std::string>());
  if (spec.contains("example")) {
    const Rational w = spec.contains("w") ? rational_from(spec.at("w")) : Rational(1, 50);
    return builtin_instance(spec.at("example").get<std::string>(), get_or<std::size_t>(spec, "n", 0), w);
  }
  if (spec.contains("pair")) {
    const Json& p = spec.at("pair");
    FiniteMetricSpace x;
    for (const auto& row : field(p, "dist")) {
      std::vector<std::optional<Rational>> r;
      for (const auto& d : row) {
        if (d.is_null()) r.emplace_back(std::nullopt);
        else r.emplace_back(rational_from(d));
      }
      x.dist.push_back(std::move(r));
    }
    check_metric(x);
    AtomicMeasureSpace mu = p.contains("weights") ? AtomicMeasureSpace(rational_array(p.at("weights"), "weights"))
                                                  : AtomicMeasureSpace::uniform(x.size());
    return pair_groupoid(x, mu);
  }
  if (spec.contains("action")) {
    const Json& a = spec.at("action");
    const auto points = field(a, "points").get<std::size_t>();
    std::vector<Rational> w = a.contains("weights") ? rational_array(a.at("weights"), "weights")
                                                    : std::vector<Rational>(points, Rational(1, static_cast<unsigned long>(points)));
    if (a.contains("generators")) {
      auto gens = a.at("generators").get<std::vector<Permutation>>();
      return transformation_groupoid(action_from_generators(points, gens, std::move(w)));
    }
    GroupAction act;
    act.points = points;
    act.elements = field(a, "perms").get<std::vector<Permutation>>();
    act.lengths = rational_array(field(a, "lengths"), "lengths");
    act.weights = std::move(w);
    check_action(act);
    return transformation_groupoid(act);
  }
  if (spec.contains("family")) {
    std::vector<MeasuredGroupoid> blocks;
    for (const auto& b : spec.at("family")) blocks.push_back(instance_from_spec(b));
    if (blocks.empty()) fail(ErrorCode::invalid_argument, "empty family");
    return family_union(blocks).whole;
  }
  fail(ErrorCode::parse, "unrecognized instance spec " + spec.dump());
}

Json atom_set_json(const AtomSet& a) { return a.to_vector(); }
AtomSet atom_set_from(const Json& j, std::size_t universe) {
  AtomSet a(universe);
  for (const auto& v : j) {
    const auto x = v.get<std::size_t>();
    if (x >= universe) fail(ErrorCode::parse, "atom index out of range");
    a.insert(x);
  }
  return a;
}
Json element_set_json(const ElementSet& s) { return s.to_vector(); }
ElementSet element_set_from(const Json& j, std::size_t universe) {
  ElementSet s(universe);
  for (const auto& v : j) {
    const auto x = v.get<std::size_t>();
    if (x >= universe) fail(ErrorCode::parse, "element index out of range");
    s.insert(x);
  }
  return s;
}

Json decomposable_json(const DecomposableSet& k) {
  Json j;
  Json pieces = Json::array();
  for (const auto& p : k.pieces) pieces.push_back(p.members().to_vector());
  j["pieces"] = std::move(pieces);
  j["N"] = k.piece_count();
  j["length_bound"] = rational_json(k.length_bound);
  if (k.unital_index) j["unital_index"] = *k.unital_index;
  if (k.sigma) j["sigma"] = *k.sigma;
  return j;
}

namespace {

Json opt_set(const std::optional<AtomSet>& a) { return a ? atom_set_json(*a) : Json(nullptr); }

}  // namespace

Json to_json(const Certificate& c) {
  Json j;
  j["verdict"] = verdict_name(c.verdict);
  j["method"] = method_name(c.method);
  j["C"] = rational_json(c.C);
  j["alpha_lo"] = rational_json(c.alpha_lo);
  j["beta_hi"] = rational_json(c.beta_hi);
  j["comparison"] = c.comparison == Comparison::strict ? "strict" : "non_strict";
  j["witness"] = opt_set(c.witness);
  j["witness_ratio"] = c.witness ? rational_json(c.witness_ratio) : Json(nullptr);
  j["worst"] = opt_set(c.worst);
  j["worst_ratio"] = c.worst ? rational_json(c.worst_ratio) : Json(nullptr);
  j["sets_checked"] = c.sets_checked;
  j["seed"] = c.seed;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json to_json(const AsymptoticCertificate& c) {
  Json j;
  j["verdict"] = verdict_name(c.verdict);
  Json lv = Json::array();
  for (const auto& l : c.levels) lv.push_back(to_json(l));
  j["levels"] = std::move(lv);
  return j;
}

Json to_json(const FolnerResult& f) {
  Json j;
  j["F"] = atom_set_json(f.F);
  j["epsilon"] = rational_json(f.epsilon);
  j["mode"] = f.maximal == FolnerMode::exact ? "exact" : "greedy_local";
  j["boundary"] = rational_json(f.boundary);
  j["post_check"] = f.post_check ? Json(*f.post_check) : Json(nullptr);
  j["post_witness"] = opt_set(f.post_witness);
  return j;
}

Json to_json(const StructureStep& s) {
  Json j;
  j["n"] = s.n;
  j["alpha_n"] = rational_json(s.alpha_n);
  j["boost_C"] = rational_json(s.boost.C);
  j["power_m"] = s.power.m;
  j["power_redecomposed"] = s.power.redecomposed;
  j["nominal_pieces_log2"] = s.power.nominal_pieces_log2;
  j["nominal_length"] = rational_json(s.power.nominal_length);
  j["Z"] = atom_set_json(s.Z);
  j["X"] = atom_set_json(s.X);
  j["F"] = atom_set_json(s.folner.F);
  j["Y"] = atom_set_json(s.domain.Y);
  j["C"] = rational_json(s.domain.C);
  j["N"] = s.domain.N;
  j["L"] = rational_json(s.domain.L);
  j["L_coarse"] = coarse_length(s.domain.L);
  j["length_actual"] = rational_json(s.length_actual);
  j["theta"] = rational_json(s.domain.theta);
  j["measure"] = rational_json(s.measure);
  j["measure_bound"] = rational_json(s.measure_bound);
  j["ratio_bound_ok"] = s.ratio_bound_ok;
  j["recertified"] = s.recertified ? to_json(*s.recertified) : Json(nullptr);
  j["verdict"] = verdict_name(s.verdict);
  return j;
}

Json to_json(const CheegerResult& c) {
  Json j;
  j["exact"] = c.exact;
  j["value"] = static_cast<double>(c.value);
  j["value_exact"] = c.value_exact ? rational_json(*c.value_exact) : Json(nullptr);
  j["argmin"] = opt_set(c.argmin);
  j["lo"] = static_cast<double>(c.lo);
  j["hi"] = static_cast<double>(c.hi);
  j["vacuous"] = c.vacuous;
  return j;
}

Json to_json(const SpectralReport& s) {
  Json j;
  j["lambda"] = s.lambda;
  j["gap"] = s.laplacian_gap;
  j["eigen_tolerance"] = s.eigen_tolerance;
  j["spectrum"] = s.spectrum;
  j["constant_residual"] = s.constant_residual;
  return j;
}

Json to_json(const QuasiLocalReport& r) {
  Json j;
  j["value"] = r.value;
  j["method"] = method_name(r.method);
  j["A"] = opt_set(r.witness_A);
  j["B"] = opt_set(r.witness_B);
  j["sets_checked"] = r.sets_checked;
  j["seed"] = r.seed;
  return j;
}

Json matrix_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const auto z = m(i, k);
      if (z.imag() == 0) row.push_back(z.real());
      else row.push_back({z.real(), z.imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::parse, "matrix must be an array of rows");
  const auto n = j.size();
  Eigen::MatrixXcd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) fail(ErrorCode::parse, "matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      const Json& z = j[i][k];
      if (z.is_array()) m(i, k) = {z.at(0).get<double>(), z.at(1).get<double>()};
      else m(i, k) = z.get<double>();
    }
  }
  return m;
}

Json to_json(const ApproxResult& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["C_n"] = rational_json(r.C_n);
  j["N_n"] = r.N_n;
  j["L_n"] = rational_json(r.L_n);
  j["theta_n"] = rational_json(r.theta_n);
  j["Y"] = atom_set_json(r.Y);
  j["a_priori"] = r.a_priori;
  j["domain_term"] = r.domain_term;
  j["error_bound"] = r.a_priori + r.domain_term;
  j["measured_error"] = r.measured_error;
  j["propagation_ok"] = r.propagation_ok;
  j["nominal_pieces_log2"] = r.nominal_pieces_log2;
  j["nominal_length"] = rational_json(r.nominal_length);
  j["K_declared"] = element_set_json(r.K_declared);
  j["T"] = matrix_json(r.T.matrix);
  return j;
}

Json path_json(const DirectedGraph& g, const Path& p) {
  Json v = Json::array();
  v.push_back(p.start);
  for (auto e : p.edges) v.push_back(g.range(e));
  return v;
}

Json cylinder_union_json(const DirectedGraph& g, const CylinderUnion& a) {
  Json out = Json::array();
  for (const auto& p : a.cylinders()) out.push_back(path_json(g, p));
  return out;
}

Json to_json(const GraphCertificate& c) {
  Json j;
  j["verdict"] = verdict_name(c.verdict);
  j["method"] = method_name(c.method);
  j["C"] = rational_json(c.C);
  j["alpha"] = rational_json(c.alpha);
  j["comparison"] = c.comparison == Comparison::strict ? "strict" : "non_strict";
  j["atoms"] = c.atoms;
  j["sets_checked"] = c.sets_checked;
  j["seed"] = c.seed;
  j["weight_ratio"] = rational_json(c.weight_ratio);
  j["witness_measure"] = c.witness ? rational_json(c.witness_measure) : Json(nullptr);
  j["witness_saturated"] = c.witness ? rational_json(c.witness_saturated) : Json(nullptr);
  j["witness_cylinders"] = c.witness ? Json(c.witness->cylinders().size()) : Json(nullptr);
  return j;
}

Json to_json(const Report617& r) {
  Json j;
  j["k"] = r.k;
  j["window"] = r.window;
  j["recursion_ok"] = r.recursion_ok;
  j["boundaries_decrease"] = r.boundaries_decrease;
  Json ws = Json::array();
  for (const auto& w : r.witnesses) {
    Json x;
    x["p"] = w.p;
    x["n_p"] = w.n_p;
    x["mu_Z0np"] = rational_json(w.mu_Z0np);
    x["mu_A"] = rational_json(w.mu_A);
    x["mu_saturated"] = rational_json(w.mu_saturated);
    x["boundary"] = rational_json(w.boundary);
    x["cylinders"] = w.A.cylinders().size();
    x["z_bound_ok"] = w.z_bound_ok;
    x["lower_ok"] = w.lower_ok;
    x["upper_ok"] = w.upper_ok;
    x["half_ok"] = w.half_ok;
    x["boundary_ok"] = w.boundary_ok;
    ws.push_back(std::move(x));
  }
  j["witnesses"] = std::move(ws);
  return j;
}

RunConfig parse_run_config(std::string_view text) {
  const Json j = parse_json(text, "config");
  if (!j.is_object()) fail(ErrorCode::parse, "config must be an object");
  if (get_or<std::string>(j, "format", "") != "gpdrun/1") fail(ErrorCode::parse, "format must be \"gpdrun/1\"");
  RunConfig rc;
  rc.command = get_or<std::string>(j, "command", "");
  rc.instance = j.contains("instance") ? j.at("instance") : Json(nullptr);
  rc.options = j.contains("options") ? j.at("options") : Json::object();
  if (!rc.options.is_object()) fail(ErrorCode::parse, "\"options\" must be an object");
  rc.out = get_or<std::string>(j, "out", "");
  rc.csv = get_or<std::string>(j, "csv", "");
  return rc;
}

}  // namespace gexp::io
