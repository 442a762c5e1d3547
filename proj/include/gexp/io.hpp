#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gexp/core.hpp"
#include "gexp/expansion.hpp"
#include "gexp/graphgpd.hpp"
#include "gexp/markov.hpp"
#include "gexp/roe.hpp"

namespace gexp::io {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become ErrorCode::parse with line and column.
Json parse_json(std::string_view text, std::string_view what = "input");
std::string read_file(const std::string& path);
/// Writes through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& data);

/// Rational from a JSON number or "p/q" string; numbers are read from their
/// decimal text, so 0.99 is 99/100.
Rational rational_from(const Json& j);
Json rational_json(const Rational& q);

/// gpd/1 instance: elements, units, source, range, inverse, compose triples,
/// length, weights.
MeasuredGroupoid gpd_from_json(const Json& j);
Json gpd_to_json(const MeasuredGroupoid& m);
MeasuredGroupoid load_gpd(const std::string& path);

/// Instance from a factory spec: a gpd/1 object, {"file": path},
/// {"pair": {"dist": [[...]], "weights": [...]}},
/// {"action": {"points": n, "generators"|"perms": [...], "lengths": [...], "weights": [...]}},
/// {"family": [spec, ...]} or {"example": name, "n": n, "w": weight}.
MeasuredGroupoid instance_from_spec(const Json& spec);
/// Built-ins: pair-cycle, pair-complete, pair-path, action-zn, pendant.
MeasuredGroupoid builtin_instance(const std::string& name, std::size_t n, const Rational& w = Rational(1, 50));

Json atom_set_json(const AtomSet& a);
AtomSet atom_set_from(const Json& j, std::size_t universe);
Json element_set_json(const ElementSet& s);
ElementSet element_set_from(const Json& j, std::size_t universe);
Json decomposable_json(const DecomposableSet& k);

Json to_json(const Certificate& c);
Json to_json(const AsymptoticCertificate& c);
Json to_json(const FolnerResult& f);
Json to_json(const StructureStep& s);
Json to_json(const CheegerResult& c);
Json to_json(const SpectralReport& s);
Json to_json(const QuasiLocalReport& r);
Json to_json(const ApproxResult& r);
Json to_json(const GraphCertificate& c);
Json to_json(const Report617& r);
Json path_json(const DirectedGraph& g, const Path& p);
Json cylinder_union_json(const DirectedGraph& g, const CylinderUnion& a);
Json matrix_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from(const Json& j);

/// gpdrun/1 run configuration.
struct RunConfig {
  std::string command;
  Json instance;   // factory spec, may be null
  Json options;    // object
  std::string out, csv;
};
RunConfig parse_run_config(std::string_view text);

}  // namespace gexp::io
