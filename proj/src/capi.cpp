#include "gexp/gexp.h"

#include <cstdlib>
#include <cstring>
#include <new>

#include "commands.hpp"

struct gexp_instance {
  gexp::MeasuredGroupoid m;
};

struct gexp_result {
  gexp::Verdict verdict;
  std::string certificate, table, csv;
};

namespace {

thread_local std::string last_error;

template <class F>
gexp_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return GEXP_OK;
  } catch (const gexp::Error& e) {
    last_error = e.what();
    return static_cast<gexp_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed document: ") + e.what();
    return GEXP_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GEXP_INTERNAL;
  } catch (const std::invalid_argument& e) {
    last_error = e.what();
    return GEXP_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    last_error = e.what();
    return GEXP_INVALID_RANGE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GEXP_INTERNAL;
  }
}

gexp_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return GEXP_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* gexp_version(void) { return "0.1.0"; }

const char* gexp_status_name(gexp_status status) {
  return gexp::error_code_name(static_cast<gexp::ErrorCode>(status));
}

const char* gexp_last_error(void) { return last_error.c_str(); }

gexp_status gexp_instance_load(const char* path, gexp_instance** out) {
  if (!path || !out) return null_arg("path/out");
  return guarded([&] { *out = new gexp_instance{gexp::io::load_gpd(path)}; });
}

gexp_status gexp_instance_from_json(const char* text, gexp_instance** out) {
  if (!text || !out) return null_arg("text/out");
  return guarded([&] { *out = new gexp_instance{gexp::io::gpd_from_json(gexp::io::parse_json(text, "instance"))}; });
}

gexp_status gexp_instance_from_spec(const char* text, gexp_instance** out) {
  if (!text || !out) return null_arg("text/out");
  return guarded(
      [&] { *out = new gexp_instance{gexp::io::instance_from_spec(gexp::io::parse_json(text, "instance spec"))}; });
}

gexp_status gexp_instance_example(const char* name, size_t n, gexp_instance** out) {
  if (!name || !out) return null_arg("name/out");
  return guarded([&] { *out = new gexp_instance{gexp::io::builtin_instance(name, n)}; });
}

size_t gexp_instance_atoms(const gexp_instance* inst) { return inst ? inst->m.atoms() : 0; }
size_t gexp_instance_elements(const gexp_instance* inst) { return inst ? inst->m.groupoid.size() : 0; }

gexp_status gexp_instance_to_json(const gexp_instance* inst, char** out) {
  if (!inst || !out) return null_arg("inst/out");
  return guarded([&] { *out = dup(gexp::io::gpd_to_json(inst->m).dump(2)); });
}

void gexp_instance_free(gexp_instance* inst) { delete inst; }

gexp_status gexp_run(const char* command, const gexp_instance* inst, const char* options, gexp_result** out) {
  if (!command || !out) return null_arg("command/out");
  return guarded([&] {
    const auto opts = options ? gexp::io::parse_json(options, "options") : gexp::io::Json::object();
    auto r = gexp::cmd::run(command, inst ? &inst->m : nullptr, opts);
    *out = new gexp_result{r.verdict, r.certificate.dump(2), std::move(r.table), std::move(r.csv)};
  });
}

gexp_verdict gexp_result_verdict(const gexp_result* res) {
  if (!res) return GEXP_UNKNOWN;
  switch (res->verdict) {
    case gexp::Verdict::proven: return GEXP_PROVEN;
    case gexp::Verdict::refuted: return GEXP_REFUTED;
    default: return GEXP_UNKNOWN;
  }
}

const char* gexp_result_certificate(const gexp_result* res) { return res ? res->certificate.c_str() : ""; }
const char* gexp_result_table(const gexp_result* res) { return res ? res->table.c_str() : ""; }
const char* gexp_result_csv(const gexp_result* res) { return res ? res->csv.c_str() : ""; }
void gexp_result_free(gexp_result* res) { delete res; }

gexp_status gexp_write_file(const char* path, const char* data) {
  if (!path || !data) return null_arg("path/data");
  return guarded([&] { gexp::io::write_file_atomic(path, data); });
}

void gexp_string_free(char* s) { std::free(s); }

}  // extern "C"
