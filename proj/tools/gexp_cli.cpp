// Command-line front end. Talks to the library only through gexp.h.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gexp/gexp.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitError = 1;

struct Flags {
  std::vector<std::string> example;
  std::string instance, config, out, csv, certificate;
  std::optional<std::uint64_t> exact_limit, seed, budget, n_max, k, M, p, depth;
  std::optional<std::string> C, alpha, beta, radius, epsilon, ladder, comparison;
  std::vector<std::string> blocks, positional;
  bool graph617 = false, json = false, quiet = false;
};

struct InstanceDeleter {
  void operator()(gexp_instance* p) const { gexp_instance_free(p); }
};
struct ResultDeleter {
  void operator()(gexp_result* p) const { gexp_result_free(p); }
};
using InstancePtr = std::unique_ptr<gexp_instance, InstanceDeleter>;
using ResultPtr = std::unique_ptr<gexp_result, ResultDeleter>;

struct Failure {
  std::string message;
};

void check(gexp_status s) {
  if (s != GEXP_OK) throw Failure{std::string(gexp_status_name(s)) + ": " + gexp_last_error()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Failure{what + ": " + e.what()};
  }
}

InstancePtr example_instance(const std::vector<std::string>& args) {
  if (args.size() != 2) throw Failure{"--example expects a name and a size, e.g. --example pair-cycle 12"};
  std::size_t n = 0;
  try {
    n = std::stoul(args[1]);
  } catch (const std::exception&) {
    throw Failure{"bad size '" + args[1] + "'"};
  }
  gexp_instance* raw = nullptr;
  check(gexp_instance_example(args[0].c_str(), n, &raw));
  return InstancePtr(raw);
}

InstancePtr load_instance(const Flags& f, const Json& config_instance) {
  gexp_instance* raw = nullptr;
  if (!f.example.empty()) return example_instance(f.example);
  if (!f.instance.empty()) {
    check(gexp_instance_load(f.instance.c_str(), &raw));
    return InstancePtr(raw);
  }
  if (!config_instance.is_null()) {
    check(gexp_instance_from_spec(config_instance.dump().c_str(), &raw));
    return InstancePtr(raw);
  }
  return nullptr;
}

Json options_from(const Flags& f, Json base) {
  if (!base.is_object()) base = Json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v) base[key] = *v;
  };
  put("exact_limit", f.exact_limit);
  put("seed", f.seed);
  put("budget", f.budget);
  put("n_max", f.n_max);
  put("k", f.k);
  put("M", f.M);
  put("p", f.p);
  put("depth", f.depth);
  put("C", f.C);
  put("beta", f.beta);
  put("radius", f.radius);
  put("epsilon", f.epsilon);
  put("comparison", f.comparison);
  if (f.alpha) {
    // a comma list means several levels
    if (f.alpha->find(',') != std::string::npos) {
      Json arr = Json::array();
      std::stringstream ss(*f.alpha);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) arr.push_back(item);
      base["alpha"] = arr;
    } else {
      base["alpha"] = *f.alpha;
    }
  }
  if (f.ladder) base["epsilon_ladder"] = *f.ladder;
  if (!f.csv.empty()) base["csv"] = true;
  return base;
}

int exit_code(gexp_verdict v) {
  switch (v) {
    case GEXP_PROVEN: return 0;
    case GEXP_REFUTED: return 2;
    default: return 3;
  }
}

int execute(std::string command, Flags f) {
  Json config_instance, config_options;
  if (!f.config.empty()) {
    Json cfg = parse(slurp(f.config), f.config);
    if (!cfg.is_object() || cfg.value("format", "") != "gpdrun/1") throw Failure{f.config + ": not a gpdrun/1 config"};
    if (command == "run") {
      if (!cfg.contains("command")) throw Failure{f.config + ": missing \"command\""};
      command = cfg.at("command").get<std::string>();
    }
    if (cfg.contains("instance")) config_instance = cfg.at("instance");
    if (cfg.contains("options")) config_options = cfg.at("options");
    if (f.out.empty() && cfg.contains("out")) f.out = cfg.at("out").get<std::string>();
    if (f.csv.empty() && cfg.contains("csv")) f.csv = cfg.at("csv").get<std::string>();
  } else if (command == "run") {
    throw Failure{"run needs --config"};
  }

  InstancePtr inst;
  Json options = options_from(f, config_options);
  if (command == "example") {
    if (f.positional.empty()) throw Failure{"example needs a name"};
    const std::string name = f.positional[0];
    if (name == "graph617") {
      command = "graph617";
      if (f.positional.size() > 1 && !f.k) options["k"] = std::stoull(f.positional[1]);
      if (f.positional.size() > 2 && !f.M) options["M"] = std::stoull(f.positional[2]);
    } else {
      inst = example_instance(f.positional);
    }
  } else if (command == "family") {
    if (f.graph617) {
      Json g = options.contains("graph617") ? options["graph617"] : Json::object();
      if (f.k) g["k"] = *f.k;
      if (f.M) g["M"] = *f.M;
      if (f.p) g["p_max"] = *f.p;
      options["graph617"] = g;
    }
    if (!f.blocks.empty()) {
      Json blocks = Json::array();
      for (const auto& b : f.blocks) {
        // a block is a gpd/1 path or an inline spec
        if (!b.empty() && (b[0] == '{' || b[0] == '[')) blocks.push_back(parse(b, "block"));
        else blocks.push_back(Json{{"file", b}});
      }
      options["blocks"] = blocks;
    }
  } else if (command == "verify") {
    const std::string path = !f.certificate.empty() ? f.certificate : (f.positional.empty() ? "" : f.positional[0]);
    if (path.empty()) throw Failure{"verify needs a certificate file"};
    options["certificate"] = parse(slurp(path), path);
  } else {
    inst = load_instance(f, config_instance);
    if (!inst) throw Failure{command + " needs --instance, --example or a config with an instance"};
  }

  gexp_result* raw = nullptr;
  check(gexp_run(command.c_str(), inst.get(), options.dump().c_str(), &raw));
  ResultPtr res(raw);
  if (f.json) std::cout << gexp_result_certificate(res.get()) << '\n';
  else if (!f.quiet) std::cout << gexp_result_table(res.get());
  if (!f.out.empty()) check(gexp_write_file(f.out.c_str(), gexp_result_certificate(res.get())));
  if (!f.csv.empty()) check(gexp_write_file(f.csv.c_str(), gexp_result_csv(res.get())));
  return exit_code(gexp_result_verdict(res.get()));
}

void common_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--example", f.example, "built-in instance: NAME N")->expected(2);
  sub->add_option("--instance", f.instance, "gpd/1 instance file");
  sub->add_option("--config", f.config, "gpdrun/1 configuration file");
  sub->add_option("--exact-limit", f.exact_limit, "largest atom count scanned exhaustively (<= 20)");
  sub->add_option("--seed", f.seed, "seed for sampled scans");
  sub->add_option("--budget", f.budget, "sample budget beyond the exact limit");
  sub->add_option("--C", f.C, "expansion constant");
  sub->add_option("--alpha", f.alpha, "measure level(s), comma separated");
  sub->add_option("--beta", f.beta, "upper measure level");
  sub->add_option("--radius", f.radius, "ball radius used for K");
  sub->add_option("--epsilon", f.epsilon, "Folner tolerance");
  sub->add_option("--epsilon-ladder", f.ladder, "comma separated tolerances");
  sub->add_option("--comparison", f.comparison, "strict or non_strict")->check(CLI::IsMember({"strict", "non_strict"}));
  sub->add_option("--n-max", f.n_max, "largest exhaustion step");
  sub->add_option("--out", f.out, "write the certificate here");
  sub->add_option("--csv", f.csv, "write scan rows here");
  sub->add_flag("--json", f.json, "print the certificate instead of the table");
  sub->add_flag("--quiet", f.quiet, "print nothing");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expansion and quasi-locality certificates for finite measured groupoids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gexp_version());

  Flags f;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "check the groupoid axioms of an instance"},
      {"certify-expansion", "certify or refute domain measured expansion for one ball"},
      {"certify-asymptotic", "build and certify an asymptotic expansion schedule"},
      {"folner", "largest Folner set for a ball"},
      {"structure", "exhaustion by expanding domains"},
      {"markov", "Markov kernel, Cheeger constant, spectral gap"},
      {"quasilocal", "quasi-locality of the averaging projection per ball"},
      {"approx-projection", "propagation-controlled approximants of the averaging projection"},
      {"example", "built-in instances: pair-cycle, pair-path, pair-complete, pendant, action-zn (each N), graph617"},
      {"family", "uniform checks over a family of blocks"},
      {"verify", "re-check a certificate"},
      {"run", "run a gpdrun/1 configuration"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common_flags(sub, f);
    if (name == "example" || name == "verify") sub->add_option("args", f.positional, "positional arguments");
    if (name == "example" || name == "family") {
      sub->add_option("--k", f.k, "graph617 branching");
      sub->add_option("--M", f.M, "graph617 vertex window");
      sub->add_option("--p", f.p, "graph617 largest witness index");
      sub->add_option("--depth", f.depth, "cylinder depth cap");
    }
    if (name == "family") {
      sub->add_option("--block", f.blocks, "block instance (gpd/1 path or inline spec)");
      sub->add_flag("--graph617", f.graph617, "use the graph617 witness blocks");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }
  try {
    return execute(app.get_subcommands().front()->get_name(), f);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.message << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
