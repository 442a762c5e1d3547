#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gexp/gexp.h"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(GEXP_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  Run r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch() {
  const auto d = std::filesystem::temp_directory_path() / "gexp_test_cli";
  std::filesystem::create_directories(d);
  return d;
}

nlohmann::ordered_json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::ordered_json::parse(in);
}

}  // namespace

TEST_CASE("spec examples and exit codes") {
  const auto dir = scratch();
  const auto cert = (dir / "k8.json").string();
  auto r = cli("certify-expansion --example pair-complete 8 --C 0.99 --out " + cert);
  CHECK(r.code == 0);
  CHECK(r.out.find("Proven") != std::string::npos);
  const auto j = read_json(cert);
  CHECK(j.at("format") == "gexpcert/1");
  CHECK(j.at("result").at("C") == "99/100");

  r = cli("example graph617 --k 2 --M 30 --p 5");
  CHECK(r.code == 2);
  CHECK(r.out.find("1/16384") != std::string::npos);  // boundary at p = 5, n_p = 12

  r = cli("markov --example pair-cycle 12");
  CHECK(r.code == 0);
  CHECK(r.out.find("kappa = 1/9 (exact)") != std::string::npos);
  CHECK(r.out.find("sandwich") != std::string::npos);

  r = cli("certify-expansion --example pair-cycle 8 --C 1/2");
  CHECK(r.code == 2);
  r = cli("certify-expansion --example pair-complete 22 --exact-limit 10 --budget 100");
  CHECK(r.code == 3);
}

TEST_CASE("errors exit with 1") {
  CHECK(cli("certify-expansion --example pair-complete 8 --exact-limit 21").code == 1);
  CHECK(cli("certify-expansion --example nosuch 8").code == 1);
  CHECK(cli("certify-expansion").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("certify-expansion --instance /nonexistent/file.json").code == 1);
  const auto bad = scratch() / "bad.json";
  std::ofstream(bad) << "{ \"format\": \"gpd/1\", ";
  const auto r = cli("validate --instance " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("line") != std::string::npos);
}

TEST_CASE("certificates re-verify") {
  const auto dir = scratch();
  const std::vector<std::string> runs{
      "certify-expansion --example pair-cycle 10 --C 1/3",
      "certify-asymptotic --example pair-cycle 8",
      "certify-asymptotic --example pendant 5",
      "folner --example pair-cycle 12 --epsilon 1/3",
      "structure --example pendant 7",
      "markov --example pendant 6 --C 1/100",
      "quasilocal --example pair-cycle 8",
      "approx-projection --example pair-complete 6 --epsilon-ladder 0.1,0.001",
      "validate --example action-zn 5",
      "example graph617 --k 1 --M 10",
      "example graph617 --k 2 --M 20 --p 3",
      "family --graph617 --k 2 --M 30 --p 4"};
  int i = 0;
  for (const auto& cmd : runs) {
    const auto out = (dir / ("c" + std::to_string(i++) + ".json")).string();
    const auto r = cli(cmd + " --out " + out);
    INFO(cmd);
    CHECK(r.code != 1);
    const auto v = cli("verify " + out);
    CHECK(v.code == 0);
    CHECK(v.out.find("FAIL") == std::string::npos);
  }
}

TEST_CASE("tampered certificates fail verification") {
  const auto dir = scratch();
  const auto out = (dir / "tamper.json").string();
  REQUIRE(cli("certify-expansion --example pair-cycle 8 --C 1/2 --out " + out).code == 2);
  auto j = read_json(out);
  j["result"]["witness_ratio"] = "1/7";
  std::ofstream(out) << j.dump();
  const auto v = cli("verify " + out);
  CHECK(v.code == 2);
  CHECK(v.out.find("FAIL") != std::string::npos);
}

TEST_CASE("csv scans and config files") {
  const auto dir = scratch();
  const auto csv = (dir / "scan.csv").string();
  REQUIRE(cli("certify-expansion --example pair-cycle 6 --C 1/3 --csv " + csv).code != 1);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "size,measure,ratio");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 6 + 15 + 20);  // subsets of size 1..3 of 6 atoms

  const auto cfg = dir / "run.json";
  const auto cert = (dir / "fromcfg.json").string();
  std::ofstream(cfg) << R"({"format": "gpdrun/1", "command": "markov", "instance": {"example": "pair-cycle", "n": 8}, "options": {"radius": 2}, "out": ")" << cert << "\"}";
  const auto r = cli("run --config " + cfg.string());
  CHECK(r.code == 0);
  CHECK(read_json(cert).at("result").at("K").at("radius") == "2");
}

TEST_CASE("C API") {
  gexp_instance* inst = nullptr;
  REQUIRE(gexp_instance_example("pair-cycle", 8, &inst) == GEXP_OK);
  CHECK(gexp_instance_atoms(inst) == 8);
  CHECK(gexp_instance_elements(inst) == 64);
  gexp_result* res = nullptr;
  REQUIRE(gexp_run("certify-expansion", inst, R"({"C": "1/2"})", &res) == GEXP_OK);
  CHECK(gexp_result_verdict(res) == GEXP_REFUTED);
  CHECK(std::string(gexp_result_certificate(res)).find("gexpcert/1") != std::string::npos);
  gexp_result_free(res);
  CHECK(gexp_run("certify-expansion", inst, R"({"exact_limit": 40})", &res) == GEXP_INVALID_RANGE);
  CHECK(std::string(gexp_last_error()).find("exact_limit") != std::string::npos);
  CHECK(gexp_run("certify-expansion", inst, "{oops", &res) == GEXP_PARSE);
  CHECK(gexp_run("nosuch", inst, nullptr, &res) == GEXP_INVALID_ARGUMENT);
  char* text = nullptr;
  REQUIRE(gexp_instance_to_json(inst, &text) == GEXP_OK);
  gexp_instance* again = nullptr;
  CHECK(gexp_instance_from_json(text, &again) == GEXP_OK);
  CHECK(gexp_instance_atoms(again) == 8);
  gexp_string_free(text);
  gexp_instance_free(again);
  gexp_instance_free(inst);
  CHECK(std::string(gexp_status_name(GEXP_WINDOW_EXCEEDED)) == "WindowExceeded");
  CHECK(gexp_instance_load("/nonexistent.json", &inst) == GEXP_IO);
  CHECK(gexp_run("graph617", nullptr, R"({"k": 2, "M": 8, "p": 5})", &res) == GEXP_WINDOW_EXCEEDED);
}
