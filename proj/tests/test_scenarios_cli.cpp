// Report plumbing (hashing, CSV/JSON emission) and the declarative scenario layer:
// strict config parsing, catalog round-trips, pure byte-stable rendering, and file
// emission with the documented exit codes.
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "occ/report.hpp"
#include "occ/scenarios.hpp"

using namespace occ;
namespace fs = std::filesystem;

namespace {

// Small but complete configs used across the cases.
const char* kHeatConfig = R"({
  "job": "price",
  "scenario": "heat-occupation",
  "seed": 7,
  "params": {"n_paths": 400, "dt": 0.015625, "points": [[0.0, 0.0], [0.3, 0.5]]}
})";

const char* kVerifyConfig = R"({
  "job": "verify",
  "scenario": "diagnostics",
  "seed": 11,
  "params": {"suite": ["derivative-orders", "projection-tail", "cil-trace"], "scale": "quick"}
})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("occ-test-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

}  // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hash_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("meta block carries the config hash and the seed") {
  const Json m = meta_json("some canonical text", 42);
  CHECK(m.at("config_hash").get<std::string>() == hash_hex(fnv1a64("some canonical text")));
  CHECK(m.at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("CSV builder: hash comment, width checks, deterministic number format") {
  CsvBuilder csv("cfg", 9);
  csv.header({"a", "b"});
  csv.row(std::vector<double>{0.5, 1.0 / 3.0});
  const std::string s = csv.str();
  CHECK(s.rfind("# config_hash=", 0) == 0);
  CHECK(s.find("seed=9") != std::string::npos);
  CHECK(s.find("a,b\n") != std::string::npos);
  CHECK(s.find("0.5,0.33333333333333331\n") != std::string::npos);
  CHECK_THROWS_AS(csv.row(std::vector<double>{1.0}), PreconditionError);
}

TEST_CASE("whole-file writers round-trip and create parent directories") {
  TempDir tmp;
  const std::string path = (tmp.path / "nested" / "dir" / "x.json").string();
  Json j;
  j["k"] = 1.5;
  write_json_file(path, j);
  const std::string back = read_file(path);
  CHECK(back == "{\n  \"k\": 1.5\n}\n");
}

TEST_CASE("the scenario catalog lists five families whose templates round-trip") {
  const auto& catalog = scenario_catalog();
  REQUIRE(catalog.size() == 5);
  std::vector<std::string> names;
  for (const auto& info : catalog) {
    names.push_back(info.name);
    CHECK(!info.description.empty());
    const ScenarioConfig cfg = parse_config(info.template_config.dump());
    CHECK(cfg.scenario == info.name);
    CHECK(cfg.job == info.default_job);
  }
  for (const char* expected :
       {"heat-occupation", "timer", "uvm-bsb", "hedging", "diagnostics"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  }
}

TEST_CASE("the parser is strict about shape, names and the mandatory seed") {
  CHECK_THROWS_AS((void)parse_config("{ this is not json"), PreconditionError);
  // Missing seed.
  CHECK_THROWS_AS(
      (void)parse_config(R"({"job":"price","scenario":"timer","params":{}})"),
      PreconditionError);
  // Unknown top-level key.
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"job":"price","scenario":"timer","seed":1,"bogus":1,"params":{}})"),
      PreconditionError);
  // Unknown scenario and job.
  CHECK_THROWS_AS(
      (void)parse_config(R"({"job":"price","scenario":"nope","seed":1,"params":{}})"),
      PreconditionError);
  CHECK_THROWS_AS(
      (void)parse_config(R"({"job":"dance","scenario":"timer","seed":1,"params":{}})"),
      PreconditionError);
  // Unknown family parameter key.
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"job":"price","scenario":"timer","seed":1,"params":{"n_pathz":10}})"),
      PreconditionError);
  // Unknown coefficient name inside a family parameter.
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"job":"price","scenario":"timer","seed":1,"params":{"sigma":{"name":"warp"}}})"),
      PreconditionError);
  // Unknown diagnostic in a verify suite.
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"job":"verify","scenario":"diagnostics","seed":1,"params":{"suite":["nope"]}})"),
      PreconditionError);
  // Well-formed config parses.
  const ScenarioConfig ok = parse_config(kHeatConfig);
  CHECK(ok.job == "price");
  CHECK(ok.scenario == "heat-occupation");
  CHECK(ok.seed == 7);
}

TEST_CASE("the canonical config text ignores the output directory and worker count") {
  ScenarioConfig a = parse_config(kHeatConfig);
  ScenarioConfig b = a;
  b.out_dir = "elsewhere";
  b.threads = 7;
  CHECK(canonical_config_text(a) == canonical_config_text(b));
  ScenarioConfig c = a;
  c.seed = 8;
  CHECK(canonical_config_text(a) != canonical_config_text(c));
}

TEST_CASE("rendering is pure and byte-identical across worker counts") {
  ScenarioConfig cfg = parse_config(kHeatConfig);
  cfg.threads = 1;
  const Rendered one = render_scenario(cfg);
  cfg.threads = 2;
  const Rendered two = render_scenario(cfg);
  REQUIRE(!one.files.empty());
  REQUIRE(one.files.size() == two.files.size());
  for (const auto& [name, content] : one.files) {
    REQUIRE(two.files.count(name) == 1);
    CHECK(content == two.files.at(name));
  }
  CHECK(one.exit_code == 0);
  // Every rendered file embeds the config hash.
  const std::string tag = hash_hex(fnv1a64(canonical_config_text(cfg)));
  for (const auto& [name, content] : one.files) {
    CHECK(content.find(tag) != std::string::npos);
  }
}

TEST_CASE("a fast verify subset renders gating results and a verify report") {
  const ScenarioConfig cfg = parse_config(kVerifyConfig);
  const Rendered r = render_scenario(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.files.count("verify.json") == 1);
  const Json v = Json::parse(r.files.at("verify.json"));
  CHECK(v.at("all_gating_pass").get<bool>());
  CHECK(v.at("criteria").size() == 3);
}

TEST_CASE("run_scenario writes every rendered file under the output directory") {
  TempDir tmp;
  ScenarioConfig cfg = parse_config(kHeatConfig);
  cfg.out_dir = (tmp.path / "reports").string();
  const int code = run_scenario(cfg);
  CHECK(code == 0);
  const Rendered expected = render_scenario(cfg);
  for (const auto& [name, content] : expected.files) {
    const std::string written = read_file((fs::path(cfg.out_dir) / name).string());
    CHECK(written == content);
  }
}

TEST_CASE("simulate jobs emit path summaries and a full first-path trace") {
  ScenarioConfig cfg = parse_config(R"({
    "job": "simulate",
    "scenario": "timer",
    "seed": 3,
    "params": {"n_paths": 32, "dt": 0.0078125, "budget": 0.02,
               "sigma": {"name": "sin", "base": 0.2, "amp": 0.1}, "c_star": 400}
  })");
  const Rendered r = render_scenario(cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.files.count("paths.csv") == 1);
  CHECK(r.files.count("trace.csv") == 1);
  CHECK(r.files.count("simulate.json") == 1);
  const Json s = Json::parse(r.files.at("simulate.json"));
  CHECK(s.at("meta").at("seed").get<int>() == 3);
}
