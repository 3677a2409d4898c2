// Declarative scenario runner: JSON configs name a builtin scenario family and a job
// kind (simulate | price | verify | diagnose); rendering is pure (filename -> content),
// so reports can be compared byte-for-byte and nothing is written until a job has fully
// succeeded. Every rendered file embeds the seed and the canonical config hash.
#ifndef OCC_SCENARIOS_HPP
#define OCC_SCENARIOS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "occ/report.hpp"

namespace occ {

struct ScenarioConfig {
  std::string job;       // simulate | price | verify | diagnose
  std::string scenario;  // heat-occupation | timer | uvm-bsb | hedging | diagnostics
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 1;
  Json params;           // family-specific knobs, validated at parse time
};

// Strict parser: unknown top-level keys, unknown family parameters, and unknown
// coefficient or policy names are rejected with field diagnostics; the seed is
// mandatory (no wall-clock seeding). Numeric controls must be positive.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

// Canonical text whose hash is embedded in reports. Excludes the output directory and
// the thread count: neither may influence report content.
std::string canonical_config_text(const ScenarioConfig& cfg);

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::string default_job;
  Json template_config;  // parses cleanly through parse_config (round-trip guarantee)
};
const std::vector<ScenarioInfo>& scenario_catalog();

struct Rendered {
  std::map<std::string, std::string> files;  // relative filename -> full content
  std::vector<std::string> summary;          // console lines
  int exit_code = 0;                         // nonzero iff a gating verify check failed
};

// Pure: builds every report in memory, writes nothing.
Rendered render_scenario(const ScenarioConfig& cfg);

// Renders, writes all files under cfg.out_dir, prints the summary, returns the exit code.
int run_scenario(const ScenarioConfig& cfg);

}  // namespace occ

#endif  // OCC_SCENARIOS_HPP
