// Command-line scenario runner: parse a declarative JSON config, execute a
// simulate / price / verify / diagnose job, and emit CSV + JSON reports whose bytes
// depend only on the config and seed (never on the worker count).
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"

#include "occ/scenarios.hpp"

namespace {

int run_job(const std::string& job, const std::string& config_path, const CLI::App* sub,
            std::uint64_t seed, std::int64_t paths, double dt, const std::string& out_dir,
            int threads) {
  occ::Json j;
  try {
    j = occ::Json::parse(occ::read_file(config_path));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: cannot load config '%s': %s\n", config_path.c_str(), e.what());
    return 2;
  }
  j["job"] = job;
  if (sub->count("--seed") > 0) j["seed"] = seed;
  if (sub->count("--out") > 0) {
    j["out"] = out_dir;
  } else if (!j.contains("out")) {
    if (const char* env = std::getenv("OCC_OUT_DIR")) j["out"] = std::string(env);
  }
  if (sub->count("--threads") > 0) j["threads"] = threads;
  if (sub->count("--paths") > 0 || sub->count("--dt") > 0) {
    if (!j.contains("params") || !j.at("params").is_object()) j["params"] = occ::Json::object();
    if (sub->count("--paths") > 0) j["params"]["n_paths"] = paths;
    if (sub->count("--dt") > 0) j["params"]["dt"] = dt;
  }
  try {
    const occ::ScenarioConfig cfg = occ::parse_config(j.dump());
    return occ::run_scenario(cfg);
  } catch (const occ::PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupied-process numerics: occupation-measure simulation, pricing with "
               "independent oracles, and a gated verification suite."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::int64_t paths = 0;
  double dt = 0.0;
  int threads = 1;

  const char* job_names[] = {"simulate", "price", "verify", "diagnose"};
  const char* job_help[] = {
      "run paths of a scenario model and dump per-path summaries plus one full trace",
      "run a pricing scenario and report the estimate next to its oracle",
      "run gated verification checks; exit 1 if any gating check fails",
      "run verification checks in report-only mode (never fails the exit code)",
  };
  CLI::App* subs[4];
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(job_names[i], job_help[i]);
    sub->add_option("--config", config_path, "scenario config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--paths", paths, "override params.n_paths")->check(CLI::PositiveNumber);
    sub->add_option("--dt", dt, "override params.dt")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (default: config 'out' or $OCC_OUT_DIR)");
    sub->add_option("--threads", threads, "worker threads; never affects report bytes")
        ->check(CLI::PositiveNumber);
    subs[i] = sub;
  }

  bool machine_readable = false;
  CLI::App* list = app.add_subcommand("list", "print the builtin scenario catalog");
  list->add_flag("--machine-readable", machine_readable,
                 "emit the catalog as JSON (name, description, default job, template)");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    if (machine_readable) {
      occ::Json out = occ::Json::array();
      for (const occ::ScenarioInfo& info : occ::scenario_catalog()) {
        occ::Json entry;
        entry["name"] = info.name;
        entry["description"] = info.description;
        entry["default_job"] = info.default_job;
        entry["template"] = info.template_config;
        out.push_back(entry);
      }
      std::printf("%s\n", out.dump(2).c_str());
    } else {
      for (const occ::ScenarioInfo& info : occ::scenario_catalog()) {
        std::printf("%s  (default job: %s)\n  %s\n  template: %s\n\n", info.name.c_str(),
                    info.default_job.c_str(), info.description.c_str(),
                    info.template_config.dump().c_str());
      }
    }
    return 0;
  }

  for (int i = 0; i < 4; ++i) {
    if (subs[i]->parsed()) {
      return run_job(job_names[i], config_path, subs[i], seed, paths, dt, out_dir, threads);
    }
  }
  return 2;
}
