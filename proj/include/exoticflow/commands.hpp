#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exoticflow/config.hpp"
#include "exoticflow/fields.hpp"
#include "exoticflow/manifold.hpp"

namespace exoticflow {

// Exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitBlowup = 3 };

struct Fixture {
  TwistedSphere sphere;
  AmbientVectorField drift;
  std::vector<AmbientVectorField> noise;
};

// Throws BadParams for invalid fixture parameters.
Fixture build_fixture(const RunConfig& cfg);

// Writes trajectory.csv and manifest.json into cfg.output_dir. created_at is
// the manifest timestamp (ISO 8601, UTC); pass empty to use the current time.
int cmd_simulate(const RunConfig& cfg, std::ostream& log, const std::string& created_at = "");

// Runs the suites named in cfg.checks ("all" selects every suite), writes
// report.json and returns kExitVerifyFailed if any suite fails.
int cmd_verify(const RunConfig& cfg, std::ostream& log);
nlohmann::json run_suites(const RunConfig& cfg);
const std::vector<std::string>& suite_names();

// Writes probe.json and probe_shells.csv for the configured h2.
int cmd_probe(const RunConfig& cfg, std::ostream& log);

}  // namespace exoticflow
