#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "exoticflow/commands.hpp"

using namespace exoticflow;

int main(int argc, char** argv) {
  CLI::App app{"Twisted spheres: chart maps, pushforward fields and Stratonovich flow transport"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "key=value config file (omit to use defaults)");
    sub->add_option("--set", sets, "override a config key, key=value (repeatable)");
  };
  CLI::App* sim = app.add_subcommand("simulate", "integrate the sphere-side and M-side SDEs, write trajectory.csv + manifest.json");
  CLI::App* ver = app.add_subcommand("verify", "run invariant suites, write report.json");
  CLI::App* pro = app.add_subcommand("probe", "probe C2 regularity of the h2 direction map, write probe.json");
  for (auto* s : {sim, ver, pro}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) overrides.push_back(split_assignment(s));
    std::optional<std::string> env_seed;
    if (const char* e = std::getenv("EXOTICFLOW_SEED"); e && *e) env_seed = e;
    const RunConfig cfg = config_path.empty() ? parse_config("", overrides, env_seed) : load_config(config_path, overrides, env_seed);

    if (sim->parsed()) return cmd_simulate(cfg, std::cout);
    if (ver->parsed()) return cmd_verify(cfg, std::cout);
    return cmd_probe(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BadParams& e) {
    std::cerr << "bad parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StepBlowup& e) {
    std::cerr << "numerical blowup at step " << e.step() << ": " << e.what() << "\n";
    return kExitBlowup;
  } catch (const PoleChartMismatch& e) {
    std::cerr << "bad start point: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegenerateChartPoint& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowup;
  }
}
