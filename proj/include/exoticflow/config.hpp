#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exoticflow/diffeo.hpp"
#include "exoticflow/fields.hpp"
#include "exoticflow/manifold.hpp"
#include "exoticflow/sde.hpp"

namespace exoticflow {

// Field fixture as named in a config: zero | rotation | gradient_linear | sobolev.
struct FieldSpec {
  std::string kind = "zero";
  std::pair<int, int> plane{1, 2};  // 1-based coordinate plane
  double rate = 1.0;
  Mat matrix;  // full antisymmetric generator; overrides plane/rate when set
  Vec c;       // gradient_linear
  double alpha = 0.5;

  AmbientVectorField build(int ambient_dim) const;
};

// Every recognized key is listed in defaults(); noise.<k>.* keys exist for
// k = 1..noise.count. Anything else is a ConfigError.
struct RunConfig {
  ModelParams model;
  DiffeoSpec h1, h2;
  FieldSpec drift;
  std::vector<FieldSpec> noise;
  FlowConfig flow;
  std::uint64_t seed = 0;
  int n_paths = 1;
  std::optional<Vec> start;
  ChartRequest start_chart = ChartRequest::Auto;
  int halvings = 1;
  std::string output_dir;
  std::vector<std::string> checks;
  int verify_samples = 1000;
  int probe_samples = 64;
  double probe_fd_step_frac = 0.05;
  int probe_shell_first = 1;
  int probe_shell_last = 8;

  // Final key/value table after all overrides, sorted by key.
  std::map<std::string, std::string> values;

  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

std::map<std::string, std::string> config_defaults();

// Merge order: defaults < file text < EXOTICFLOW_SEED (if env_seed set) < overrides.
RunConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides = {},
                       const std::optional<std::string>& env_seed = std::nullopt);
RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides = {},
                      const std::optional<std::string>& env_seed = std::nullopt);

// "key=value" split at the first '='.
std::pair<std::string, std::string> split_assignment(const std::string& s);

std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace exoticflow
