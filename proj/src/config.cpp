#include "exoticflow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

namespace exoticflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  if (!t.empty() && t[0] == '-') throw ConfigError(key + ": expected a non-negative integer");
  const unsigned long long x = std::strtoull(t.c_str(), &end, 0);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

Vec to_vec(const std::string& key, const std::string& v) {
  const auto xs = to_list(key, v);
  Vec out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) out[static_cast<Eigen::Index>(i)] = xs[i];
  return out;
}

// Rows separated by ';', entries by spaces or commas.
Mat to_mat(const std::string& key, const std::string& v) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(v);
  std::string row;
  while (std::getline(is, row, ';')) {
    if (trim(row).empty()) continue;
    rows.push_back(to_list(key, row));
  }
  if (rows.empty()) throw ConfigError(key + ": empty matrix");
  Mat M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError(key + ": ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

void add_field_defaults(std::map<std::string, std::string>& d, const std::string& prefix, const std::string& kind) {
  d[prefix] = kind;
  d[prefix + ".plane"] = "1 2";
  d[prefix + ".rate"] = "1";
  d[prefix + ".matrix"] = "";
  d[prefix + ".c"] = "";
  d[prefix + ".alpha"] = "0.5";
}

void add_twist_defaults(std::map<std::string, std::string>& d, const std::string& prefix) {
  d[prefix] = "identity";
  d[prefix + ".matrix"] = "";
  d[prefix + ".q"] = "1 0 0 0";
  d[prefix + ".phi"] = "0 1";
}

bool is_noise_key(const std::string& key, int* index) {
  static const std::regex re(R"(noise\.([0-9]+)(\.(plane|rate|matrix|c|alpha))?)");
  std::smatch m;
  if (!std::regex_match(key, m, re)) return false;
  *index = std::stoi(m[1].str());
  return true;
}

DiffeoSpec twist_spec(const std::map<std::string, std::string>& v, const std::string& prefix) {
  DiffeoSpec s;
  s.name = v.at(prefix);
  if (s.name == "rotation") {
    if (trim(v.at(prefix + ".matrix")).empty()) throw ConfigError(prefix + ".matrix is required for a rotation twist");
    s.matrix = to_mat(prefix + ".matrix", v.at(prefix + ".matrix"));
  } else if (s.name == "quaternion_conj") {
    const Vec q = to_vec(prefix + ".q", v.at(prefix + ".q"));
    if (q.size() != 4) throw ConfigError(prefix + ".q needs four components");
    s.quaternion = q;
  } else if (s.name == "latitude_shear") {
    s.phi = to_list(prefix + ".phi", v.at(prefix + ".phi"));
  } else if (s.name != "identity") {
    throw ConfigError(prefix + ": unknown twist '" + s.name + "'");
  }
  return s;
}

FieldSpec field_spec(const std::map<std::string, std::string>& v, const std::string& prefix) {
  FieldSpec f;
  f.kind = v.at(prefix);
  if (f.kind != "zero" && f.kind != "rotation" && f.kind != "gradient_linear" && f.kind != "sobolev")
    throw ConfigError(prefix + ": unknown field '" + f.kind + "'");
  const auto pl = to_list(prefix + ".plane", v.at(prefix + ".plane"));
  if (pl.size() != 2) throw ConfigError(prefix + ".plane needs two coordinate indices");
  f.plane = {static_cast<int>(pl[0]), static_cast<int>(pl[1])};
  f.rate = to_double(prefix + ".rate", v.at(prefix + ".rate"));
  if (!trim(v.at(prefix + ".matrix")).empty()) f.matrix = to_mat(prefix + ".matrix", v.at(prefix + ".matrix"));
  if (!trim(v.at(prefix + ".c")).empty()) f.c = to_vec(prefix + ".c", v.at(prefix + ".c"));
  f.alpha = to_double(prefix + ".alpha", v.at(prefix + ".alpha"));
  if (f.kind == "gradient_linear" && f.c.size() == 0) throw ConfigError(prefix + ".c is required for gradient_linear");
  return f;
}

}  // namespace

AmbientVectorField FieldSpec::build(int ambient_dim) const {
  auto generator = [&]() -> Mat {
    if (matrix.size() > 0) {
      if (matrix.rows() != ambient_dim || matrix.cols() != ambient_dim) throw BadParams("field matrix has the wrong size");
      return matrix;
    }
    return plane_generator(ambient_dim, plane.first - 1, plane.second - 1, rate);
  };
  if (kind == "zero") return zero_field(ambient_dim);
  if (kind == "rotation") return rotation_field(generator());
  if (kind == "gradient_linear") {
    if (c.size() != ambient_dim) throw BadParams("gradient_linear: c has the wrong length");
    return gradient_linear_field(c);
  }
  if (kind == "sobolev") return sobolev_drift(alpha, generator());
  throw BadParams("unknown field kind '" + kind + "'");
}

std::map<std::string, std::string> config_defaults() {
  std::map<std::string, std::string> d;
  d["m"] = "1";
  d["n"] = "1";
  d["tol"] = "1e-10";
  add_twist_defaults(d, "twist.h1");
  add_twist_defaults(d, "twist.h2");
  add_field_defaults(d, "drift", "zero");
  d["noise.count"] = "0";
  d["sde.T"] = "1";
  d["sde.dt"] = "1e-3";
  d["sde.seed"] = "42";
  d["sde.n_paths"] = "4";
  d["sde.start"] = "";
  d["sde.start_chart"] = "auto";
  d["sde.renormalize"] = "true";
  d["sde.halvings"] = "1";
  d["output.dir"] = "out";
  d["checks"] = "all";
  d["verify.samples"] = "1000";
  d["probe.samples"] = "64";
  d["probe.fd_step_frac"] = "0.05";
  d["probe.shell_first"] = "1";
  d["probe.shell_last"] = "8";
  return d;
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + s + "'");
  const std::string key = trim(s.substr(0, eq));
  if (key.empty()) throw ConfigError("empty key in '" + s + "'");
  return {key, unquote(trim(s.substr(eq + 1)))};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : values) os << k << "=" << v << "\n";
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }
std::string RunConfig::hash_hex() const { return hex64(hash()); }

RunConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides,
                       const std::optional<std::string>& env_seed) {
  std::map<std::string, std::string> v = config_defaults();
  std::map<std::string, std::string> noise_values;

  auto assign = [&](const std::string& key, const std::string& value, const std::string& where) {
    int idx = 0;
    if (v.count(key)) {
      v[key] = value;
    } else if (is_noise_key(key, &idx)) {
      noise_values[key] = value;
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  };

  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = "line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto [key, value] = split_assignment(t);
    if (!section.empty()) key = section + "." + key;
    assign(key, value, where);
  }
  if (env_seed) assign("sde.seed", trim(*env_seed), "EXOTICFLOW_SEED");
  for (const auto& [key, value] : overrides) assign(key, value, "--set");

  RunConfig cfg;
  const long long count = to_int("noise.count", v.at("noise.count"));
  if (count < 0 || count > 64) throw ConfigError("noise.count must lie in [0, 64]");
  for (const auto& [key, value] : noise_values) {
    int idx = 0;
    is_noise_key(key, &idx);
    if (idx < 1 || idx > count) throw ConfigError("unknown key '" + key + "' (noise.count = " + std::to_string(count) + ")");
  }
  for (int k = 1; k <= count; ++k) {
    const std::string prefix = "noise." + std::to_string(k);
    add_field_defaults(v, prefix, "rotation");
  }
  for (const auto& [key, value] : noise_values) v[key] = value;

  cfg.model.m = static_cast<int>(to_int("m", v.at("m")));
  cfg.model.n = static_cast<int>(to_int("n", v.at("n")));
  cfg.model.tol = to_double("tol", v.at("tol"));
  if (cfg.model.m < 1 || cfg.model.n < 1) throw ConfigError("m and n must be >= 1");
  if (!(cfg.model.tol > 0.0)) throw ConfigError("tol must be positive");
  cfg.h1 = twist_spec(v, "twist.h1");
  cfg.h2 = twist_spec(v, "twist.h2");
  cfg.drift = field_spec(v, "drift");
  for (int k = 1; k <= count; ++k) cfg.noise.push_back(field_spec(v, "noise." + std::to_string(k)));

  cfg.flow.T = to_double("sde.T", v.at("sde.T"));
  cfg.flow.dt = to_double("sde.dt", v.at("sde.dt"));
  cfg.flow.renormalize = to_bool("sde.renormalize", v.at("sde.renormalize"));
  try {
    cfg.flow.n_steps();
  } catch (const BadParams& e) {
    throw ConfigError(e.what());
  }
  cfg.seed = to_u64("sde.seed", v.at("sde.seed"));
  cfg.n_paths = static_cast<int>(to_int("sde.n_paths", v.at("sde.n_paths")));
  if (cfg.n_paths < 1) throw ConfigError("sde.n_paths must be >= 1");
  if (!trim(v.at("sde.start")).empty()) {
    Vec s = to_vec("sde.start", v.at("sde.start"));
    if (s.size() != cfg.model.ambient_dim()) throw ConfigError("sde.start must have m+n+2 components");
    if (!(s.norm() > 0.0)) throw ConfigError("sde.start must be nonzero");
    cfg.start = s / s.norm();
  }
  const std::string sc = v.at("sde.start_chart");
  if (sc == "auto")
    cfg.start_chart = ChartRequest::Auto;
  else if (sc == "A")
    cfg.start_chart = ChartRequest::A;
  else if (sc == "B")
    cfg.start_chart = ChartRequest::B;
  else
    throw ConfigError("sde.start_chart must be auto, A or B");
  cfg.halvings = static_cast<int>(to_int("sde.halvings", v.at("sde.halvings")));
  if (cfg.halvings < 1 || cfg.halvings > 6) throw ConfigError("sde.halvings must lie in [1, 6]");
  cfg.output_dir = v.at("output.dir");
  if (cfg.output_dir.empty()) throw ConfigError("output.dir must not be empty");

  std::string checks = v.at("checks");
  std::replace(checks.begin(), checks.end(), ',', ' ');
  std::istringstream cs(checks);
  std::string name;
  while (cs >> name) cfg.checks.push_back(name);
  cfg.verify_samples = static_cast<int>(to_int("verify.samples", v.at("verify.samples")));
  if (cfg.verify_samples < 10) throw ConfigError("verify.samples must be >= 10");
  cfg.probe_samples = static_cast<int>(to_int("probe.samples", v.at("probe.samples")));
  cfg.probe_fd_step_frac = to_double("probe.fd_step_frac", v.at("probe.fd_step_frac"));
  cfg.probe_shell_first = static_cast<int>(to_int("probe.shell_first", v.at("probe.shell_first")));
  cfg.probe_shell_last = static_cast<int>(to_int("probe.shell_last", v.at("probe.shell_last")));
  if (cfg.probe_samples < 1) throw ConfigError("probe.samples must be >= 1");
  if (cfg.probe_shell_first < 0 || cfg.probe_shell_last - cfg.probe_shell_first < 4)
    throw ConfigError("probe shells must span at least 5 levels");

  cfg.values = std::move(v);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::optional<std::string>& env_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, env_seed);
}

}  // namespace exoticflow
