#include "exoticflow/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "exoticflow/jacobians.hpp"
#include "exoticflow/measure.hpp"
#include "exoticflow/regularity.hpp"
#include "exoticflow/rng.hpp"
#include "exoticflow/sde.hpp"

namespace exoticflow {

namespace fs = std::filesystem;
using nlohmann::json;

Fixture build_fixture(const RunConfig& cfg) {
  TwistedSphere sphere(cfg.model, make_twist(cfg.h1, cfg.h2, cfg.model));
  const int N = cfg.model.ambient_dim();
  std::vector<AmbientVectorField> noise;
  for (const auto& f : cfg.noise) noise.push_back(f.build(N));
  return Fixture{std::move(sphere), cfg.drift.build(N), std::move(noise)};
}

namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << content;
}

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  return dir;
}

Vec start_point(const RunConfig& cfg) {
  if (cfg.start) return *cfg.start;
  const int N = cfg.model.ambient_dim();
  return Vec::Ones(N) / std::sqrt(static_cast<double>(N));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string fixture_description(const RunConfig& cfg) {
  std::ostringstream os;
  os << "m=" << cfg.model.m << ";n=" << cfg.model.n << ";h1=" << cfg.h1.describe() << ";h2=" << cfg.h2.describe();
  return os.str();
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log, const std::string& created_at) {
  const Fixture fx = build_fixture(cfg);
  const TwistedSphere& S = fx.sphere;
  const int N = cfg.model.ambient_dim();
  const int steps = cfg.flow.n_steps();
  const Vec q0 = start_point(cfg);
  const ChartPoint qbar0 = S.project(SpherePoint::from_stacked(q0, cfg.model.m), cfg.start_chart);
  const fs::path dir = prepare_dir(cfg);
  const std::string hash = cfg.hash_hex();

  std::ostringstream csv;
  csv.precision(17);
  csv << "# config_hash=" << hash << " seed=" << cfg.seed << "\n";
  csv << "path,side,step,t";
  for (int i = 1; i <= N; ++i) csv << ",c" << i;
  csv << ",rho,chart\n";

  double dev_exotic = 0.0, dev_transport = 0.0;
  json paths = json::array();
  for (int j = 0; j < cfg.n_paths; ++j) {
    const std::uint64_t ps = rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
    const BrownianPath path = BrownianPath::generate(static_cast<int>(fx.noise.size()), cfg.flow.dt, steps, ps);
    const SphereFlow sphere_run = integrate_sphere(fx.drift, fx.noise, q0, path, cfg.flow);
    const ChartFlow moved = transport_flow(qbar0, sphere_run, S);
    const ChartFlow exotic = integrate_exotic(fx.drift, fx.noise, qbar0, path, S, cfg.flow);
    const double de = sup_deviation(embed_trajectory(exotic, S), sphere_run.points);
    const double dt = sup_deviation(embed_trajectory(moved, S), sphere_run.points);
    dev_exotic = std::max(dev_exotic, de);
    dev_transport = std::max(dev_transport, dt);
    paths.push_back({{"index", j},
                     {"seed", ps},
                     {"deviation_exotic", de},
                     {"deviation_transport", dt},
                     {"seams_exotic", exotic.seams.size()},
                     {"seams_transport", moved.seams.size()}});

    for (int i = 0; i <= steps; ++i) {
      csv << j << ",sphere," << i << "," << sphere_run.times[i];
      for (int k = 0; k < N; ++k) csv << "," << sphere_run.points[i][k];
      csv << "," << sphere_run.rho[i] << ",-\n";
    }
    for (const auto* flow : {&moved, &exotic}) {
      const char* side = flow == &moved ? "transport" : "exotic";
      for (int i = 0; i <= steps; ++i) {
        const Vec w = flow->points[i].stacked();
        csv << j << "," << side << "," << i << "," << flow->times[i];
        for (int k = 0; k < N; ++k) csv << "," << w[k];
        csv << "," << flow->rho[i] << "," << chart_tag(flow->points[i].chart) << "\n";
      }
    }
  }
  const std::string csv_text = csv.str();
  write_file(dir / "trajectory.csv", csv_text);

  const ConvergenceReport conv = transport_convergence(fx.drift, fx.noise, qbar0, S, cfg.flow, cfg.seed, cfg.n_paths, cfg.halvings);

  json manifest;
  manifest["created_at"] = created_at.empty() ? now_utc() : created_at;
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.seed;
  manifest["fixture"] = fixture_description(cfg);
  manifest["fixture_hash"] = hex64(fnv1a(fixture_description(cfg)));
  manifest["drift"] = fx.drift.label;
  json noise = json::array();
  for (const auto& v : fx.noise) noise.push_back(v.label);
  manifest["noise"] = noise;
  manifest["T"] = cfg.flow.T;
  manifest["dt"] = cfg.flow.dt;
  manifest["n_steps"] = steps;
  manifest["start"] = std::vector<double>(q0.data(), q0.data() + q0.size());
  manifest["start_chart"] = std::string(1, chart_tag(qbar0.chart));
  manifest["paths"] = paths;
  manifest["max_deviation_exotic"] = dev_exotic;
  manifest["max_deviation_transport"] = dev_transport;
  manifest["convergence"] = {{"dts", conv.dts}, {"errors", conv.errors}, {"ratios", conv.ratios}};
  manifest["files"] = {{"trajectory.csv", hex64(fnv1a(csv_text))}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  log << "simulate: " << cfg.n_paths << " paths x " << steps << " steps, max deviation exotic " << fmt(dev_exotic)
      << ", transport " << fmt(dev_transport) << "\n";
  for (std::size_t i = 0; i < conv.ratios.size(); ++i)
    log << "  convergence ratio dt=" << fmt(conv.dts[i]) << " -> " << fmt(conv.dts[i + 1]) << ": " << fmt(conv.ratios[i]) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verification suites

namespace {

struct Suite {
  json metrics = json::object();
  json gates = json::object();
  bool pass = true;

  // Records value against an upper gate.
  void below(const std::string& key, double value, double gate) {
    metrics[key] = value;
    gates[key] = {{"max", gate}};
    if (!(value <= gate)) pass = false;
  }
  void above(const std::string& key, double value, double gate) {
    metrics[key] = value;
    gates[key] = {{"min", gate}};
    if (!(value >= gate)) pass = false;
  }
};

double rel_err(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()); }

// Uniform points whose chart-B representative (if selected) has ‖ȳ‖ > tol.
std::vector<ChartPoint> chart_samples(const TwistedSphere& S, int n, std::uint64_t seed) {
  std::vector<ChartPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec z = rng::uniform_sphere(S.ambient_dim(), seed, static_cast<std::uint64_t>(i));
    pts.push_back(S.project(SpherePoint::from_stacked(z, S.m())));
  }
  return pts;
}

std::vector<AmbientVectorField> test_fields(int N, std::uint64_t seed) {
  Mat A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = rng::normal(rng::key(seed, i, j, 0xF1));
  A = A - A.transpose().eval();
  Vec c(N);
  for (int i = 0; i < N; ++i) c[i] = rng::normal(rng::key(seed, i, 0, 0xF2));
  return {rotation_field(A), rotation_field(plane_generator(N, 0, 1)), gradient_linear_field(c)};
}

Suite suite_roundtrip(const TwistedSphere& S, int samples, std::uint64_t seed) {
  Suite s;
  const int N = S.ambient_dim();
  double rt = 0.0, chart_rt = 0.0, welldef = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec z = rng::uniform_sphere(N, seed, static_cast<std::uint64_t>(i));
    const SpherePoint sp = SpherePoint::from_stacked(z, S.m());
    const ChartPoint p = S.project(sp);
    rt = std::max(rt, (S.embed(p).stacked() - z).norm());
    const ChartPoint back = S.project(S.embed(p), p.chart == Chart::A ? ChartRequest::A : ChartRequest::B);
    chart_rt = std::max(chart_rt, (back.stacked() - p.stacked()).norm());
    const ChartPoint a = S.project(sp, ChartRequest::A);
    if (a.u.norm() > S.tol()) welldef = std::max(welldef, (S.embed(a).stacked() - S.embed(S.transition_ab(a)).stacked()).norm());
  }
  s.below("embed_project_max", rt, 1e-12);
  s.below("project_embed_max", chart_rt, 1e-12);
  s.below("well_defined_max", welldef, 1e-12);
  return s;
}

Suite suite_jacobian(const TwistedSphere& S, int samples, std::uint64_t seed) {
  Suite s;
  double worst = 0.0;
  for (const ChartPoint& p : chart_samples(S, samples, seed)) {
    const Vec z = S.embed(p).stacked();
    const Chart ch = p.chart;
    const Mat fd = fd_jacobian([&](const Vec& w) { return f_extension(w, ch, S); }, z, 1e-5);
    worst = std::max(worst, rel_err(df(p, S).full(), fd));
  }
  s.below("fd_relative_max", worst, 1e-6);
  return s;
}

Suite suite_pushforward(const TwistedSphere& S, int samples, std::uint64_t seed) {
  Suite s;
  double comp_vs_mat = 0.0, vs_fd = 0.0;
  const auto fields = test_fields(S.ambient_dim(), seed);
  for (const ChartPoint& p : chart_samples(S, samples, seed + 1)) {
    const Vec z = S.embed(p).stacked();
    for (const auto& V : fields) {
      const Vec pc = pushforward(V, p, S);
      const Vec pm = pushforward_matrix(V, p, S);
      const Vec v = V.eval(z);
      const double eps = 1e-5;
      const Vec fd = (f_extension(z + eps * v, p.chart, S) - f_extension(z - eps * v, p.chart, S)) / (2 * eps);
      const double scale = std::max(1.0, pm.cwiseAbs().maxCoeff());
      comp_vs_mat = std::max(comp_vs_mat, (pc - pm).cwiseAbs().maxCoeff() / scale);
      vs_fd = std::max(vs_fd, (pc - fd).cwiseAbs().maxCoeff() / scale);
    }
  }
  s.below("component_vs_matrix_max", comp_vs_mat, 1e-6);
  s.below("component_vs_fd_max", vs_fd, 1e-6);
  return s;
}

Suite suite_norm_transport(const TwistedSphere& S, int samples, std::uint64_t seed) {
  Suite s;
  double worst = 0.0;
  const auto fields = test_fields(S.ambient_dim(), seed);
  for (const ChartPoint& p : chart_samples(S, samples, seed + 2)) {
    const PullbackMetric g = pullback_metric(p, S);
    const Vec z = S.embed(p).stacked();
    for (const auto& V : fields) worst = std::max(worst, std::abs(g.norm(pushforward(V, p, S)) - V.eval(z).norm()));
  }
  s.below("norm_transport_max", worst, 1e-10);
  return s;
}

Suite suite_density(const TwistedSphere& S, std::uint64_t seed) {
  Suite s;
  const int N = S.ambient_dim();
  FlowConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  const Vec q0 = Vec::Ones(N) / std::sqrt(static_cast<double>(N));
  const auto fields = test_fields(N, seed);

  const BrownianPath path = BrownianPath::generate(1, cfg.dt, cfg.n_steps(), seed);
  const SphereFlow rot = integrate_sphere(fields[0], {fields[1]}, q0, path, cfg);
  double dev = 0.0;
  for (double r : rot.rho) dev = std::max(dev, std::abs(r - 1.0));
  s.below("divergence_free_rho_max_dev", dev, 1e-8);

  const Vec c = Vec::LinSpaced(N, 1.0, -0.5);
  const BrownianPath none = BrownianPath::generate(0, cfg.dt, cfg.n_steps(), seed);
  const SphereFlow grad = integrate_sphere(gradient_linear_field(c), {}, q0, none, cfg);
  double integral = 0.0, worst = 0.0;
  for (std::size_t i = 1; i < grad.points.size(); ++i) {
    integral += 0.5 * (c.dot(grad.points[i - 1]) + c.dot(grad.points[i])) * cfg.dt;
    const double expect = std::exp(-(N - 1) * integral);
    worst = std::max(worst, std::abs(grad.rho[i] - expect) / expect);
  }
  s.below("gradient_rho_rel_max", worst, 1e-6);
  return s;
}

Suite suite_regularity(const RunConfig& rc, const TwistedSphere& S) {
  Suite s;
  const RegularityReport rep = probe_c2(S.twist().h2, dyadic_shells(rc.probe_shell_first, rc.probe_shell_last),
                                        rc.probe_samples, rc.probe_fd_step_frac, rc.seed);
  s.metrics["growth_exponent_g"] = rep.growth_exponent_g;
  s.above("growth_exponent_rg", rep.growth_exponent_rg, kBoundedExponent);
  s.metrics["verdict"] = verdict_name(rep.verdict);
  return s;
}

Suite suite_measure(const TwistedSphere& S, int samples, std::uint64_t seed) {
  Suite s;
  const double pi = std::numbers::pi;
  double area_err = 0.0;
  for (auto [N, expect] : std::vector<std::pair<int, double>>{{3, 4 * pi}, {4, 2 * pi * pi}, {8, std::pow(pi, 4) / 3}})
    area_err = std::max(area_err, std::abs(MeasureModel::round(N).area - expect) / expect);
  s.below("area_rel_err", area_err, 1e-12);

  const int N = S.ambient_dim();
  const int n = std::max(10 * samples, 10000);
  const auto pts = sample_nu(N, n, seed);
  Vec mean = Vec::Zero(N);
  double m2 = 0.0;
  for (const auto& z : pts) {
    mean += z;
    m2 += z[0] * z[0];
  }
  mean /= n;
  m2 /= n;
  s.below("coordinate_mean_max", mean.cwiseAbs().maxCoeff(), 4.0 / std::sqrt(static_cast<double>(n)));
  // Var(z1²) = 3/(N(N+2)) − 1/N².
  const double sd = std::sqrt((3.0 / (N * (N + 2.0)) - 1.0 / (N * N)) / n);
  s.below("second_moment_dev_in_sd", std::abs(m2 - 1.0 / N) / sd, 3.0);

  double min_eig = 1e300, congruence = 0.0;
  for (const ChartPoint& p : chart_samples(S, samples, seed + 3)) {
    const PullbackMetric g = pullback_metric(p, S);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(g.matrix).eigenvalues().minCoeff());
    if (p.chart == Chart::A && p.u.norm() > 1e-3) {
      const ChartPoint b = S.transition_ab(p);
      const PullbackMetric gb = pullback_metric(b, S);
      const Mat T = gb.basis.transpose() * S.transition_ab_jacobian(p) * g.basis;
      congruence = std::max(congruence, rel_err(T.transpose() * gb.matrix * T, g.matrix));
    }
  }
  s.above("pullback_min_eigenvalue", min_eig, 0.0);
  s.below("congruence_residual", congruence, 1e-8);
  return s;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"roundtrip", "jacobian",   "pushforward", "norm_transport",
                                                 "density",   "regularity", "measure"};
  return names;
}

json run_suites(const RunConfig& cfg) {
  std::vector<std::string> wanted;
  for (const auto& c : cfg.checks) {
    if (c == "all") {
      wanted = suite_names();
      break;
    }
    if (std::find(suite_names().begin(), suite_names().end(), c) == suite_names().end())
      throw ConfigError("unknown check suite '" + c + "'");
    wanted.push_back(c);
  }
  const Fixture fx = build_fixture(cfg);
  const TwistedSphere& S = fx.sphere;
  const int n = cfg.verify_samples;
  const std::uint64_t seed = cfg.seed;

  json report;
  report["config_hash"] = cfg.hash_hex();
  report["seed"] = cfg.seed;
  report["fixture"] = fixture_description(cfg);
  json suites = json::array();
  bool all = true;
  for (const auto& name : wanted) {
    Suite s;
    if (name == "roundtrip")
      s = suite_roundtrip(S, 10 * n, seed);
    else if (name == "jacobian")
      s = suite_jacobian(S, n, seed);
    else if (name == "pushforward")
      s = suite_pushforward(S, n, seed);
    else if (name == "norm_transport")
      s = suite_norm_transport(S, n, seed);
    else if (name == "density")
      s = suite_density(S, seed);
    else if (name == "regularity")
      s = suite_regularity(cfg, S);
    else if (name == "measure")
      s = suite_measure(S, n, seed);
    all = all && s.pass;
    suites.push_back({{"name", name}, {"pass", s.pass}, {"metrics", s.metrics}, {"gates", s.gates}});
  }
  report["suites"] = suites;
  report["pass"] = all;
  return report;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const json report = run_suites(cfg);
  const fs::path dir = prepare_dir(cfg);
  write_file(dir / "report.json", report.dump(2) + "\n");
  for (const auto& s : report["suites"]) log << (s["pass"].get<bool>() ? "PASS " : "FAIL ") << s["name"].get<std::string>() << "\n";
  return report["pass"].get<bool>() ? kExitOk : kExitVerifyFailed;
}

int cmd_probe(const RunConfig& cfg, std::ostream& log) {
  const Fixture fx = build_fixture(cfg);
  const RegularityReport rep = probe_c2(fx.sphere.twist().h2, dyadic_shells(cfg.probe_shell_first, cfg.probe_shell_last),
                                        cfg.probe_samples, cfg.probe_fd_step_frac, cfg.seed);
  json j = rep.to_json();
  j["config_hash"] = cfg.hash_hex();
  j["seed"] = cfg.seed;
  const fs::path dir = prepare_dir(cfg);
  write_file(dir / "probe.json", j.dump(2) + "\n");
  write_file(dir / "probe_shells.csv", "# config_hash=" + cfg.hash_hex() + " seed=" + std::to_string(cfg.seed) + "\n" + rep.shell_csv());
  log << "probe: exponent_g " << fmt(rep.growth_exponent_g) << ", exponent_rg " << fmt(rep.growth_exponent_rg) << ", verdict "
      << verdict_name(rep.verdict) << "\n";
  return kExitOk;
}

}  // namespace exoticflow
