#include "exoticflow/sde.hpp"

#include <cmath>
#include <sstream>

#include "exoticflow/parallel.hpp"
#include "exoticflow/rng.hpp"

namespace exoticflow {

BrownianPath BrownianPath::generate(int d, double dt, int n_steps, std::uint64_t seed) {
  if (d < 0 || n_steps < 0 || !(dt > 0.0)) throw BadParams("BrownianPath: bad dimensions or step");
  BrownianPath p;
  p.d = d;
  p.dt = dt;
  p.n_steps = n_steps;
  p.seed = seed;
  p.increments = Mat::Zero(n_steps, d);
  const double sq = std::sqrt(dt);
  for (int i = 0; i < n_steps; ++i)
    for (int k = 0; k < d; ++k) p.increments(i, k) = sq * rng::normal(rng::key(seed, i, k, 0));
  return p;
}

BrownianPath BrownianPath::coarsen() const {
  if (n_steps % 2 != 0) throw BadParams("BrownianPath::coarsen needs an even number of steps");
  BrownianPath p = *this;
  p.dt = 2.0 * dt;
  p.n_steps = n_steps / 2;
  p.level = level - 1;
  p.increments = Mat::Zero(p.n_steps, d);
  for (int i = 0; i < p.n_steps; ++i) p.increments.row(i) = increments.row(2 * i) + increments.row(2 * i + 1);
  return p;
}

BrownianPath BrownianPath::refine() const {
  BrownianPath p = *this;
  p.dt = 0.5 * dt;
  p.n_steps = 2 * n_steps;
  p.level = level + 1;
  p.increments = Mat::Zero(p.n_steps, d);
  // Given W over [t, t + dt], the midpoint value is N(ΔW/2, dt/4).
  const double sd = 0.5 * std::sqrt(dt);
  for (int i = 0; i < n_steps; ++i)
    for (int k = 0; k < d; ++k) {
      const double total = increments(i, k);
      const double first = 0.5 * total + sd * rng::normal(rng::key(seed, i, k, 0x100 + static_cast<std::uint64_t>(p.level)));
      p.increments(2 * i, k) = first;
      p.increments(2 * i + 1, k) = total - first;
    }
  return p;
}

Vec BrownianPath::value_at(int step) const {
  if (step < 0 || step > n_steps) throw BadParams("BrownianPath::value_at: step out of range");
  Vec w = Vec::Zero(d);
  for (int i = 0; i < step; ++i) w += increments.row(i).transpose();
  return w;
}

int FlowConfig::n_steps() const {
  if (!(T > 0.0) || !(dt > 0.0)) throw BadParams("FlowConfig: T and dt must be positive");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "FlowConfig: T/dt = " << ratio << " is not an integer";
    throw BadParams(os.str());
  }
  return static_cast<int>(rounded);
}

namespace {

void check_path(const BrownianPath& path, std::size_t channels, const FlowConfig& cfg) {
  if (static_cast<std::size_t>(path.d) != channels) throw BadParams("number of noise fields differs from path dimension");
  const int steps = cfg.n_steps();
  if (path.n_steps != steps || std::abs(path.dt - cfg.dt) > 1e-12 * cfg.dt)
    throw BadParams("Brownian path grid does not match the flow configuration");
}

Vec guarded(const Vec& v, long step) {
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kBlowupThreshold) {
    std::ostringstream os;
    os << "field evaluation exceeded " << kBlowupThreshold << " at step " << step;
    throw StepBlowup(os.str(), step);
  }
  return v;
}

// Drift dt + Σ noise ΔW at one state, via a caller-supplied field evaluator.
template <typename Eval>
Vec increment(Eval&& eval, std::size_t channels, const Eigen::RowVectorXd& dW, double dt) {
  Vec acc = eval(0) * dt;
  for (std::size_t k = 0; k < channels; ++k) acc += eval(k + 1) * dW[static_cast<Eigen::Index>(k)];
  return acc;
}

}  // namespace

SphereFlow integrate_sphere(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk, const Vec& q0,
                            const BrownianPath& path, const FlowConfig& cfg) {
  check_path(path, Vk.size(), cfg);
  if (q0.size() != V0.dim) throw BadParams("integrate_sphere: start point dimension mismatch");
  if (std::abs(q0.norm() - 1.0) > 1e-9) throw BadParams("integrate_sphere: start point is off the sphere");
  const int steps = path.n_steps;

  SphereFlow run;
  run.seed = path.seed;
  run.times.reserve(steps + 1);
  run.points.reserve(steps + 1);
  run.times.push_back(0.0);
  run.points.push_back(q0);

  Vec q = q0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::RowVectorXd dW = path.increments.row(i);
    auto at = [&](const Vec& z) {
      return [&, z](std::size_t k) { return guarded(k == 0 ? V0.eval(z) : Vk[k - 1].eval(z), i); };
    };
    const Vec a = increment(at(q), Vk.size(), dW, cfg.dt);
    Vec pred = q + a;
    if (cfg.renormalize) pred /= pred.norm();
    const Vec b = increment(at(pred), Vk.size(), dW, cfg.dt);
    q = q + 0.5 * (a + b);
    if (cfg.renormalize) q /= q.norm();
    if (!q.allFinite()) throw StepBlowup("non-finite state at step " + std::to_string(i), i);
    run.times.push_back((i + 1) * cfg.dt);
    run.points.push_back(q);
  }
  run.rho = density(run.points, V0, Vk, path);
  return run;
}

ChartFlow transport_flow(const ChartPoint& qbar0, const SphereFlow& run, const TwistedSphere& sphere) {
  if (run.points.empty()) throw BadParams("transport_flow: empty run");
  const SpherePoint z0 = sphere.embed(qbar0);
  if ((z0.stacked() - run.points.front()).norm() > 1e3 * sphere.tol())
    throw BadParams("transport_flow: qbar0 does not embed to the run's initial point");

  ChartFlow out;
  out.seed = run.seed;
  out.times = run.times;
  out.rho = run.rho;
  out.points.reserve(run.points.size());
  out.points.push_back(qbar0);
  Chart chart = qbar0.chart;
  for (std::size_t i = 1; i < run.points.size(); ++i) {
    const SpherePoint z = SpherePoint::from_stacked(run.points[i], sphere.m());
    const Chart next = select_chart(z, chart);
    if (next != chart) out.seams.push_back({static_cast<long>(i), chart, next});
    chart = next;
    out.points.push_back(sphere.project(z, chart == Chart::A ? ChartRequest::A : ChartRequest::B));
  }
  return out;
}

ChartFlow integrate_exotic(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                           const ChartPoint& qbar0, const BrownianPath& path, const TwistedSphere& sphere,
                           const FlowConfig& cfg) {
  check_path(path, Vk.size(), cfg);
  sphere.check_chart_point(qbar0);
  const int steps = path.n_steps;
  const int m = sphere.m();

  ChartFlow out;
  out.seed = path.seed;
  out.times.reserve(steps + 1);
  out.points.reserve(steps + 1);
  out.times.push_back(0.0);
  out.points.push_back(qbar0);

  auto singular = [&](const ChartPoint& p) {
    return p.chart == Chart::B && p.v.norm() <= sphere.tol();
  };

  ChartPoint p = qbar0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::RowVectorXd dW = path.increments.row(i);
    auto at = [&](const ChartPoint& c) {
      return [&, c](std::size_t k) { return guarded(pushforward(k == 0 ? V0 : Vk[k - 1], c, sphere), i); };
    };
    if (singular(p)) throw DegenerateChartPoint("integrate_exotic: step " + std::to_string(i) + " reached ȳ = 0");
    const Vec a = increment(at(p), Vk.size(), dW, cfg.dt);
    ChartPoint pred = ChartPoint::from_stacked(p.chart, p.stacked() + a, m);
    if (cfg.renormalize) pred = sphere.normalize_constraint(pred);
    if (singular(pred)) throw DegenerateChartPoint("integrate_exotic: predictor at step " + std::to_string(i) + " reached ȳ = 0");
    const Vec b = increment(at(pred), Vk.size(), dW, cfg.dt);
    p = ChartPoint::from_stacked(p.chart, p.stacked() + 0.5 * (a + b), m);
    if (cfg.renormalize) p = sphere.normalize_constraint(p);
    if (!p.u.allFinite() || !p.v.allFinite()) throw StepBlowup("non-finite state at step " + std::to_string(i), i);

    const Chart next = select_chart(sphere.embed(p), p.chart);
    if (next != p.chart) {
      out.seams.push_back({static_cast<long>(i + 1), p.chart, next});
      p = sphere.to_chart(p, next);
    }
    out.times.push_back((i + 1) * cfg.dt);
    out.points.push_back(p);
  }
  out.rho = density(embed_trajectory(out, sphere), V0, Vk, path);
  return out;
}

std::vector<double> density(const std::vector<Vec>& points, const AmbientVectorField& V0,
                            const std::vector<AmbientVectorField>& Vk, const BrownianPath& path) {
  if (points.size() != static_cast<std::size_t>(path.n_steps) + 1) throw BadParams("density: trajectory and path lengths differ");
  if (static_cast<std::size_t>(path.d) != Vk.size()) throw BadParams("density: path dimension differs from noise count");
  std::vector<double> rho(points.size(), 1.0);
  auto divs = [&](const Vec& z) {
    Vec d(Vk.size() + 1);
    d[0] = divergence(V0, z);
    for (std::size_t k = 0; k < Vk.size(); ++k) d[k + 1] = divergence(Vk[k], z);
    return d;
  };
  double log_rho = 0.0;
  Vec prev = divs(points[0]);
  for (int i = 0; i < path.n_steps; ++i) {
    const Vec next = divs(points[i + 1]);
    const Vec mid = 0.5 * (prev + next);
    double inc = mid[0] * path.dt;
    for (int k = 0; k < path.d; ++k) inc += mid[k + 1] * path.increments(i, k);
    log_rho += inc;
    rho[i + 1] = std::exp(log_rho);
    prev = next;
  }
  return rho;
}

double test_function_check(const std::vector<Vec>& points, const AmbientVectorField& V0,
                           const std::vector<AmbientVectorField>& Vk, const ScalarTestFunction& zeta,
                           const BrownianPath& path) {
  if (points.size() != static_cast<std::size_t>(path.n_steps) + 1) throw BadParams("test_function_check: length mismatch");
  if (static_cast<std::size_t>(path.d) != Vk.size()) throw BadParams("test_function_check: path dimension differs from noise count");
  auto xz = [&](const Vec& z) {
    Vec d(Vk.size() + 1);
    d[0] = directional(zeta, V0, z);
    for (std::size_t k = 0; k < Vk.size(); ++k) d[k + 1] = directional(zeta, Vk[k], z);
    return d;
  };
  double integral = 0.0;
  Vec prev = xz(points[0]);
  for (int i = 0; i < path.n_steps; ++i) {
    const Vec next = xz(points[i + 1]);
    const Vec mid = 0.5 * (prev + next);
    integral += mid[0] * path.dt;
    for (int k = 0; k < path.d; ++k) integral += mid[k + 1] * path.increments(i, k);
    prev = next;
  }
  return std::abs(zeta.value(points.back()) - zeta.value(points.front()) - integral);
}

std::vector<Vec> embed_trajectory(const ChartFlow& flow, const TwistedSphere& sphere) {
  std::vector<Vec> out;
  out.reserve(flow.points.size());
  for (const auto& p : flow.points) out.push_back(sphere.embed(p).stacked());
  return out;
}

double sup_deviation(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) throw BadParams("sup_deviation: trajectories differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
  return worst;
}

ConvergenceReport transport_convergence(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                                        const ChartPoint& qbar0, const TwistedSphere& sphere, const FlowConfig& cfg,
                                        std::uint64_t seed, int n_paths, int halvings) {
  if (n_paths < 1 || halvings < 1) throw BadParams("transport_convergence: need n_paths >= 1 and halvings >= 1");
  const int coarse_steps = cfg.n_steps();
  const int levels = halvings + 1;
  const double fine_dt = cfg.dt / std::pow(2.0, halvings);
  const Vec q0 = sphere.embed(qbar0).stacked();

  std::vector<std::vector<double>> err(n_paths, std::vector<double>(levels, 0.0));
  parallel_for(n_paths, [&](int j) {
    BrownianPath path = BrownianPath::generate(static_cast<int>(Vk.size()), fine_dt, coarse_steps << halvings,
                                               rng::derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (int lvl = levels - 1; lvl >= 0; --lvl) {
      FlowConfig c = cfg;
      c.dt = path.dt;
      const SphereFlow s = integrate_sphere(V0, Vk, q0, path, c);
      const ChartFlow e = integrate_exotic(V0, Vk, qbar0, path, sphere, c);
      err[j][lvl] = sup_deviation(embed_trajectory(e, sphere), s.points);
      if (lvl > 0) path = path.coarsen();
    }
  });

  ConvergenceReport rep;
  for (int lvl = 0; lvl < levels; ++lvl) {
    double sum = 0.0;
    for (int j = 0; j < n_paths; ++j) sum += err[j][lvl];
    rep.dts.push_back(cfg.dt / std::pow(2.0, lvl));
    rep.errors.push_back(sum / n_paths);
  }
  for (int lvl = 0; lvl + 1 < levels; ++lvl) rep.ratios.push_back(rep.errors[lvl] / rep.errors[lvl + 1]);
  return rep;
}

}  // namespace exoticflow
