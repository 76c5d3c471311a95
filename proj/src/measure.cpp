#include "exoticflow/measure.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "exoticflow/parallel.hpp"
#include "exoticflow/rng.hpp"

namespace exoticflow {

MeasureModel MeasureModel::round(int ambient_dim, std::uint64_t seed) {
  if (ambient_dim < 2) throw BadParams("MeasureModel: ambient dimension must be >= 2");
  return MeasureModel{ambient_dim, sphere_area(ambient_dim), seed};
}

std::vector<Vec> sample_nu(int ambient_dim, int n, std::uint64_t seed) {
  if (n < 1) throw BadParams("sample_nu: n must be >= 1");
  std::vector<Vec> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = rng::uniform_sphere(ambient_dim, seed, static_cast<std::uint64_t>(i));
  return pts;
}

double PullbackMetric::norm(const Vec& w) const {
  const Vec c = basis.transpose() * w;
  return std::sqrt(std::max(0.0, c.dot(matrix * c)));
}

PullbackMetric pullback_metric(const ChartPoint& p, const TwistedSphere& sphere) {
  const int m1 = sphere.m() + 1, n1 = sphere.n() + 1, N = m1 + n1;
  PullbackMetric g;
  g.at = p;
  g.basis = Mat::Zero(N, N - 1);
  if (p.chart == Chart::A) {
    g.basis.topLeftCorner(m1, m1) = Mat::Identity(m1, m1);
    g.basis.bottomRightCorner(n1, n1 - 1) = orthonormal_complement(p.v / p.v.norm());
  } else {
    g.basis.topLeftCorner(m1, m1 - 1) = orthonormal_complement(p.u / p.u.norm());
    g.basis.bottomRightCorner(n1, n1) = Mat::Identity(n1, n1);
  }
  const Mat DhE = sphere.embed_jacobian(p) * g.basis;
  g.matrix = DhE.transpose() * DhE;
  return g;
}

nlohmann::json AbsContReport::to_json() const {
  return nlohmann::json{{"zeta_label", zeta_label}, {"t_grid", t_grid}, {"ratio", ratio}, {"ci", ci},
                        {"k_hat", k_hat},           {"k_hat_ci", k_hat_ci}, {"n_points", n_points},
                        {"n_paths", n_paths}};
}

std::vector<AbsContReport> abscont_check(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                                         const FlowConfig& cfg, const std::vector<double>& t_grid, int n_points,
                                         int n_paths, const std::vector<ScalarTestFunction>& zetas, std::uint64_t seed) {
  if (n_points < 2 || n_paths < 1) throw BadParams("abscont_check: need n_points >= 2 and n_paths >= 1");
  if (t_grid.empty()) throw BadParams("abscont_check: empty time grid");
  if (zetas.empty()) throw BadParams("abscont_check: no test functions");
  const int steps = cfg.n_steps();
  std::vector<int> idx;
  for (double t : t_grid) {
    const double k = t / cfg.dt;
    if (t < 0.0 || t > cfg.T * (1 + 1e-12) || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
      throw BadParams("abscont_check: grid times must be multiples of dt in [0, T]");
    idx.push_back(static_cast<int>(std::round(k)));
  }

  const int G = static_cast<int>(idx.size());
  const int Z = static_cast<int>(zetas.size());
  const std::vector<Vec> starts = sample_nu(V0.dim, n_points, rng::mix(seed, 0x4E55));
  // x[z][i] = ζ(q_0^i), y[z][g][i] = path-average of ζ(q_t^i) at grid time g.
  std::vector<std::vector<double>> x(Z, std::vector<double>(n_points));
  std::vector<std::vector<std::vector<double>>> y(Z, std::vector<std::vector<double>>(G, std::vector<double>(n_points)));

  parallel_for(n_points, [&](int i) {
    std::vector<std::vector<double>> acc(Z, std::vector<double>(G, 0.0));
    for (int j = 0; j < n_paths; ++j) {
      const std::uint64_t ps = rng::derive_seed(seed, static_cast<std::uint64_t>(i) * n_paths + j);
      const BrownianPath path = BrownianPath::generate(static_cast<int>(Vk.size()), cfg.dt, steps, ps);
      const SphereFlow run = integrate_sphere(V0, Vk, starts[i], path, cfg);
      for (int z = 0; z < Z; ++z)
        for (int g = 0; g < G; ++g) acc[z][g] += zetas[z].value(run.points[idx[g]]);
    }
    for (int z = 0; z < Z; ++z) {
      x[z][i] = zetas[z].value(starts[i]);
      for (int g = 0; g < G; ++g) y[z][g][i] = acc[z][g] / n_paths;
    }
  });

  const boost::math::normal_distribution<double> normal;
  const double zq = boost::math::quantile(normal, 1.0 - 0.025 / G);
  std::vector<AbsContReport> out;
  for (int z = 0; z < Z; ++z) {
    AbsContReport rep;
    rep.zeta_label = zetas[z].label;
    rep.t_grid = t_grid;
    rep.n_points = n_points;
    rep.n_paths = n_paths;
    double mx = 0.0;
    for (double v : x[z]) mx += v;
    mx /= n_points;
    if (!(mx > 0.0)) throw BadParams("abscont_check: test function integrates to zero");
    for (int g = 0; g < G; ++g) {
      double my = 0.0;
      for (double v : y[z][g]) my += v;
      my /= n_points;
      const double R = my / mx;
      // Delta method on the per-point residuals Y − R X.
      double ss = 0.0;
      for (int i = 0; i < n_points; ++i) {
        const double e = y[z][g][i] - R * x[z][i];
        ss += e * e;
      }
      const double se = std::sqrt(ss / (n_points - 1) / n_points) / mx;
      rep.ratio.push_back(R);
      rep.ci.push_back(zq * se);
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < rep.ratio.size(); ++g)
      if (rep.ratio[g] > rep.ratio[best]) best = g;
    rep.k_hat = rep.ratio[best];
    rep.k_hat_ci = rep.ci[best];
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace exoticflow
