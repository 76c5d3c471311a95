#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "exoticflow/fields.hpp"
#include "exoticflow/manifold.hpp"
#include "exoticflow/sde.hpp"

namespace exoticflow {

struct MeasureModel {
  int N = 0;
  double area = 0.0;
  std::uint64_t seed = 0;

  static MeasureModel round(int ambient_dim, std::uint64_t seed = 0);
};

// i.i.d. uniform points on S^{N−1}; point i depends on (seed, i) only.
std::vector<Vec> sample_nu(int ambient_dim, int n, std::uint64_t seed);

// Gram matrix of h*g in an orthonormal basis of the chart's tangent space.
// basis is N × (N−1): identity on the free factor, an orthonormal complement
// of the constrained unit vector on the sphere factor.
struct PullbackMetric {
  ChartPoint at;
  Mat basis;
  Mat matrix;

  // |w|_{h*g} for a chart-coordinate tangent vector w (stacked, length N).
  double norm(const Vec& w) const;
};

PullbackMetric pullback_metric(const ChartPoint& p, const TwistedSphere& sphere);

struct AbsContReport {
  std::string zeta_label;
  std::vector<double> t_grid;
  std::vector<double> ratio;  // E∫ζ(q_t)dν / ∫ζ dν, per grid time
  std::vector<double> ci;     // half-widths, Bonferroni over the grid
  double k_hat = 0.0;         // max ratio over the grid
  double k_hat_ci = 0.0;      // half-width at the maximizing time
  int n_points = 0;
  int n_paths = 0;

  nlohmann::json to_json() const;
};

// Monte Carlo E∫ζ(q_t) dν over n_points ν-samples × n_paths Brownian paths,
// evaluated at the grid times (multiples of cfg.dt up to cfg.T).
std::vector<AbsContReport> abscont_check(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                                         const FlowConfig& cfg, const std::vector<double>& t_grid, int n_points,
                                         int n_paths, const std::vector<ScalarTestFunction>& zetas, std::uint64_t seed);

}  // namespace exoticflow
