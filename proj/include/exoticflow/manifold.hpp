#pragma once

#include <optional>
#include <string>

#include "exoticflow/diffeo.hpp"
#include "exoticflow/types.hpp"

namespace exoticflow {

// A = R^{m+1} × S^n with coordinates (x̃, ỹ); B = S^m × R^{n+1} with (x̄, ȳ).
enum class Chart { A, B };
enum class ChartRequest { A, B, Auto };

inline char chart_tag(Chart c) { return c == Chart::A ? 'A' : 'B'; }

struct ChartPoint {
  Chart chart = Chart::A;
  Vec u;  // x̃ (A) or x̄ (B), length m+1
  Vec v;  // ỹ (A) or ȳ (B), length n+1

  // (u, v) stacked into R^{m+n+2}.
  Vec stacked() const;
  static ChartPoint from_stacked(Chart chart, const Vec& w, int m);
};

struct SpherePoint {
  Vec gamma;  // R^{m+1}
  Vec kappa;  // R^{n+1}

  Vec stacked() const;
  static SpherePoint from_stacked(const Vec& z, int m);
  double radial_t() const { return gamma.norm() / kappa.norm(); }
};

// Chart rule: A iff ‖κ‖² ≥ 1/2. With a previous-chart hint the threshold
// shifts by ±hysteresis toward keeping the current chart.
inline constexpr double kChartThreshold = 0.5;
inline constexpr double kChartHysteresis = 0.05;
Chart select_chart(const SpherePoint& z, std::optional<Chart> previous = std::nullopt);

// The twisted sphere M^{m+n+1}_{(h1,h2)} as a two-chart atlas together with
// the homeomorphism h onto the round sphere and its inverse f.
class TwistedSphere {
 public:
  TwistedSphere(ModelParams params, TwistPair twist);

  const ModelParams& params() const { return params_; }
  const TwistPair& twist() const { return twist_; }
  int m() const { return params_.m; }
  int n() const { return params_.n; }
  int ambient_dim() const { return params_.ambient_dim(); }
  double tol() const { return params_.tol; }

  // u(t x, y) = (h1(x), t⁻¹ h2(y)).
  ChartPoint transition_ab(const ChartPoint& p) const;
  // (x̄, ȳ) ↦ (h1⁻¹(x̄)/‖ȳ‖, h2⁻¹(ȳ/‖ȳ‖)).
  ChartPoint transition_ba(const ChartPoint& p) const;
  ChartPoint to_chart(const ChartPoint& p, Chart target) const;

  // h, chart-wise.
  SpherePoint embed(const ChartPoint& p) const;
  // f, by the chart-A branch (γ/‖κ‖, κ/‖κ‖) or the chart-B branch
  // (h1(γ/‖γ‖), (‖κ‖/‖γ‖) h2(κ/‖κ‖)).
  ChartPoint project(const SpherePoint& z, ChartRequest want = ChartRequest::Auto) const;

  // Ambient Jacobians in stacked coordinates (size N × N).
  // D(transition_ab) at a chart-A point with x̃ ≠ 0.
  Mat transition_ab_jacobian(const ChartPoint& p) const;
  // D(h) of the chart formula, for chart-B points ‖ȳ‖ > tol is required.
  Mat embed_jacobian(const ChartPoint& p) const;

  // Throws BadParams when the chart constraint (‖ỹ‖ = 1 or ‖x̄‖ = 1) or
  // dimensions are violated beyond `slack`·tol.
  void check_chart_point(const ChartPoint& p, double slack = 1e3) const;
  void check_sphere_point(const SpherePoint& z, double slack = 1e3) const;

  // Re-project the chart constraint factor onto its unit sphere.
  ChartPoint normalize_constraint(ChartPoint p) const;

 private:
  ModelParams params_;
  TwistPair twist_;
};

// Orthonormal basis (k × (k−1)) of the orthogonal complement of a unit vector.
Mat orthonormal_complement(const Vec& unit);

}  // namespace exoticflow
