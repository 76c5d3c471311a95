#pragma once

#include <cstdint>
#include <vector>

#include "exoticflow/fields.hpp"
#include "exoticflow/jacobians.hpp"
#include "exoticflow/manifold.hpp"

namespace exoticflow {

// Increments of a d-dimensional Brownian motion on a uniform grid.
// Entry (i, k) = √dt · normal(key(seed, i, k, level)) for level 0; finer
// levels are Brownian-bridge refinements of the level above.
struct BrownianPath {
  int d = 0;
  double dt = 0.0;
  int n_steps = 0;
  std::uint64_t seed = 0;
  int level = 0;
  Mat increments;  // n_steps × d

  static BrownianPath generate(int d, double dt, int n_steps, std::uint64_t seed);
  // Sums consecutive pairs: the same path on a grid of 2·dt.
  BrownianPath coarsen() const;
  // Splits each increment with a Brownian bridge draw: the same path at dt/2.
  BrownianPath refine() const;
  // W at grid time step·dt.
  Vec value_at(int step) const;
  Vec terminal() const { return value_at(n_steps); }
};

enum class Scheme { Heun };

struct FlowConfig {
  double T = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::Heun;
  bool renormalize = true;

  // T/dt, rejected with BadParams unless integral within rounding.
  int n_steps() const;
};

// Field evaluations beyond this magnitude abort the run.
inline constexpr double kBlowupThreshold = 1e6;

struct SphereFlow {
  std::vector<double> times;
  std::vector<Vec> points;  // stacked (γ, κ)
  std::vector<double> rho;
  std::uint64_t seed = 0;
};

struct SeamEvent {
  long step = 0;
  Chart from = Chart::A;
  Chart to = Chart::B;
};

struct ChartFlow {
  std::vector<double> times;
  std::vector<ChartPoint> points;
  std::vector<double> rho;
  std::uint64_t seed = 0;
  std::vector<SeamEvent> seams;
};

// dq = V0 dt + Σ Vk ∘ dW^k by stochastic Heun, projected back to the sphere.
SphereFlow integrate_sphere(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk, const Vec& q0,
                            const BrownianPath& path, const FlowConfig& cfg);

// f ∘ q_t ∘ h applied pointwise, with hysteresis chart selection starting from qbar0's chart.
ChartFlow transport_flow(const ChartPoint& qbar0, const SphereFlow& run, const TwistedSphere& sphere);

// The pushed-forward SDE integrated in chart coordinates.
ChartFlow integrate_exotic(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                           const ChartPoint& qbar0, const BrownianPath& path, const TwistedSphere& sphere,
                           const FlowConfig& cfg);

// ρ_t along a recorded sphere trajectory (trapezoid in time, midpoint ∘dW).
std::vector<double> density(const std::vector<Vec>& points, const AmbientVectorField& V0,
                            const std::vector<AmbientVectorField>& Vk, const BrownianPath& path);

// |ζ(q_T) − ζ(q_0) − ∫ X0ζ dt − ∫ Xkζ ∘ dW^k| with the same quadrature as density.
double test_function_check(const std::vector<Vec>& points, const AmbientVectorField& V0,
                           const std::vector<AmbientVectorField>& Vk, const ScalarTestFunction& zeta,
                           const BrownianPath& path);

// Embedded chart trajectory, point by point.
std::vector<Vec> embed_trajectory(const ChartFlow& flow, const TwistedSphere& sphere);

// sup_i ‖a_i − b_i‖ over two trajectories of equal length.
double sup_deviation(const std::vector<Vec>& a, const std::vector<Vec>& b);

// Ensemble-mean sup-deviation between embed_h(integrate_exotic) and
// integrate_sphere at dt, dt/2, ..., sharing each path across levels.
struct ConvergenceReport {
  std::vector<double> dts;
  std::vector<double> errors;
  std::vector<double> ratios;  // errors[i] / errors[i+1]
};

ConvergenceReport transport_convergence(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                                        const ChartPoint& qbar0, const TwistedSphere& sphere, const FlowConfig& cfg,
                                        std::uint64_t seed, int n_paths, int halvings);

}  // namespace exoticflow
