#pragma once

#include "exoticflow/fields.hpp"
#include "exoticflow/manifold.hpp"
#include "exoticflow/numdiff.hpp"

namespace exoticflow {

// Differential of f at h(p), split by the sphere-side variable. Rows are the
// stacked chart coordinates (u then v), N = m+n+2 of them.
struct JacobianF {
  Mat d_gamma;  // N × (m+1)
  Mat d_kappa;  // N × (n+1)
  Chart region = Chart::A;

  Mat full() const;  // [d_gamma | d_kappa], N × N
};

// Region R^{m+1} × S^n. Twist-independent.
JacobianF df_region_a(const ChartPoint& p);
// Region S^m × R^{n+1}. Requires ‖ȳ‖ > tol.
JacobianF df_region_b(const ChartPoint& p, const TwistedSphere& sphere);
JacobianF df(const ChartPoint& p, const TwistedSphere& sphere);

// (f_* V)(p) assembled component by component. Rows as in JacobianF.
Vec pushforward(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere);
// Same quantity through the assembled matrix; kept as a cross-check.
Vec pushforward_matrix(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere);

// The inverse f written as an ambient map on R^{m+n+2} minus the singular
// locus of the chosen branch; the blocks above are its exact derivatives at
// unit-norm points. Chart A: (γ‖z‖/‖κ‖, κ‖z‖/‖κ‖). Chart B:
// (h1(γ‖z‖/‖γ‖), (‖κ‖/‖γ‖) h2(κ‖z‖/‖κ‖)). On the sphere both reduce to project.
Vec f_extension(const Vec& z, Chart chart, const TwistedSphere& sphere);

struct PushforwardField {
  AmbientVectorField base;
  TwistedSphere sphere;

  Vec operator()(const ChartPoint& p) const { return pushforward(base, p, sphere); }
};

}  // namespace exoticflow
