#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "exoticflow/tensor.hpp"
#include "exoticflow/types.hpp"

namespace exoticflow {

enum class Smoothness { C2, SobolevOnly };

using TensorFn = std::function<Tensor(const Vec&)>;

// A vector field on S^{N−1} written in ambient coordinates. eval is defined
// on a neighbourhood of the sphere; jacobian/hessian (when present) are the
// ambient derivatives of that extension, hessian indexed (ν, a, b).
struct AmbientVectorField {
  std::string label;
  Smoothness smoothness = Smoothness::C2;
  int dim = 0;  // N
  VecMap eval;
  std::optional<MatMap> jacobian;
  std::optional<TensorFn> hessian;

  Vec operator()(const Vec& z) const { return eval(z); }
  // Closed form when available, else central differences with step 1e-5.
  Mat derivative(const Vec& z) const;
  // Closed form when available, else central differences with step 1e-4.
  Tensor second_derivative(const Vec& z) const;
};

AmbientVectorField zero_field(int dim);
// V(z) = A z for antisymmetric A.
AmbientVectorField rotation_field(const Mat& A, double param_tol = 1e-12);
// Generator of the rotation in the (i, j) coordinate plane (0-based), scaled by rate.
Mat plane_generator(int dim, int i, int j, double rate = 1.0);
// V(z) = c − (c·z) z, the spherical gradient of z ↦ c·z.
AmbientVectorField gradient_linear_field(const Vec& c);
// V₀(z) = |z₁|^α A z, bounded and tangent but not C¹ on {z₁ = 0}.
AmbientVectorField sobolev_drift(double alpha, const Mat& A, double param_tol = 1e-12);
AmbientVectorField sum_fields(const AmbientVectorField& a, const AmbientVectorField& b);

// Tangential projector I − z zᵀ.
Mat tangent_projector(const Vec& z);

// Intrinsic divergence on the unit sphere: tr(P · DV) with P = I − z zᵀ.
double divergence(const AmbientVectorField& V, const Vec& z);

// |∇V|_g as the Frobenius norm of P · DV · P.
double covariant_gradient_norm(const AmbientVectorField& V, const Vec& z);

// Max |z · V(z)| over `samples` uniform points.
double tangency_defect(const AmbientVectorField& V, int samples, std::uint64_t seed);

// Volume of S^{N−1}: 2 π^{N/2} / Γ(N/2).
double sphere_area(int ambient_dim);

struct NormReport {
  double p = 2.0;
  double lp = 0.0;   // ‖V‖_p under the round measure (mass = sphere area)
  double h1p = 0.0;  // ‖V‖_p + ‖∇V‖_p
  int n_samples = 0;
  double ci95 = 0.0;  // half-width for lp (delta method)
};

NormReport norms(const AmbientVectorField& V, double p, int n_samples, std::uint64_t seed);

}  // namespace exoticflow

namespace exoticflow {

// Smooth scalar ζ on a neighbourhood of the sphere with its ambient gradient.
struct ScalarTestFunction {
  std::string label;
  std::function<double(const Vec&)> value;
  VecMap gradient;
};

ScalarTestFunction constant_function(int dim, double c);
// z ↦ z_ν (0-based ν).
ScalarTestFunction coordinate_function(int dim, int nu);
// (1 + z·e) / 2 for unit e; nonnegative on the sphere.
ScalarTestFunction linear_cap(const Vec& e);
// exp((z·e − 1) / width), a smooth bump centred at e.
ScalarTestFunction smooth_cap(const Vec& e, double width);

// X ζ = ∇ζ · V.
double directional(const ScalarTestFunction& zeta, const AmbientVectorField& V, const Vec& z);

}  // namespace exoticflow
