#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exoticflow/tensor.hpp"
#include "exoticflow/types.hpp"

namespace exoticflow {

using TensorMap = std::function<Tensor(const Vec&)>;

// A diffeomorphism of S^k given in ambient coordinates of R^{k+1}.
//
// eval/inv are defined on a neighbourhood of the sphere (each fixture's natural
// ambient formula), and d_*/d2_* are the ambient first and second derivatives
// of that extension. Second-derivative tensors are indexed (out, i, j).
struct SphereDiffeo {
  int dim = 0;  // k
  std::string label;
  VecMap eval;
  VecMap inv;
  MatMap d_eval;
  MatMap d_inv;
  TensorMap d2_eval;
  TensorMap d2_inv;

  int ambient() const { return dim + 1; }
};

struct TwistPair {
  SphereDiffeo h1;  // acts on S^m
  SphereDiffeo h2;  // acts on S^n
};

// Fixture description, as parsed from a config file.
struct DiffeoSpec {
  std::string name = "identity";   // identity | rotation | quaternion_conj | latitude_shear
  Mat matrix;                      // rotation
  Eigen::Vector4d quaternion{1.0, 0.0, 0.0, 0.0};  // quaternion_conj, (w, x, y, z)
  std::vector<double> phi;         // latitude_shear, polynomial coefficients φ(s) = Σ c_i s^i

  std::string describe() const;
};

SphereDiffeo identity_diffeo(int dim);
// R ∈ O(k+1); throws BadParams if ‖RᵀR − I‖ exceeds param_tol.
SphereDiffeo rotation_diffeo(const Mat& R, double param_tol = 1e-9);
// y ↦ q y q⁻¹ on S³ ⊂ ℍ; q must be a unit quaternion.
SphereDiffeo quaternion_conj_diffeo(const Eigen::Vector4d& q, double param_tol = 1e-9);
// Rotates coordinates (1,2) by the angle φ(y_{k+1}); needs k ≥ 2.
SphereDiffeo latitude_shear_diffeo(int dim, std::vector<double> phi_coeffs);
// User-supplied maps on the sphere. Extended off the sphere by
// x ↦ map(x/‖x‖); derivatives by central differences (1e-5 first, 1e-4 second).
SphereDiffeo diffeo_from_maps(int dim, std::string label, VecMap eval_on_sphere, VecMap inv_on_sphere);

SphereDiffeo make_diffeo(const DiffeoSpec& spec, int dim);
TwistPair make_twist(const DiffeoSpec& h1, const DiffeoSpec& h2, const ModelParams& params);

// Max violations of the SphereDiffeo invariants over `samples` uniform points.
struct DiffeoCheck {
  double norm_error = 0.0;       // |‖eval(x)‖ − 1|, |‖inv(x)‖ − 1|
  double roundtrip_error = 0.0;  // ‖inv(eval(x)) − x‖
  double d_eval_error = 0.0;     // relative FD mismatch of d_eval and d_inv
  double d2_eval_error = 0.0;    // relative FD mismatch of d2_eval and d2_inv
};
DiffeoCheck check_diffeo(const SphereDiffeo& d, int samples, std::uint64_t seed);

}  // namespace exoticflow
