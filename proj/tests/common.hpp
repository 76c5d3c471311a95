#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "exoticflow/diffeo.hpp"
#include "exoticflow/manifold.hpp"
#include "exoticflow/rng.hpp"

namespace testing_support {

using namespace exoticflow;

struct NamedSphere {
  std::string name;
  TwistedSphere sphere;
};

inline Mat rotation2(double th) {
  Mat R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return R;
}

inline Mat rotation3(double th, const Eigen::Vector3d& axis) {
  return Eigen::AngleAxisd(th, axis.normalized()).toRotationMatrix();
}

// The four fixture families at their canonical dimensions.
inline TwistedSphere identity_sphere(int m = 1, int n = 1) {
  ModelParams p;
  p.m = m;
  p.n = n;
  return TwistedSphere(p, make_twist({}, {}, p));
}

inline TwistedSphere rotation_sphere() {
  ModelParams p;
  p.m = 1;
  p.n = 2;
  DiffeoSpec a, b;
  a.name = b.name = "rotation";
  a.matrix = rotation2(0.7);
  b.matrix = rotation3(1.1, {1.0, -2.0, 0.5});
  return TwistedSphere(p, make_twist(a, b, p));
}

inline TwistedSphere quaternion_sphere() {
  ModelParams p;
  p.m = 3;
  p.n = 3;
  DiffeoSpec a, b;
  a.name = b.name = "quaternion_conj";
  a.quaternion = Eigen::Vector4d(0.3, -0.5, 0.8, 0.1).normalized();
  b.quaternion = Eigen::Vector4d(1.0, 2.0, -1.0, 0.5).normalized();
  return TwistedSphere(p, make_twist(a, b, p));
}

inline TwistedSphere shear_sphere() {
  ModelParams p;
  p.m = 2;
  p.n = 2;
  DiffeoSpec a;
  a.name = "latitude_shear";
  a.phi = {0.0, 1.0};
  return TwistedSphere(p, make_twist(a, a, p));
}

inline std::vector<NamedSphere> all_fixtures() {
  return {{"identity", identity_sphere()},
          {"rotation", rotation_sphere()},
          {"quaternion_conj", quaternion_sphere()},
          {"latitude_shear", shear_sphere()}};
}

inline Vec random_sphere(int dim, std::uint64_t seed, std::uint64_t i) { return rng::uniform_sphere(dim, seed, i); }

inline Mat random_antisymmetric(int N, std::uint64_t seed) {
  Mat A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = rng::normal(rng::key(seed, i, j, 77));
  return A - A.transpose();
}

// f as a literal ambient map, written independently of the library so the
// finite-difference oracles do not reuse the code under test.
inline Vec literal_f(const Vec& z, Chart chart, const TwistedSphere& S) {
  const int m1 = S.m() + 1;
  const Vec g = z.head(m1), k = z.tail(z.size() - m1);
  const double r = z.norm();
  Vec out(z.size());
  if (chart == Chart::A) {
    out << g * r / k.norm(), k * r / k.norm();
  } else {
    out << S.twist().h1.eval(g * r / g.norm()), k.norm() / g.norm() * S.twist().h2.eval(k * r / k.norm());
  }
  return out;
}

inline double max_rel(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// exp(θA) q0 via Eigen's matrix exponential.
inline Vec exp_rotation(const Mat& A, double theta, const Vec& q0) { return (theta * A).exp() * q0; }

}  // namespace testing_support
