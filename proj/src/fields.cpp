#include "exoticflow/fields.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "exoticflow/numdiff.hpp"
#include "exoticflow/parallel.hpp"
#include "exoticflow/rng.hpp"

namespace exoticflow {

Mat AmbientVectorField::derivative(const Vec& z) const {
  if (jacobian) return (*jacobian)(z);
  return fd_jacobian(eval, z, 1e-5);
}

Tensor AmbientVectorField::second_derivative(const Vec& z) const {
  if (hessian) return (*hessian)(z);
  return fd_hessian(eval, z, 1e-4);
}

namespace {

void check_antisymmetric(const Mat& A, double param_tol, const char* who) {
  if (A.rows() != A.cols()) throw BadParams(std::string(who) + ": matrix must be square");
  const double asym = (A + A.transpose()).cwiseAbs().maxCoeff();
  if (!A.allFinite() || asym > param_tol) {
    std::ostringstream os;
    os << who << ": matrix is not antisymmetric (|A + A^T|_max = " << asym << ")";
    throw BadParams(os.str());
  }
}

}  // namespace

AmbientVectorField zero_field(int dim) {
  AmbientVectorField V;
  V.label = "zero";
  V.dim = dim;
  V.eval = [dim](const Vec&) -> Vec { return Vec::Zero(dim); };
  V.jacobian = [dim](const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  V.hessian = [dim](const Vec&) { return Tensor({dim, dim, dim}); };
  return V;
}

Mat plane_generator(int dim, int i, int j, double rate) {
  if (i < 0 || j < 0 || i >= dim || j >= dim || i == j) throw BadParams("plane_generator: bad coordinate plane");
  Mat A = Mat::Zero(dim, dim);
  A(j, i) = rate;
  A(i, j) = -rate;
  return A;
}

AmbientVectorField rotation_field(const Mat& A, double param_tol) {
  check_antisymmetric(A, param_tol, "rotation_field");
  const int dim = static_cast<int>(A.rows());
  AmbientVectorField V;
  V.label = "rotation";
  V.dim = dim;
  V.eval = [A](const Vec& z) -> Vec { return A * z; };
  V.jacobian = [A](const Vec&) -> Mat { return A; };
  V.hessian = [dim](const Vec&) { return Tensor({dim, dim, dim}); };
  return V;
}

AmbientVectorField gradient_linear_field(const Vec& c) {
  if (c.size() < 2 || !c.allFinite() || c.norm() == 0.0) throw BadParams("gradient_linear_field: c must be a nonzero vector");
  const int dim = static_cast<int>(c.size());
  AmbientVectorField V;
  V.label = "gradient_linear";
  V.dim = dim;
  V.eval = [c](const Vec& z) -> Vec { return c - c.dot(z) * z; };
  V.jacobian = [c, dim](const Vec& z) -> Mat { return -(z * c.transpose() + c.dot(z) * Mat::Identity(dim, dim)); };
  V.hessian = [c, dim](const Vec&) {
    Tensor H({dim, dim, dim});
    for (int nu = 0; nu < dim; ++nu)
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) H(nu, a, b) = -((nu == b ? c[a] : 0.0) + (nu == a ? c[b] : 0.0));
    return H;
  };
  return V;
}

AmbientVectorField sobolev_drift(double alpha, const Mat& A, double param_tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw BadParams("sobolev_drift: alpha must lie in (0, 1)");
  check_antisymmetric(A, param_tol, "sobolev_drift");
  const int dim = static_cast<int>(A.rows());
  AmbientVectorField V;
  V.label = "sobolev_drift";
  V.smoothness = Smoothness::SobolevOnly;
  V.dim = dim;
  V.eval = [alpha, A](const Vec& z) -> Vec { return std::pow(std::abs(z[0]), alpha) * (A * z); };
  // Classical derivative off {z₁ = 0}; on the set itself the singular column is dropped.
  V.jacobian = [alpha, A](const Vec& z) -> Mat {
    const double a = std::abs(z[0]);
    Mat D = std::pow(a, alpha) * A;
    if (a > 0.0) D.col(0) += alpha * std::pow(a, alpha - 1.0) * (z[0] > 0 ? 1.0 : -1.0) * (A * z);
    return D;
  };
  return V;
}

AmbientVectorField sum_fields(const AmbientVectorField& a, const AmbientVectorField& b) {
  if (a.dim != b.dim) throw BadParams("sum_fields: dimension mismatch");
  AmbientVectorField V;
  V.label = a.label + "+" + b.label;
  V.dim = a.dim;
  V.smoothness = (a.smoothness == Smoothness::C2 && b.smoothness == Smoothness::C2) ? Smoothness::C2 : Smoothness::SobolevOnly;
  V.eval = [a, b](const Vec& z) -> Vec { return a.eval(z) + b.eval(z); };
  if (a.jacobian && b.jacobian) V.jacobian = [a, b](const Vec& z) -> Mat { return (*a.jacobian)(z) + (*b.jacobian)(z); };
  if (a.hessian && b.hessian)
    V.hessian = [a, b](const Vec& z) {
      Tensor H = (*a.hessian)(z);
      const Tensor Hb = (*b.hessian)(z);
      for (std::size_t i = 0; i < H.size(); ++i) H.data()[i] += Hb.data()[i];
      return H;
    };
  return V;
}

Mat tangent_projector(const Vec& z) { return Mat::Identity(z.size(), z.size()) - z * z.transpose(); }

double divergence(const AmbientVectorField& V, const Vec& z) {
  return (tangent_projector(z) * V.derivative(z)).trace();
}

double covariant_gradient_norm(const AmbientVectorField& V, const Vec& z) {
  const Mat P = tangent_projector(z);
  return (P * V.derivative(z) * P).norm();
}

double tangency_defect(const AmbientVectorField& V, int samples, std::uint64_t seed) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec z = rng::uniform_sphere(V.dim, seed, static_cast<std::uint64_t>(i));
    worst = std::max(worst, std::abs(z.dot(V.eval(z))));
  }
  return worst;
}

double sphere_area(int ambient_dim) {
  const double N = ambient_dim;
  return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

NormReport norms(const AmbientVectorField& V, double p, int n_samples, std::uint64_t seed) {
  if (!(p >= 1.0)) throw BadParams("norms: p must be >= 1");
  if (n_samples < 1000) throw BadParams("norms: need at least 1000 samples");
  std::vector<double> vp(n_samples), gp(n_samples);
  parallel_for(n_samples, [&](int i) {
    const Vec z = rng::uniform_sphere(V.dim, seed, static_cast<std::uint64_t>(i));
    vp[i] = std::pow(V.eval(z).norm(), p);
    gp[i] = std::pow(covariant_gradient_norm(V, z), p);
  });
  double sv = 0.0, sv2 = 0.0, sg = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    sv += vp[i];
    sv2 += vp[i] * vp[i];
    sg += gp[i];
  }
  const double area = sphere_area(V.dim);
  const double mean = sv / n_samples;
  const double var = std::max(0.0, sv2 / n_samples - mean * mean) * n_samples / std::max(1, n_samples - 1);
  NormReport r;
  r.p = p;
  r.n_samples = n_samples;
  r.lp = std::pow(area * mean, 1.0 / p);
  r.h1p = r.lp + std::pow(area * sg / n_samples, 1.0 / p);
  if (mean > 0.0) r.ci95 = 1.96 * (r.lp / (p * mean)) * std::sqrt(var / n_samples);
  return r;
}

}  // namespace exoticflow

namespace exoticflow {

ScalarTestFunction constant_function(int dim, double c) {
  return {"constant", [c](const Vec&) { return c; }, [dim](const Vec&) -> Vec { return Vec::Zero(dim); }};
}

ScalarTestFunction coordinate_function(int dim, int nu) {
  if (nu < 0 || nu >= dim) throw BadParams("coordinate_function: index out of range");
  return {"z" + std::to_string(nu + 1), [nu](const Vec& z) { return z[nu]; },
          [dim, nu](const Vec&) -> Vec { return Vec::Unit(dim, nu); }};
}

ScalarTestFunction linear_cap(const Vec& e) {
  if (std::abs(e.norm() - 1.0) > 1e-12) throw BadParams("linear_cap: e must be a unit vector");
  return {"linear_cap", [e](const Vec& z) { return 0.5 * (1.0 + z.dot(e)); }, [e](const Vec&) -> Vec { return 0.5 * e; }};
}

ScalarTestFunction smooth_cap(const Vec& e, double width) {
  if (std::abs(e.norm() - 1.0) > 1e-12) throw BadParams("smooth_cap: e must be a unit vector");
  if (!(width > 0.0)) throw BadParams("smooth_cap: width must be positive");
  return {"smooth_cap", [e, width](const Vec& z) { return std::exp((z.dot(e) - 1.0) / width); },
          [e, width](const Vec& z) -> Vec { return std::exp((z.dot(e) - 1.0) / width) / width * e; }};
}

double directional(const ScalarTestFunction& zeta, const AmbientVectorField& V, const Vec& z) {
  return zeta.gradient(z).dot(V.eval(z));
}

}  // namespace exoticflow
