#include "exoticflow/diffeo.hpp"

#include <cmath>
#include <sstream>

#include "exoticflow/numdiff.hpp"
#include "exoticflow/rng.hpp"

namespace exoticflow {

namespace {

Tensor zero_hessian(int k) { return Tensor({k, k, k}); }

SphereDiffeo linear_diffeo(Mat M, std::string label) {
  const int k = static_cast<int>(M.rows());
  Mat Mt = M.transpose();
  SphereDiffeo d;
  d.dim = k - 1;
  d.label = std::move(label);
  d.eval = [M](const Vec& x) -> Vec { return M * x; };
  d.inv = [Mt](const Vec& x) -> Vec { return Mt * x; };
  d.d_eval = [M](const Vec&) -> Mat { return M; };
  d.d_inv = [Mt](const Vec&) -> Mat { return Mt; };
  d.d2_eval = [k](const Vec&) { return zero_hessian(k); };
  d.d2_inv = [k](const Vec&) { return zero_hessian(k); };
  return d;
}

struct Poly {
  std::vector<double> c;
  double value(double s) const {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return v;
  }
  double d1(double s) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) v = v * s + static_cast<double>(i) * c[i];
    return v;
  }
  double d2(double s) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 2;) v = v * s + static_cast<double>(i * (i - 1)) * c[i];
    return v;
  }
};

// Rotation of coords (0,1) by sign·φ(y_last).
Vec shear(const Poly& phi, double sign, const Vec& y) {
  const int L = static_cast<int>(y.size()) - 1;
  const double th = sign * phi.value(y[L]);
  const double c = std::cos(th), s = std::sin(th);
  Vec out = y;
  out[0] = c * y[0] - s * y[1];
  out[1] = s * y[0] + c * y[1];
  return out;
}

Mat shear_d(const Poly& phi, double sign, const Vec& y) {
  const int k = static_cast<int>(y.size());
  const int L = k - 1;
  const double th = sign * phi.value(y[L]);
  const double dth = sign * phi.d1(y[L]);
  const double c = std::cos(th), s = std::sin(th);
  Mat J = Mat::Identity(k, k);
  J(0, 0) = c;
  J(0, 1) = -s;
  J(1, 0) = s;
  J(1, 1) = c;
  J(0, L) += dth * (-s * y[0] - c * y[1]);
  J(1, L) += dth * (c * y[0] - s * y[1]);
  return J;
}

Tensor shear_d2(const Poly& phi, double sign, const Vec& y) {
  const int k = static_cast<int>(y.size());
  const int L = k - 1;
  const double th = sign * phi.value(y[L]);
  const double dth = sign * phi.d1(y[L]);
  const double ddth = sign * phi.d2(y[L]);
  const double c = std::cos(th), s = std::sin(th);
  Tensor H({k, k, k});
  auto set_sym = [&H](int o, int i, int j, double v) {
    H(o, i, j) = v;
    H(o, j, i) = v;
  };
  set_sym(0, 0, L, -s * dth);
  set_sym(0, 1, L, -c * dth);
  set_sym(1, 0, L, c * dth);
  set_sym(1, 1, L, -s * dth);
  H(0, L, L) = ddth * (-s * y[0] - c * y[1]) + dth * dth * (-c * y[0] + s * y[1]);
  H(1, L, L) = ddth * (c * y[0] - s * y[1]) + dth * dth * (-s * y[0] - c * y[1]);
  return H;
}

}  // namespace

std::string DiffeoSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name;
  if (name == "rotation") {
    os << "[";
    for (int i = 0; i < matrix.rows(); ++i) {
      for (int j = 0; j < matrix.cols(); ++j) os << (j ? " " : "") << matrix(i, j);
      if (i + 1 < matrix.rows()) os << ";";
    }
    os << "]";
  } else if (name == "quaternion_conj") {
    os << "[" << quaternion[0] << " " << quaternion[1] << " " << quaternion[2] << " " << quaternion[3] << "]";
  } else if (name == "latitude_shear") {
    os << "[";
    for (std::size_t i = 0; i < phi.size(); ++i) os << (i ? " " : "") << phi[i];
    os << "]";
  }
  return os.str();
}

SphereDiffeo identity_diffeo(int dim) {
  if (dim < 1) throw BadParams("identity: dimension must be >= 1");
  return linear_diffeo(Mat::Identity(dim + 1, dim + 1), "identity");
}

SphereDiffeo rotation_diffeo(const Mat& R, double param_tol) {
  if (R.rows() != R.cols() || R.rows() < 2) throw BadParams("rotation: matrix must be square, size >= 2");
  if (!R.allFinite()) throw BadParams("rotation: non-finite entries");
  const double orth = (R.transpose() * R - Mat::Identity(R.rows(), R.cols())).cwiseAbs().maxCoeff();
  if (orth > param_tol) {
    std::ostringstream os;
    os << "rotation: matrix is not orthogonal (|R^T R - I|_max = " << orth << ")";
    throw BadParams(os.str());
  }
  return linear_diffeo(R, "rotation");
}

SphereDiffeo quaternion_conj_diffeo(const Eigen::Vector4d& q, double param_tol) {
  if (!q.allFinite() || std::abs(q.norm() - 1.0) > param_tol) throw BadParams("quaternion_conj: q must be a unit quaternion");
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  // Real part is fixed; imaginary part rotates by the SO(3) image of q.
  Mat M = Mat::Identity(4, 4);
  M.block(1, 1, 3, 3) = quat.toRotationMatrix();
  return linear_diffeo(M, "quaternion_conj");
}

SphereDiffeo latitude_shear_diffeo(int dim, std::vector<double> phi_coeffs) {
  if (dim < 2) throw BadParams("latitude_shear: needs k >= 2 (coordinates 1, 2 and k+1 distinct)");
  if (phi_coeffs.empty()) throw BadParams("latitude_shear: empty phi table");
  for (double c : phi_coeffs)
    if (!std::isfinite(c)) throw BadParams("latitude_shear: non-finite phi coefficient");
  const Poly phi{std::move(phi_coeffs)};
  SphereDiffeo d;
  d.dim = dim;
  d.label = "latitude_shear";
  d.eval = [phi](const Vec& y) { return shear(phi, 1.0, y); };
  d.inv = [phi](const Vec& y) { return shear(phi, -1.0, y); };
  d.d_eval = [phi](const Vec& y) { return shear_d(phi, 1.0, y); };
  d.d_inv = [phi](const Vec& y) { return shear_d(phi, -1.0, y); };
  d.d2_eval = [phi](const Vec& y) { return shear_d2(phi, 1.0, y); };
  d.d2_inv = [phi](const Vec& y) { return shear_d2(phi, -1.0, y); };
  return d;
}

SphereDiffeo diffeo_from_maps(int dim, std::string label, VecMap eval_on_sphere, VecMap inv_on_sphere) {
  if (dim < 1) throw BadParams("diffeo_from_maps: dimension must be >= 1");
  // Normalized re-projection: the extension is constant along rays.
  VecMap ev = [f = std::move(eval_on_sphere)](const Vec& x) -> Vec { return f(x / x.norm()); };
  VecMap iv = [f = std::move(inv_on_sphere)](const Vec& x) -> Vec { return f(x / x.norm()); };
  SphereDiffeo d;
  d.dim = dim;
  d.label = std::move(label);
  d.eval = ev;
  d.inv = iv;
  d.d_eval = [ev](const Vec& x) { return fd_jacobian(ev, x, 1e-5); };
  d.d_inv = [iv](const Vec& x) { return fd_jacobian(iv, x, 1e-5); };
  d.d2_eval = [ev](const Vec& x) { return fd_hessian(ev, x, 1e-4); };
  d.d2_inv = [iv](const Vec& x) { return fd_hessian(iv, x, 1e-4); };
  return d;
}

SphereDiffeo make_diffeo(const DiffeoSpec& spec, int dim) {
  if (spec.name == "identity") return identity_diffeo(dim);
  if (spec.name == "rotation") {
    if (spec.matrix.rows() != dim + 1 || spec.matrix.cols() != dim + 1) {
      std::ostringstream os;
      os << "rotation: expected a " << dim + 1 << "x" << dim + 1 << " matrix";
      throw BadParams(os.str());
    }
    return rotation_diffeo(spec.matrix);
  }
  if (spec.name == "quaternion_conj") {
    if (dim != 3) throw BadParams("quaternion_conj: only defined on S^3");
    return quaternion_conj_diffeo(spec.quaternion);
  }
  if (spec.name == "latitude_shear") return latitude_shear_diffeo(dim, spec.phi);
  throw BadParams("unknown twist fixture '" + spec.name + "'");
}

TwistPair make_twist(const DiffeoSpec& h1, const DiffeoSpec& h2, const ModelParams& params) {
  params.validate();
  return TwistPair{make_diffeo(h1, params.m), make_diffeo(h2, params.n)};
}

DiffeoCheck check_diffeo(const SphereDiffeo& d, int samples, std::uint64_t seed) {
  DiffeoCheck out;
  const int k = d.ambient();
  for (int s = 0; s < samples; ++s) {
    const Vec x = rng::uniform_sphere(k, seed, static_cast<std::uint64_t>(s));
    const Vec y = d.eval(x);
    out.norm_error = std::max({out.norm_error, std::abs(y.norm() - 1.0), std::abs(d.inv(x).norm() - 1.0)});
    out.roundtrip_error = std::max(out.roundtrip_error, (d.inv(y) - x).norm());

    auto rel = [](const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()); };
    out.d_eval_error = std::max({out.d_eval_error, rel(fd_jacobian(d.eval, x, 1e-5), d.d_eval(x)),
                                 rel(fd_jacobian(d.inv, x, 1e-5), d.d_inv(x))});
    out.d2_eval_error = std::max({out.d2_eval_error, Tensor::rel_diff(fd_hessian(d.eval, x, 1e-4), d.d2_eval(x)),
                                  Tensor::rel_diff(fd_hessian(d.inv, x, 1e-4), d.d2_inv(x))});
  }
  return out;
}

}  // namespace exoticflow
