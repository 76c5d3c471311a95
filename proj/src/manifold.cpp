#include "exoticflow/manifold.hpp"

#include <cmath>
#include <sstream>

namespace exoticflow {

Vec ChartPoint::stacked() const {
  Vec w(u.size() + v.size());
  w << u, v;
  return w;
}

ChartPoint ChartPoint::from_stacked(Chart chart, const Vec& w, int m) {
  return ChartPoint{chart, w.head(m + 1), w.tail(w.size() - (m + 1))};
}

Vec SpherePoint::stacked() const {
  Vec z(gamma.size() + kappa.size());
  z << gamma, kappa;
  return z;
}

SpherePoint SpherePoint::from_stacked(const Vec& z, int m) {
  return SpherePoint{z.head(m + 1), z.tail(z.size() - (m + 1))};
}

Chart select_chart(const SpherePoint& z, std::optional<Chart> previous) {
  const double k2 = z.kappa.squaredNorm();
  double threshold = kChartThreshold;
  if (previous == Chart::A) threshold -= kChartHysteresis;
  if (previous == Chart::B) threshold += kChartHysteresis;
  return k2 >= threshold ? Chart::A : Chart::B;
}

Mat orthonormal_complement(const Vec& unit) {
  const int k = static_cast<int>(unit.size());
  Eigen::HouseholderQR<Mat> qr(unit);
  Mat Q = qr.householderQ() * Mat::Identity(k, k);
  return Q.rightCols(k - 1);
}

TwistedSphere::TwistedSphere(ModelParams params, TwistPair twist) : params_(params), twist_(std::move(twist)) {
  params_.validate();
  if (twist_.h1.dim != params_.m || twist_.h2.dim != params_.n) {
    std::ostringstream os;
    os << "twist dimensions (" << twist_.h1.dim << ", " << twist_.h2.dim << ") do not match (m, n) = (" << params_.m
       << ", " << params_.n << ")";
    throw BadParams(os.str());
  }
}

void TwistedSphere::check_chart_point(const ChartPoint& p, double slack) const {
  if (p.u.size() != m() + 1 || p.v.size() != n() + 1) throw BadParams("chart point has wrong dimensions");
  const double c = p.chart == Chart::A ? p.v.norm() : p.u.norm();
  if (!(std::abs(c - 1.0) <= slack * tol())) {
    std::ostringstream os;
    os << "chart " << chart_tag(p.chart) << " point violates its sphere-factor constraint (norm " << c << ")";
    throw BadParams(os.str());
  }
}

void TwistedSphere::check_sphere_point(const SpherePoint& z, double slack) const {
  if (z.gamma.size() != m() + 1 || z.kappa.size() != n() + 1) throw BadParams("sphere point has wrong dimensions");
  const double r2 = z.gamma.squaredNorm() + z.kappa.squaredNorm();
  if (!(std::abs(r2 - 1.0) <= slack * tol())) throw BadParams("sphere point is off the unit sphere");
}

ChartPoint TwistedSphere::normalize_constraint(ChartPoint p) const {
  if (p.chart == Chart::A)
    p.v /= p.v.norm();
  else
    p.u /= p.u.norm();
  return p;
}

ChartPoint TwistedSphere::transition_ab(const ChartPoint& p) const {
  if (p.chart != Chart::A) throw BadParams("transition_ab expects a chart-A point");
  const double t = p.u.norm();
  if (t <= tol()) throw DegenerateChartPoint("transition_ab: x̃ = 0 has no chart-B representative");
  return ChartPoint{Chart::B, twist_.h1.eval(p.u / t), twist_.h2.eval(p.v) / t};
}

ChartPoint TwistedSphere::transition_ba(const ChartPoint& p) const {
  if (p.chart != Chart::B) throw BadParams("transition_ba expects a chart-B point");
  const double r = p.v.norm();
  if (r <= tol()) throw DegenerateChartPoint("transition_ba: ȳ = 0 has no chart-A representative");
  return ChartPoint{Chart::A, twist_.h1.inv(p.u) / r, twist_.h2.inv(p.v / r)};
}

ChartPoint TwistedSphere::to_chart(const ChartPoint& p, Chart target) const {
  if (p.chart == target) return p;
  return target == Chart::B ? transition_ab(p) : transition_ba(p);
}

SpherePoint TwistedSphere::embed(const ChartPoint& p) const {
  if (p.chart == Chart::A) {
    const double s = std::sqrt(1.0 + p.u.squaredNorm());
    return SpherePoint{p.u / s, p.v / s};
  }
  const double r = p.v.norm();
  const double s = std::sqrt(1.0 + r * r);
  Vec kappa = Vec::Zero(p.v.size());
  if (r > 0.0) kappa = r * twist_.h2.inv(p.v / r) / s;
  return SpherePoint{twist_.h1.inv(p.u) / s, kappa};
}

ChartPoint TwistedSphere::project(const SpherePoint& z, ChartRequest want) const {
  const double g = z.gamma.norm();
  const double k = z.kappa.norm();
  Chart chart;
  if (want == ChartRequest::Auto) {
    chart = select_chart(z);
  } else {
    chart = want == ChartRequest::A ? Chart::A : Chart::B;
  }
  if (chart == Chart::A) {
    if (k <= tol()) throw PoleChartMismatch("project: chart A cannot represent κ = 0");
    return ChartPoint{Chart::A, z.gamma / k, z.kappa / k};
  }
  if (g <= tol()) throw PoleChartMismatch("project: chart B cannot represent γ = 0");
  Vec ybar = Vec::Zero(z.kappa.size());
  if (k > 0.0) ybar = (k / g) * twist_.h2.eval(z.kappa / k);
  return ChartPoint{Chart::B, twist_.h1.eval(z.gamma / g), ybar};
}

Mat TwistedSphere::transition_ab_jacobian(const ChartPoint& p) const {
  if (p.chart != Chart::A) throw BadParams("transition_ab_jacobian expects a chart-A point");
  const int m1 = m() + 1, n1 = n() + 1;
  const double t = p.u.norm();
  if (t <= tol()) throw DegenerateChartPoint("transition_ab_jacobian: x̃ = 0");
  const Vec xhat = p.u / t;
  Mat J = Mat::Zero(m1 + n1, m1 + n1);
  const Mat proj = Mat::Identity(m1, m1) - xhat * xhat.transpose();
  J.topLeftCorner(m1, m1) = twist_.h1.d_eval(xhat) * proj / t;
  J.bottomLeftCorner(n1, m1) = -twist_.h2.eval(p.v) * p.u.transpose() / (t * t * t);
  J.bottomRightCorner(n1, n1) = twist_.h2.d_eval(p.v) / t;
  return J;
}

Mat TwistedSphere::embed_jacobian(const ChartPoint& p) const {
  const int m1 = m() + 1, n1 = n() + 1;
  Mat J = Mat::Zero(m1 + n1, m1 + n1);
  if (p.chart == Chart::A) {
    const double s2 = 1.0 + p.u.squaredNorm();
    const double s = std::sqrt(s2);
    const double s3 = s2 * s;
    J.topLeftCorner(m1, m1) = Mat::Identity(m1, m1) / s - p.u * p.u.transpose() / s3;
    J.bottomLeftCorner(n1, m1) = -p.v * p.u.transpose() / s3;
    J.bottomRightCorner(n1, n1) = Mat::Identity(n1, n1) / s;
    return J;
  }
  const double r = p.v.norm();
  if (r <= tol()) throw DegenerateChartPoint("embed_jacobian: ȳ = 0 in chart B");
  const double s2 = 1.0 + r * r;
  const double s = std::sqrt(s2);
  const double s3 = s2 * s;
  const Vec a = twist_.h1.inv(p.u);
  const Vec yhat = p.v / r;
  const Vec b = twist_.h2.inv(yhat);
  const Mat P = Mat::Identity(n1, n1) - yhat * yhat.transpose();
  // g(ȳ) = ‖ȳ‖ h2⁻¹(ȳ/‖ȳ‖), Dg = b ŷᵀ + Dh2⁻¹(ŷ) P.
  const Mat Dg = b * yhat.transpose() + twist_.h2.d_inv(yhat) * P;
  J.topLeftCorner(m1, m1) = twist_.h1.d_inv(p.u) / s;
  J.topRightCorner(m1, n1) = -a * p.v.transpose() / s3;
  J.bottomRightCorner(n1, n1) = Dg / s - (r * b) * p.v.transpose() / s3;
  return J;
}

}  // namespace exoticflow
