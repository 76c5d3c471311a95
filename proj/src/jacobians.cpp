#include "exoticflow/jacobians.hpp"

#include <cmath>

namespace exoticflow {

Mat JacobianF::full() const {
  Mat J(d_gamma.rows(), d_gamma.cols() + d_kappa.cols());
  J << d_gamma, d_kappa;
  return J;
}

JacobianF df_region_a(const ChartPoint& p) {
  if (p.chart != Chart::A) throw BadParams("df_region_a expects a chart-A point");
  const Vec& x = p.u;
  const Vec& y = p.v;
  const int m1 = static_cast<int>(x.size()), n1 = static_cast<int>(y.size());
  const double x2 = x.squaredNorm();
  const double s = std::sqrt(1.0 + x2);

  JacobianF J;
  J.region = Chart::A;
  J.d_gamma = Mat::Zero(m1 + n1, m1);
  J.d_kappa = Mat::Zero(m1 + n1, n1);
  for (int nu = 0; nu < m1; ++nu) {
    for (int j = 0; j < m1; ++j) J.d_gamma(nu, j) = x[nu] * x[j] / s + (nu == j ? s : 0.0);
    for (int r = 0; r < n1; ++r) J.d_kappa(nu, r) = -x2 * x[nu] * y[r] / s;
  }
  for (int nu = 0; nu < n1; ++nu) {
    for (int j = 0; j < m1; ++j) J.d_gamma(m1 + nu, j) = x[j] * y[nu] / s;
    for (int r = 0; r < n1; ++r) J.d_kappa(m1 + nu, r) = (nu == r ? s : 0.0) - x2 * y[r] * y[nu] / s;
  }
  return J;
}

namespace {

// Quantities shared by the chart-B formulas at (x̄, ȳ).
struct RegionB {
  Vec a;      // h1⁻¹(x̄) = γ̂
  Vec yhat;   // ȳ / ‖ȳ‖
  Vec b;      // h2⁻¹(ŷ) = κ̂
  Mat H1;     // Dh1 at a
  Mat H2;     // Dh2 at b
  double r;   // ‖ȳ‖
  double s;   // √(1 + ‖ȳ‖²)
};

RegionB region_b(const ChartPoint& p, const TwistedSphere& sphere) {
  if (p.chart != Chart::B) throw BadParams("chart-B formula applied to a chart-A point");
  RegionB q;
  q.r = p.v.norm();
  if (q.r <= sphere.tol()) throw DegenerateChartPoint("chart-B differential needs ȳ ≠ 0");
  q.s = std::sqrt(1.0 + q.r * q.r);
  q.a = sphere.twist().h1.inv(p.u);
  q.yhat = p.v / q.r;
  q.b = sphere.twist().h2.inv(q.yhat);
  q.H1 = sphere.twist().h1.d_eval(q.a);
  q.H2 = sphere.twist().h2.d_eval(q.b);
  return q;
}

}  // namespace

JacobianF df_region_b(const ChartPoint& p, const TwistedSphere& sphere) {
  const RegionB q = region_b(p, sphere);
  const Vec& y = p.v;
  const int m1 = static_cast<int>(q.a.size()), n1 = static_cast<int>(q.b.size());
  const double r = q.r, s = q.s;

  JacobianF J;
  J.region = Chart::B;
  J.d_gamma = Mat::Zero(m1 + n1, m1);
  J.d_kappa = Mat::Zero(m1 + n1, n1);

  const Vec H1a = q.H1 * q.a;
  const Vec H2b = q.H2 * q.b;
  for (int nu = 0; nu < m1; ++nu) {
    for (int j = 0; j < m1; ++j) J.d_gamma(nu, j) = q.H1(nu, j) * s - (r * r / s) * H1a[nu] * q.a[j];
    for (int c = 0; c < n1; ++c) J.d_kappa(nu, c) = (r / s) * H1a[nu] * q.b[c];
  }
  for (int nu = 0; nu < n1; ++nu) {
    for (int j = 0; j < m1; ++j) J.d_gamma(m1 + nu, j) = -s * y[nu] * q.a[j] + (r / s) * H2b[nu] * q.a[j];
    for (int c = 0; c < n1; ++c)
      J.d_kappa(m1 + nu, c) = s * q.yhat[nu] * q.b[c] + q.H2(nu, c) * s - H2b[nu] * q.b[c] / s;
  }
  return J;
}

JacobianF df(const ChartPoint& p, const TwistedSphere& sphere) {
  return p.chart == Chart::A ? df_region_a(p) : df_region_b(p, sphere);
}

Vec pushforward(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere) {
  const int m1 = sphere.m() + 1, n1 = sphere.n() + 1;
  const Vec Vz = V.eval(sphere.embed(p).stacked());
  const auto Vg = Vz.head(m1);
  const auto Vk = Vz.tail(n1);
  Vec out = Vec::Zero(m1 + n1);

  if (p.chart == Chart::A) {
    const Vec& x = p.u;
    const Vec& y = p.v;
    const double x2 = x.squaredNorm();
    const double s = std::sqrt(1.0 + x2);
    const double xV = x.dot(Vg);
    const double yV = y.dot(Vk);
    for (int nu = 0; nu < m1; ++nu) {
      double acc = 0.0;
      for (int j = 0; j < m1; ++j) acc += (x[nu] * x[j] / s + (nu == j ? s : 0.0)) * Vg[j];
      acc -= (x2 / s) * x[nu] * yV;
      out[nu] = acc;
    }
    for (int nu = 0; nu < n1; ++nu) {
      double acc = y[nu] * xV / s;
      for (int c = 0; c < n1; ++c) acc += ((nu == c ? s : 0.0) - x2 * y[c] * y[nu] / s) * Vk[c];
      out[m1 + nu] = acc;
    }
    return out;
  }

  const RegionB q = region_b(p, sphere);
  const Vec& y = p.v;
  const double r = q.r, s = q.s;
  const double aV = q.a.dot(Vg);
  const double bV = q.b.dot(Vk);
  for (int nu = 0; nu < m1; ++nu) {
    double h1a = 0.0;
    for (int i = 0; i < m1; ++i) h1a += q.H1(nu, i) * q.a[i];
    double acc = (r / s) * h1a * bV;
    for (int j = 0; j < m1; ++j) acc += (q.H1(nu, j) * s - (r * r / s) * h1a * q.a[j]) * Vg[j];
    out[nu] = acc;
  }
  for (int nu = 0; nu < n1; ++nu) {
    double h2b = 0.0;
    for (int t = 0; t < n1; ++t) h2b += q.H2(nu, t) * q.b[t];
    double acc = (-s * y[nu] + (r / s) * h2b) * aV;
    acc += s * q.yhat[nu] * bV;
    for (int c = 0; c < n1; ++c) acc += (q.H2(nu, c) * s - h2b * q.b[c] / s) * Vk[c];
    out[m1 + nu] = acc;
  }
  return out;
}

Vec f_extension(const Vec& z, Chart chart, const TwistedSphere& sphere) {
  const int m1 = sphere.m() + 1, n1 = sphere.n() + 1;
  if (z.size() != m1 + n1) throw BadParams("f_extension: dimension mismatch");
  const Vec g = z.head(m1), k = z.tail(n1);
  const double zn = z.norm(), gn = g.norm(), kn = k.norm();
  Vec out(m1 + n1);
  if (chart == Chart::A) {
    if (kn <= sphere.tol()) throw PoleChartMismatch("f_extension: chart A needs κ ≠ 0");
    out << g * (zn / kn), k * (zn / kn);
    return out;
  }
  if (gn <= sphere.tol() || kn <= sphere.tol()) throw PoleChartMismatch("f_extension: chart B needs γ ≠ 0 and κ ≠ 0");
  out << sphere.twist().h1.eval(g * (zn / gn)), (kn / gn) * sphere.twist().h2.eval(k * (zn / kn));
  return out;
}

Vec pushforward_matrix(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere) {
  return df(p, sphere).full() * V.eval(sphere.embed(p).stacked());
}

}  // namespace exoticflow
