#include "exoticflow/regularity.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "exoticflow/numdiff.hpp"
#include "exoticflow/parallel.hpp"
#include "exoticflow/rng.hpp"

namespace exoticflow {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Bounded:
      return "bounded";
    case Verdict::BlowsUp:
      return "blows_up";
    default:
      return "inconclusive";
  }
}

nlohmann::json RegularityReport::to_json() const {
  nlohmann::json j;
  j["twist"] = twist_label;
  j["samples_per_shell"] = samples_per_shell;
  j["fd_step_frac"] = fd_step_frac;
  j["floor"] = floor;
  j["growth_exponent_g"] = growth_exponent_g;
  j["growth_exponent_rg"] = growth_exponent_rg;
  j["verdict"] = verdict_name(verdict);
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 0; k < shells.size(); ++k)
    table.push_back({{"r", shells[k]}, {"d2_sup_g", d2_sup_g[k]}, {"d2_sup_rg", d2_sup_rg[k]}});
  j["shells"] = table;
  return j;
}

std::string RegularityReport::shell_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "r,d2_sup_g,d2_sup_rg\n";
  for (std::size_t k = 0; k < shells.size(); ++k) os << shells[k] << "," << d2_sup_g[k] << "," << d2_sup_rg[k] << "\n";
  return os.str();
}

std::vector<double> dyadic_shells(int first, int last) {
  if (first < 0 || last < first) throw BadParams("dyadic_shells: bad range");
  std::vector<double> r;
  for (int k = first; k <= last; ++k) r.push_back(std::ldexp(1.0, -k));
  return r;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw BadParams("log_log_slope: need two equal-length series");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// max over (c, d) of the output-norm of a second-derivative tensor (out, c, d).
double hessian_sup(const Tensor& H) {
  const auto& sh = H.shape();
  double best = 0.0;
  for (int c = 0; c < sh[1]; ++c)
    for (int d = 0; d < sh[2]; ++d) {
      double acc = 0.0;
      for (int r = 0; r < sh[0]; ++r) acc += H(r, c, d) * H(r, c, d);
      best = std::max(best, std::sqrt(acc));
    }
  return best;
}

}  // namespace

RegularityReport probe_c2(const SphereDiffeo& h2, const std::vector<double>& shells, int samples_per_shell,
                          double fd_step_frac, std::uint64_t seed) {
  if (shells.size() < 5) throw BadParams("probe_c2: need at least 5 shells");
  for (std::size_t k = 0; k < shells.size(); ++k) {
    if (!(shells[k] > 0.0 && shells[k] <= 1.0)) throw BadParams("probe_c2: shells must lie in (0, 1]");
    if (k > 0 && !(shells[k] < shells[k - 1])) throw BadParams("probe_c2: shells must be strictly decreasing");
  }
  if (samples_per_shell < 1) throw BadParams("probe_c2: samples_per_shell must be >= 1");
  if (!(fd_step_frac > 0.0 && fd_step_frac < 0.5)) throw BadParams("probe_c2: fd_step_frac must lie in (0, 0.5)");

  const VecMap g = [&h2](const Vec& y) -> Vec { return h2.inv(y / y.norm()); };
  const VecMap rg = [&h2](const Vec& y) -> Vec { return y.norm() * h2.inv(y / y.norm()); };

  RegularityReport rep;
  rep.twist_label = h2.label;
  rep.shells = shells;
  rep.samples_per_shell = samples_per_shell;
  rep.fd_step_frac = fd_step_frac;
  rep.d2_sup_g.assign(shells.size(), 0.0);
  rep.d2_sup_rg.assign(shells.size(), 0.0);

  parallel_for(static_cast<int>(shells.size()), [&](int k) {
    const double r = shells[k];
    const std::uint64_t shell_seed = rng::key(seed, static_cast<std::uint64_t>(k), 0, 0xC2);
    double sg = 0.0, srg = 0.0;
    for (int s = 0; s < samples_per_shell; ++s) {
      const Vec y = r * rng::uniform_sphere(h2.ambient(), shell_seed, static_cast<std::uint64_t>(s));
      const double step = fd_step_frac * r;
      sg = std::max(sg, hessian_sup(fd_hessian(g, y, step)));
      srg = std::max(srg, hessian_sup(fd_hessian(rg, y, step)));
    }
    rep.d2_sup_g[k] = sg;
    rep.d2_sup_rg[k] = srg;
  });

  double r_min = shells.back();
  rep.floor = 1e3 * 4.0 * std::numeric_limits<double>::epsilon() / (fd_step_frac * fd_step_frac * r_min);
  std::vector<double> fg, frg;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    fg.push_back(std::max(rep.d2_sup_g[k], rep.floor));
    frg.push_back(std::max(rep.d2_sup_rg[k], rep.floor));
  }
  rep.growth_exponent_g = log_log_slope(shells, fg);
  rep.growth_exponent_rg = log_log_slope(shells, frg);
  if (rep.growth_exponent_rg >= kBoundedExponent)
    rep.verdict = Verdict::Bounded;
  else if (rep.growth_exponent_rg <= kBlowupExponent)
    rep.verdict = Verdict::BlowsUp;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

namespace {

struct YDerivs {
  int m1 = 0, n1 = 0;
  Vec a;     // h1⁻¹(x̄)
  Vec y;     // ȳ
  Vec yhat;  // ȳ/‖ȳ‖
  Vec b;     // h2⁻¹(ŷ)
  Mat B;     // Dh2⁻¹ at ŷ
  Tensor C;  // D²h2⁻¹ at ŷ
  Vec By;    // B ȳ
  Mat P;     // I − ŷŷᵀ
  double r = 0.0, s = 0.0;
  Mat K;  // ∂κ^r/∂ȳ^c
};

YDerivs y_derivs(const ChartPoint& p, const TwistedSphere& sphere) {
  if (p.chart != Chart::B) throw BadParams("second-derivative coefficients need a chart-B point");
  YDerivs q;
  q.m1 = sphere.m() + 1;
  q.n1 = sphere.n() + 1;
  q.y = p.v;
  q.r = p.v.norm();
  if (q.r <= sphere.tol()) throw DegenerateChartPoint("second-derivative coefficients need ȳ ≠ 0");
  q.s = std::sqrt(1.0 + q.r * q.r);
  q.a = sphere.twist().h1.inv(p.u);
  q.yhat = p.v / q.r;
  q.b = sphere.twist().h2.inv(q.yhat);
  q.B = sphere.twist().h2.d_inv(q.yhat);
  q.C = sphere.twist().h2.d2_inv(q.yhat);
  q.By = q.B * q.y;
  q.P = Mat::Identity(q.n1, q.n1) - q.yhat * q.yhat.transpose();
  const double s = q.s, s3 = s * s * s;
  const Vec Byh = q.B * q.yhat;
  q.K = Mat::Zero(q.n1, q.n1);
  for (int r = 0; r < q.n1; ++r)
    for (int c = 0; c < q.n1; ++c)
      q.K(r, c) = q.b[r] * q.yhat[c] / s + q.B(r, c) / s - Byh[r] * q.yhat[c] / s - q.r * q.b[r] * q.y[c] / s3;
  return q;
}

// The four summands of ∂κ^r/∂ȳ^c, as separate arrays, for the product expansion.
std::array<Mat, 4> kappa_terms(const YDerivs& q) {
  const double s = q.s, s3 = s * s * s;
  const Vec Byh = q.B * q.yhat;
  std::array<Mat, 4> t;
  for (auto& m : t) m = Mat::Zero(q.n1, q.n1);
  for (int r = 0; r < q.n1; ++r)
    for (int c = 0; c < q.n1; ++c) {
      t[0](r, c) = q.b[r] * q.yhat[c] / s;
      t[1](r, c) = q.B(r, c) / s;
      t[2](r, c) = -Byh[r] * q.yhat[c] / s;
      t[3](r, c) = -q.r * q.b[r] * q.y[c] / s3;
    }
  return t;
}

Tensor koe_from(const YDerivs& q, int which) {
  const int m1 = q.m1, n1 = q.n1;
  const Vec& a = q.a;
  const Vec& y = q.y;
  const Vec& b = q.b;
  const double r = q.r, s = q.s;
  const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2, s5 = s4 * s, s6 = s4 * s2;

  switch (which) {
    case 1: {
      Tensor T({m1, m1, n1, n1});
      for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m1; ++j)
          for (int c = 0; c < n1; ++c)
            for (int d = 0; d < n1; ++d) T(i, j, c, d) = a[i] * a[j] * y[c] * y[d] / s6;
      return T;
    }
    case 2: {
      Tensor T({m1, n1, n1});
      for (int i = 0; i < m1; ++i)
        for (int c = 0; c < n1; ++c)
          for (int d = 0; d < n1; ++d) T(i, c, d) = 3.0 * a[i] * y[c] * y[d] / s5 - (c == d ? a[i] / s3 : 0.0);
      return T;
    }
    case 3:
    case 4: {
      Tensor T({m1, n1, n1, n1});
      for (int j = 0; j < m1; ++j)
        for (int rr = 0; rr < n1; ++rr)
          for (int c0 = 0; c0 < n1; ++c0)
            for (int d0 = 0; d0 < n1; ++d0) {
              // koe4 is koe3 with the roles of c and d exchanged.
              const int c = which == 3 ? c0 : d0;
              const int d = which == 3 ? d0 : c0;
              T(j, rr, c0, d0) = r * a[j] * b[rr] * y[c] * y[d] / s6 - a[j] * b[rr] * y[c] * y[d] / (s4 * r) +
                                 a[j] * q.By[rr] * y[d] * y[c] / (s4 * r * r) - a[j] * y[d] * q.B(rr, c) / s4;
            }
      return T;
    }
    case 5: {
      const auto t = kappa_terms(q);
      Tensor T({n1, n1, n1, n1});
      for (int rr = 0; rr < n1; ++rr)
        for (int ss = 0; ss < n1; ++ss)
          for (int c = 0; c < n1; ++c)
            for (int d = 0; d < n1; ++d) {
              double acc = 0.0;
              for (int al = 0; al < 4; ++al)
                for (int be = 0; be < 4; ++be) acc += t[al](rr, c) * t[be](ss, d);
              T(rr, ss, c, d) = acc;
            }
      return T;
    }
    case 6: {
      const Vec g = r * b;
      const Mat Dg = b * q.yhat.transpose() + q.B * q.P;
      const Vec bmB = b - q.B * q.yhat;
      Tensor T({n1, n1, n1});
      for (int rr = 0; rr < n1; ++rr) {
        Mat Cr(n1, n1);
        for (int t = 0; t < n1; ++t)
          for (int u = 0; u < n1; ++u) Cr(t, u) = q.C(rr, t, u);
        const Mat PCP = q.P * Cr * q.P;
        for (int c = 0; c < n1; ++c)
          for (int d = 0; d < n1; ++d) {
            const double d2g = (bmB[rr] * q.P(c, d) + PCP(c, d)) / r;
            T(rr, c, d) = d2g / s - (Dg(rr, c) * y[d] + Dg(rr, d) * y[c]) / s3 +
                          g[rr] * (3.0 * y[c] * y[d] / s5 - (c == d ? 1.0 / s3 : 0.0));
          }
      }
      return T;
    }
    default:
      throw BadParams("koe_terms: which must be 1..6");
  }
}

}  // namespace

Tensor koe_terms(const ChartPoint& p, const TwistedSphere& sphere, int which) {
  if (which < 1 || which > 6) throw BadParams("koe_terms: which must be 1..6");
  return koe_from(y_derivs(p, sphere), which);
}

Tensor d2_pullback_components(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere, Pair pair) {
  const YDerivs q = y_derivs(p, sphere);
  const int m1 = q.m1, n1 = q.n1, N = m1 + n1;
  const Vec z = sphere.embed(p).stacked();
  const Mat DV = V.derivative(z);
  const Tensor H = V.second_derivative(z);
  const double s = q.s, s3 = s * s * s;

  if (pair == Pair::XX) {
    const Mat Da = sphere.twist().h1.d_inv(p.u);
    const Tensor D2a = sphere.twist().h1.d2_inv(p.u);
    Tensor T({N, m1, m1});
    for (int nu = 0; nu < N; ++nu)
      for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m1; ++j) {
          double acc = 0.0;
          for (int k = 0; k < m1; ++k) {
            for (int l = 0; l < m1; ++l) acc += H(nu, k, l) * Da(k, i) * Da(l, j) / (s * s);
            acc += DV(nu, k) * D2a(k, i, j) / s;
          }
          T(nu, i, j) = acc;
        }
    return T;
  }

  if (pair == Pair::XY) {
    const Mat Da = sphere.twist().h1.d_inv(p.u);
    Tensor T({N, m1, n1});
    for (int nu = 0; nu < N; ++nu)
      for (int i = 0; i < m1; ++i)
        for (int c = 0; c < n1; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m1; ++k) {
            double inner = -q.y[c] / s3 * DV(nu, k);
            for (int l = 0; l < m1; ++l) inner += H(nu, k, l) * (-q.a[l] * q.y[c] / s3) / s;
            for (int r = 0; r < n1; ++r) inner += H(nu, k, m1 + r) * q.K(r, c) / s;
            acc += Da(k, i) * inner;
          }
          T(nu, i, c) = acc;
        }
    return T;
  }

  const Tensor k1 = koe_from(q, 1), k2 = koe_from(q, 2), k3 = koe_from(q, 3), k4 = koe_from(q, 4), k5 = koe_from(q, 5),
               k6 = koe_from(q, 6);
  Tensor T({N, n1, n1});
  for (int nu = 0; nu < N; ++nu)
    for (int c = 0; c < n1; ++c)
      for (int d = 0; d < n1; ++d) {
        double acc = 0.0;
        for (int i = 0; i < m1; ++i) {
          for (int j = 0; j < m1; ++j) acc += H(nu, i, j) * k1(i, j, c, d);
          acc += DV(nu, i) * k2(i, c, d);
        }
        for (int j = 0; j < m1; ++j)
          for (int r = 0; r < n1; ++r) acc += H(nu, j, m1 + r) * (k3(j, r, c, d) + k4(j, r, c, d));
        for (int r = 0; r < n1; ++r) {
          for (int t = 0; t < n1; ++t) acc += H(nu, m1 + r, m1 + t) * k5(r, t, c, d);
          acc += DV(nu, m1 + r) * k6(r, c, d);
        }
        T(nu, c, d) = acc;
      }
  return T;
}

}  // namespace exoticflow
