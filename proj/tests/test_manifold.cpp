#include <gtest/gtest.h>

#include "common.hpp"
#include "exoticflow/numdiff.hpp"

using namespace exoticflow;
using namespace testing_support;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

ChartPoint pa(const Vec& u, const Vec& v) { return ChartPoint{Chart::A, u, v}; }
ChartPoint pb(const Vec& u, const Vec& v) { return ChartPoint{Chart::B, u, v}; }

}  // namespace

TEST(Transition, IdentityScalesByNorm) {
  const auto S = identity_sphere();
  const ChartPoint b = S.transition_ab(pa(v2(2, 0), v2(0, 1)));
  EXPECT_EQ(b.chart, Chart::B);
  EXPECT_NEAR((b.u - v2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.v - v2(0, 0.5)).norm(), 0.0, 1e-15);
}

TEST(Transition, UnitRadiusIsFixed) {
  const auto S = identity_sphere();
  const ChartPoint b = S.transition_ab(pa(v2(1, 0), v2(1, 0)));
  EXPECT_NEAR((b.u - v2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.v - v2(1, 0)).norm(), 0.0, 1e-15);
}

TEST(Transition, QuarterTurnOnFirstFactor) {
  ModelParams p;
  DiffeoSpec r;
  r.name = "rotation";
  r.matrix = rotation2(M_PI / 2);
  const TwistedSphere S(p, make_twist(r, {}, p));
  const ChartPoint b = S.transition_ab(pa(v2(2, 0), v2(0, 1)));
  EXPECT_NEAR((b.u - v2(0, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.v - v2(0, 0.5)).norm(), 0.0, 1e-15);
}

TEST(Transition, InverseExamples) {
  const auto S = identity_sphere();
  ChartPoint a = S.transition_ba(pb(v2(1, 0), v2(0, 0.5)));
  EXPECT_NEAR((a.u - v2(2, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.v - v2(0, 1)).norm(), 0.0, 1e-15);
  a = S.transition_ba(pb(v2(0, 1), v2(1, 0)));
  EXPECT_NEAR((a.u - v2(0, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.v - v2(1, 0)).norm(), 0.0, 1e-15);
}

TEST(Transition, DegenerateLociThrow) {
  const auto S = identity_sphere();
  EXPECT_THROW(S.transition_ab(pa(v2(0, 0), v2(0, 1))), DegenerateChartPoint);
  EXPECT_THROW(S.transition_ba(pb(v2(1, 0), v2(0, 0))), DegenerateChartPoint);
  EXPECT_THROW(S.transition_ab(pb(v2(1, 0), v2(0, 1))), BadParams);
}

TEST(Transition, QuaternionRoundtrip) {
  const auto S = quaternion_sphere();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec z = random_sphere(8, 11, i);
    const SpherePoint sp = SpherePoint::from_stacked(z, 3);
    const ChartPoint b = S.project(sp, ChartRequest::B);
    worst = std::max(worst, (S.transition_ab(S.transition_ba(b)).stacked() - b.stacked()).norm() / std::max(1.0, b.v.norm()));
    const ChartPoint a = S.project(sp, ChartRequest::A);
    worst = std::max(worst, (S.transition_ba(S.transition_ab(a)).stacked() - a.stacked()).norm() / std::max(1.0, a.u.norm()));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Embed, PolesAndUnitRadius) {
  const auto S = identity_sphere();
  SpherePoint z = S.embed(pa(v2(0, 0), v2(0, 1)));
  EXPECT_NEAR((z.stacked() - (Vec(4) << 0, 0, 0, 1).finished()).norm(), 0.0, 1e-15);
  z = S.embed(pa(v2(1, 0), v2(0, 1)));
  EXPECT_NEAR((z.stacked() - (Vec(4) << M_SQRT1_2, 0, 0, M_SQRT1_2).finished()).norm(), 0.0, 1e-15);
  z = S.embed(pb(v2(1, 0), v2(0, 0)));
  EXPECT_NEAR((z.stacked() - (Vec(4) << 1, 0, 0, 0).finished()).norm(), 0.0, 1e-15);
}

TEST(Project, PolesPickTheRegularChart) {
  const auto S = identity_sphere();
  ChartPoint p = S.project(SpherePoint{v2(0, 0), v2(0, 1)});
  EXPECT_EQ(p.chart, Chart::A);
  EXPECT_NEAR((p.stacked() - (Vec(4) << 0, 0, 0, 1).finished()).norm(), 0.0, 1e-15);
  p = S.project(SpherePoint{v2(1, 0), v2(0, 0)});
  EXPECT_EQ(p.chart, Chart::B);
  EXPECT_NEAR((p.stacked() - (Vec(4) << 1, 0, 0, 0).finished()).norm(), 0.0, 1e-15);
}

TEST(Project, SingularRequestThrows) {
  const auto S = identity_sphere();
  EXPECT_THROW(S.project(SpherePoint{v2(1, 0), v2(0, 0)}, ChartRequest::A), PoleChartMismatch);
  EXPECT_THROW(S.project(SpherePoint{v2(0, 0), v2(0, 1)}, ChartRequest::B), PoleChartMismatch);
}

TEST(SelectChart, ThresholdAndTie) {
  EXPECT_EQ(select_chart(SpherePoint{v2(0, 0), v2(1, 0)}), Chart::A);
  EXPECT_EQ(select_chart(SpherePoint{v2(1, 0), v2(0, 0)}), Chart::B);
  EXPECT_EQ(select_chart(SpherePoint{v2(M_SQRT1_2, 0), v2(0, M_SQRT1_2)}), Chart::A);
}

TEST(SelectChart, HysteresisBand) {
  // ‖κ‖² = 0.47 sits inside the band: stays where it was.
  const SpherePoint z{v2(std::sqrt(0.53), 0), v2(std::sqrt(0.47), 0)};
  EXPECT_EQ(select_chart(z), Chart::B);
  EXPECT_EQ(select_chart(z, Chart::A), Chart::A);
  EXPECT_EQ(select_chart(z, Chart::B), Chart::B);
  const SpherePoint w{v2(std::sqrt(0.47), 0), v2(std::sqrt(0.53), 0)};
  EXPECT_EQ(select_chart(w, Chart::B), Chart::B);
  EXPECT_EQ(select_chart(w, Chart::A), Chart::A);
}

TEST(Fixtures, IdentityAndRotationDerivatives) {
  const SphereDiffeo id = identity_diffeo(2);
  const Vec x = random_sphere(3, 1, 0);
  EXPECT_EQ(id.eval(x), x);
  EXPECT_EQ(id.d_eval(x), Mat::Identity(3, 3));
  const Mat R = rotation3(0.4, {0, 1, 1});
  const SphereDiffeo rot = rotation_diffeo(R);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(rot.d_eval(random_sphere(3, 2, i)), R);
}

TEST(Fixtures, ShearRoundtripAndDerivatives) {
  const SphereDiffeo sh = latitude_shear_diffeo(2, {0.0, 1.0});
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec y = random_sphere(3, 3, i);
    worst = std::max(worst, (sh.inv(sh.eval(y)) - y).norm());
  }
  EXPECT_LE(worst, 1e-12);
  const DiffeoCheck c = check_diffeo(sh, 200, 5);
  EXPECT_LE(c.norm_error, 1e-12);
  EXPECT_LE(c.d_eval_error, 1e-6);
  EXPECT_LE(c.d2_eval_error, 1e-4);
}

TEST(Fixtures, AllSatisfyDiffeoInvariants) {
  for (const auto& f : all_fixtures()) {
    for (const SphereDiffeo* d : {&f.sphere.twist().h1, &f.sphere.twist().h2}) {
      const DiffeoCheck c = check_diffeo(*d, 300, 9);
      EXPECT_LE(c.norm_error, 1e-12) << f.name;
      EXPECT_LE(c.roundtrip_error, 1e-12) << f.name;
      EXPECT_LE(c.d_eval_error, 1e-6) << f.name;
      EXPECT_LE(c.d2_eval_error, 1e-4) << f.name;
    }
  }
}

TEST(Fixtures, BadParameters) {
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = 0.1;
  EXPECT_THROW(rotation_diffeo(bad), BadParams);
  EXPECT_THROW(quaternion_conj_diffeo(Eigen::Vector4d(1, 1, 0, 0)), BadParams);
  EXPECT_THROW(latitude_shear_diffeo(2, {}), BadParams);
  EXPECT_THROW(latitude_shear_diffeo(2, {0.0, std::nan("")}), BadParams);
  EXPECT_THROW(latitude_shear_diffeo(1, {0.0, 1.0}), BadParams);
  DiffeoSpec q;
  q.name = "quaternion_conj";
  EXPECT_THROW(make_diffeo(q, 2), BadParams);
  DiffeoSpec unknown;
  unknown.name = "mystery";
  EXPECT_THROW(make_diffeo(unknown, 2), BadParams);
  ModelParams p;
  p.m = 1;
  p.n = 2;
  EXPECT_THROW(TwistedSphere(p, TwistPair{identity_diffeo(1), identity_diffeo(1)}), BadParams);
}

TEST(Fixtures, UserMapsUseFiniteDifferenceDerivatives) {
  const Mat R = rotation3(0.9, {1, 1, 0});
  const SphereDiffeo d = diffeo_from_maps(2, "user", [R](const Vec& x) -> Vec { return R * x; },
                                          [R](const Vec& x) -> Vec { return R.transpose() * x; });
  const Vec x = random_sphere(3, 4, 0);
  EXPECT_NEAR((d.eval(x) - R * x).norm(), 0.0, 1e-15);
  // Extension is constant along rays, so the derivative is R projected tangentially.
  const Mat expect = R * (Mat::Identity(3, 3) - x * x.transpose());
  EXPECT_LE(max_rel(d.d_eval(x), expect), 1e-8);
}

TEST(Roundtrip, EmbedProjectEveryFixture) {
  for (const auto& f : all_fixtures()) {
    const TwistedSphere& S = f.sphere;
    double up = 0.0, down = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vec z = random_sphere(S.ambient_dim(), 21, i);
      const ChartPoint p = S.project(SpherePoint::from_stacked(z, S.m()));
      up = std::max(up, (S.embed(p).stacked() - z).norm());
      const ChartPoint back = S.project(S.embed(p), p.chart == Chart::A ? ChartRequest::A : ChartRequest::B);
      down = std::max(down, (back.stacked() - p.stacked()).norm());
    }
    EXPECT_LE(up, 1e-12) << f.name;
    EXPECT_LE(down, 1e-12) << f.name;
  }
}

TEST(Roundtrip, BranchesAgreeOnOverlap) {
  for (const auto& f : all_fixtures()) {
    const TwistedSphere& S = f.sphere;
    double worst = 0.0, transit = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const SpherePoint sp = SpherePoint::from_stacked(random_sphere(S.ambient_dim(), 22, i), S.m());
      const ChartPoint a = S.project(sp, ChartRequest::A);
      const ChartPoint b = S.project(sp, ChartRequest::B);
      worst = std::max(worst, (S.embed(a).stacked() - S.embed(b).stacked()).norm());
      transit = std::max(transit, (S.embed(a).stacked() - S.embed(S.transition_ab(a)).stacked()).norm());
    }
    EXPECT_LE(worst, 1e-12) << f.name;
    EXPECT_LE(transit, 1e-12) << f.name;
  }
}

TEST(Roundtrip, ChartCheckValidation) {
  const auto S = identity_sphere();
  EXPECT_THROW(S.check_chart_point(pa(v2(0, 0), v2(0, 2))), BadParams);
  EXPECT_THROW(S.check_chart_point(pb(v2(2, 0), v2(0, 0))), BadParams);
  EXPECT_THROW(S.check_chart_point(ChartPoint{Chart::A, Vec::Zero(3), v2(0, 1)}), BadParams);
  EXPECT_NO_THROW(S.check_chart_point(pa(v2(5, 0), v2(0, 1))));
  EXPECT_THROW(S.check_sphere_point(SpherePoint{v2(1, 0), v2(1, 0)}), BadParams);
}

TEST(Seam, IdentityTwistIsSmoothAcrossCharts) {
  const auto S = identity_sphere(2, 1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vec z = random_sphere(S.ambient_dim(), 23, i);
    const VecMap via_b = [&](const Vec& w) {
      return S.transition_ba(ChartPoint::from_stacked(Chart::B, literal_f(w, Chart::B, S), S.m())).stacked();
    };
    const VecMap direct = [&](const Vec& w) { return literal_f(w, Chart::A, S); };
    // The two ambient extensions differ radially; only tangent directions are intrinsic.
    const Mat P = Mat::Identity(z.size(), z.size()) - z * z.transpose();
    worst = std::max(worst, max_rel(fd_jacobian(via_b, z, 1e-5) * P, fd_jacobian(direct, z, 1e-5) * P));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Transition, JacobianMatchesFiniteDifferences) {
  for (const auto& f : all_fixtures()) {
    const TwistedSphere& S = f.sphere;
    for (int i = 0; i < 100; ++i) {
      const ChartPoint a = S.project(SpherePoint::from_stacked(random_sphere(S.ambient_dim(), 24, i), S.m()), ChartRequest::A);
      const VecMap map = [&](const Vec& w) { return S.transition_ab(ChartPoint::from_stacked(Chart::A, w, S.m())).stacked(); };
      EXPECT_LE(max_rel(S.transition_ab_jacobian(a), fd_jacobian(map, a.stacked(), 1e-6)), 1e-6) << f.name;
      EXPECT_LE(max_rel(S.embed_jacobian(a), fd_jacobian([&](const Vec& w) {
                          return S.embed(ChartPoint::from_stacked(Chart::A, w, S.m())).stacked();
                        }, a.stacked(), 1e-6)),
                1e-6)
          << f.name;
      const ChartPoint b = S.transition_ab(a);
      EXPECT_LE(max_rel(S.embed_jacobian(b), fd_jacobian([&](const Vec& w) {
                          return S.embed(ChartPoint::from_stacked(Chart::B, w, S.m())).stacked();
                        }, b.stacked(), 1e-6)),
                1e-6)
          << f.name;
    }
  }
}
