#include <gtest/gtest.h>

#include "common.hpp"
#include "exoticflow/sde.hpp"

using namespace exoticflow;
using namespace testing_support;

namespace {

FlowConfig flow(double T, double dt) {
  FlowConfig c;
  c.T = T;
  c.dt = dt;
  return c;
}

// Mean terminal error over n_paths, finest level first generated then coarsened.
std::vector<double> level_errors(const AmbientVectorField& V0, const std::vector<AmbientVectorField>& Vk,
                                 const Vec& q0, int halvings, int n_paths,
                                 const std::function<Vec(const BrownianPath&)>& exact) {
  std::vector<double> err(halvings + 1, 0.0);
  const double fine = 1e-2 / std::pow(2.0, halvings);
  for (int j = 0; j < n_paths; ++j) {
    BrownianPath path = BrownianPath::generate(static_cast<int>(Vk.size()), fine,
                                               static_cast<int>(std::lround(1.0 / fine)), rng::derive_seed(71, j));
    for (int lv = halvings; lv >= 0; --lv) {
      const SphereFlow run = integrate_sphere(V0, Vk, q0, path, flow(1.0, path.dt));
      err[lv] += (run.points.back() - exact(path)).norm() / n_paths;
      if (lv > 0) path = path.coarsen();
    }
  }
  return err;
}

}  // namespace

TEST(Brownian, DeterministicPerKey) {
  const BrownianPath a = BrownianPath::generate(3, 1e-3, 100, 5);
  const BrownianPath b = BrownianPath::generate(3, 1e-3, 100, 5);
  const BrownianPath c = BrownianPath::generate(3, 1e-3, 100, 6);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_NE(a.increments, c.increments);
  // Shorter path is a prefix of the longer one.
  const BrownianPath d = BrownianPath::generate(3, 1e-3, 50, 5);
  EXPECT_EQ(d.increments, a.increments.topRows(50));
}

TEST(Brownian, IncrementStatistics) {
  const BrownianPath p = BrownianPath::generate(2, 0.01, 20000, 9);
  const double var = p.increments.col(0).squaredNorm() / p.n_steps;
  EXPECT_NEAR(var, 0.01, 4 * 0.01 * std::sqrt(2.0 / p.n_steps));
  EXPECT_NEAR(p.increments.col(1).mean(), 0.0, 4 * 0.1 / std::sqrt(p.n_steps));
}

TEST(Brownian, CoarsenAndRefinePreserveThePath) {
  const BrownianPath p = BrownianPath::generate(2, 1e-3, 64, 11);
  const BrownianPath c = p.coarsen();
  EXPECT_EQ(c.n_steps, 32);
  EXPECT_DOUBLE_EQ(c.dt, 2e-3);
  for (int i = 0; i <= 32; ++i) EXPECT_LE((c.value_at(i) - p.value_at(2 * i)).norm(), 1e-15);
  const BrownianPath r = p.refine();
  EXPECT_EQ(r.n_steps, 128);
  EXPECT_LE((r.coarsen().increments - p.increments).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((r.refine().refine().coarsen().increments - r.refine().increments).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((p.terminal() - p.increments.colwise().sum().transpose()).norm(), 1e-14);
  EXPECT_THROW(BrownianPath::generate(1, 1e-3, 3, 1).coarsen(), BadParams);
  EXPECT_THROW(p.value_at(65), BadParams);
  EXPECT_THROW(BrownianPath::generate(1, 0.0, 3, 1), BadParams);
}

TEST(Brownian, RefinedVarianceIsHalf) {
  const BrownianPath r = BrownianPath::generate(1, 0.02, 10000, 12).refine();
  EXPECT_NEAR(r.increments.squaredNorm() / r.n_steps, 0.01, 4 * 0.01 * std::sqrt(2.0 / r.n_steps));
}

TEST(FlowConfig, StepCount) {
  EXPECT_EQ(flow(1.0, 1e-3).n_steps(), 1000);
  EXPECT_EQ(flow(0.3, 0.1).n_steps(), 3);
  EXPECT_THROW(flow(1.0, 0.3).n_steps(), BadParams);
  EXPECT_THROW(flow(-1.0, 0.1).n_steps(), BadParams);
}

TEST(IntegrateSphere, ZeroFieldsStayPut) {
  const Vec q0 = random_sphere(4, 72, 0);
  const BrownianPath path = BrownianPath::generate(2, 1e-2, 100, 1);
  const SphereFlow run = integrate_sphere(zero_field(4), {zero_field(4), zero_field(4)}, q0, path, flow(1.0, 1e-2));
  ASSERT_EQ(run.points.size(), 101u);
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    EXPECT_LE((run.points[i] - q0).norm(), 1e-15);
    EXPECT_EQ(run.rho[i], 1.0);
  }
  EXPECT_DOUBLE_EQ(run.times.back(), 1.0);
}

TEST(IntegrateSphere, DriftOnlyIsSecondOrder) {
  const Mat A = random_antisymmetric(4, 73) * 0.5;
  const Vec q0 = random_sphere(4, 73, 1);
  const auto e = level_errors(rotation_field(A), {}, q0, 3, 1,
                              [&](const BrownianPath&) { return exp_rotation(A, 1.0, q0); });
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e[i] / e[i + 1], 4.0, 0.4);
}

TEST(IntegrateSphere, SingleNoiseMatchesMatrixExponential) {
  const Mat A = random_antisymmetric(4, 74) * 0.5;
  const Vec q0 = random_sphere(4, 74, 1);
  const auto e = level_errors(zero_field(4), {rotation_field(A)}, q0, 3, 24,
                              [&](const BrownianPath& p) { return exp_rotation(A, p.terminal()[0], q0); });
  for (int i = 0; i < 3; ++i) EXPECT_GE(e[i] / e[i + 1], 1.4);
}

TEST(IntegrateSphere, StaysOnSphere) {
  const BrownianPath path = BrownianPath::generate(1, 1e-2, 100, 2);
  const SphereFlow run = integrate_sphere(gradient_linear_field(Vec::Ones(5)), {rotation_field(random_antisymmetric(5, 75))},
                                          random_sphere(5, 75, 0), path, flow(1.0, 1e-2));
  for (const Vec& q : run.points) EXPECT_NEAR(q.norm(), 1.0, 1e-14);
}

TEST(IntegrateSphere, InputValidation) {
  const BrownianPath path = BrownianPath::generate(1, 1e-2, 100, 2);
  const Vec q0 = random_sphere(4, 76, 0);
  EXPECT_THROW(integrate_sphere(zero_field(4), {}, q0, path, flow(1.0, 1e-2)), BadParams);
  EXPECT_THROW(integrate_sphere(zero_field(4), {zero_field(4)}, q0, path, flow(1.0, 2e-2)), BadParams);
  EXPECT_THROW(integrate_sphere(zero_field(4), {zero_field(4)}, 2.0 * q0, path, flow(1.0, 1e-2)), BadParams);
  EXPECT_THROW(integrate_sphere(zero_field(5), {zero_field(5)}, q0, path, flow(1.0, 1e-2)), BadParams);
}

TEST(IntegrateSphere, BlowupReportsStep) {
  const BrownianPath path = BrownianPath::generate(0, 1e-2, 100, 2);
  try {
    integrate_sphere(rotation_field(plane_generator(4, 0, 1, 1e7)), {}, Vec::Unit(4, 0), path, flow(1.0, 1e-2));
    FAIL() << "expected StepBlowup";
  } catch (const StepBlowup& e) {
    EXPECT_EQ(e.step(), 0);
  }
}

TEST(Transport, IdentityTwistRoundtrips) {
  const auto S = identity_sphere();
  const BrownianPath path = BrownianPath::generate(2, 1e-3, 1000, 3);
  const Vec q0 = random_sphere(4, 77, 0);
  const SphereFlow run = integrate_sphere(rotation_field(plane_generator(4, 0, 2)),
                                          {rotation_field(plane_generator(4, 1, 3)), rotation_field(random_antisymmetric(4, 77))},
                                          q0, path, flow(1.0, 1e-3));
  const ChartFlow tf = transport_flow(S.project(SpherePoint::from_stacked(q0, 1)), run, S);
  EXPECT_LE(sup_deviation(embed_trajectory(tf, S), run.points), 1e-12);
  EXPECT_EQ(tf.rho, run.rho);
}

TEST(Transport, QuaternionTwistRoundtrips) {
  const auto S = quaternion_sphere();
  const BrownianPath path = BrownianPath::generate(1, 1e-3, 1000, 4);
  const Vec q0 = random_sphere(8, 78, 0);
  const SphereFlow run = integrate_sphere(zero_field(8), {rotation_field(random_antisymmetric(8, 78))}, q0, path, flow(1.0, 1e-3));
  const ChartFlow tf = transport_flow(S.project(SpherePoint::from_stacked(q0, 3)), run, S);
  EXPECT_LE(sup_deviation(embed_trajectory(tf, S), run.points), 1e-10);
}

TEST(Transport, ConstantAtKappaPole) {
  const auto S = identity_sphere();
  const Vec pole = Vec::Unit(4, 3);
  const BrownianPath path = BrownianPath::generate(0, 0.1, 10, 1);
  const SphereFlow run = integrate_sphere(zero_field(4), {}, pole, path, flow(1.0, 0.1));
  const ChartFlow tf = transport_flow(S.project(SpherePoint::from_stacked(pole, 1)), run, S);
  for (const auto& p : tf.points) {
    EXPECT_EQ(p.chart, Chart::A);
    EXPECT_EQ(p.stacked(), tf.points.front().stacked());
  }
  EXPECT_TRUE(tf.seams.empty());
}

TEST(Transport, RejectsMismatchedStart) {
  const auto S = identity_sphere();
  const BrownianPath path = BrownianPath::generate(0, 0.1, 10, 1);
  const SphereFlow run = integrate_sphere(zero_field(4), {}, Vec::Unit(4, 3), path, flow(1.0, 0.1));
  EXPECT_THROW(transport_flow(S.project(SpherePoint::from_stacked(Vec::Unit(4, 2), 1)), run, S), BadParams);
}

TEST(Exotic, ZeroFieldsStayPut) {
  const auto S = rotation_sphere();
  const ChartPoint p0 = S.project(SpherePoint::from_stacked(random_sphere(5, 79, 0), 1));
  const BrownianPath path = BrownianPath::generate(1, 1e-2, 100, 5);
  const ChartFlow run = integrate_exotic(zero_field(5), {zero_field(5)}, p0, path, S, flow(1.0, 1e-2));
  for (const auto& p : run.points) EXPECT_LE((p.stacked() - p0.stacked()).norm(), 1e-15);
}

TEST(Exotic, IdentityTwistDeviationIsFirstOrderInDt) {
  // The chart-coordinate Heun scheme is a different discretization from the
  // ambient one, so agreement is at the scheme's order rather than exact.
  const auto S = identity_sphere();
  const Vec q0 = random_sphere(4, 80, 2);
  FlowConfig cfg = flow(1.0, 1e-3);
  const ConvergenceReport rep = transport_convergence(rotation_field(plane_generator(4, 0, 2)),
                                                      {rotation_field(plane_generator(4, 1, 3))},
                                                      S.project(SpherePoint::from_stacked(q0, 1)), S, cfg, 80, 4, 2);
  ASSERT_EQ(rep.errors.size(), 3u);
  EXPECT_LT(rep.errors[0], 1e-2);
  for (double r : rep.ratios) EXPECT_GE(r, 1.4);
}

TEST(Exotic, RotationTwistConvergesUnderHalving) {
  const auto S = rotation_sphere();
  const Vec q0 = random_sphere(5, 81, 0);
  const ConvergenceReport rep = transport_convergence(zero_field(5), {rotation_field(random_antisymmetric(5, 81) * 0.5)},
                                                      S.project(SpherePoint::from_stacked(q0, 1)), S, flow(1.0, 1e-3),
                                                      81, 8, 2);
  for (double r : rep.ratios) EXPECT_GE(r, 1.4);
  EXPECT_DOUBLE_EQ(rep.dts[1], 5e-4);
}

TEST(Exotic, RecordsSeamCrossings) {
  // Rotation in the (1,3) plane carries the point through both charts.
  const auto S = identity_sphere();
  const Vec q0 = Vec::Unit(4, 3);
  const BrownianPath path = BrownianPath::generate(0, 1e-3, 3000, 6);
  const ChartFlow run = integrate_exotic(rotation_field(plane_generator(4, 3, 0)), {},
                                         S.project(SpherePoint::from_stacked(q0, 1)), path, S, flow(3.0, 1e-3));
  ASSERT_FALSE(run.seams.empty());
  EXPECT_EQ(run.seams.front().from, Chart::A);
  EXPECT_EQ(run.seams.front().to, Chart::B);
  for (const auto& p : run.points) EXPECT_LE(std::abs(S.embed(p).stacked().norm() - 1.0), 1e-12);
}

TEST(Density, ZeroAndDivergenceFree) {
  const Vec q0 = random_sphere(4, 82, 0);
  const BrownianPath path = BrownianPath::generate(1, 1e-3, 1000, 7);
  const SphereFlow z = integrate_sphere(zero_field(4), {zero_field(4)}, q0, path, flow(1.0, 1e-3));
  for (double r : density(z.points, zero_field(4), {zero_field(4)}, path)) EXPECT_EQ(r, 1.0);
  const AmbientVectorField V0 = rotation_field(random_antisymmetric(4, 82));
  const AmbientVectorField V1 = rotation_field(random_antisymmetric(4, 83));
  const SphereFlow run = integrate_sphere(V0, {V1}, q0, path, flow(1.0, 1e-3));
  for (double r : run.rho) EXPECT_NEAR(r, 1.0, 1e-8);
}

TEST(Density, GradientDriftClosedForm) {
  const int N = 5;
  const Vec c = Vec::LinSpaced(N, 1.0, -0.5);
  const Vec q0 = random_sphere(N, 84, 0);
  const BrownianPath path = BrownianPath::generate(0, 1e-3, 1000, 8);
  const SphereFlow run = integrate_sphere(gradient_linear_field(c), {}, q0, path, flow(1.0, 1e-3));
  double integral = 0.0;
  for (std::size_t i = 1; i < run.points.size(); ++i) {
    integral += 0.5 * (c.dot(run.points[i - 1]) + c.dot(run.points[i])) * 1e-3;
    EXPECT_NEAR(run.rho[i] / std::exp(-(N - 1) * integral), 1.0, 1e-6);
  }
}

TEST(Density, LengthMismatch) {
  const BrownianPath path = BrownianPath::generate(0, 0.1, 10, 1);
  EXPECT_THROW(density({Vec::Unit(4, 0)}, zero_field(4), {}, path), BadParams);
}

TEST(TestFunction, TrivialCasesVanish) {
  const Vec q0 = random_sphere(4, 85, 0);
  const BrownianPath path = BrownianPath::generate(1, 1e-2, 100, 9);
  const SphereFlow z = integrate_sphere(zero_field(4), {zero_field(4)}, q0, path, flow(1.0, 1e-2));
  EXPECT_LE(test_function_check(z.points, zero_field(4), {zero_field(4)}, coordinate_function(4, 0), path), 1e-15);
  const AmbientVectorField V0 = gradient_linear_field(Vec::Ones(4));
  const AmbientVectorField V1 = rotation_field(random_antisymmetric(4, 85));
  const SphereFlow run = integrate_sphere(V0, {V1}, q0, path, flow(1.0, 1e-2));
  EXPECT_LE(test_function_check(run.points, V0, {V1}, constant_function(4, 3.0), path), 1e-15);
}

TEST(TestFunction, CoordinateResidualContracts) {
  const AmbientVectorField V1 = rotation_field(plane_generator(4, 0, 1));
  const Vec q0 = random_sphere(4, 86, 0);
  const int halvings = 2, n_paths = 32;
  std::vector<double> res(halvings + 1, 0.0);
  for (int j = 0; j < n_paths; ++j) {
    BrownianPath path = BrownianPath::generate(1, 1e-2 / 4, 400, rng::derive_seed(86, j));
    for (int lv = halvings; lv >= 0; --lv) {
      const SphereFlow run = integrate_sphere(zero_field(4), {V1}, q0, path, flow(1.0, path.dt));
      res[lv] += test_function_check(run.points, zero_field(4), {V1}, coordinate_function(4, 0), path) / n_paths;
      if (lv > 0) path = path.coarsen();
    }
  }
  for (int i = 0; i < halvings; ++i) EXPECT_GE(res[i] / res[i + 1], 1.4);
}

TEST(Deviation, SupAndMismatch) {
  const std::vector<Vec> a{Vec::Zero(2), Vec::Ones(2)}, b{Vec::Zero(2), Vec::Zero(2)};
  EXPECT_DOUBLE_EQ(sup_deviation(a, b), std::sqrt(2.0));
  EXPECT_THROW(sup_deviation(a, {Vec::Zero(2)}), BadParams);
}
