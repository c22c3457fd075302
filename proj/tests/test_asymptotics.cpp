#include <gtest/gtest.h>

#include "support.hpp"
#include "tdvarma/asymptotics.hpp"
#include "tdvarma/likelihood.hpp"

namespace tdvarma {
namespace {

using namespace tdvarma::testing;

TEST(Asymptotics, Example1TheoryMatchesClosedForm) {
  const Modeld th = build(ExampleId::example1_theory);
  for (int n : {25, 60}) {
    const auto num = theoretical_V<double>(th, th.true_value(), n);
    const auto closed = example1_V_closed(Eigen::Vector2d(0.8, -0.9), kA, kB, n);
    EXPECT_LT((num.V - closed.V).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(std::abs(num.V(0, 1)), 1e-10);
    EXPECT_LT((num.se_theoretical - closed.se_theoretical).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Asymptotics, Example2ScaleBlockMatchesTraceFormulas) {
  const Modeld e2 = build(ExampleId::example2);
  const auto info = theoretical_V<double>(e2, e2.true_value(), 30, -1, true, false);
  for (int t = 1; t <= 30; ++t) {
    const auto raw = example2_trace_terms(1.0, -1.0, e2.sigma(), kC, t);
    const Eigen::MatrixXd& vt = info.per_t[static_cast<std::size_t>(t - 1)];
    EXPECT_NEAR(vt(2, 2), 0.5 * raw.v33, 1e-12) << "t=" << t;
    EXPECT_NEAR(vt(3, 3), 0.5 * raw.v44, 1e-12) << "t=" << t;
  }
}

TEST(Asymptotics, Example2OffDiagonalTraceAgainstDirectTrace) {
  const Modeld e2 = build(ExampleId::example2);
  const Eigen::VectorXd th = e2.true_value();
  for (int t = 1; t <= 30; ++t) {
    const Eigen::MatrixXd S = sigma_t<double>(e2, t, th).inverse();
    const Eigen::MatrixXd d3 = sigma_t_deriv<double>(e2, t, th, std::array<int, 1>{2});
    const Eigen::MatrixXd d4 = sigma_t_deriv<double>(e2, t, th, std::array<int, 1>{3});
    const auto raw = example2_trace_terms(1.0, -1.0, e2.sigma(), kC, t);
    EXPECT_NEAR((S * d3 * S * d3).trace(), raw.v33, 1e-12);
    EXPECT_NEAR((S * d4 * S * d4).trace(), raw.v44, 1e-12);
    EXPECT_NEAR((S * d3 * S * d4).trace(), raw.v34, 1e-12);
  }
}

TEST(Asymptotics, TruncationConvergesToFullInformation) {
  const Modeld e2 = build(ExampleId::example2);
  const auto full = theoretical_V<double>(e2, e2.true_value(), 80);
  const auto cut = theoretical_V<double>(e2, e2.true_value(), 80, truncation_horizon(0.81));
  EXPECT_LT((full.V - cut.V).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(truncation_horizon(0.0), 1);
  EXPECT_EQ(truncation_horizon(1.2), -1);
}

TEST(Asymptotics, RedundantParametersAreSingular) {
  // A_t(1,1) = p0 + p1: only the sum is identified
  ParamLayoutd lay;
  lay.names = {"p0", "p1"};
  lay.a_block = 2;
  lay.true_value = Eigen::Vector2d(0.2, 0.3);
  MatrixTimeFunctiond a = MatrixTimeFunctiond::zero(2);
  a.set(0, 0, TimeFunctiond::sum(TimeFunctiond::parameter(0), TimeFunctiond::parameter(1)));
  a.set(1, 1, TimeFunctiond::constant(0.5));
  const Modeld model(2, {a}, {}, MatrixTimeFunctiond::identity(2), Eigen::Matrix2d::Identity(), lay);
  try {
    theoretical_V<double>(model, model.true_value(), 25);
    FAIL() << "expected SingularInformationError";
  } catch (const SingularInformationError& e) {
    EXPECT_NEAR(std::abs(e.null_direction()[0]), std::sqrt(0.5), 1e-6);
    EXPECT_NEAR(e.null_direction()[0], -e.null_direction()[1], 1e-6);
  }
}

TEST(Asymptotics, ZeroAmplitudeStillInformative) {
  // psi_{t1,1} = d A_t / d A11 does not vanish at A11 = 0
  const Modeld th = build(ExampleId::example1_theory);
  const auto info = theoretical_V<double>(th, Eigen::Vector2d(0.0, 0.0), 25);
  const auto closed = example1_V_closed(Eigen::Vector2d(0.0, 0.0), kA, kB, 25);
  EXPECT_GT(info.V(0, 0), 0.0);
  EXPECT_LT((info.V - closed.V).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Asymptotics, InformationMatchesAveragedEmpiricalV) {
  const Modeld e2 = build(ExampleId::example2);
  const Eigen::VectorXd th = e2.true_value();
  const int n = 50, reps = 200;
  const auto info = theoretical_V<double>(e2, th, n, -1, false, false);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(4, 4), sq = sum;
  for (int rep = 0; rep < reps; ++rep) {
    const Eigen::MatrixXd v = empirical_VW(e2, simulate_at(e2, th, n, 500 + rep), th).V;
    sum += v;
    sq += v.cwiseAbs2();
  }
  const Eigen::MatrixXd mean = sum / reps;
  const Eigen::MatrixXd se = ((sq / reps - mean.cwiseAbs2()) / (reps - 1)).cwiseMax(0).cwiseSqrt();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_LE(std::abs(mean(i, j) - info.V(i, j)), 4 * se(i, j) + 1e-12) << i << "," << j;
}

}  // namespace
}  // namespace tdvarma
