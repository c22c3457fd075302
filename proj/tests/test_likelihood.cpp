#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"
#include "tdvarma/likelihood.hpp"
#include "tdvarma/repr.hpp"

namespace tdvarma {
namespace {

using namespace tdvarma::testing;

double max_rel_grad_error(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& th) {
  const auto rep = objective(model, series, th);
  double worst = 0.0;
  for (int i = 0; i < th.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(th[i]));
    Eigen::VectorXd p = th, m = th;
    p[i] += h;
    m[i] -= h;
    const double fd = (objective(model, series, p, false).Q - objective(model, series, m, false).Q) / (2 * h);
    worst = std::max(worst, std::abs(rep.grad[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

TEST(Likelihood, WhiteNoiseObjectiveIsGaussianLogLikelihood) {
  const Modeld model(2, {MatrixTimeFunctiond::zero(2)}, {}, MatrixTimeFunctiond::identity(2), Eigen::Matrix2d::Identity(),
                     empty_layout());
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, -1, 0.5, 0, 3;
  const Seriesd series(x);
  const auto rep = objective(model, series, Eigen::VectorXd(0));
  EXPECT_NEAR(rep.Q, 0.5 * x.squaredNorm() + 3.0 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(Likelihood, ResidualsAtTruthRecoverScaledInnovations) {
  const Modeld e2 = build(ExampleId::example2);
  const Eigen::VectorXd th = e2.true_value();
  NormalRng rng(3);
  const Eigen::MatrixXd eps = draw_innovations(e2, 60, rng);
  const Seriesd series = simulate_with_innovations(e2, th, eps);
  const auto res = residuals(e2, series, th, false);
  for (int t = 1; t <= 60; ++t) {
    const Eigen::VectorXd u = e2.g().value(t, th) * eps.row(t - 1).transpose();
    EXPECT_LT((res.residual(t) - u).norm(), 1e-12);
  }
}

TEST(Likelihood, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (ExampleId id : {ExampleId::example1_sim, ExampleId::example2}) {
    const Modeld model = build(id);
    const Seriesd series = simulate_at(model, model.true_value(), 50, 7);
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    for (int draw = 0; draw < 5; ++draw) {
      Eigen::VectorXd th = model.true_value();
      for (int i = 0; i < th.size(); ++i) th[i] += jitter(rng);
      EXPECT_LT(max_rel_grad_error(model, series, th), 1e-6) << to_string(id) << " draw " << draw;
    }
  }
  Eigen::VectorXd th0;
  const Modeld varma = parametric_varma11(rng, 2, &th0);
  const Seriesd series = simulate_at(varma, th0, 50, 8);
  EXPECT_LT(max_rel_grad_error(varma, series, th0), 1e-6);
}

TEST(Likelihood, GradientIsHalfTheScoreSum) {
  const Modeld e2 = build(ExampleId::example2);
  const Seriesd series = simulate_at(e2, e2.true_value(), 40, 9);
  const auto rep = objective(e2, series, e2.true_value());
  const Eigen::VectorXd sum = rep.score_rows.colwise().sum().transpose();
  EXPECT_LT((0.5 * sum - rep.grad).norm(), 1e-10);
}

TEST(Likelihood, ResidualDerivativeEqualsMovingAverageForm) {
  std::mt19937_64 rng(22);
  Eigen::VectorXd th0;
  const Modeld varma = parametric_varma11(rng, 2, &th0);
  for (const Modeld* model : {&varma}) {
    const int n = 60;
    NormalRng nrng(5);
    const Eigen::MatrixXd eps = draw_innovations(*model, n, nrng);
    const Seriesd series = simulate_with_innovations(*model, th0, eps);
    const auto res = residuals(*model, series, th0, true);
    const PsiTable<double> psi = build_psi<double>(*model, th0, th0, n, 1);
    for (int t = 2; t <= n; ++t)
      for (int i = 0; i < model->m(); ++i) {
        Eigen::VectorXd ma = Eigen::VectorXd::Zero(2);
        for (int k = 1; k <= t - 1; ++k)
          ma += psi.derivative(t, {i}, k) * model->g().value(t - k, th0) * eps.row(t - k - 1).transpose();
        EXPECT_LT((res.de[static_cast<std::size_t>(t - 1)].col(i) - ma).cwiseAbs().maxCoeff(), 1e-10);
      }
  }
}

TEST(Likelihood, EmpiricalVIsPositiveSemidefinite) {
  const Modeld e2 = build(ExampleId::example2);
  const Seriesd series = simulate_at(e2, e2.true_value(), 100, 10);
  const auto vw = empirical_VW(e2, series, e2.true_value());
  EXPECT_EQ(vw.V, vw.V.transpose());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(vw.V).eigenvalues().minCoeff(), 0.0);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(vw.W).eigenvalues().minCoeff(), -1e-12);
}

TEST(Likelihood, RejectsMismatchedInputs) {
  const Modeld e1 = build(ExampleId::example1_sim);
  const Seriesd series(Eigen::MatrixXd::Ones(10, 3));
  EXPECT_THROW(objective(e1, series, e1.true_value()), ContractError);
  const Seriesd ok(Eigen::MatrixXd::Ones(10, 2));
  EXPECT_THROW(objective(e1, ok, Eigen::VectorXd(Eigen::VectorXd::Zero(2))), ConfigError);
}

TEST(Likelihood, SeriesRejectsNonFiniteValues) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Seriesd{x}, ContractError);
}

TEST(Likelihood, SingularCovarianceReportsTime) {
  ParamLayoutd lay;
  lay.names = {"s"};
  lay.g_block = 1;
  MatrixTimeFunctiond g = MatrixTimeFunctiond::identity(2);
  g.set(1, 1, TimeFunctiond::linear(Coefficient<double>::parameter(0), Coefficient<double>::fixed(-1.0)));
  const Modeld model(2, {MatrixTimeFunctiond::zero(2)}, {}, g, Eigen::Matrix2d::Identity(), lay);
  const Seriesd series(Eigen::MatrixXd::Ones(10, 2));
  Eigen::VectorXd th(1);
  th << 4.0;  // g_t(1,1) = 4 - t vanishes at t = 4
  try {
    residuals(model, series, th, false);
    FAIL() << "expected SingularCovarianceError";
  } catch (const SingularCovarianceError& e) {
    EXPECT_EQ(e.time(), 4);
  }
}

}  // namespace
}  // namespace tdvarma
