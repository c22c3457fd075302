#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tdvarma/repr.hpp"

namespace tdvarma {
namespace {

using namespace tdvarma::testing;

TEST(Examples, LayoutsMatchTheirDefinitions) {
  const Modeld e1 = build(ExampleId::example1_sim);
  EXPECT_EQ(e1.m(), 3);
  EXPECT_EQ(e1.layout().a_block, 3);
  EXPECT_EQ(e1.layout().b_block, 0);
  EXPECT_EQ(e1.layout().g_block, 0);
  EXPECT_EQ(e1.true_value(), Eigen::Vector3d(0.8, 0.5, -0.9));

  const Modeld e2 = build(ExampleId::example2);
  EXPECT_EQ(e2.m(), 4);
  EXPECT_EQ(e2.layout().a_block, 2);
  EXPECT_EQ(e2.layout().g_block, 2);
  EXPECT_EQ(e2.true_value(), Eigen::Vector4d(0.8, -0.9, 1.0, -1.0));

  const Modeld th = build(ExampleId::example1_theory);
  EXPECT_EQ(th.m(), 2);
  EXPECT_EQ(th.layout().g_block, 0);
  for (int t : {1, 17, 250}) EXPECT_EQ(sigma_t<double>(th, t, th.true_value()), Eigen::Matrix2d::Identity());
}

TEST(Examples, FrequenciesAreExact) {
  const Modeld e1 = build(ExampleId::example1_sim);
  EXPECT_EQ(e1.A(1)(0, 0).omega(), kA);
  EXPECT_EQ(e1.A(1)(1, 1).omega(), kB);
  const Modeld e2 = build(ExampleId::example2);
  EXPECT_DOUBLE_EQ(e2.g()(0, 0).omega(), kC);
}

TEST(Examples, Example2CorrelationRange) {
  const Modeld e2 = build(ExampleId::example2);
  double lo = 1, hi = -1;
  for (int t = 1; t <= 400; ++t) {
    const double rho = innovation_correlation(e2, e2.true_value(), t);
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  EXPECT_NEAR(lo, -0.8, 0.02);
  EXPECT_NEAR(hi, 0.8, 0.02);
}

TEST(Model, RejectsBadConstruction) {
  const auto A = MatrixTimeFunctiond::zero(2);
  EXPECT_THROW(Modeld(9, {}, {}, MatrixTimeFunctiond::identity(9), Eigen::MatrixXd::Identity(9, 9), empty_layout()),
               ConfigError);
  EXPECT_THROW(Modeld(2, {A, A, A, A, A}, {}, MatrixTimeFunctiond::identity(2), Eigen::MatrixXd::Identity(2, 2),
                      empty_layout()),
               ConfigError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(Modeld(2, {A}, {}, MatrixTimeFunctiond::identity(2), bad, empty_layout()), ConfigError);

  ParamLayoutd lay;
  lay.names = {"x"};
  lay.g_block = 1;
  lay.true_value = Eigen::VectorXd::Zero(1);
  MatrixTimeFunctiond g = MatrixTimeFunctiond::identity(2);
  g.set(1, 1, TimeFunctiond::parameter(0));
  EXPECT_THROW(Modeld(2, {A}, {}, g, Eigen::MatrixXd::Identity(2, 2), lay), ConfigError);

  // a g-block parameter used inside A
  MatrixTimeFunctiond a2 = MatrixTimeFunctiond::zero(2);
  a2.set(0, 0, TimeFunctiond::parameter(0));
  lay.true_value = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(Modeld(2, {a2}, {}, g, Eigen::MatrixXd::Identity(2, 2), lay), ConfigError);
}

TEST(Model, SigmaTDerivativesMatchFiniteDifferences) {
  const Modeld e2 = build(ExampleId::example2);
  const Eigen::VectorXd th = e2.true_value();
  const double h = 1e-6;
  for (int t : {3, 10, 22}) {
    const Eigen::MatrixXd s = sigma_t<double>(e2, t, th);
    EXPECT_EQ(s, s.transpose());
    for (int i = 2; i < 4; ++i) {
      Eigen::VectorXd p = th, m = th;
      p[i] += h;
      m[i] -= h;
      const Eigen::MatrixXd fd = (sigma_t<double>(e2, t, p) - sigma_t<double>(e2, t, m)) / (2 * h);
      EXPECT_LT((sigma_t_deriv<double>(e2, t, th, std::array<int, 1>{i}) - fd).norm(), 1e-8);
    }
  }
}

TEST(Repr, PsiMatchesClosedFormAndConvolution) {
  std::mt19937_64 rng(11);
  for (int draw = 0; draw < 10; ++draw) {
    const Modeld model = random_varma(rng, 2 + draw % 2, draw % 2);
    const Eigen::VectorXd th(0);
    const int n = 40;
    const PsiTable<double> psi = build_psi<double>(model, th, th, n, 0);
    const auto conv = psi_by_convolution<double>(model, th, n);
    for (int t = 2; t <= n; ++t)
      for (int k = 1; k <= t - 1; ++k) {
        EXPECT_LT((psi.psi(t, k) - varma11_psi_closed<double>(model, th, t, k)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((psi.psi(t, k) - conv[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff(), 1e-12);
      }
  }
}

TEST(Repr, PiMatchesClosedFormAndConvolution) {
  std::mt19937_64 rng(12);
  for (int draw = 0; draw < 10; ++draw) {
    const Modeld model = random_varma(rng, 2, 1);
    const Eigen::VectorXd th(0);
    const int n = 40;
    const PiTable<double> pi = build_pi<double>(model, th, n, 0);
    const auto conv = pi_by_convolution<double>(model, th, n);
    for (int t = 2; t <= n; ++t)
      for (int k = 1; k <= t - 1; ++k) {
        EXPECT_LT((pi.value(t, k) - varma11_pi_closed<double>(model, th, t, k)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((pi.value(t, k) - conv[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k - 1)]).cwiseAbs().maxCoeff(),
                  1e-12);
      }
  }
}

TEST(Repr, PureArHasSingleLag) {
  std::mt19937_64 rng(13);
  const Modeld model = random_varma(rng, 2, 0);
  const Eigen::VectorXd th(0);
  const PiTable<double> pi = build_pi<double>(model, th, 10, 0);
  EXPECT_LT((pi.value(7, 1) - model.A(1).value(7, th)).norm(), 1e-15);
  EXPECT_EQ(pi.value(7, 2).norm(), 0.0);
  EXPECT_THROW(pi.jet(7, 7), ContractError);
}

TEST(Repr, TriangularPowerMatchesProductAndExplicitCubic) {
  const Modeld e1 = build(ExampleId::example1_sim);
  const Eigen::VectorXd th = e1.true_value();
  const auto sh = triangular_var1_shape(e1, th);
  for (int t : {5, 30, 77})
    for (int k = 1; k <= 5; ++k) {
      Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
      for (int l = 1; l <= k - 1; ++l) prod = prod * e1.A(1).value(t - l, th);
      EXPECT_LT((triangular_A_power(sh, t, k) - prod).norm(), 1e-14);
    }
  const int t = 40;
  const double a11 = 0.8, a22 = -0.9;
  const double expect = 0.5 * (a11 * a11 * std::sin(kA * (t - 1)) * std::sin(kA * (t - 2)) +
                               a11 * a22 * std::sin(kA * (t - 1)) * std::sin(kB * (t - 3)) +
                               a22 * a22 * std::sin(kB * (t - 2)) * std::sin(kB * (t - 3)));
  const TriangularVar1Shape<double> half{a11, 0.5, a22, kA, kB};
  EXPECT_NEAR(triangular_A_power(half, t, 4)(0, 1), expect, 1e-15);
}

TEST(Repr, TriangularShapeRejectsOtherModels) {
  std::mt19937_64 rng(14);
  const Modeld model = random_varma(rng, 2, 1);
  EXPECT_THROW(triangular_var1_shape<double>(model, Eigen::VectorXd(0)), ContractError);
}

TEST(Repr, PsiDerivativesMatchFiniteDifferencesOfPsi) {
  // At theta = theta0, psi_{tik} is the derivative in theta of the psi_{t0k}(theta, theta0) layer.
  std::mt19937_64 rng(15);
  Eigen::VectorXd th0;
  const Modeld model = parametric_varma11(rng, 2, &th0);
  const int n = 15;
  const PsiTable<double> at0 = build_psi<double>(model, th0, th0, n, 2);
  const double h = 1e-6;
  for (int i = 0; i < model.m(); i += 3) {
    Eigen::VectorXd p = th0, m = th0;
    p[i] += h;
    m[i] -= h;
    const PsiTable<double> tp = build_psi<double>(model, p, th0, n, 0);
    const PsiTable<double> tm = build_psi<double>(model, m, th0, n, 0);
    for (int t = 2; t <= n; ++t)
      for (int k = 1; k <= t - 1; ++k) {
        EXPECT_LT(at0.psi0(t, k).norm(), 1e-13);
        const Eigen::MatrixXd fd = (tp.psi0(t, k) - tm.psi0(t, k)) / (2 * h);
        EXPECT_LT((at0.derivative(t, {i}, k) - fd).norm(), 1e-8);
      }
  }
}

}  // namespace
}  // namespace tdvarma
