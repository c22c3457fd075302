#ifndef TDVARMA_ASYMPTOTICS_HPP
#define TDVARMA_ASYMPTOTICS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"
#include "tdvarma/model.hpp"
#include "tdvarma/repr.hpp"

namespace tdvarma {

template <typename Scalar>
struct InfoReport {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  int n = 0;
  int k_max = -1;
  Matrix V;
  Vector se_theoretical;
  /// per_t[t-1] is the m x m contribution of time t (before division by n).
  std::vector<Matrix> per_t;
};

/// Smallest k with phi^{(k-1)/2} < tol; -1 (no truncation) when phi is not in (0, 1).
inline int truncation_horizon(double phi, double tol = 1e-14) {
  if (!(phi > 0.0 && phi < 1.0)) return phi == 0.0 ? 1 : -1;
  return 1 + static_cast<int>(std::ceil(2.0 * std::log(tol) / std::log(phi)));
}

/// se = sqrt(diag(V^{-1}) / n); throws SingularInformationError carrying the near-null direction.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> information_se(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& V, int n) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(V);
  const Scalar scale = std::max(V.cwiseAbs().maxCoeff(), Scalar(1e-300));
  if (eig.eigenvalues().minCoeff() <= Scalar(1e-13) * scale) {
    Eigen::VectorXd dir = eig.eigenvectors().col(0).template cast<double>();
    throw SingularInformationError("information matrix is singular (smallest eigenvalue " +
                                       std::to_string(static_cast<double>(eig.eigenvalues().minCoeff())) + ")",
                                   dir);
  }
  const Matrix Vinv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return (Vinv.diagonal() / static_cast<Scalar>(n)).cwiseSqrt();
}

/// V_ij(n) = (1/n) sum_t [ sum_k tr(psi_tik Sigma_{t-k} psi_tjk^T Sigma_t^{-1}) + 1/2 tr(Sigma_t^{-1} dSigma_i Sigma_t^{-1} dSigma_j) ].
template <typename Scalar>
InfoReport<Scalar> theoretical_V(const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta0, int n,
                                 int k_max = -1, bool keep_per_t = false, bool compute_se = true) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (n < 1) throw ContractError("theoretical_V needs n >= 1");
  const int m = model.m();
  PsiDerivativeStream<Scalar> stream(model, theta0, theta0, n, 1, k_max);
  const auto& index = stream.index();
  const auto gindex = DerivativeIndex::full(m, 1);

  std::vector<Matrix> sig_chol(static_cast<std::size_t>(n));
  std::vector<MatrixJet<Scalar>> sig(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) {
    sig[static_cast<std::size_t>(t - 1)] = sigma_t_jet<Scalar>(model, t, theta0, gindex);
    Eigen::LLT<Matrix> llt(sig[static_cast<std::size_t>(t - 1)].value());
    if (llt.info() != Eigen::Success) throw SingularCovarianceError(t, "");
    sig_chol[static_cast<std::size_t>(t - 1)] = llt.matrixL();
  }

  InfoReport<Scalar> rep;
  rep.n = n;
  rep.k_max = k_max;
  rep.V = Matrix::Zero(m, m);
  if (keep_per_t) rep.per_t.reserve(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) {
    Matrix vt = Matrix::Zero(m, m);
    const Matrix& Lt = sig_chol[static_cast<std::size_t>(t - 1)];
    const auto row = stream.deriv_row(t);
    std::vector<Matrix> z(static_cast<std::size_t>(m));
    for (int k = 1; k <= static_cast<int>(row.size()); ++k) {
      const MatrixJet<Scalar>& jet = row[static_cast<std::size_t>(k - 1)];
      const Matrix& Lk = sig_chol[static_cast<std::size_t>(t - k - 1)];
      std::vector<int> active;
      for (int i = 0; i < m; ++i) {
        const int s = index->first_slot(1) + i;
        if (jet.is_zero(s)) continue;
        z[static_cast<std::size_t>(i)] = Lt.template triangularView<Eigen::Lower>().solve(jet.raw(s) * Lk);
        active.push_back(i);
      }
      for (int i : active)
        for (int j : active)
          if (j >= i) vt(i, j) += (z[static_cast<std::size_t>(i)].cwiseProduct(z[static_cast<std::size_t>(j)])).sum();
    }
    const MatrixJet<Scalar>& sj = sig[static_cast<std::size_t>(t - 1)];
    Eigen::LLT<Matrix> llt(sj.value());
    std::vector<int> active;
    std::vector<Matrix> sd(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const int s = gindex->first_slot(1) + i;
      if (sj.is_zero(s)) continue;
      sd[static_cast<std::size_t>(i)] = llt.solve(sj.raw(s));
      active.push_back(i);
    }
    for (int i : active)
      for (int j : active)
        if (j >= i) vt(i, j) += Scalar(0.5) * (sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(j)]).trace();
    vt.template triangularView<Eigen::StrictlyLower>() = vt.transpose().template triangularView<Eigen::StrictlyLower>();
    rep.V += vt;
    if (keep_per_t) rep.per_t.push_back(std::move(vt));
  }
  rep.V /= static_cast<Scalar>(n);
  if (compute_se) rep.se_theoretical = information_se<Scalar>(rep.V, n);
  return rep;
}

/// Information matrix of the two-parameter triangular tdVAR(1)
/// A_t = [[a11 sin(a t), a12], [0, a22 sin(b t)]], Sigma = I, theta = (a11, a22).
/// Does not invert V; se_theoretical is filled only when V is positive definite.
inline InfoReport<double> example1_V_closed(const Eigen::Vector2d& theta0, double a, double b, int n, double a12 = 0.5) {
  if (n < 1) throw ContractError("example1_V_closed needs n >= 1");
  const TriangularVar1Shape<double> sh{theta0[0], a12, theta0[1], a, b};
  double v11 = 0.0, v22 = 0.0;
  for (int t = 2; t <= n; ++t) {
    double s1 = 0.0, s2 = 0.0;
    for (int k = 1; k <= t - 1; ++k) {
      const Eigen::Matrix2d P = triangular_A_power(sh, t, k);
      s1 += P(0, 0) * P(0, 0) + P(0, 1) * P(0, 1);
      s2 += P(1, 1) * P(1, 1);
    }
    v11 += std::pow(std::sin(a * t), 2) * s1;
    v22 += std::pow(std::sin(b * t), 2) * s2;
  }
  InfoReport<double> rep;
  rep.n = n;
  rep.V = Eigen::Matrix2d::Zero();
  rep.V(0, 0) = v11 / n;
  rep.V(1, 1) = v22 / n;
  if (rep.V(0, 0) > 0 && rep.V(1, 1) > 0) rep.se_theoretical = information_se<double>(rep.V, n);
  return rep;
}

struct Example2TraceTerms {
  double v33 = 0.0;
  double v34 = 0.0;
  double v44 = 0.0;
};

/// Full traces tr(Sigma_t^{-1} dSigma_i Sigma_t^{-1} dSigma_j) for the g-block (eta11, eta22) of the
/// heteroscedastic bivariate model with g_t = [[exp(-eta11 sin ct), 1], [-1, exp(-eta22 sin ct)]].
inline Example2TraceTerms example2_trace_terms(double eta11, double eta22, const Eigen::Matrix2d& sigma, double c, int t) {
  const double s11 = sigma(0, 0), s12 = sigma(0, 1), s22 = sigma(1, 1);
  const double det = s11 * s22 - s12 * s12;
  if (!(det > 0)) throw ContractError("Sigma must have a positive determinant");
  const double s = std::sin(c * t);
  const double e11 = std::exp(eta11 * s), e22 = std::exp(eta22 * s), e12 = std::exp((eta11 + eta22) * s);
  const double denom = std::pow(1.0 + e12, 2) * det;
  const double f = 2.0 * s * s;
  Example2TraceTerms out;
  out.v33 = f * (std::pow(e22 * s11 - s12, 2) + 2.0 * det) / denom;
  out.v44 = f * (std::pow(e11 * s22 + s12, 2) + 2.0 * det) / denom;
  out.v34 = f * (s12 * (e22 * s11 - s12 - e11 * s22) - e12 * (s11 * s22 - 2.0 * s12 * s12)) / denom;
  return out;
}

}  // namespace tdvarma

#endif  // TDVARMA_ASYMPTOTICS_HPP
