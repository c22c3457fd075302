#ifndef TDVARMA_LIKELIHOOD_HPP
#define TDVARMA_LIKELIHOOD_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"
#include "tdvarma/model.hpp"

namespace tdvarma {

/// Residuals e_t(theta) with per-t covariances; de[t-1] is the r x m matrix d e_t / d theta.
template <typename Scalar>
struct ResidualSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix e;
  std::vector<Matrix> sigma;
  std::vector<Matrix> chol;
  std::vector<Matrix> de;
  /// dsigma[t-1][i] = d Sigma_t / d theta_i; empty matrix when identically zero.
  std::vector<std::vector<Matrix>> dsigma;

  int n() const { return static_cast<int>(e.rows()); }
  bool has_derivs() const { return !de.empty(); }
  auto residual(int t) const { return e.row(t - 1).transpose(); }
};

template <typename Scalar>
struct ObjectiveReport {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Scalar Q = Scalar(0);
  Vector alphas;
  Vector grad;
  Matrix score_rows;
};

namespace detail {

template <typename Scalar>
void check_series(const Model<Scalar>& model, const Series<Scalar>& series,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  if (series.r() != model.r()) {
    throw ContractError("series dimension " + std::to_string(series.r()) + " does not match model dimension " +
                        std::to_string(model.r()));
  }
  if (theta.size() != model.m()) throw ConfigError("theta has the wrong length");
}

}  // namespace detail

template <typename Scalar>
ResidualSet<Scalar> residuals(const Model<Scalar>& model, const Series<Scalar>& series,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, bool with_derivs) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_series(model, series, theta);
  const int n = series.n(), r = model.r(), m = model.m(), p = model.p(), q = model.q();

  ResidualSet<Scalar> out;
  out.e.resize(n, r);
  out.sigma.reserve(static_cast<std::size_t>(n));
  out.chol.reserve(static_cast<std::size_t>(n));
  if (with_derivs) {
    out.de.assign(static_cast<std::size_t>(n), Matrix::Zero(r, m));
    out.dsigma.resize(static_cast<std::size_t>(n));
  }

  std::array<int, 1> one{};
  const auto single = [&](int i) {
    one[0] = i;
    return std::span<const int>(one.data(), 1);
  };

  for (int t = 1; t <= n; ++t) {
    Vector et = series.x(t);
    for (int i = 1; i <= std::min(p, t - 1); ++i) et.noalias() -= model.A(i).value(t, theta) * series.x(t - i);
    std::vector<Matrix> bt;
    for (int j = 1; j <= std::min(q, t - 1); ++j) {
      bt.push_back(model.B(j).value(t, theta));
      et.noalias() -= bt.back() * out.e.row(t - j - 1).transpose();
    }
    out.e.row(t - 1) = et.transpose();

    const Matrix gt = model.g().value(t, theta);
    Matrix st = gt * model.sigma() * gt.transpose();
    st = Scalar(0.5) * (st + st.transpose());
    Eigen::LLT<Matrix> llt(st);
    if (llt.info() != Eigen::Success || !st.allFinite()) throw SingularCovarianceError(t, "Cholesky failed");
    out.chol.push_back(llt.matrixL());
    out.sigma.push_back(std::move(st));

    if (!with_derivs) continue;
    Matrix& de = out.de[static_cast<std::size_t>(t - 1)];
    for (int i = 1; i <= std::min(p, t - 1); ++i) {
      const auto& fa = model.A(i);
      for (int s : fa.slots()) de.col(s).noalias() -= fa.derivative(t, theta, single(s)) * series.x(t - i);
    }
    for (int j = 1; j <= std::min(q, t - 1); ++j) {
      const auto& fb = model.B(j);
      for (int s : fb.slots()) de.col(s).noalias() -= fb.derivative(t, theta, single(s)) * out.e.row(t - j - 1).transpose();
      de.noalias() -= bt[static_cast<std::size_t>(j - 1)] * out.de[static_cast<std::size_t>(t - j - 1)];
    }
    auto& ds = out.dsigma[static_cast<std::size_t>(t - 1)];
    ds.assign(static_cast<std::size_t>(m), Matrix());
    for (int s : model.g().slots()) {
      Matrix d = model.g().derivative(t, theta, single(s)) * model.sigma() * gt.transpose();
      ds[static_cast<std::size_t>(s)] = d + d.transpose();
    }
  }
  return out;
}

/// Q_n = 1/2 sum_t alpha_t + (r n / 2) log(2 pi), alpha_t = log det Sigma_t + e_t^T Sigma_t^{-1} e_t.
template <typename Scalar>
ObjectiveReport<Scalar> objective_from_residuals(const ResidualSet<Scalar>& res, int r, int m) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int n = res.n();
  ObjectiveReport<Scalar> rep;
  rep.alphas.resize(n);
  const bool grad = res.has_derivs();
  if (grad) rep.score_rows = Matrix::Zero(n, m);
  for (int t = 1; t <= n; ++t) {
    const Matrix& L = res.chol[static_cast<std::size_t>(t - 1)];
    const Vector et = res.residual(t);
    const Vector z = L.template triangularView<Eigen::Lower>().solve(et);
    const Scalar logdet = Scalar(2) * L.diagonal().array().log().sum();
    rep.alphas[t - 1] = logdet + z.squaredNorm();
    if (!grad) continue;
    const Vector u = L.transpose().template triangularView<Eigen::Upper>().solve(z);
    const Matrix& de = res.de[static_cast<std::size_t>(t - 1)];
    Vector row = Scalar(2) * (de.transpose() * u);
    const auto& ds = res.dsigma[static_cast<std::size_t>(t - 1)];
    if (!ds.empty()) {
      Eigen::LLT<Matrix> llt;
      bool ready = false;
      for (int i = 0; i < m; ++i) {
        const Matrix& d = ds[static_cast<std::size_t>(i)];
        if (d.size() == 0) continue;
        if (!ready) {
          llt.compute(res.sigma[static_cast<std::size_t>(t - 1)]);
          ready = true;
        }
        row[i] += llt.solve(d).trace() - u.dot(d * u);
      }
    }
    rep.score_rows.row(t - 1) = row.transpose();
  }
  rep.Q = Scalar(0.5) * rep.alphas.sum() +
          Scalar(0.5) * static_cast<Scalar>(r) * static_cast<Scalar>(n) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  if (grad) rep.grad = Scalar(0.5) * rep.score_rows.colwise().sum().transpose();
  if (!std::isfinite(rep.Q)) throw NumericalError("objective is not finite");
  return rep;
}

template <typename Scalar>
ObjectiveReport<Scalar> objective(const Model<Scalar>& model, const Series<Scalar>& series,
                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, bool with_grad = true) {
  return objective_from_residuals(residuals(model, series, theta, with_grad), model.r(), model.m());
}

template <typename Scalar>
struct EmpiricalVW {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix V;
  Matrix W;
};

/// V_ij = (1/n) sum_t [de_i^T S de_j + 1/2 tr(S dSigma_i S dSigma_j)],  W = (1/4n) sum_t score score^T.
template <typename Scalar>
EmpiricalVW<Scalar> empirical_VW(const Model<Scalar>& model, const Series<Scalar>& series,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const ResidualSet<Scalar> res = residuals(model, series, theta, true);
  const ObjectiveReport<Scalar> rep = objective_from_residuals(res, model.r(), model.m());
  const int n = res.n(), m = model.m();
  Matrix V = Matrix::Zero(m, m);
  for (int t = 1; t <= n; ++t) {
    const Matrix& L = res.chol[static_cast<std::size_t>(t - 1)];
    const Matrix& de = res.de[static_cast<std::size_t>(t - 1)];
    const Matrix z = L.template triangularView<Eigen::Lower>().solve(de);
    V.noalias() += z.transpose() * z;
    const auto& ds = res.dsigma[static_cast<std::size_t>(t - 1)];
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (ds[static_cast<std::size_t>(i)].size() != 0) active.push_back(i);
    if (active.empty()) continue;
    Eigen::LLT<Matrix> llt(res.sigma[static_cast<std::size_t>(t - 1)]);
    std::vector<Matrix> sd;
    for (int i : active) sd.push_back(llt.solve(ds[static_cast<std::size_t>(i)]));
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = 0; b < active.size(); ++b)
        V(active[a], active[b]) += Scalar(0.5) * (sd[a] * sd[b]).trace();
  }
  V /= static_cast<Scalar>(n);
  Matrix W = rep.score_rows.transpose() * rep.score_rows / (Scalar(4) * static_cast<Scalar>(n));
  V = Scalar(0.5) * (V + V.transpose()).eval();
  W = Scalar(0.5) * (W + W.transpose()).eval();
  if (!V.allFinite() || !W.allFinite()) throw NumericalError("non-finite entries in V or W");
  return {V, W};
}

/// Hessian of Q_n by central differences of the analytic gradient, symmetrized.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hessian_fd(const Model<Scalar>& model, const Series<Scalar>& series,
                                                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta,
                                                                 Scalar step = Scalar(1e-5)) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int m = model.m();
  Matrix H(m, m);
  for (int i = 0; i < m; ++i) {
    const Scalar h = step * (Scalar(1) + std::abs(theta[i]));
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    H.col(i) = (objective(model, series, tp).grad - objective(model, series, tm).grad) / (Scalar(2) * h);
  }
  return Scalar(0.5) * (H + H.transpose());
}

}  // namespace tdvarma

#endif  // TDVARMA_LIKELIHOOD_HPP
