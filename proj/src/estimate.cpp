#include "tdvarma/estimate.hpp"

#include <cmath>
#include <limits>

#include "tdvarma/likelihood.hpp"

namespace tdvarma {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 60;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

Box resolve_box(const Modeld& model, const FitOptions& options) {
  const int m = model.m();
  Box box;
  if (options.lower.size() == m && options.upper.size() == m) {
    box.lower = options.lower;
    box.upper = options.upper;
  } else if (model.layout().has_bounds()) {
    box.lower = model.layout().lower;
    box.upper = model.layout().upper;
  } else {
    box.lower = Eigen::VectorXd::Constant(m, -std::numeric_limits<double>::infinity());
    box.upper = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  }
  return box;
}

// Gradient with components zeroed where a bound blocks descent.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
  Eigen::VectorXd pg = g;
  for (int i = 0; i < x.size(); ++i) {
    if ((x[i] <= box.lower[i] && g[i] > 0) || (x[i] >= box.upper[i] && g[i] < 0)) pg[i] = 0;
  }
  return pg;
}

struct Eval {
  bool ok = false;
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd g;
};

Eval evaluate(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& x) {
  Eval out;
  try {
    auto rep = objective(model, series, x, true);
    if (!std::isfinite(rep.Q) || !rep.grad.allFinite()) return out;
    out.ok = true;
    out.f = rep.Q;
    out.g = std::move(rep.grad);
  } catch (const NumericalError&) {
  }
  return out;
}

}  // namespace

void FitOptions::validate(int m) const {
  if (theta_init.size() != m) throw ConfigError("theta_init has the wrong length");
  if (!(grad_tol > 0) || !(step_tol > 0)) throw ConfigError("tolerances must be strictly positive");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (sigma_iters < 0) throw ConfigError("sigma_iters must be non-negative");
  if (lower.size() != 0 || upper.size() != 0) {
    if (lower.size() != m || upper.size() != m) throw ConfigError("bounds have the wrong length");
    for (int i = 0; i < m; ++i)
      if (!(theta_init[i] >= lower[i] && theta_init[i] <= upper[i])) throw ConfigError("theta_init lies outside the bounds");
  }
}

OptimizeResult minimize_objective(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& theta_init,
                                  const FitOptions& options) {
  const int m = model.m();
  const double n = series.n();
  const Box box = resolve_box(model, options);

  OptimizeResult res;
  Eigen::VectorXd x = box.project(theta_init);
  Eval cur = evaluate(model, series, x);
  if (!cur.ok) throw NumericalError("objective is not defined at the initial value");

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);
  bool scaled = false;
  res.termination_reason = "max_iters";
  int it = 0;
  for (; it < options.max_iters; ++it) {
    const Eigen::VectorXd pg = projected_gradient(x, cur.g, box);
    if (pg.cwiseAbs().maxCoeff() / n < options.grad_tol) {
      res.converged = true;
      res.termination_reason = "grad_tol";
      break;
    }
    Eigen::VectorXd d = -(H * pg);
    for (int i = 0; i < m; ++i)
      if (pg[i] == 0 && cur.g[i] != 0) d[i] = 0;
    if (pg.dot(d) >= 0) {
      H.setIdentity();
      scaled = false;
      d = -pg;
    }
    double alpha = 1.0;
    if (!scaled) alpha = std::min(1.0, 1.0 / d.cwiseAbs().maxCoeff());

    Eval trial;
    Eigen::VectorXd xt;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, alpha *= kShrink) {
      xt = box.project(x + alpha * d);
      const Eigen::VectorXd s = xt - x;
      if (s.cwiseAbs().maxCoeff() < options.step_tol * (1.0 + x.cwiseAbs().maxCoeff())) break;
      trial = evaluate(model, series, xt);
      if (trial.ok && trial.f <= cur.f + kArmijoC * cur.g.dot(s)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!scaled) {
        res.termination_reason = "step_tol";
        res.converged = projected_gradient(x, cur.g, box).cwiseAbs().maxCoeff() / n < std::sqrt(options.grad_tol);
        break;
      }
      H.setIdentity();
      scaled = false;
      continue;
    }

    const Eigen::VectorXd s = xt - x;
    const Eigen::VectorXd y = trial.g - cur.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H = Eigen::MatrixXd::Identity(m, m) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xt;
    cur = std::move(trial);
  }
  res.theta = x;
  res.Q = cur.f;
  res.grad = cur.g;
  res.iters = it;
  return res;
}

Eigen::MatrixXd estimate_sigma(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& theta) {
  const auto res = residuals(model, series, theta, false);
  const int n = series.n(), r = model.r();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(r, r);
  for (int t = 1; t <= n; ++t) {
    const Eigen::VectorXd u = model.g().value(t, theta).partialPivLu().solve(Eigen::VectorXd(res.residual(t)));
    S.noalias() += u * u.transpose();
  }
  S /= n;
  return 0.5 * (S + S.transpose());
}

FitResult fit(const Modeld& model, const Seriesd& series, const FitOptions& options) {
  const int m = model.m();
  options.validate(m);
  if (series.n() < m) throw ContractError("series is shorter than the number of parameters");
  if (series.r() != model.r()) throw ContractError("series dimension does not match the model");

  Modeld current = model;
  OptimizeResult opt = minimize_objective(current, series, options.theta_init, options);
  int total_iters = opt.iters;
  FitResult out;
  if (options.estimate_sigma) {
    for (int round = 0; round < options.sigma_iters; ++round) {
      try {
        current = current.with_sigma(estimate_sigma(current, series, opt.theta));
      } catch (const ConfigError&) {
        out.covariance_note += "Sigma estimate not positive definite; kept previous value. ";
        break;
      }
      opt = minimize_objective(current, series, opt.theta, options);
      total_iters += opt.iters;
    }
    out.sigma_hat = current.sigma();
    out.covariance_note += "two-stage Sigma estimate; covariance is conditional on Sigma-hat. ";
  }
  out.theta = opt.theta;
  out.Q = opt.Q;
  out.score_norm = opt.grad.cwiseAbs().maxCoeff();
  out.iters = total_iters;
  out.converged = opt.converged;
  out.termination_reason = opt.termination_reason;
  out.covariance_note += "W uses uncentered score outer products.";

  try {
    const auto vw = empirical_VW(current, series, out.theta);
    out.V = vw.V;
    out.W = vw.W;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.V);
    const double tr = std::max(out.V.trace(), 1e-300);
    if (eig.eigenvalues().minCoeff() > 1e-12 * tr) {
      const Eigen::MatrixXd Vinv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                                   eig.eigenvectors().transpose();
      Eigen::MatrixXd cov = Vinv * out.W * Vinv / static_cast<double>(series.n());
      out.cov = 0.5 * (cov + cov.transpose());
      out.se = out.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      out.has_covariance = out.cov.allFinite();
    }
  } catch (const NumericalError&) {
    out.has_covariance = false;
  }
  return out;
}

WaldResult wald_test(const FitResult& fit, int i, double h0_value) {
  if (!fit.has_covariance) throw ContractError("fit has no covariance estimate");
  if (i < 0 || i >= fit.se.size()) throw ContractError("parameter index out of range");
  if (!(fit.se[i] > 0)) throw ContractError("standard error is not positive");
  WaldResult w;
  w.statistic = (fit.theta[i] - h0_value) / fit.se[i];
  w.reject = std::abs(w.statistic) > kWaldCritical5;
  return w;
}

}  // namespace tdvarma
