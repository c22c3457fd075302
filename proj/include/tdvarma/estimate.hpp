#ifndef TDVARMA_ESTIMATE_HPP
#define TDVARMA_ESTIMATE_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "tdvarma/model.hpp"

namespace tdvarma {

inline constexpr double kWaldCritical5 = 1.959964;

struct FitOptions {
  Eigen::VectorXd theta_init;
  int max_iters = 200;
  double grad_tol = 1e-6;
  double step_tol = 1e-10;
  bool estimate_sigma = false;
  int sigma_iters = 3;
  /// Box bounds; empty means the model layout's bounds (or none).
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate(int m) const;
};

struct FitResult {
  Eigen::VectorXd theta;
  double Q = 0.0;
  double score_norm = 0.0;
  std::optional<Eigen::MatrixXd> sigma_hat;
  bool has_covariance = false;
  Eigen::MatrixXd V;
  Eigen::MatrixXd W;
  Eigen::MatrixXd cov;
  Eigen::VectorXd se;
  int iters = 0;
  bool converged = false;
  std::string termination_reason;
  std::string covariance_note;
};

struct OptimizeResult {
  Eigen::VectorXd theta;
  double Q = 0.0;
  Eigen::VectorXd grad;
  int iters = 0;
  bool converged = false;
  std::string termination_reason;
};

/// Minimizes Q_n over theta for fixed Sigma by projected BFGS with Armijo backtracking.
OptimizeResult minimize_objective(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& theta_init,
                                  const FitOptions& options);

/// Moment estimator (1/n) sum_t g_t^{-1} e_t e_t^T g_t^{-T}.
Eigen::MatrixXd estimate_sigma(const Modeld& model, const Seriesd& series, const Eigen::VectorXd& theta);

FitResult fit(const Modeld& model, const Seriesd& series, const FitOptions& options);

struct WaldResult {
  double statistic = 0.0;
  bool reject = false;
};

WaldResult wald_test(const FitResult& fit, int i, double h0_value);

}  // namespace tdvarma

#endif  // TDVARMA_ESTIMATE_HPP
