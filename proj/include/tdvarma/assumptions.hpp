#ifndef TDVARMA_ASSUMPTIONS_HPP
#define TDVARMA_ASSUMPTIONS_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/model.hpp"

namespace tdvarma {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::Inconclusive;
  std::map<std::string, double> constants;
  std::string note;
};

struct H37Point {
  int n = 0;
  /// n times the first double sum, maximized over i.
  double first = 0.0;
  /// n times |second double sum|, maximized over (i, j).
  double second = 0.0;
};

struct AssumptionReport {
  double phi = 0.0;
  std::map<std::string, double> bound_constants;
  std::vector<H37Point> h37_ratios;
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, std::string> notes;

  bool all_pass() const;
};

struct AuditOptions {
  int n_probe = 500;
  std::vector<int> nu_grid{1, 5, 10, 20, 40};
  std::vector<int> h37_grid{50, 100, 200, 400};
  std::vector<int> h36_grid{25, 50, 100};
};

/// K_{r,r}: the r^2 x r^2 permutation with K vec(A) = vec(A^T).
Eigen::MatrixXd commutation_matrix(int r);

/// E[vec(eps eps^T) vec(eps eps^T)^T] for eps ~ N(0, Sigma), entrywise by Isserlis' theorem.
Eigen::MatrixXd gaussian_kappa(const Eigen::MatrixXd& sigma);

/// kappa - vec(Sigma) vec(Sigma)^T - Sigma (x) Sigma - K_{r,r} (Sigma (x) Sigma).
Eigen::MatrixXd fourth_cumulant_residual(const Eigen::MatrixXd& kappa, const Eigen::MatrixXd& sigma);

/// E[(eps^T eps)^j] for eps ~ N(0, Sigma), j = 1..4, from the cumulants of the quadratic form.
double gaussian_quadratic_moment(const Eigen::MatrixXd& sigma, int j);

/// True when the last decile of `series` exceeds 1.01 times the maximum over the first 90%.
bool trending_upward(const std::vector<double>& series);

CheckResult check_h32(const Modeld& model, const Eigen::VectorXd& theta0, int n_probe, const std::vector<int>& nu_grid);
CheckResult check_h33_h35(const Modeld& model, const Eigen::VectorXd& theta0, int n_probe);
CheckResult check_h34(const Eigen::MatrixXd& sigma);
CheckResult check_h36(const Modeld& model, const Eigen::VectorXd& theta0, const std::vector<int>& n_grid);
CheckResult check_h37(const Modeld& model, const Eigen::VectorXd& theta0, const std::vector<int>& n_grid,
                      std::vector<H37Point>* points = nullptr);

AssumptionReport audit_assumptions(const Modeld& model, const Eigen::VectorXd& theta0, const AuditOptions& options = {});

}  // namespace tdvarma

#endif  // TDVARMA_ASSUMPTIONS_HPP
