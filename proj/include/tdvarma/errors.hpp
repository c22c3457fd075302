#ifndef TDVARMA_ERRORS_HPP
#define TDVARMA_ERRORS_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tdvarma {

/// Malformed model or run configuration (bad parameter slot, bad dimensions, unknown key).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical step failed (singular covariance, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization of Sigma_t failed at time t.
class SingularCovarianceError : public NumericalError {
 public:
  SingularCovarianceError(int t, const std::string& detail)
      : NumericalError("Sigma_t is not positive definite at t=" + std::to_string(t) +
                       (detail.empty() ? "" : " (" + detail + ")")),
        t_(t) {}
  int time() const noexcept { return t_; }

 private:
  int t_;
};

/// Information matrix is singular; carries the eigenvector of its smallest eigenvalue.
class SingularInformationError : public NumericalError {
 public:
  SingularInformationError(const std::string& what, Eigen::VectorXd null_direction)
      : NumericalError(what), null_direction_(std::move(null_direction)) {}
  const Eigen::VectorXd& null_direction() const noexcept { return null_direction_; }

 private:
  Eigen::VectorXd null_direction_;
};

}  // namespace tdvarma

#endif  // TDVARMA_ERRORS_HPP
