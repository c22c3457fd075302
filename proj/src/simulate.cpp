#include "tdvarma/simulate.hpp"

#include <cmath>
#include <numbers>

namespace tdvarma {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t n, std::uint64_t rep) {
  return splitmix64(splitmix64(splitmix64(master) ^ n) ^ rep);
}

double NormalRng::uniform() {
  // (k + 0.5) / 2^53 lies strictly inside (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

Eigen::MatrixXd draw_innovations(const Modeld& model, int n, NormalRng& rng) {
  const int r = model.r();
  Eigen::MatrixXd eps(n, r);
  Eigen::VectorXd z(r);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < r; ++i) z[i] = rng.normal();
    eps.row(t) = (model.sigma_chol() * z).transpose();
  }
  return eps;
}

Seriesd simulate_with_innovations(const Modeld& model, const Eigen::VectorXd& theta, const Eigen::MatrixXd& eps) {
  const int n = static_cast<int>(eps.rows()), r = model.r();
  if (n < 1) throw ContractError("simulation needs n >= 1");
  if (eps.cols() != r) throw ContractError("innovations have the wrong dimension");
  if (theta.size() != model.m()) throw ConfigError("theta has the wrong length");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, r);
  Eigen::MatrixXd u(n, r);
  for (int t = 1; t <= n; ++t) {
    u.row(t - 1) = (model.g().value(t, theta) * eps.row(t - 1).transpose()).transpose();
    Eigen::VectorXd xt = u.row(t - 1).transpose();
    for (int i = 1; i <= std::min(model.p(), t - 1); ++i)
      xt.noalias() += model.A(i).value(t, theta) * x.row(t - i - 1).transpose();
    for (int j = 1; j <= std::min(model.q(), t - 1); ++j)
      xt.noalias() += model.B(j).value(t, theta) * u.row(t - j - 1).transpose();
    x.row(t - 1) = xt.transpose();
  }
  if (!x.allFinite()) throw NumericalError("simulated series is not finite");
  return Seriesd(std::move(x));
}

Seriesd simulate(const SimPlan& plan) {
  if (plan.n < 1) throw ContractError("simulation needs n >= 1");
  NormalRng rng(plan.seed);
  const Eigen::MatrixXd eps = draw_innovations(plan.model, plan.n, rng);
  return simulate_with_innovations(plan.model, plan.theta, eps);
}

double innovation_correlation(const Modeld& model, const Eigen::VectorXd& theta, int t) {
  if (model.r() != 2) throw ContractError("innovation correlation needs r = 2");
  const Eigen::MatrixXd s = sigma_t<double>(model, t, theta);
  return s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
}

}  // namespace tdvarma
