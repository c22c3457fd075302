#ifndef TDVARMA_TESTS_SUPPORT_HPP
#define TDVARMA_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "tdvarma/examples.hpp"
#include "tdvarma/model.hpp"
#include "tdvarma/simulate.hpp"

namespace tdvarma::testing {

inline const double kA = 2.0 * std::numbers::pi / std::sqrt(2499.0);
inline const double kB = 2.0 * std::numbers::pi / std::sqrt(2399.0);
inline const double kC = 2.0 * std::numbers::pi / 25.0;

/// r x r matrix function with entries amp * sin(omega t + phase), all fixed.
inline MatrixTimeFunctiond random_sine_matrix(std::mt19937_64& rng, int r, double max_amp) {
  std::uniform_real_distribution<double> amp(-max_amp, max_amp), om(0.05, 1.5), ph(0.0, 6.28);
  MatrixTimeFunctiond f(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      f.set(i, j, TimeFunctiond::sine(Coefficient<double>::fixed(amp(rng)), om(rng), Coefficient<double>::fixed(ph(rng))));
  return f;
}

inline ParamLayoutd empty_layout() {
  ParamLayoutd lay;
  return lay;
}

/// Parameter-free tdVARMA(1, q) with random sinusoidal coefficients.
inline Modeld random_varma(std::mt19937_64& rng, int r, int q) {
  std::vector<MatrixTimeFunctiond> a{random_sine_matrix(rng, r, 0.6 / r)};
  std::vector<MatrixTimeFunctiond> b;
  for (int j = 0; j < q; ++j) b.push_back(random_sine_matrix(rng, r, 0.6 / r));
  return Modeld(r, a, b, MatrixTimeFunctiond::identity(r), Eigen::MatrixXd::Identity(r, r), empty_layout());
}

/// tdVARMA(1,1) with a parameter in every A and B entry: A = a_ij sin(w_ij t + phi_ij), B likewise.
inline Modeld parametric_varma11(std::mt19937_64& rng, int r, Eigen::VectorXd* theta0) {
  std::uniform_real_distribution<double> om(0.05, 1.5), ph(0.0, 6.28), amp(-0.25, 0.25);
  ParamLayoutd lay;
  MatrixTimeFunctiond a(r, r), b(r, r);
  *theta0 = Eigen::VectorXd(2 * r * r);
  int s = 0;
  for (auto* f : {&a, &b})
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        f->set(i, j, TimeFunctiond::sine(Coefficient<double>::parameter(s), om(rng), Coefficient<double>::fixed(ph(rng))));
        lay.names.push_back("p" + std::to_string(s));
        (*theta0)[s++] = amp(rng);
      }
  lay.a_block = r * r;
  lay.b_block = r * r;
  lay.true_value = *theta0;
  return Modeld(r, {a}, {b}, MatrixTimeFunctiond::identity(r), Eigen::MatrixXd::Identity(r, r), lay);
}

inline Seriesd simulate_at(const Modeld& model, const Eigen::VectorXd& theta, int n, std::uint64_t seed) {
  return simulate(SimPlan{model, theta, n, seed});
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int r) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = z(rng);
  return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(r, r);
}

}  // namespace tdvarma::testing

#endif  // TDVARMA_TESTS_SUPPORT_HPP
