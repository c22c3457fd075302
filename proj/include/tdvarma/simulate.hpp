#ifndef TDVARMA_SIMULATE_HPP
#define TDVARMA_SIMULATE_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "tdvarma/model.hpp"

namespace tdvarma {

/// Identifier of the random stream construction; printed by `--version` and in outputs.
inline constexpr const char* kRngId = "mt19937_64+splitmix64-stream+box-muller-v1";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the stream for (master seed, sample size, replication).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t n, std::uint64_t rep);

/// Standard normal draws by the Box-Muller transform on 53-bit uniforms.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SimPlan {
  Modeld model;
  Eigen::VectorXd theta;
  int n = 0;
  std::uint64_t seed = 0;
};

/// n x r matrix of iid N(0, Sigma) innovations.
Eigen::MatrixXd draw_innovations(const Modeld& model, int n, NormalRng& rng);

/// Applies the model recursion to given innovations eps (n x r), zero values before t = 1.
Seriesd simulate_with_innovations(const Modeld& model, const Eigen::VectorXd& theta, const Eigen::MatrixXd& eps);

Seriesd simulate(const SimPlan& plan);

/// Correlation of the off-diagonal entry of Sigma_t(theta); r must be 2.
double innovation_correlation(const Modeld& model, const Eigen::VectorXd& theta, int t);

}  // namespace tdvarma

#endif  // TDVARMA_SIMULATE_HPP
