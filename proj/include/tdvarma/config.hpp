#ifndef TDVARMA_CONFIG_HPP
#define TDVARMA_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/assumptions.hpp"
#include "tdvarma/estimate.hpp"
#include "tdvarma/model.hpp"

namespace tdvarma {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::vector<int> n_list;
  std::optional<int> replications;
  std::optional<Eigen::VectorXd> theta_init;
  std::optional<int> max_iters;
  std::optional<double> grad_tol;
  std::optional<double> step_tol;
  std::optional<bool> estimate_sigma;
  std::optional<int> sigma_iters;
  std::optional<int> n_probe;
  std::vector<int> nu_grid;
  std::vector<int> h37_grid;

  /// FitOptions with the config's settings applied over the defaults.
  FitOptions fit_options(const Modeld& model) const;
  AuditOptions audit_options() const;
};

struct Config {
  Modeld model;
  RunConfig run;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the key and its line.
Config parse_config(const std::string& text);

}  // namespace tdvarma

#endif  // TDVARMA_CONFIG_HPP
