#ifndef TDVARMA_MC_HPP
#define TDVARMA_MC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/estimate.hpp"
#include "tdvarma/model.hpp"

namespace tdvarma {

struct McPlan {
  Modeld model;
  Eigen::VectorXd theta0;
  std::vector<int> n_list{25, 50, 100, 200, 400};
  int replications = 1000;
  std::uint64_t seed = 0;
  /// theta_init, tolerances and the Sigma strategy for every replication.
  FitOptions fit{};
  /// 0 means hardware concurrency.
  int threads = 0;
  bool keep_estimates = false;

  void validate() const;
};

/// Line codes: a mean estimate, b mean se, c sample std of estimates, d rejection percentage.
struct McRow {
  int n = 0;
  std::string param;
  char line = 'a';
  double value = 0.0;
};

struct McDiagnostics {
  int n = 0;
  int replications = 0;
  int used = 0;
  int excluded = 0;
  /// More than 5% of replications excluded.
  bool flagged = false;
};

struct McEstimate {
  int n = 0;
  int rep = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  bool converged = false;
};

struct McSummary {
  std::vector<McRow> rows;
  std::vector<McDiagnostics> diagnostics;
  std::vector<McEstimate> estimates;

  /// NaN when absent.
  double value(int n, const std::string& param, char line) const;
  bool flagged() const;
};

/// Fit outcome of one replication; `used` is false when it is excluded from the lines.
struct McReplication {
  bool used = false;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  bool converged = false;
};

McReplication run_replication(const McPlan& plan, int n, int rep);

McSummary run_mc(const McPlan& plan);

std::string summary_to_csv(const McSummary& s);
McSummary parse_summary_csv(const std::string& text);

std::string estimates_to_csv(const McSummary& s, const std::vector<std::string>& names);

int resolve_threads(int requested);

}  // namespace tdvarma

#endif  // TDVARMA_MC_HPP
