#include "tdvarma/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "tdvarma/format.hpp"
#include "tdvarma/simulate.hpp"

namespace tdvarma {

void McPlan::validate() const {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (n_list.empty()) throw ConfigError("n_list is empty");
  for (int n : n_list)
    if (n < model.m()) throw ConfigError("every n in n_list must be >= m = " + std::to_string(model.m()));
  if (theta0.size() != model.m()) throw ConfigError("theta0 has the wrong length");
  fit.validate(model.m());
}

double McSummary::value(int n, const std::string& param, char line) const {
  for (const auto& row : rows)
    if (row.n == n && row.line == line && row.param == param) return row.value;
  return std::numeric_limits<double>::quiet_NaN();
}

bool McSummary::flagged() const {
  for (const auto& d : diagnostics)
    if (d.flagged) return true;
  return false;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TDVARMA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

McReplication run_replication(const McPlan& plan, int n, int rep) {
  McReplication out;
  try {
    NormalRng rng(stream_seed(plan.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)));
    const Eigen::MatrixXd eps = draw_innovations(plan.model, n, rng);
    const Seriesd series = simulate_with_innovations(plan.model, plan.theta0, eps);
    const FitResult res = fit(plan.model, series, plan.fit);
    out.theta = res.theta;
    out.se = res.has_covariance ? res.se : Eigen::VectorXd::Constant(plan.model.m(), std::numeric_limits<double>::quiet_NaN());
    out.converged = res.converged;
    out.used = res.converged && res.has_covariance;
  } catch (const NumericalError&) {
    out.used = false;
  }
  return out;
}

McSummary run_mc(const McPlan& plan) {
  plan.validate();
  const int m = plan.model.m();
  const auto& names = plan.model.layout().names;
  const int threads = resolve_threads(plan.threads);
  McSummary summary;

  for (int n : plan.n_list) {
    std::vector<McReplication> reps(static_cast<std::size_t>(plan.replications));
    std::atomic<int> next{0};
    const auto work = [&] {
      for (int rep = next++; rep < plan.replications; rep = next++) reps[static_cast<std::size_t>(rep)] = run_replication(plan, n, rep);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(threads, plan.replications); ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    // Fixed-order reduction over replication index.
    McDiagnostics diag;
    diag.n = n;
    diag.replications = plan.replications;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m), sum_se = sum, rejections = sum;
    for (const auto& r : reps) {
      if (!r.used) continue;
      ++diag.used;
      sum += r.theta;
      sum_se += r.se;
      for (int i = 0; i < m; ++i)
        if (std::abs((r.theta[i] - plan.theta0[i]) / r.se[i]) > kWaldCritical5) rejections[i] += 1.0;
    }
    diag.excluded = plan.replications - diag.used;
    diag.flagged = diag.excluded > 0.05 * plan.replications;
    const double used = diag.used;
    const Eigen::VectorXd mean = sum / used;
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(m);
    for (const auto& r : reps)
      if (r.used) ss += (r.theta - mean).cwiseAbs2();
    const Eigen::VectorXd sd = diag.used > 1 ? Eigen::VectorXd((ss / (used - 1.0)).cwiseSqrt())
                                             : Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < m; ++i) {
      const std::string& p = names[static_cast<std::size_t>(i)];
      summary.rows.push_back({n, p, 'a', mean[i]});
      summary.rows.push_back({n, p, 'b', sum_se[i] / used});
      summary.rows.push_back({n, p, 'c', sd[i]});
      summary.rows.push_back({n, p, 'd', 100.0 * rejections[i] / used});
    }
    summary.diagnostics.push_back(diag);
    if (plan.keep_estimates)
      for (int rep = 0; rep < plan.replications; ++rep) {
        const auto& r = reps[static_cast<std::size_t>(rep)];
        if (r.theta.size() == 0) continue;
        summary.estimates.push_back({n, rep, r.theta, r.se, r.converged});
      }
  }
  return summary;
}

std::string summary_to_csv(const McSummary& s) {
  std::string out = "n,param,line,value\n";
  for (const auto& row : s.rows) {
    out += std::to_string(row.n);
    out += ',';
    out += row.param;
    out += ',';
    out += row.line;
    out += ',';
    out += format_double(row.value);
    out += '\n';
  }
  return out;
}

McSummary parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "n,param,line,value") throw ConfigError("summary CSV: bad header");
  McSummary s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 4 || f[2].size() != 1) throw ConfigError("summary CSV: malformed row at line " + std::to_string(lineno));
    s.rows.push_back({static_cast<int>(parse_integer(f[0])), f[1], f[2][0], parse_double(f[3])});
  }
  return s;
}

std::string estimates_to_csv(const McSummary& s, const std::vector<std::string>& names) {
  std::string out = "n,rep,param,estimate,se,converged\n";
  for (const auto& e : s.estimates)
    for (int i = 0; i < e.theta.size(); ++i) {
      out += std::to_string(e.n) + ',' + std::to_string(e.rep) + ',' + names[static_cast<std::size_t>(i)] + ',' +
             format_double(e.theta[i]) + ',' + format_double(e.se[i]) + ',' + (e.converged ? "1" : "0") + '\n';
    }
  return out;
}

}  // namespace tdvarma
