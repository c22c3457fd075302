#include "tdvarma/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdvarma/config.hpp"
#include "tdvarma/examples.hpp"
#include "tdvarma/mc.hpp"
#include "tdvarma/series_io.hpp"
#include "tdvarma/simulate.hpp"

namespace tdvarma {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return a;
}

Json named(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  Json o = Json::object();
  for (int i = 0; i < v.size(); ++i) o[names[static_cast<std::size_t>(i)]] = v[i];
  return o;
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
  if (path.empty()) out << text;
  else write_file(path, text);
}

}  // namespace

std::string fit_result_to_json(const FitResult& fit, const std::vector<std::string>& names) {
  Json j;
  j["theta"] = named(names, fit.theta);
  j["Q"] = fit.Q;
  j["score_norm"] = fit.score_norm;
  j["iterations"] = fit.iters;
  j["converged"] = fit.converged;
  j["termination_reason"] = fit.termination_reason;
  if (fit.sigma_hat) j["sigma_hat"] = to_json(*fit.sigma_hat);
  j["has_covariance"] = fit.has_covariance;
  if (fit.has_covariance) {
    j["se"] = named(names, fit.se);
    j["cov"] = to_json(fit.cov);
    j["V"] = to_json(fit.V);
    j["W"] = to_json(fit.W);
  }
  j["covariance_note"] = fit.covariance_note;
  return j.dump(2) + "\n";
}

std::string info_report_to_json(const InfoReport<double>& info, const std::vector<std::string>& names) {
  Json j;
  j["n"] = info.n;
  j["k_max"] = info.k_max;
  j["V"] = to_json(info.V);
  if (info.se_theoretical.size() > 0) j["se"] = named(names, info.se_theoretical);
  return j.dump(2) + "\n";
}

std::string assumption_report_to_json(const AssumptionReport& report) {
  Json j;
  Json v = Json::object();
  for (const auto& [k, verdict] : report.verdicts) v[k] = to_string(verdict);
  j["verdicts"] = v;
  j["all_pass"] = report.all_pass();
  j["phi"] = report.phi;
  Json c = Json::object();
  for (const auto& [k, x] : report.bound_constants) c[k] = x;
  j["bound_constants"] = c;
  Json h = Json::array();
  for (const auto& p : report.h37_ratios) h.push_back({{"n", p.n}, {"n_first_sum", p.first}, {"n_second_sum", p.second}});
  j["h37"] = h;
  Json notes = Json::object();
  for (const auto& [k, s] : report.notes) notes[k] = s;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian QMLE for time-dependent VARMA models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("tdvarma ") + kVersion + " rng " + kRngId);

  std::string config_path, out_path, series_path, out_dir, which;
  std::optional<std::uint64_t> seed;
  std::optional<int> n, replications, k_max, n_probe;
  std::vector<int> n_list;
  int threads = 0;
  bool with_estimates = false;

  const auto add_config = [&](CLI::App* sub) { sub->add_option("-c,--config", config_path, "model configuration (JSON)")->required()->check(CLI::ExistingFile); };

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a series at the true parameter value");
  add_config(simulate_cmd);
  simulate_cmd->add_option("--n", n, "series length");
  simulate_cmd->add_option("--seed", seed, "overrides run.seed");
  simulate_cmd->add_option("-o,--out", out_path, "series CSV (default stdout)");

  auto* fit_cmd = app.add_subcommand("fit", "estimate the parameters from a series");
  add_config(fit_cmd);
  fit_cmd->add_option("-s,--series", series_path, "series CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-o,--out", out_path, "result JSON (default stdout)");

  auto* asym_cmd = app.add_subcommand("asymptotics", "theoretical information matrix and standard errors");
  add_config(asym_cmd);
  asym_cmd->add_option("--n", n, "sample size");
  asym_cmd->add_option("--k-max", k_max, "truncate the psi expansion at k_max");
  asym_cmd->add_option("-o,--out", out_path, "report JSON (default stdout)");

  auto* check_cmd = app.add_subcommand("check", "audit the regularity assumptions at the true parameter value");
  add_config(check_cmd);
  check_cmd->add_option("--n-probe", n_probe, "probe horizon");
  check_cmd->add_option("-o,--out", out_path, "report JSON (default stdout)");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study");
  add_config(mc_cmd);
  mc_cmd->add_option("--n-list", n_list, "sample sizes")->delimiter(',');
  mc_cmd->add_option("-R,--replications", replications, "replications per sample size");
  mc_cmd->add_option("--seed", seed, "overrides run.seed");
  mc_cmd->add_option("--threads", threads, "worker threads (default TDVARMA_THREADS or all cores)");
  mc_cmd->add_option("--out-dir", out_dir, "directory for summary.csv")->required();
  mc_cmd->add_flag("--estimates", with_estimates, "also write estimates.csv");

  auto* examples_cmd = app.add_subcommand("examples", "write the built-in configurations");
  examples_cmd->add_option("--which", which, "1, 2, control, all, or an example name")->required();
  examples_cmd->add_option("--out-dir", out_dir, "target directory")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const auto load = [&] { return parse_config(read_file(config_path)); };
    const auto need_n = [&](const Config& cfg) {
      const int v = n ? *n : cfg.run.n.value_or(0);
      if (v < 1) throw ConfigError("sample size n must be >= 1 (use --n or run.n)");
      return v;
    };
    const auto true_value = [&](const Config& cfg) {
      if (!cfg.model.layout().true_value) throw ConfigError("model.layout.true_value is required for this command");
      return *cfg.model.layout().true_value;
    };
    const auto& names = [&](const Config& cfg) -> const std::vector<std::string>& { return cfg.model.layout().names; };

    if (simulate_cmd->parsed()) {
      const Config cfg = load();
      SimPlan plan{cfg.model, true_value(cfg), need_n(cfg), seed ? *seed : cfg.run.seed.value_or(0)};
      emit(out, series_to_csv(simulate(plan)), out_path);
    } else if (fit_cmd->parsed()) {
      const Config cfg = load();
      const Seriesd series = parse_series_csv(read_file(series_path));
      const FitResult res = fit(cfg.model, series, cfg.run.fit_options(cfg.model));
      emit(out, fit_result_to_json(res, names(cfg)), out_path);
    } else if (asym_cmd->parsed()) {
      const Config cfg = load();
      const auto info = theoretical_V<double>(cfg.model, true_value(cfg), need_n(cfg), k_max.value_or(-1));
      emit(out, info_report_to_json(info, names(cfg)), out_path);
    } else if (check_cmd->parsed()) {
      const Config cfg = load();
      AuditOptions opts = cfg.run.audit_options();
      if (n_probe) opts.n_probe = *n_probe;
      emit(out, assumption_report_to_json(audit_assumptions(cfg.model, true_value(cfg), opts)), out_path);
    } else if (mc_cmd->parsed()) {
      const Config cfg = load();
      McPlan plan{.model = cfg.model, .theta0 = true_value(cfg)};
      if (!n_list.empty()) plan.n_list = n_list;
      else if (!cfg.run.n_list.empty()) plan.n_list = cfg.run.n_list;
      plan.replications = replications ? *replications : cfg.run.replications.value_or(plan.replications);
      plan.seed = seed ? *seed : cfg.run.seed.value_or(0);
      plan.fit = cfg.run.fit_options(cfg.model);
      plan.threads = threads;
      plan.keep_estimates = with_estimates;
      const McSummary s = run_mc(plan);
      std::filesystem::create_directories(out_dir);
      write_file(out_dir + "/summary.csv", summary_to_csv(s));
      if (with_estimates) write_file(out_dir + "/estimates.csv", estimates_to_csv(s, names(cfg)));
      Json d = Json::array();
      for (const auto& x : s.diagnostics)
        d.push_back({{"n", x.n}, {"replications", x.replications}, {"used", x.used}, {"excluded", x.excluded}, {"flagged", x.flagged}});
      out << Json{{"rng", kRngId}, {"seed", plan.seed}, {"diagnostics", d}}.dump(2) << "\n";
    } else if (examples_cmd->parsed()) {
      std::vector<ExampleId> ids;
      if (which == "1") ids = {ExampleId::example1_sim, ExampleId::example1_theory};
      else if (which == "2") ids = {ExampleId::example2};
      else if (which == "control") ids = {ExampleId::control_explosive};
      else if (which == "all") ids = all_examples();
      else ids = {example_from_string(which)};
      std::filesystem::create_directories(out_dir);
      for (ExampleId id : ids) {
        const std::string path = out_dir + "/" + to_string(id) + ".json";
        write_file(path, example_config_text(id));
        out << path << "\n";
      }
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace tdvarma
