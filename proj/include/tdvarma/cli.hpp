#ifndef TDVARMA_CLI_HPP
#define TDVARMA_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "tdvarma/assumptions.hpp"
#include "tdvarma/asymptotics.hpp"
#include "tdvarma/estimate.hpp"

namespace tdvarma {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

std::string fit_result_to_json(const FitResult& fit, const std::vector<std::string>& names);
std::string info_report_to_json(const InfoReport<double>& info, const std::vector<std::string>& names);
std::string assumption_report_to_json(const AssumptionReport& report);

/// Runs the command line; output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdvarma

#endif  // TDVARMA_CLI_HPP
