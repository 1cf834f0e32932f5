#pragma once

#include <bilopt/analysis.hpp>
#include <bilopt/config.hpp>

#include <optional>
#include <string>

namespace bilopt {

inline constexpr const char* kVersionString = "bilopt 0.1.0";

/// Problem described by the [problem] section; manufactured kinds carry the
/// closed-form data.
struct ConfiguredProblem {
  ProblemSpec spec;
  std::optional<ManufacturedProblem> manufactured;
};

ConfiguredProblem build_problem(const RunConfig& config);

/// Output directory after the BILOPT_OUTPUT_DIR environment override.
std::string resolve_output_dir(const RunConfig& config);

/// Solve the discrete control problem on mesh n and write control/state/
/// adjoint/density CSVs plus a key-value report.
void run_solve(const RunConfig& config);

/// Convergence study over the configured levels; writes converge.csv.  A
/// failed level leaves a partial table flagged incomplete and throws.
void run_converge(const RunConfig& config);

/// Structure/second-order/no-growth/bound analyses per the toggles.
void run_analyze(const RunConfig& config);

}  // namespace bilopt
