#pragma once

#include <iosfwd>
#include <string>

#include "orpd/decision.hpp"
#include "orpd/metrics.hpp"
#include "orpd/moea.hpp"

namespace orpd {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_violation = 2, exit_non_convergence = 3 };

struct EvaluateConfig {
    std::string case_path;
    std::string controls_path; // control file; empty = use vector or the case's own settings
    std::string vector;        // inline physical values
};

/// Prints objectives and violation terms. 0 feasible, 2 violation, 3 no convergence, 1 input error.
int cmd_evaluate(const EvaluateConfig& cfg, std::ostream& out, std::ostream& err);

struct RunConfig {
    std::string case_path;
    MoeaParams moea;
    DecisionParams decision;
    std::string out_dir = "out";
    bool no_decision = false;
    unsigned jobs = 1;
};

/// Writes front.csv and report.json, plus bcs.csv and decision.csv unless
/// no_decision. Returns 2 when the archive holds no feasible solution.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct ReferenceConfig {
    std::string case_path;
    ReferenceParams params;
    std::string out_dir = "out";
    unsigned jobs = 1;
};

/// Writes reference.csv.
int cmd_reference(const ReferenceConfig& cfg, std::ostream& out, std::ostream& err);

struct MetricsConfig {
    std::string front_path;
    std::string reference_path;
    MetricMode mode = MetricMode::raw;
    bool json = false;
};

int cmd_metrics(const MetricsConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace orpd
