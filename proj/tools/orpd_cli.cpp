#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "orpd/app.hpp"

int main(int argc, char** argv) {
    using namespace orpd;

    CLI::App app{"Multi-objective reactive power dispatch toolkit"};
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags override it");
    app.require_subcommand(1);

    EvaluateConfig ev;
    auto* evaluate = app.add_subcommand("evaluate", "Power flow, Ploss and VD for one control vector");
    evaluate->add_option("--case", ev.case_path, "Case file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--controls", ev.controls_path, "Control file (vg/tap/shunt lines)");
    evaluate->add_option("--vector", ev.vector, "Comma-separated setpoints, tap ratios and shunt Mvar");

    RunConfig rc;
    unsigned run_jobs = 1;
    auto* run = app.add_subcommand("run", "Optimize, then cluster the front and pick compromise solutions");
    run->add_option("--case", rc.case_path, "Case file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", rc.moea.seed, "Random seed")->capture_default_str();
    run->add_option("--pop", rc.moea.n, "Population size")->capture_default_str();
    run->add_option("--evals", rc.moea.eval_budget, "Power flow evaluation budget")->capture_default_str();
    run->add_option("--f", rc.moea.f, "DE mutation factor")->capture_default_str();
    run->add_option("--cr", rc.moea.cr, "DE crossover rate")->capture_default_str();
    run->add_option("--knn-k", rc.moea.k, "Neighbours used by the offspring classifier")->capture_default_str();
    run->add_option("--n-cand", rc.moea.n_cand, "Candidate offspring screened per parent (1 disables screening)")
        ->capture_default_str();
    run->add_option("--clusters", rc.decision.fcm.n_clusters, "Number of preference clusters")->capture_default_str();
    run->add_option("--weights", rc.decision.weights, "Indicator weights for grey relational projection")
        ->delimiter(',')
        ->expected(2)
        ->capture_default_str();
    run->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
    run->add_option("--jobs", run_jobs, "Concurrent power flow evaluations (0 = all cores)")->capture_default_str();
    run->add_flag("--no-decision", rc.no_decision, "Skip clustering and compromise selection");

    ReferenceConfig ref;
    auto* reference = app.add_subcommand("reference", "Weighted-sum reference front");
    reference->add_option("--case", ref.case_path, "Case file")->required()->check(CLI::ExistingFile);
    reference->add_option("--seed", ref.params.seed, "Random seed")->capture_default_str();
    reference->add_option("--n-weights", ref.params.n_weights, "Number of evenly spaced weights")->capture_default_str();
    reference->add_option("--run-evals", ref.params.per_run_budget, "Evaluations per weighted run")->capture_default_str();
    reference->add_option("--pop", ref.params.pop, "DE population per run")->capture_default_str();
    reference->add_option("--f", ref.params.f, "DE mutation factor")->capture_default_str();
    reference->add_option("--cr", ref.params.cr, "DE crossover rate")->capture_default_str();
    reference->add_option("--out", ref.out_dir, "Output directory")->capture_default_str();
    reference->add_option("--jobs", ref.jobs, "Concurrent weighted runs (0 = all cores)")->capture_default_str();

    MetricsConfig mc;
    bool normalized = false;
    auto* metrics = app.add_subcommand("metrics", "GD, spread and IGD of a front against a reference");
    metrics->add_option("front", mc.front_path, "Front CSV")->required();
    metrics->add_option("reference", mc.reference_path, "Reference CSV")->required();
    metrics->add_flag("--normalized", normalized, "Scale objectives by the reference range first");
    metrics->add_flag("--json", mc.json, "Print JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_error;
    }

    if (*evaluate) return cmd_evaluate(ev, std::cout, std::cerr);
    if (*run) {
        rc.jobs = run_jobs;
        return cmd_run(rc, std::cout, std::cerr);
    }
    if (*reference) return cmd_reference(ref, std::cout, std::cerr);
    mc.mode = normalized ? MetricMode::normalized : MetricMode::raw;
    return cmd_metrics(mc, std::cout, std::cerr);
}
