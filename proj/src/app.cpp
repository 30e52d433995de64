#include "orpd/app.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <utility>
#include <vector>

#include "json.hpp"
#include "orpd/front_io.hpp"

namespace orpd {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Writes every file or none: anything already written is removed on failure.
void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    fs::create_directories(dir);
    std::vector<fs::path> done;
    try {
        for (const auto& [name, content] : files) {
            const fs::path p = dir / name;
            std::ofstream o(p, std::ios::binary | std::ios::trunc);
            if (!o) throw std::runtime_error("cannot write " + p.string());
            done.push_back(p);
            o << content;
            o.close();
            if (!o) throw std::runtime_error("failed writing " + p.string());
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : done) fs::remove(p, ec);
        throw;
    }
}

void remove_outputs(const fs::path& dir, std::initializer_list<const char*> names) {
    std::error_code ec;
    for (const char* n : names) fs::remove(dir / n, ec);
}

Json controls_json(const NetworkCase& c, const ControlVector& u) {
    return Json{{"vg", u.gen_v}, {"tap", tap_ratios(c, u)}, {"shunt_mvar", shunt_mvar(c, u)}};
}

Json individual_json(const NetworkCase& c, const Individual& ind) {
    return Json{{"ploss_mw", ind.objectives.p_loss},
                {"vd", ind.objectives.vd},
                {"violation", ind.violation},
                {"controls", controls_json(c, ind.u)}};
}

Json params_json(const MoeaParams& p) {
    return Json{{"n", p.n},   {"eval_budget", p.eval_budget}, {"f", p.f},
                {"cr", p.cr}, {"k", p.k},                     {"n_cand", p.n_cand}};
}

Json trace_json(const std::vector<GenerationStats>& trace) {
    Json t = Json::array();
    for (const auto& s : trace)
        t.push_back(Json{{"generation", s.generation},
                         {"evaluations", s.evaluations},
                         {"archive_size", s.archive_size},
                         {"feasible", s.feasible},
                         {"best_ploss", s.best_ploss},
                         {"best_vd", s.best_vd},
                         {"min_violation", s.min_violation},
                         {"predicted_plus", s.predicted_plus},
                         {"non_converged", s.non_converged},
                         {"mean_pf_iterations", s.mean_pf_iterations}});
    return t;
}

Json decision_json(const NetworkCase& c, const Population& front, const BcsReport& rep, const DecisionParams& dp) {
    Json bcs = Json::array();
    for (std::size_t k = 0; k < rep.bcs.size(); ++k) {
        Json row = individual_json(c, front[rep.bcs[k]]);
        row["index"] = rep.bcs[k] + 1;
        row["cluster"] = rep.bcs_cluster[k] + 1;
        row["priority"] = rep.cluster_priority[static_cast<Eigen::Index>(rep.bcs[k])];
        bcs.push_back(std::move(row));
    }
    std::vector<double> centers;
    for (Eigen::Index q = 0; q < rep.clustering.centers.rows(); ++q)
        for (Eigen::Index k = 0; k < rep.clustering.centers.cols(); ++k) centers.push_back(rep.clustering.centers(q, k));
    std::vector<int> cluster;
    for (int l : rep.cluster) cluster.push_back(l + 1);
    return Json{{"n_clusters", dp.fcm.n_clusters},
                {"fuzziness", dp.fcm.fuzziness},
                {"weights", dp.weights},
                {"rho", dp.rho},
                {"single_bcs", rep.single_bcs},
                {"warnings", rep.warnings},
                {"fcm_iterations", rep.clustering.iterations},
                {"fcm_converged", rep.clustering.converged},
                {"fcm_objective", rep.clustering.objective_history},
                {"centers", centers},
                {"cluster", cluster},
                {"bcs", bcs}};
}

} // namespace

int cmd_evaluate(const EvaluateConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const NetworkCase c = load_case(cfg.case_path);
        ControlVector u;
        if (!cfg.controls_path.empty() && !cfg.vector.empty())
            throw std::invalid_argument("give either a control file or --vector, not both");
        if (!cfg.controls_path.empty())
            u = read_control_file(cfg.controls_path, c);
        else if (!cfg.vector.empty())
            u = parse_control_list(cfg.vector, c);
        else
            u = current_controls(c);
        const Evaluation e = evaluate(c, u);
        const auto& v = e.violation;
        if (v.non_convergence) {
            out << "power flow did not converge after " << e.iterations << " mismatch evaluations\n";
            out << "violation total=" << general(v.total) << " (non-convergence)\n";
            return exit_non_convergence;
        }
        out << "Ploss=" << fixed(e.objectives.p_loss, 2) << " MW, VD=" << fixed(e.objectives.vd, 2) << '\n';
        out << "ploss_mw=" << format_number(e.objectives.p_loss) << " vd=" << format_number(e.objectives.vd) << '\n';
        out << "violation total=" << general(v.total) << " gen_q=" << general(v.gen_q)
            << " load_voltage=" << general(v.load_voltage) << " branch_flow=" << general(v.branch_flow) << '\n';
        out << "converged in " << e.iterations << " mismatch evaluations, max mismatch " << general(e.max_mismatch)
            << " p.u.\n";
        return v.feasible() ? exit_ok : exit_violation;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_error;
    }
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path dir(cfg.out_dir);
    try {
        const NetworkCase c = load_case(cfg.case_path);
        cfg.moea.validate();
        if (!cfg.no_decision) cfg.decision.fcm.validate();
        const auto t0 = std::chrono::steady_clock::now();
        const RunResult res = run(c, cfg.moea, cfg.jobs);
        const Population& front = res.archive.members;

        Json report{{"case", fs::path(cfg.case_path).filename().string()},
                    {"seed", cfg.moea.seed},
                    {"params", params_json(cfg.moea)},
                    {"evaluations", res.report.evaluations},
                    {"generations", res.report.generations},
                    {"control_dimension", control_bounds(c).dimension()},
                    {"trace", trace_json(res.report.trace)}};
        Json fj = Json::array(), pj = Json::array();
        for (const auto& m : front) fj.push_back(individual_json(c, m));
        for (const auto& m : res.final_population) pj.push_back(individual_json(c, m));
        report["front"] = std::move(fj);
        report["final_population"] = std::move(pj);

        std::vector<std::pair<std::string, std::string>> files{{"front.csv", front_csv(c, front)}};
        std::vector<std::size_t> bcs;
        if (!cfg.no_decision) {
            std::vector<ObjectivePair> objs;
            for (const auto& m : front) objs.push_back(m.objectives);
            const BcsReport rep = analyze(objs, cfg.decision);
            for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
            report["decision"] = decision_json(c, front, rep, cfg.decision);
            files.emplace_back("bcs.csv", bcs_csv(c, front, rep));
            files.emplace_back("decision.csv", decision_csv(front, rep));
            bcs = rep.bcs;
        }
        files.emplace_back("report.json", report.dump(2) + '\n');
        remove_outputs(dir, {"front.csv", "bcs.csv", "decision.csv", "report.json"});
        write_outputs(dir, files);

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out << "evaluations " << res.report.evaluations << ", generations " << res.report.generations << ", "
            << fixed(secs, 1) << " s\n";
        out << "front: " << front.size() << " solutions";
        if (!front.empty())
            out << ", Ploss " << fixed(front.front().objectives.p_loss, 3) << ".." << fixed(front.back().objectives.p_loss, 3)
                << " MW";
        out << '\n';
        for (std::size_t k = 0; k < bcs.size(); ++k) {
            const auto& m = front[bcs[k]];
            out << "BCS" << k + 1 << ": Ploss=" << fixed(m.objectives.p_loss, 2) << " MW, VD=" << fixed(m.objectives.vd, 2)
                << '\n';
        }
        out << "wrote " << (dir / "front.csv").string() << '\n';
        const bool feasible = !front.empty() && front.front().feasible();
        if (!feasible) err << "warning: no feasible solution found\n";
        return feasible ? exit_ok : exit_violation;
    } catch (const std::exception& ex) {
        remove_outputs(dir, {"front.csv", "bcs.csv", "decision.csv", "report.json"});
        err << "error: " << ex.what() << '\n';
        return exit_error;
    }
}

int cmd_reference(const ReferenceConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path dir(cfg.out_dir);
    try {
        const NetworkCase c = load_case(cfg.case_path);
        cfg.params.validate();
        const ReferenceResult res = build_reference_front(c, cfg.params, cfg.jobs);
        for (const auto& w : res.warnings) err << "warning: " << w << '\n';
        if (res.front.empty()) throw std::runtime_error("reference front is empty");
        remove_outputs(dir, {"reference.csv"});
        write_outputs(dir, {{"reference.csv", reference_csv(res.front)}});
        out << res.front.size() << " non-dominated points from " << res.runs.size() << " weighted runs";
        if (res.raw_units) out << " (raw units)";
        out << "\nwrote " << (dir / "reference.csv").string() << '\n';
        return exit_ok;
    } catch (const std::exception& ex) {
        remove_outputs(dir, {"reference.csv"});
        err << "error: " << ex.what() << '\n';
        return exit_error;
    }
}

int cmd_metrics(const MetricsConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const FrontPoints front = read_front_csv(cfg.front_path);
        const FrontPoints ref = read_front_csv(cfg.reference_path);
        const MetricReport m = compute_metrics(front, ref, cfg.mode);
        const char* mode = m.mode == MetricMode::raw ? "raw" : "normalized";
        if (cfg.json) {
            out << Json{{"gd", m.gd},
                        {"spread", m.spread},
                        {"igd", m.igd},
                        {"front_size", m.approx_size},
                        {"reference_size", m.reference_size},
                        {"mode", mode}}
                       .dump(2)
                << '\n';
        } else {
            out << "metric  value\n";
            out << "GD      " << format_number(m.gd) << '\n';
            out << "spread  " << format_number(m.spread) << '\n';
            out << "IGD     " << format_number(m.igd) << '\n';
            out << "(" << m.approx_size << " front points, " << m.reference_size << " reference points, " << mode
                << " units)\n";
        }
        return exit_ok;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_error;
    }
}

} // namespace orpd
