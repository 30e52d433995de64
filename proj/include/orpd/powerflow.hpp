#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "orpd/network.hpp"

namespace orpd {

using Complex = std::complex<double>;

/// Bus admittance matrix in p.u., indexed by position in NetworkCase::buses().
struct AdmittanceMatrix {
    Eigen::SparseMatrix<Complex> y;

    std::size_t size() const { return static_cast<std::size_t>(y.rows()); }
    Complex at(std::size_t i, std::size_t j) const { return y.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    /// Number of distinct bus pairs i<j with a structural off-diagonal entry.
    std::size_t coupled_pairs() const;
};

/// Pi-model assembly; tap ratio and phase shift sit on the from side.
AdmittanceMatrix build_ybus(const NetworkCase& c);

struct SolverOptions {
    double tolerance = 1e-6; // p.u. power mismatch
    int max_iterations = 30; // Newton updates
};

struct BranchFlow {
    Complex s_from; // MVA into the branch at the from end
    Complex s_to;
};

struct PowerFlowSolution {
    std::vector<double> v;     // p.u., per bus
    std::vector<double> theta; // rad, per bus
    std::vector<double> p_gen; // MW, per generator (slack filled in)
    std::vector<double> q_gen; // Mvar, per generator
    double p_slack = 0.0;      // MW
    std::vector<BranchFlow> branch_flows;
    bool converged = false;
    int iterations = 0; // mismatch evaluations, including the final converged check
    double max_mismatch = 0.0;
};

class NotConvergedError : public std::runtime_error {
public:
    NotConvergedError() : std::runtime_error("power flow did not converge") {}
};

/// Newton-Raphson in polar form from a flat start. A singular Jacobian or
/// divergence yields converged == false instead of throwing.
PowerFlowSolution solve(const NetworkCase& c, const SolverOptions& opts = {});

/// Total active series loss in MW (sum of both branch-end injections).
/// Throws NotConvergedError for a non-converged solution.
double active_power_loss(const PowerFlowSolution& sol, const NetworkCase& c);

/// Sum over load buses of |V - 1| / (v_max - v_min).
double voltage_deviation(const PowerFlowSolution& sol, const NetworkCase& c);

struct ViolationReport {
    static constexpr double non_convergence_penalty = 1e6;

    double total = 0.0;
    double gen_q = 0.0;        // normalized generator reactive excess
    double load_voltage = 0.0; // normalized load-bus voltage excess
    double branch_flow = 0.0;  // normalized apparent-power excess
    bool non_convergence = false;

    bool feasible() const { return total == 0.0; }
};

ViolationReport constraint_violation(const PowerFlowSolution& sol, const NetworkCase& c);

struct ObjectivePair {
    double p_loss = 0.0; // MW
    double vd = 0.0;
    bool operator==(const ObjectivePair&) const = default;
};

struct Evaluation {
    ObjectivePair objectives;
    ViolationReport violation;
    int iterations = 0;
    double max_mismatch = 0.0;
};

/// apply_controls -> solve -> objectives and violations. Non-converged flows
/// report the sentinel violation and objectives of non_convergence_penalty.
Evaluation evaluate(const NetworkCase& c, const ControlVector& u, const SolverOptions& opts = {});

} // namespace orpd
