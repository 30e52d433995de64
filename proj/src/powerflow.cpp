#include "orpd/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

namespace orpd {

std::size_t AdmittanceMatrix::coupled_pairs() const {
    std::size_t n = 0;
    for (Eigen::Index k = 0; k < y.outerSize(); ++k) {
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, k); it; ++it) {
            if (it.row() < it.col()) ++n;
        }
    }
    return n;
}

AdmittanceMatrix build_ybus(const NetworkCase& c) {
    const auto n = static_cast<Eigen::Index>(c.buses().size());
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(c.branches().size() * 4 + c.buses().size());
    const double base = c.base_mva();

    for (const auto& br : c.branches()) {
        if (!br.in_service) continue;
        const Complex z(br.r, br.x);
        if (std::abs(z) == 0.0) throw CaseValidationError("invalid case: zero series impedance");
        const Complex ys = 1.0 / z;
        const Complex ysh(0.0, br.b_charging / 2.0);
        const double shift = br.shift_deg * std::numbers::pi / 180.0;
        const Complex tap = std::polar(br.tap_ratio, shift);
        const auto f = static_cast<Eigen::Index>(c.bus_index(br.from_bus));
        const auto t = static_cast<Eigen::Index>(c.bus_index(br.to_bus));
        trip.emplace_back(f, f, (ys + ysh) / (br.tap_ratio * br.tap_ratio));
        trip.emplace_back(t, t, ys + ysh);
        trip.emplace_back(f, t, -ys / std::conj(tap));
        trip.emplace_back(t, f, -ys / tap);
    }
    for (std::size_t i = 0; i < c.buses().size(); ++i) {
        const auto& b = c.buses()[i];
        if (b.g_shunt != 0.0 || b.b_shunt != 0.0) {
            const auto k = static_cast<Eigen::Index>(i);
            trip.emplace_back(k, k, Complex(b.g_shunt, b.b_shunt) / base);
        }
    }
    for (const auto& s : c.shunts()) {
        if (s.banks_in_service == 0) continue;
        const auto k = static_cast<Eigen::Index>(c.bus_index(s.bus));
        trip.emplace_back(k, k, Complex(0.0, s.banks_in_service * s.mvar_per_bank / base));
    }

    AdmittanceMatrix m;
    m.y.resize(n, n);
    m.y.setFromTriplets(trip.begin(), trip.end());
    m.y.makeCompressed();
    return m;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

Eigen::VectorXcd complex_voltages(const std::vector<double>& v, const std::vector<double>& th) {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = std::polar(v[i], th[i]);
    return out;
}

void fill_outputs(PowerFlowSolution& sol, const NetworkCase& c, const AdmittanceMatrix& ybus) {
    const double base = c.base_mva();
    const Eigen::VectorXcd vc = complex_voltages(sol.v, sol.theta);
    const Eigen::VectorXcd s = vc.cwiseProduct((ybus.y * vc).conjugate());

    sol.p_gen.clear();
    sol.q_gen.clear();
    for (const auto& g : c.generators()) {
        const auto i = c.bus_index(g.bus);
        const auto& b = c.buses()[i];
        const Complex si = s[static_cast<Eigen::Index>(i)];
        sol.q_gen.push_back(si.imag() * base + b.q_load);
        sol.p_gen.push_back(b.kind == BusKind::slack ? si.real() * base + b.p_load : g.p_gen);
        if (b.kind == BusKind::slack) sol.p_slack = sol.p_gen.back();
    }

    sol.branch_flows.assign(c.branches().size(), {});
    for (std::size_t k = 0; k < c.branches().size(); ++k) {
        const auto& br = c.branches()[k];
        if (!br.in_service) continue;
        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ysh(0.0, br.b_charging / 2.0);
        const Complex tap = std::polar(br.tap_ratio, br.shift_deg * std::numbers::pi / 180.0);
        const auto f = static_cast<Eigen::Index>(c.bus_index(br.from_bus));
        const auto t = static_cast<Eigen::Index>(c.bus_index(br.to_bus));
        const Complex i_f = (ys + ysh) / (br.tap_ratio * br.tap_ratio) * vc[f] - ys / std::conj(tap) * vc[t];
        const Complex i_t = -ys / tap * vc[f] + (ys + ysh) * vc[t];
        sol.branch_flows[k] = {vc[f] * std::conj(i_f) * base, vc[t] * std::conj(i_t) * base};
    }
}

} // namespace

PowerFlowSolution solve(const NetworkCase& c, const SolverOptions& opts) {
    const auto ybus = build_ybus(c);
    const std::size_t n = c.buses().size();
    const double base = c.base_mva();

    PowerFlowSolution sol;
    sol.v.assign(n, 1.0);
    sol.theta.assign(n, 0.0);

    std::vector<double> p_spec(n, 0.0), q_spec(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p_spec[i] = -c.buses()[i].p_load / base;
        q_spec[i] = -c.buses()[i].q_load / base;
    }
    for (const auto& g : c.generators()) {
        const auto i = c.bus_index(g.bus);
        sol.v[i] = g.v_set;
        p_spec[i] += g.p_gen / base;
    }

    // unknown layout: angles of all non-slack buses, then magnitudes of load buses
    std::vector<int> ang(n, -1), mag(n, -1);
    int nu = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (c.buses()[i].kind != BusKind::slack) ang[i] = nu++;
    for (std::size_t i = 0; i < n; ++i)
        if (c.buses()[i].kind == BusKind::load) mag[i] = nu++;

    Eigen::VectorXd mismatch(nu);
    auto compute_mismatch = [&](const Eigen::VectorXcd& s) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if (ang[i] >= 0) {
                mismatch[ang[i]] = p_spec[i] - s[k].real();
                worst = std::max(worst, std::abs(mismatch[ang[i]]));
            }
            if (mag[i] >= 0) {
                mismatch[mag[i]] = q_spec[i] - s[k].imag();
                worst = std::max(worst, std::abs(mismatch[mag[i]]));
            }
        }
        return worst;
    };

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::vector<Eigen::Triplet<double>> trip;

    for (int iter = 0;; ++iter) {
        const Eigen::VectorXcd vc = complex_voltages(sol.v, sol.theta);
        const Eigen::VectorXcd s = vc.cwiseProduct((ybus.y * vc).conjugate());
        sol.max_mismatch = compute_mismatch(s);
        sol.iterations = iter + 1;
        if (!std::isfinite(sol.max_mismatch)) break;
        if (sol.max_mismatch <= opts.tolerance) {
            sol.converged = true;
            break;
        }
        if (iter >= opts.max_iterations) break;

        trip.clear();
        for (Eigen::Index col = 0; col < ybus.y.outerSize(); ++col) {
            for (Eigen::SparseMatrix<Complex>::InnerIterator it(ybus.y, col); it; ++it) {
                const auto i = static_cast<std::size_t>(it.row());
                const auto k = static_cast<std::size_t>(it.col());
                if (ang[i] < 0 && mag[i] < 0) continue;
                const double g = it.value().real();
                const double b = it.value().imag();
                const double vi = sol.v[i], vk = sol.v[k];
                if (i != k) {
                    const double d = sol.theta[i] - sol.theta[k];
                    const double gs_bc = g * std::sin(d) - b * std::cos(d);
                    const double gc_bs = g * std::cos(d) + b * std::sin(d);
                    if (ang[i] >= 0) {
                        if (ang[k] >= 0) trip.emplace_back(ang[i], ang[k], vi * vk * gs_bc);
                        if (mag[k] >= 0) trip.emplace_back(ang[i], mag[k], vi * gc_bs);
                    }
                    if (mag[i] >= 0) {
                        if (ang[k] >= 0) trip.emplace_back(mag[i], ang[k], -vi * vk * gc_bs);
                        if (mag[k] >= 0) trip.emplace_back(mag[i], mag[k], vi * gs_bc);
                    }
                } else {
                    const double p = s[static_cast<Eigen::Index>(i)].real();
                    const double q = s[static_cast<Eigen::Index>(i)].imag();
                    if (ang[i] >= 0) {
                        trip.emplace_back(ang[i], ang[i], -q - b * vi * vi);
                        if (mag[i] >= 0) trip.emplace_back(ang[i], mag[i], p / vi + g * vi);
                    }
                    if (mag[i] >= 0) {
                        trip.emplace_back(mag[i], ang[i], p - g * vi * vi);
                        trip.emplace_back(mag[i], mag[i], q / vi - b * vi);
                    }
                }
            }
        }
        SpMat jac(nu, nu);
        jac.setFromTriplets(trip.begin(), trip.end());
        jac.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(jac);
            analyzed = true;
        }
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) break;
        const Eigen::VectorXd dx = lu.solve(mismatch);
        if (lu.info() != Eigen::Success || !dx.allFinite()) break;
        for (std::size_t i = 0; i < n; ++i) {
            if (ang[i] >= 0) sol.theta[i] += dx[ang[i]];
            if (mag[i] >= 0) sol.v[i] += dx[mag[i]];
        }
    }

    if (sol.converged) fill_outputs(sol, c, ybus);
    return sol;
}

double active_power_loss(const PowerFlowSolution& sol, const NetworkCase& c) {
    if (!sol.converged) throw NotConvergedError();
    double loss = 0.0;
    for (std::size_t k = 0; k < c.branches().size(); ++k) {
        if (!c.branches()[k].in_service) continue;
        loss += sol.branch_flows[k].s_from.real() + sol.branch_flows[k].s_to.real();
    }
    return loss;
}

double voltage_deviation(const PowerFlowSolution& sol, const NetworkCase& c) {
    if (!sol.converged) throw NotConvergedError();
    double vd = 0.0;
    for (std::size_t i = 0; i < c.buses().size(); ++i) {
        const auto& b = c.buses()[i];
        if (b.kind != BusKind::load) continue;
        vd += std::abs(sol.v[i] - 1.0) / (b.v_max - b.v_min);
    }
    return vd;
}

ViolationReport constraint_violation(const PowerFlowSolution& sol, const NetworkCase& c) {
    ViolationReport r;
    if (!sol.converged) {
        r.non_convergence = true;
        r.total = ViolationReport::non_convergence_penalty;
        return r;
    }
    for (std::size_t g = 0; g < c.generators().size(); ++g) {
        const auto& gen = c.generators()[g];
        const double q = sol.q_gen[g];
        r.gen_q += std::max({0.0, q - gen.q_max, gen.q_min - q}) / (gen.q_max - gen.q_min);
    }
    for (std::size_t i = 0; i < c.buses().size(); ++i) {
        const auto& b = c.buses()[i];
        if (b.kind != BusKind::load) continue;
        r.load_voltage += std::max({0.0, sol.v[i] - b.v_max, b.v_min - sol.v[i]}) / (b.v_max - b.v_min);
    }
    if (c.flow_limits()) {
        for (std::size_t k = 0; k < c.branches().size(); ++k) {
            const auto& br = c.branches()[k];
            if (!br.in_service || br.s_max <= 0.0) continue;
            const double s = std::max(std::abs(sol.branch_flows[k].s_from), std::abs(sol.branch_flows[k].s_to));
            r.branch_flow += std::max(0.0, s - br.s_max) / br.s_max;
        }
    }
    r.total = r.gen_q + r.load_voltage + r.branch_flow;
    return r;
}

Evaluation evaluate(const NetworkCase& c, const ControlVector& u, const SolverOptions& opts) {
    const NetworkCase controlled = apply_controls(c, u);
    const PowerFlowSolution sol = solve(controlled, opts);
    Evaluation e;
    e.iterations = sol.iterations;
    e.max_mismatch = sol.max_mismatch;
    e.violation = constraint_violation(sol, controlled);
    if (sol.converged) {
        e.objectives = {active_power_loss(sol, controlled), voltage_deviation(sol, controlled)};
    } else {
        e.objectives = {ViolationReport::non_convergence_penalty, ViolationReport::non_convergence_penalty};
    }
    return e;
}

} // namespace orpd
