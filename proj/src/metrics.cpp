#include "orpd/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "orpd/moea.hpp"

namespace orpd {

namespace {

double dist(const ObjectivePair& a, const ObjectivePair& b) {
    return std::hypot(a.p_loss - b.p_loss, a.vd - b.vd);
}

double mean_nearest(const FrontPoints& from, const FrontPoints& to) {
    if (from.empty() || to.empty()) throw std::invalid_argument("metric needs non-empty point sets");
    double sum = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) best = std::min(best, dist(p, q));
        sum += best;
    }
    return sum / static_cast<double>(from.size());
}

bool point_dominates(const ObjectivePair& a, const ObjectivePair& b) {
    return a.p_loss <= b.p_loss && a.vd <= b.vd && (a.p_loss < b.p_loss || a.vd < b.vd);
}

bool by_loss(const ObjectivePair& a, const ObjectivePair& b) {
    if (a.p_loss != b.p_loss) return a.p_loss < b.p_loss;
    return a.vd < b.vd;
}

} // namespace

double gd(const FrontPoints& approx, const FrontPoints& reference) { return mean_nearest(approx, reference); }

double igd(const FrontPoints& approx, const FrontPoints& reference) { return mean_nearest(reference, approx); }

double spread(const FrontPoints& front, const FrontPoints& reference) {
    if (front.size() < 2) throw std::invalid_argument("spread needs at least two points");
    if (reference.empty()) throw std::invalid_argument("spread needs a non-empty reference");
    FrontPoints f = front;
    std::sort(f.begin(), f.end(), by_loss);
    const auto loss_end = *std::min_element(reference.begin(), reference.end(), by_loss);
    const auto vd_end = *std::min_element(reference.begin(), reference.end(), [](const auto& a, const auto& b) {
        if (a.vd != b.vd) return a.vd < b.vd;
        return a.p_loss < b.p_loss;
    });
    const double df = dist(f.front(), loss_end);
    const double dl = dist(f.back(), vd_end);
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) gaps.push_back(dist(f[i], f[i + 1]));
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double dev = 0.0;
    for (double g : gaps) dev += std::abs(g - mean);
    const double den = df + dl + static_cast<double>(gaps.size()) * mean;
    return den == 0.0 ? 0.0 : (df + dl + dev) / den;
}

MetricReport compute_metrics(const FrontPoints& approx, const FrontPoints& reference, MetricMode mode) {
    MetricReport r;
    r.mode = mode;
    r.approx_size = approx.size();
    r.reference_size = reference.size();
    FrontPoints a = approx, ref = reference;
    if (mode == MetricMode::normalized && !reference.empty()) {
        double lmin = reference[0].p_loss, lmax = lmin, vmin = reference[0].vd, vmax = vmin;
        for (const auto& p : reference) {
            lmin = std::min(lmin, p.p_loss);
            lmax = std::max(lmax, p.p_loss);
            vmin = std::min(vmin, p.vd);
            vmax = std::max(vmax, p.vd);
        }
        const double ls = lmax > lmin ? lmax - lmin : 1.0;
        const double vs = vmax > vmin ? vmax - vmin : 1.0;
        for (auto* set : {&a, &ref})
            for (auto& p : *set) p = {(p.p_loss - lmin) / ls, (p.vd - vmin) / vs};
    }
    r.gd = gd(a, ref);
    r.igd = igd(a, ref);
    r.spread = spread(a, ref);
    return r;
}

FrontPoints nondominated_filter(const FrontPoints& pts) {
    FrontPoints out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool drop = false;
        for (std::size_t j = 0; j < pts.size() && !drop; ++j)
            drop = point_dominates(pts[j], pts[i]) || (j < i && pts[j] == pts[i]);
        if (!drop) out.push_back(pts[i]);
    }
    std::sort(out.begin(), out.end(), by_loss);
    return out;
}

void ReferenceParams::validate() const {
    if (n_weights < 2) throw std::invalid_argument("reference front needs at least 2 weights");
    if (pop < 4) throw std::invalid_argument("reference DE population must be at least 4");
    if (per_run_budget < pop) throw std::invalid_argument("per-run budget must cover the initial population");
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("f must lie in (0, 1]");
    if (!(cr >= 0.0 && cr <= 1.0)) throw std::invalid_argument("cr must lie in [0, 1]");
}

namespace {

// true if a should replace (or rank ahead of) b
bool no_worse(const Evaluation& a, double fa, const Evaluation& b, double fb) {
    const bool ok_a = a.violation.feasible(), ok_b = b.violation.feasible();
    if (ok_a != ok_b) return ok_a;
    if (!ok_a) return a.violation.total <= b.violation.total;
    return fa <= fb;
}

std::uint64_t derived_seed(std::uint64_t seed, std::size_t run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

} // namespace

SingleRunResult minimize_scalarized(const NetworkCase& c, const Scalarization& s, std::size_t budget,
                                    std::size_t pop_size, double f, double cr, std::uint64_t seed) {
    const SearchSpace space(control_bounds(c));
    Rng rng(seed);
    Population pop;
    std::vector<Evaluation> evals;
    std::vector<double> fit;
    for (std::size_t i = 0; i < pop_size; ++i) {
        auto u = space.sample(rng);
        evals.push_back(evaluate(c, u));
        fit.push_back(s(evals.back().objectives));
        pop.push_back(make_individual(std::move(u), evals.back()));
    }
    std::size_t used = pop_size;
    while (used < budget) {
        std::vector<ControlVector> trials;
        for (std::size_t i = 0; i < pop_size; ++i)
            trials.push_back(de_crossover(pop[i].u, de_mutation(pop, i, f, space, rng), cr, space, rng));
        for (std::size_t i = 0; i < pop_size; ++i) {
            const Evaluation e = evaluate(c, trials[i]);
            const double ft = s(e.objectives);
            if (no_worse(e, ft, evals[i], fit[i])) {
                pop[i] = make_individual(std::move(trials[i]), e);
                evals[i] = e;
                fit[i] = ft;
            }
        }
        used += pop_size;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop_size; ++i)
        if (no_worse(evals[i], fit[i], evals[best], fit[best]) &&
            !no_worse(evals[best], fit[best], evals[i], fit[i]))
            best = i;
    return {pop[best].u, evals[best], fit[best], used};
}

ReferenceResult build_reference_front(const NetworkCase& c, const ReferenceParams& params, unsigned jobs) {
    params.validate();
    const std::size_t nw = params.n_weights;
    ReferenceResult res;
    res.runs.resize(nw);
    for (std::size_t i = 0; i < nw; ++i) res.weights.push_back(static_cast<double>(i) / static_cast<double>(nw - 1));

    auto do_run = [&](std::size_t i, const Scalarization& s) {
        res.runs[i] = minimize_scalarized(c, s, params.per_run_budget, params.pop, params.f, params.cr,
                                          derived_seed(params.seed, i));
    };
    do_run(nw - 1, Scalarization{1.0});
    do_run(0, Scalarization{0.0});

    Scalarization norm;
    const auto& lo = res.runs[nw - 1].evaluation; // loss anchor
    const auto& vo = res.runs[0].evaluation;      // vd anchor
    const double ls = vo.objectives.p_loss - lo.objectives.p_loss;
    const double vs = lo.objectives.vd - vo.objectives.vd;
    if (!lo.violation.feasible() || !vo.violation.feasible() || !(ls > 0.0) || !(vs > 0.0)) {
        res.raw_units = true;
        res.warnings.push_back("anchor runs unusable for normalization; weighting raw objective units");
    } else {
        norm.loss_offset = lo.objectives.p_loss;
        norm.loss_scale = ls;
        norm.vd_offset = vo.objectives.vd;
        norm.vd_scale = vs;
    }

    std::vector<std::size_t> interior;
    for (std::size_t i = 1; i + 1 < nw; ++i) interior.push_back(i);
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto body = [&](std::size_t i) {
        Scalarization s = norm;
        s.w = res.weights[i];
        do_run(i, s);
    };
    if (jobs <= 1 || interior.size() <= 1) {
        for (auto i : interior) body(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, interior.size()); ++t) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t k; (k = next.fetch_add(1)) < interior.size() && !failed;) body(interior[k]);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    FrontPoints bests;
    for (const auto& r : res.runs)
        if (r.evaluation.violation.feasible()) bests.push_back(r.evaluation.objectives);
    if (bests.empty()) res.warnings.push_back("no weighted-sum run reached a feasible point");
    res.front = nondominated_filter(bests);
    return res;
}

} // namespace orpd
