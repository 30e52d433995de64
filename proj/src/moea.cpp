#include "orpd/moea.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace orpd {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

SearchSpace::SearchSpace(ControlBounds bounds) : bounds_(std::move(bounds)) {
    for (std::size_t i = 0; i < bounds_.v_lower.size(); ++i) {
        lower_.push_back(bounds_.v_lower[i]);
        upper_.push_back(bounds_.v_upper[i]);
    }
    for (int m : bounds_.tap_max) {
        lower_.push_back(0.0);
        upper_.push_back(m);
    }
    for (int m : bounds_.shunt_max) {
        lower_.push_back(0.0);
        upper_.push_back(m);
    }
}

std::vector<double> SearchSpace::to_real(const ControlVector& u) const {
    std::vector<double> x;
    x.reserve(dimension());
    x.insert(x.end(), u.gen_v.begin(), u.gen_v.end());
    for (int t : u.tap_steps) x.push_back(t);
    for (int s : u.shunt_banks) x.push_back(s);
    return x;
}

ControlVector SearchSpace::from_real(const std::vector<double>& x) const {
    if (x.size() != dimension()) throw ControlError(x.size(), "real vector has wrong dimension");
    ControlVector u;
    const std::size_t nv = bounds_.v_lower.size();
    const std::size_t nt = bounds_.tap_max.size();
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double v = std::clamp(x[j], lower_[j], upper_[j]);
        if (j < nv)
            u.gen_v.push_back(v);
        else if (j < nv + nt)
            u.tap_steps.push_back(static_cast<int>(std::lround(v)));
        else
            u.shunt_banks.push_back(static_cast<int>(std::lround(v)));
    }
    return u;
}

std::vector<double> SearchSpace::normalized(const ControlVector& u) const {
    std::vector<double> x = to_real(u);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double w = upper_[j] - lower_[j];
        x[j] = w > 0.0 ? (x[j] - lower_[j]) / w : 0.0;
    }
    return x;
}

ControlVector SearchSpace::sample(Rng& rng) const {
    ControlVector u;
    for (std::size_t i = 0; i < bounds_.v_lower.size(); ++i)
        u.gen_v.push_back(std::uniform_real_distribution<double>(bounds_.v_lower[i], bounds_.v_upper[i])(rng));
    for (int m : bounds_.tap_max) u.tap_steps.push_back(std::uniform_int_distribution<int>(0, m)(rng));
    for (int m : bounds_.shunt_max) u.shunt_banks.push_back(std::uniform_int_distribution<int>(0, m)(rng));
    return u;
}

void MoeaParams::validate() const {
    if (n < 4) throw std::invalid_argument("population size must be at least 4");
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("f must lie in (0, 1]");
    if (!(cr >= 0.0 && cr <= 1.0)) throw std::invalid_argument("cr must lie in [0, 1]");
    if (k == 0 || k % 2 == 0) throw std::invalid_argument("knn k must be odd");
    if (k > n) throw std::invalid_argument("knn k must not exceed the population size");
    if (n_cand == 0) throw std::invalid_argument("n_cand must be at least 1");
    if (eval_budget == 0) throw std::invalid_argument("evaluation budget must be positive");
}

bool dominates(const Individual& a, const Individual& b) {
    const bool fa = a.feasible(), fb = b.feasible();
    if (fa != fb) return fa;
    if (!fa) return a.violation < b.violation;
    const auto& x = a.objectives;
    const auto& y = b.objectives;
    return x.p_loss <= y.p_loss && x.vd <= y.vd && (x.p_loss < y.p_loss || x.vd < y.vd);
}

std::vector<std::vector<std::size_t>> nondominated_sort(Population& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(pop[p], pop[q])) {
                dominated[p].push_back(q);
                ++count[q];
            } else if (dominates(pop[q], pop[p])) {
                dominated[q].push_back(p);
                ++count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (count[p] == 0) {
            pop[p].rank = 1;
            fronts[0].push_back(p);
        }
    }
    if (fronts[0].empty()) fronts.clear();
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts[r]) {
            for (std::size_t q : dominated[p]) {
                if (--count[q] == 0) {
                    pop[q].rank = static_cast<int>(r) + 2;
                    next.push_back(q);
                }
            }
        }
        if (!next.empty()) {
            std::sort(next.begin(), next.end());
            fronts.push_back(std::move(next));
        }
    }
    return fronts;
}

std::vector<double> crowding_distance(const Population& pop, const std::vector<std::size_t>& front) {
    const std::size_t m = front.size();
    std::vector<double> d(m, 0.0);
    if (m == 0) return d;
    std::vector<std::size_t> order(m);
    for (int obj = 0; obj < 2; ++obj) {
        auto value = [&](std::size_t k) {
            const auto& o = pop[front[k]].objectives;
            return obj == 0 ? o.p_loss : o.vd;
        };
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        const double range = value(order.back()) - value(order.front());
        if (!(range > 0.0)) continue;
        d[order.front()] = inf;
        d[order.back()] = inf;
        for (std::size_t k = 1; k + 1 < m; ++k) {
            if (std::isinf(d[order[k]])) continue;
            d[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
        }
    }
    return d;
}

void assign_rank_and_crowding(Population& pop) {
    for (const auto& front : nondominated_sort(pop)) {
        const auto d = crowding_distance(pop, front);
        for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowding = d[k];
    }
}

bool crowded_compare(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.crowding != b.crowding) return a.crowding > b.crowding;
    return ia < ib;
}

LabeledSets label_population(Population& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return crowded_compare(pop[a], a, pop[b], b); });
    const std::size_t n_plus = (pop.size() + 1) / 2;
    LabeledSets sets;
    for (std::size_t r = 0; r < order.size(); ++r) {
        auto& ind = pop[order[r]];
        ind.label = r < n_plus ? Label::plus : Label::minus;
        (r < n_plus ? sets.plus : sets.minus).push_back(ind);
    }
    return sets;
}

KnnResult knn_classify(const ControlVector& candidate, const LabeledSets& sets, std::size_t k,
                       const SearchSpace& space) {
    const std::size_t total = sets.plus.size() + sets.minus.size();
    if (total == 0) throw std::invalid_argument("knn training set is empty");
    if (k == 0 || k > total) throw std::invalid_argument("knn k out of range");
    const auto x = space.normalized(candidate);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(total);
    auto add = [&](const Population& group) {
        for (const auto& ind : group) {
            const auto y = space.normalized(ind.u);
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
            dist.emplace_back(s, dist.size());
        }
    };
    add(sets.plus);
    add(sets.minus);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    KnnResult r;
    for (std::size_t i = 0; i < k; ++i) r.vote_sum += dist[i].second < sets.plus.size() ? 1 : -1;
    r.label = r.vote_sum >= 0 ? Label::plus : Label::minus;
    return r;
}

double reflect_into(double v, double lo, double hi) {
    const double w = hi - lo;
    if (!(w > 0.0)) return lo;
    if (v >= lo && v <= hi) return v;
    double y = std::fmod(v - lo, 2.0 * w);
    if (y < 0.0) y += 2.0 * w;
    if (y > w) y = 2.0 * w - y;
    return lo + y;
}

std::vector<double> de_mutation(const Population& pop, std::size_t i, double f, const SearchSpace& space,
                                Rng& rng) {
    const std::size_t n = pop.size();
    if (n < 4) throw std::invalid_argument("de_mutation needs at least 4 individuals");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t r[3];
    for (int k = 0; k < 3; ++k) {
        std::size_t c;
        do {
            c = pick(rng);
        } while (c == i || std::find(r, r + k, c) != r + k);
        r[k] = c;
    }
    const auto x1 = space.to_real(pop[r[0]].u);
    const auto x2 = space.to_real(pop[r[1]].u);
    const auto x3 = space.to_real(pop[r[2]].u);
    std::vector<double> v(x1.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = reflect_into(x1[j] + f * (x2[j] - x3[j]), space.lower(j), space.upper(j));
    return v;
}

ControlVector de_crossover(const ControlVector& target, const std::vector<double>& donor, double cr,
                           const SearchSpace& space, Rng& rng) {
    const auto t = space.to_real(target);
    if (t.size() != donor.size()) throw std::invalid_argument("de_crossover dimension mismatch");
    const std::size_t sn = std::uniform_int_distribution<std::size_t>(0, t.size() - 1)(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> trial(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        const bool take = unit(rng) <= cr || j == sn;
        double v = take ? donor[j] : t[j];
        if (space.is_discrete(j)) {
            const double fl = std::floor(v);
            const double frac = v - fl;
            if (frac < 0.5)
                v = fl;
            else if (frac > 0.5)
                v = fl + 1.0;
            else
                v = std::abs(fl - t[j]) <= std::abs(fl + 1.0 - t[j]) ? fl : fl + 1.0;
        }
        trial[j] = std::clamp(v, space.lower(j), space.upper(j));
    }
    return space.from_real(trial);
}

Preselection preselect_offspring(std::size_t parent, const Population& pop, const LabeledSets& sets,
                                 const MoeaParams& params, const SearchSpace& space, Rng& rng) {
    Preselection best;
    bool have = false;
    for (std::size_t c = 0; c < params.n_cand; ++c) {
        const auto donor = de_mutation(pop, parent, params.f, space, rng);
        auto trial = de_crossover(pop[parent].u, donor, params.cr, space, rng);
        const auto vote = knn_classify(trial, sets, params.k, space);
        if (!have || vote.vote_sum > best.vote.vote_sum) {
            best = {std::move(trial), c, vote};
            have = true;
        }
        if (vote.label == Label::plus) return best;
    }
    return best;
}

Population environmental_selection(const Population& parents, const Population& offspring) {
    const std::size_t n = parents.size();
    Population merged = parents;
    merged.insert(merged.end(), offspring.begin(), offspring.end());
    Population next;
    next.reserve(n);
    for (const auto& front : nondominated_sort(merged)) {
        if (next.size() >= n) break;
        const auto d = crowding_distance(merged, front);
        for (std::size_t k = 0; k < front.size(); ++k) merged[front[k]].crowding = d[k];
        if (next.size() + front.size() <= n) {
            for (std::size_t idx : front) next.push_back(merged[idx]);
            continue;
        }
        std::vector<std::size_t> order(front.begin(), front.end());
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
        for (std::size_t k = 0; next.size() < n; ++k) next.push_back(merged[order[k]]);
    }
    return next;
}

void update_archive(ParetoFront& archive, const Population& pop, std::size_t cap) {
    Population cand;
    cand.reserve(archive.members.size() + pop.size());
    auto same = [](const Individual& a, const Individual& b) {
        return a.objectives == b.objectives && a.violation == b.violation;
    };
    auto push_unique = [&](const Individual& ind) {
        for (const auto& c : cand)
            if (same(c, ind)) return;
        cand.push_back(ind);
    };
    for (const auto& m : archive.members) push_unique(m);
    for (const auto& m : pop) push_unique(m);

    Population kept;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cand.size() && !dominated; ++j) dominated = j != i && dominates(cand[j], cand[i]);
        if (!dominated) {
            kept.push_back(cand[i]);
            kept.back().rank = 1;
        }
    }

    std::vector<std::size_t> all;
    while (kept.size() > cap) {
        all.resize(kept.size());
        std::iota(all.begin(), all.end(), 0);
        const auto d = crowding_distance(kept, all);
        std::size_t worst = 0;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (d[i] <= d[worst]) worst = i;
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    all.resize(kept.size());
    std::iota(all.begin(), all.end(), 0);
    const auto d = crowding_distance(kept, all);
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].crowding = d[i];
    archive.members = std::move(kept);
}

std::vector<Evaluation> evaluate_batch(const NetworkCase& c, const std::vector<ControlVector>& us, unsigned jobs) {
    std::vector<Evaluation> out(us.size());
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, us.size()));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < us.size(); ++i) out[i] = evaluate(c, us[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        try {
            for (std::size_t i; (i = next.fetch_add(1)) < us.size() && !failed;) out[i] = evaluate(c, us[i]);
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

Individual make_individual(ControlVector u, const Evaluation& e) {
    Individual ind;
    ind.u = std::move(u);
    ind.objectives = e.objectives;
    ind.violation = e.violation.total;
    return ind;
}

namespace {

Population evaluate_all(const NetworkCase& c, std::vector<ControlVector> us, unsigned jobs, GenerationStats& st) {
    const auto evals = evaluate_batch(c, us, jobs);
    Population pop;
    pop.reserve(us.size());
    double iters = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        pop.push_back(make_individual(std::move(us[i]), evals[i]));
        iters += evals[i].iterations;
        if (evals[i].violation.non_convergence) ++st.non_converged;
    }
    st.mean_pf_iterations = us.empty() ? 0.0 : iters / static_cast<double>(us.size());
    return pop;
}

void finish_stats(GenerationStats& st, const Population& pop, const ParetoFront& archive) {
    st.archive_size = archive.members.size();
    st.feasible = static_cast<std::size_t>(std::count_if(pop.begin(), pop.end(), [](const auto& i) { return i.feasible(); }));
    st.best_ploss = inf;
    st.best_vd = inf;
    for (const auto& m : archive.members) {
        st.best_ploss = std::min(st.best_ploss, m.objectives.p_loss);
        st.best_vd = std::min(st.best_vd, m.objectives.vd);
    }
    st.min_violation = inf;
    for (const auto& m : pop) st.min_violation = std::min(st.min_violation, m.violation);
}

} // namespace

RunResult run(const NetworkCase& c, const MoeaParams& params, unsigned jobs) {
    params.validate();
    const SearchSpace space(control_bounds(c));
    Rng rng(params.seed);

    RunResult res;
    res.report.params = params;

    std::vector<ControlVector> init;
    init.reserve(params.n);
    for (std::size_t i = 0; i < params.n; ++i) init.push_back(space.sample(rng));
    GenerationStats st0;
    Population pop = evaluate_all(c, std::move(init), jobs, st0);
    std::size_t evaluations = params.n;
    update_archive(res.archive, pop, params.n);
    st0.evaluations = evaluations;
    finish_stats(st0, pop, res.archive);
    res.report.trace.push_back(st0);

    std::size_t gen = 0;
    while (evaluations < params.eval_budget) {
        ++gen;
        GenerationStats st;
        st.generation = gen;
        assign_rank_and_crowding(pop);
        const LabeledSets sets = label_population(pop);
        std::vector<ControlVector> trials;
        trials.reserve(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            auto sel = preselect_offspring(i, pop, sets, params, space, rng);
            if (sel.vote.label == Label::plus) ++st.predicted_plus;
            trials.push_back(std::move(sel.trial));
        }
        Population offspring = evaluate_all(c, std::move(trials), jobs, st);
        evaluations += offspring.size();
        pop = environmental_selection(pop, offspring);
        update_archive(res.archive, offspring, params.n);
        st.evaluations = evaluations;
        finish_stats(st, pop, res.archive);
        res.report.trace.push_back(st);
    }

    std::stable_sort(res.archive.members.begin(), res.archive.members.end(), [](const auto& a, const auto& b) {
        if (a.objectives.p_loss != b.objectives.p_loss) return a.objectives.p_loss < b.objectives.p_loss;
        return a.objectives.vd < b.objectives.vd;
    });
    res.final_population = std::move(pop);
    res.report.evaluations = evaluations;
    res.report.generations = gen;
    return res;
}

} // namespace orpd
