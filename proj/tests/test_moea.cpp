#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "orpd/moea.hpp"

using namespace orpd;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Individual pt(double f1, double f2, double viol = 0.0) {
    Individual i;
    i.objectives = {f1, f2};
    i.violation = viol;
    return i;
}

std::vector<oracle::Pt> as_oracle(const Population& p) {
    std::vector<oracle::Pt> out;
    for (const auto& i : p) out.push_back({i.objectives.p_loss, i.objectives.vd, i.violation});
    return out;
}

// One continuous dimension on [0,1], a 0..20 tap and a 0..10 bank count.
SearchSpace small_space() {
    ControlBounds b;
    b.v_lower = {0.0};
    b.v_upper = {1.0};
    b.tap_max = {20};
    b.shunt_max = {10};
    return SearchSpace(b);
}

Individual at(double v, int tap, int banks) {
    Individual i;
    i.u.gen_v = {v};
    i.u.tap_steps = {tap};
    i.u.shunt_banks = {banks};
    return i;
}

Population random_population(std::mt19937_64& rng, std::size_t n, bool with_infeasible, bool with_duplicates) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Population p;
    for (std::size_t i = 0; i < n; ++i) {
        if (with_duplicates && i > 0 && u(rng) < 0.2) {
            p.push_back(p[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
            continue;
        }
        // coarse grid so equal coordinates occur
        const double a = std::round(u(rng) * 20) / 20, b = std::round(u(rng) * 20) / 20;
        const double v = with_infeasible && u(rng) < 0.25 ? std::round(u(rng) * 5) / 5 + 0.1 : 0.0;
        p.push_back(pt(a, b, v));
    }
    return p;
}

bool same_objectives(const Population& a, const Population& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].objectives == b[i].objectives) || a[i].violation != b[i].violation || !(a[i].u == b[i].u))
            return false;
    return true;
}

} // namespace

TEST_SUITE("moea") {

TEST_CASE("constraint domination") {
    CHECK(dominates(pt(16.17, 3.93), pt(17.46, 6.38)));
    CHECK_FALSE(dominates(pt(17.46, 6.38), pt(16.17, 3.93)));
    CHECK_FALSE(dominates(pt(1, 1), pt(1, 1)));
    CHECK(dominates(pt(100, 100), pt(0, 0, 0.2)));
    CHECK(dominates(pt(5, 5, 0.1), pt(0, 0, 0.2)));
    CHECK_FALSE(dominates(pt(0, 0, 0.2), pt(5, 5, 0.2)));
    CHECK_FALSE(dominates(pt(0, 2), pt(1, 1)));
    CHECK(dominates(pt(1, 1), pt(1, 2)));
}

TEST_CASE("non-dominated sort on simple shapes") {
    Population mutual{pt(0, 3), pt(1, 2), pt(2, 1), pt(3, 0)};
    const auto f = nondominated_sort(mutual);
    CHECK(f.size() == 1);
    for (const auto& i : mutual) CHECK(i.rank == 1);

    Population chain{pt(3, 3), pt(1, 1), pt(2, 2)};
    nondominated_sort(chain);
    CHECK(chain[0].rank == 3);
    CHECK(chain[1].rank == 1);
    CHECK(chain[2].rank == 2);

    Population empty;
    CHECK(nondominated_sort(empty).empty());
}

TEST_CASE("non-dominated sort agrees with the peeling oracle") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 60; ++t) {
        auto p = random_population(rng, 1 + static_cast<std::size_t>(t) * 3, t % 2 == 0, t % 3 == 0);
        const auto fronts = nondominated_sort(p);
        const auto expect = oracle::ranks(as_oracle(p));
        std::size_t covered = 0;
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            covered += fronts[r].size();
            for (auto i : fronts[r]) CHECK(p[i].rank == static_cast<int>(r) + 1);
        }
        CHECK(covered == p.size());
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i].rank == expect[i]);
    }
}

TEST_CASE("crowding distance") {
    Population two{pt(0, 1), pt(1, 0)};
    auto d = crowding_distance(two, {0, 1});
    CHECK(std::isinf(d[0]));
    CHECK(std::isinf(d[1]));

    Population three{pt(0, 1), pt(0.5, 0.5), pt(1, 0)};
    d = crowding_distance(three, {0, 1, 2});
    CHECK(d[1] == doctest::Approx(2.0));
    CHECK(std::isinf(d[0]));
    CHECK(std::isinf(d[2]));

    Population dup{pt(1, 1), pt(1, 1), pt(1, 1)};
    d = crowding_distance(dup, {0, 1, 2});
    for (double x : d) CHECK(x == 0.0);

    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        auto p = random_population(rng, 2 + static_cast<std::size_t>(t), false, true);
        std::vector<std::size_t> all(p.size());
        std::iota(all.begin(), all.end(), 0);
        const auto got = crowding_distance(p, all);
        const auto want = oracle::crowding(as_oracle(p));
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (std::isinf(want[i]))
                CHECK(std::isinf(got[i]));
            else
                CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("crowded comparison") {
    auto a = pt(0, 0), b = pt(0, 0);
    a.rank = 1;
    b.rank = 2;
    CHECK(crowded_compare(a, 5, b, 0));
    CHECK_FALSE(crowded_compare(b, 0, a, 5));
    b.rank = 1;
    a.crowding = inf;
    b.crowding = 0.3;
    CHECK(crowded_compare(a, 1, b, 0));
    a.crowding = b.crowding = 0.3;
    CHECK(crowded_compare(a, 0, b, 1));
    CHECK_FALSE(crowded_compare(a, 1, b, 0));
}

TEST_CASE("labeling splits the population in half") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {100, 5, 1, 2}) {
        auto p = random_population(rng, n, true, false);
        assign_rank_and_crowding(p);
        const auto s = label_population(p);
        CHECK(s.plus.size() == (n + 1) / 2);
        CHECK(s.minus.size() == n / 2);
        std::vector<std::size_t> plus_idx, minus_idx;
        for (std::size_t i = 0; i < n; ++i) (p[i].label == Label::plus ? plus_idx : minus_idx).push_back(i);
        CHECK(plus_idx.size() == s.plus.size());
        for (auto i : plus_idx)
            for (auto j : minus_idx) CHECK(crowded_compare(p[i], i, p[j], j));
    }
    Population same(6, pt(1, 1));
    assign_rank_and_crowding(same);
    label_population(same);
    for (std::size_t i = 0; i < 6; ++i) CHECK((same[i].label == Label::plus) == (i < 3));
}

TEST_CASE("knn classification") {
    const auto space = small_space();
    LabeledSets s;
    s.plus = {at(0.1, 2, 1), at(0.9, 18, 9)};
    s.minus = {at(0.5, 10, 5), at(0.55, 11, 5)};
    CHECK(knn_classify(at(0.1, 2, 1).u, s, 1, space).label == Label::plus);
    // nearest three to the middle: two minus, then a plus
    auto r = knn_classify(at(0.5, 10, 5).u, s, 3, space);
    CHECK(r.vote_sum == -1);
    CHECK(r.label == Label::minus);
    // k = 2 with one of each: sum 0 counts as promising
    LabeledSets tie;
    tie.plus = {at(0.0, 0, 0)};
    tie.minus = {at(1.0, 20, 10)};
    r = knn_classify(at(0.5, 10, 5).u, tie, 2, space);
    CHECK(r.vote_sum == 0);
    CHECK(r.label == Label::plus);
    CHECK_THROWS(knn_classify(at(0.5, 10, 5).u, tie, 3, space));
}

TEST_CASE("knn agrees with a full sort") {
    const auto space = small_space();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        LabeledSets s;
        std::vector<std::pair<double, int>> all;
        auto rnd = [&] { return at(u(rng), static_cast<int>(u(rng) * 20), static_cast<int>(u(rng) * 10)); };
        for (int i = 0; i < 10; ++i) s.plus.push_back(rnd());
        for (int i = 0; i < 10; ++i) s.minus.push_back(rnd());
        const auto cand = rnd();
        auto nd = [&](const Individual& x) {
            const double a = cand.u.gen_v[0] - x.u.gen_v[0];
            const double b = (cand.u.tap_steps[0] - x.u.tap_steps[0]) / 20.0;
            const double c = (cand.u.shunt_banks[0] - x.u.shunt_banks[0]) / 10.0;
            return a * a + b * b + c * c;
        };
        for (const auto& x : s.plus) all.push_back({nd(x), 1});
        for (const auto& x : s.minus) all.push_back({nd(x), -1});
        std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; });
        for (std::size_t k : {1, 3, 5, 7}) {
            int sum = 0;
            for (std::size_t i = 0; i < k; ++i) sum += all[i].second;
            CHECK(knn_classify(cand.u, s, k, space).vote_sum == sum);
        }
    }
}

TEST_CASE("reflection into bounds") {
    CHECK(reflect_into(1.2, 0, 1) == doctest::Approx(0.8));
    CHECK(reflect_into(-0.3, 0, 1) == doctest::Approx(0.3));
    CHECK(reflect_into(2.5, 0, 1) == doctest::Approx(0.5));
    CHECK(reflect_into(0.4, 0, 1) == 0.4);
    CHECK(reflect_into(7.0, 3, 3) == 3.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int t = 0; t < 200; ++t) {
        const double v = u(rng);
        CHECK(reflect_into(v, 0.9, 1.1) == doctest::Approx(oracle::reflect(v, 0.9, 1.1)).epsilon(1e-9));
        CHECK(reflect_into(v, 0, 20) == doctest::Approx(oracle::reflect(v, 0, 20)).epsilon(1e-9));
    }
}

TEST_CASE("differential mutation") {
    const auto space = small_space();
    Rng rng(5);
    SUBCASE("zero factor copies a partner") {
        Population p{at(0.1, 1, 1), at(0.2, 2, 2), at(0.3, 3, 3), at(0.4, 4, 4), at(0.5, 5, 5)};
        for (int t = 0; t < 20; ++t) {
            const auto d = de_mutation(p, 0, 0.0, space, rng);
            bool found = false;
            for (std::size_t j = 1; j < p.size(); ++j) found = found || d == space.to_real(p[j].u);
            CHECK(found);
        }
    }
    SUBCASE("identical partners give the base vector") {
        Population p(5, at(0.3, 7, 2));
        p[0] = at(0.9, 1, 1);
        for (double f : {0.1, 0.5, 1.0}) CHECK(de_mutation(p, 0, f, space, rng) == space.to_real(p[1].u));
    }
    SUBCASE("difference vector arithmetic") {
        Population p{at(0.0, 0, 0), at(0.5, 10, 5), at(0.8, 10, 5), at(0.2, 10, 5)};
        std::set<double> seen;
        for (int t = 0; t < 60; ++t) {
            const auto d = de_mutation(p, 0, 0.5, space, rng);
            seen.insert(std::round(d[0] * 1e12) / 1e12);
        }
        // all orderings of {0.5, 0.8, 0.2} as (base, plus, minus)
        const std::set<double> expect{0.8, 0.2, 0.95, 0.65, 0.05, 0.35};
        for (double s : seen) CHECK(expect.count(s) == 1);
        CHECK(seen.count(0.8) == 1);
    }
    Population three(3, at(0.5, 5, 5));
    CHECK_THROWS(de_mutation(three, 0, 0.5, space, rng));
}

TEST_CASE("binomial crossover with discrete repair") {
    const auto space = small_space();
    Rng rng(8);
    const auto target = at(0.2, 4, 3).u;
    SUBCASE("cr = 1 takes the rounded donor") {
        const auto t = de_crossover(target, {0.7, 10.4, 6.6}, 1.0, space, rng);
        CHECK(t.gen_v[0] == 0.7);
        CHECK(t.tap_steps[0] == 10);
        CHECK(t.shunt_banks[0] == 7);
    }
    SUBCASE("cr = 0 changes exactly one coordinate") {
        for (int k = 0; k < 30; ++k) {
            const auto t = space.to_real(de_crossover(target, {0.7, 10.0, 6.0}, 0.0, space, rng));
            const auto base = space.to_real(target);
            int diff = 0;
            for (std::size_t j = 0; j < t.size(); ++j) diff += t[j] != base[j];
            CHECK(diff == 1);
        }
    }
    SUBCASE("halves round toward the target") {
        auto t = de_crossover(at(0.2, 11, 2).u, {0.5, 10.5, 2.5}, 1.0, space, rng);
        CHECK(t.tap_steps[0] == 11);
        CHECK(t.shunt_banks[0] == 2);
        t = de_crossover(at(0.2, 10, 3).u, {0.5, 10.5, 2.5}, 1.0, space, rng);
        CHECK(t.tap_steps[0] == 10);
        CHECK(t.shunt_banks[0] == 3);
    }
    SUBCASE("results stay inside bounds") {
        const auto t = de_crossover(target, {1.0, 20.0, 10.0}, 1.0, space, rng);
        CHECK(t.tap_steps[0] == 20);
        CHECK(t.shunt_banks[0] == 10);
    }
}

TEST_CASE("pre-selection picks the first promising candidate") {
    const auto space = small_space();
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Population p;
    for (int i = 0; i < 12; ++i) p.push_back(at(u(gen), static_cast<int>(u(gen) * 20), static_cast<int>(u(gen) * 10)));
    LabeledSets s;
    for (int i = 0; i < 12; ++i) (i % 2 ? s.minus : s.plus).push_back(p[static_cast<std::size_t>(i)]);
    MoeaParams mp;
    mp.n = 12;
    mp.k = 3;
    for (std::size_t ncand : {1, 2, 3, 5}) {
        mp.n_cand = ncand;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng a(seed), b(seed);
            const auto got = preselect_offspring(4, p, s, mp, space, a);
            // replay the same draws by hand
            std::vector<ControlVector> cands;
            std::vector<KnnResult> votes;
            for (std::size_t c = 0; c < ncand; ++c) {
                auto donor = de_mutation(p, 4, mp.f, space, b);
                cands.push_back(de_crossover(p[4].u, donor, mp.cr, space, b));
                votes.push_back(knn_classify(cands.back(), s, mp.k, space));
                if (votes.back().label == Label::plus) break;
            }
            std::size_t want = 0;
            if (votes.back().label == Label::plus) {
                want = votes.size() - 1;
            } else {
                for (std::size_t c = 1; c < votes.size(); ++c)
                    if (votes[c].vote_sum > votes[want].vote_sum) want = c;
            }
            CHECK(got.candidate == want);
            CHECK(got.trial == cands[want]);
            if (ncand == 1) CHECK(got.candidate == 0);
        }
    }
    SUBCASE("no promising candidate: largest vote sum, earliest on ties") {
        LabeledSets all_minus;
        all_minus.minus = p;
        mp.n_cand = 3;
        Rng a(1);
        const auto got = preselect_offspring(0, p, all_minus, mp, space, a);
        CHECK(got.candidate == 0);
        CHECK(got.vote.vote_sum == -3);
    }
}

TEST_CASE("environmental selection") {
    SUBCASE("dominated offspring leave the parents unchanged") {
        Population parents{pt(0, 3), pt(1, 2), pt(2, 1), pt(3, 0)};
        Population offspring{pt(4, 4), pt(5, 5), pt(6, 6), pt(7, 7)};
        const auto next = environmental_selection(parents, offspring);
        REQUIRE(next.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(next[i].objectives == parents[i].objectives);
    }
    SUBCASE("rank-one set of exactly N") {
        Population parents{pt(0, 3), pt(1, 2), pt(5, 5), pt(6, 6)};
        Population offspring{pt(2, 1), pt(3, 0), pt(7, 7), pt(8, 8)};
        const auto next = environmental_selection(parents, offspring);
        std::set<std::pair<double, double>> got;
        for (const auto& i : next) got.insert({i.objectives.p_loss, i.objectives.vd});
        CHECK(got == std::set<std::pair<double, double>>{{0, 3}, {1, 2}, {2, 1}, {3, 0}});
    }
    SUBCASE("overfull first front drops the most crowded") {
        std::mt19937_64 rng(12);
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 8;
            // n + 2 points on a convex curve plus n - 2 dominated points
            std::vector<double> xs;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::set<double> uniq;
            while (uniq.size() < n + 2) uniq.insert(std::round(u(rng) * 1000) / 1000);
            xs.assign(uniq.begin(), uniq.end());
            Population merged;
            for (double x : xs) merged.push_back(pt(x, (1 - x) * (1 - x)));
            for (std::size_t k = 0; k < n - 2; ++k) merged.push_back(pt(2 + static_cast<double>(k), 2));
            std::shuffle(merged.begin(), merged.end(), rng);
            Population parents(merged.begin(), merged.begin() + n), offspring(merged.begin() + n, merged.end());
            const auto next = environmental_selection(parents, offspring);
            REQUIRE(next.size() == n);
            // oracle: crowding over the rank-one set, drop the two smallest
            std::vector<oracle::Pt> front;
            for (double x : xs) front.push_back({x, (1 - x) * (1 - x), 0});
            auto cd = oracle::crowding(front);
            std::vector<std::size_t> order(cd.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cd[a] < cd[b]; });
            std::set<double> dropped{xs[order[0]], xs[order[1]]};
            if (cd[order[1]] == cd[order[2]]) continue; // tie: order-dependent choice
            for (const auto& i : next) {
                CHECK(i.rank == 1);
                CHECK(dropped.count(i.objectives.p_loss) == 0);
            }
        }
    }
}

TEST_CASE("archive update") {
    SUBCASE("dominated insert leaves the archive unchanged") {
        ParetoFront a;
        update_archive(a, {pt(0, 2), pt(2, 0)}, 10);
        update_archive(a, {pt(3, 3)}, 10);
        CHECK(a.members.size() == 2);
    }
    SUBCASE("dominating insert replaces everything") {
        ParetoFront a;
        update_archive(a, {pt(1, 3), pt(2, 2), pt(3, 1)}, 10);
        update_archive(a, {pt(0, 0)}, 10);
        REQUIRE(a.members.size() == 1);
        CHECK(a.members[0].objectives == ObjectivePair{0, 0});
    }
    SUBCASE("duplicates are stored once") {
        ParetoFront a;
        update_archive(a, {pt(1, 1), pt(1, 1)}, 10);
        update_archive(a, {pt(1, 1)}, 10);
        CHECK(a.members.size() == 1);
    }
    SUBCASE("feasible members push out infeasible ones") {
        ParetoFront a;
        update_archive(a, {pt(0, 0, 0.5), pt(1, 1, 0.2)}, 10);
        REQUIRE(a.members.size() == 1);
        CHECK(a.members[0].violation == 0.2);
        update_archive(a, {pt(9, 9)}, 10);
        REQUIRE(a.members.size() == 1);
        CHECK(a.members[0].feasible());
    }
    SUBCASE("truncation keeps extremes and stays non-dominated") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Population batch;
        for (int i = 0; i < 150; ++i) {
            const double x = u(rng);
            batch.push_back(pt(x, 1 - x));
        }
        double lo = 2, hi = -1;
        for (const auto& b : batch) {
            lo = std::min(lo, b.objectives.p_loss);
            hi = std::max(hi, b.objectives.p_loss);
        }
        ParetoFront a;
        update_archive(a, Population(batch.begin(), batch.begin() + 70), 100);
        update_archive(a, Population(batch.begin() + 70, batch.end()), 100);
        CHECK(a.members.size() == 100);
        bool has_lo = false, has_hi = false;
        for (const auto& m : a.members) {
            has_lo = has_lo || m.objectives.p_loss == lo;
            has_hi = has_hi || m.objectives.p_loss == hi;
        }
        CHECK(has_lo);
        CHECK(has_hi);
        for (const auto& x : a.members)
            for (const auto& y : a.members) CHECK_FALSE(dominates(x, y));
    }
}

TEST_CASE("parameter validation") {
    MoeaParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = [&](auto mutate) {
        MoeaParams q;
        mutate(q);
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    };
    bad([](MoeaParams& q) { q.n = 3; });
    bad([](MoeaParams& q) { q.f = 0.0; });
    bad([](MoeaParams& q) { q.f = 1.5; });
    bad([](MoeaParams& q) { q.cr = -0.1; });
    bad([](MoeaParams& q) { q.k = 4; });
    bad([](MoeaParams& q) { q.k = 101; });
    bad([](MoeaParams& q) { q.n_cand = 0; });
}

TEST_CASE("search space conversion") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    const SearchSpace s(control_bounds(c));
    CHECK(s.dimension() == 13);
    CHECK(s.continuous_dims() == 6);
    CHECK_FALSE(s.is_discrete(5));
    CHECK(s.is_discrete(6));
    const auto u = current_controls(c);
    CHECK(s.from_real(s.to_real(u)) == u);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) CHECK_NOTHROW(check_controls(control_bounds(c), s.sample(rng)));
    for (double x : s.normalized(u)) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("run with a budget of one population returns the initial non-dominated set") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    MoeaParams p;
    p.n = 20;
    p.eval_budget = 20;
    p.seed = 4;
    const auto r = run(c, p);
    CHECK(r.report.generations == 0);
    CHECK(r.report.evaluations == 20);
    Population init = r.final_population;
    REQUIRE(init.size() == 20);
    ParetoFront expect;
    update_archive(expect, init, 20);
    CHECK(expect.members.size() == r.archive.members.size());
    for (const auto& m : r.archive.members) {
        bool found = false;
        for (const auto& e : expect.members) found = found || (e.objectives == m.objectives && e.u == m.u);
        CHECK(found);
    }
}

TEST_CASE("short runs are reproducible and well formed") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    MoeaParams p;
    p.n = 20;
    p.eval_budget = 400;
    p.seed = 9;
    const auto a = run(c, p, 1);
    const auto b = run(c, p, 1);
    const auto j = run(c, p, 3);
    CHECK(same_objectives(a.archive.members, b.archive.members));
    CHECK(same_objectives(a.archive.members, j.archive.members));
    CHECK(same_objectives(a.final_population, j.final_population));
    CHECK(a.report.evaluations >= p.eval_budget);
    CHECK(a.report.evaluations < p.eval_budget + p.n);
    CHECK(a.report.trace.size() == a.report.generations + 1);
    CHECK(a.archive.members.size() <= p.n);
    for (const auto& x : a.archive.members)
        for (const auto& y : a.archive.members) CHECK_FALSE(dominates(x, y));
    for (std::size_t i = 1; i < a.archive.members.size(); ++i)
        CHECK(a.archive.members[i - 1].objectives.p_loss <= a.archive.members[i].objectives.p_loss);
    // objectives match a fresh evaluation of the stored controls
    for (const auto& m : a.archive.members) {
        const auto e = evaluate(c, m.u);
        CHECK(e.objectives == m.objectives);
        CHECK(e.violation.total == m.violation);
    }
    p.seed = 10;
    const auto other = run(c, p, 1);
    CHECK_FALSE(same_objectives(a.archive.members, other.archive.members));
}

TEST_CASE("archive never loses ground between generations") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    MoeaParams p;
    p.n = 16;
    p.eval_budget = 16 * 15;
    p.seed = 2;
    const auto r = run(c, p);
    // best values per objective are monotone across the trace
    for (std::size_t g = 1; g < r.report.trace.size(); ++g) {
        const auto& prev = r.report.trace[g - 1];
        const auto& cur = r.report.trace[g];
        if (std::isfinite(prev.best_ploss) && prev.archive_size > 0 && cur.feasible > 0) {
            CHECK(cur.best_ploss <= prev.best_ploss);
            CHECK(cur.best_vd <= prev.best_vd);
        }
    }
}

}
