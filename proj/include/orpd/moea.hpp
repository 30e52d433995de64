#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "orpd/network.hpp"
#include "orpd/powerflow.hpp"

namespace orpd {

using Rng = std::mt19937_64;

enum class Label : int { minus = -1, unset = 0, plus = 1 };

struct Individual {
    ControlVector u;
    ObjectivePair objectives;
    double violation = 0.0;
    int rank = 0;          // 1 = non-dominated
    double crowding = 0.0; // +inf at front boundaries
    Label label = Label::unset;

    bool feasible() const { return violation == 0.0; }
};

using Population = std::vector<Individual>;

struct LabeledSets {
    Population plus;
    Population minus;
};

/// Maps control vectors to a flat real vector (setpoints, tap positions,
/// bank counts) and back. Discrete coordinates are integers in [0, max].
class SearchSpace {
public:
    explicit SearchSpace(ControlBounds bounds);

    const ControlBounds& bounds() const { return bounds_; }
    std::size_t dimension() const { return lower_.size(); }
    std::size_t continuous_dims() const { return bounds_.v_lower.size(); }
    bool is_discrete(std::size_t j) const { return j >= continuous_dims(); }
    double lower(std::size_t j) const { return lower_[j]; }
    double upper(std::size_t j) const { return upper_[j]; }

    std::vector<double> to_real(const ControlVector& u) const;
    /// Discrete coordinates must already be integral; they are clamped.
    ControlVector from_real(const std::vector<double>& x) const;
    /// Coordinates scaled to [0,1] by bounds (0 for a degenerate range).
    std::vector<double> normalized(const ControlVector& u) const;
    ControlVector sample(Rng& rng) const;

private:
    ControlBounds bounds_;
    std::vector<double> lower_, upper_;
};

struct MoeaParams {
    std::size_t n = 100;
    std::size_t eval_budget = 10000;
    double f = 0.5;
    double cr = 1.0;
    std::size_t k = 5;
    std::size_t n_cand = 3;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct ParetoFront {
    Population members;
};

struct GenerationStats {
    std::size_t generation = 0;
    std::size_t evaluations = 0;
    std::size_t archive_size = 0;
    std::size_t feasible = 0;        // in the current population
    double best_ploss = 0.0;         // archive minimum
    double best_vd = 0.0;
    double min_violation = 0.0;      // population minimum
    std::size_t non_converged = 0;   // power flows in this generation's batch
    double mean_pf_iterations = 0.0;
    std::size_t predicted_plus = 0;  // offspring classified +1
};

struct RunReport {
    MoeaParams params;
    std::size_t evaluations = 0;
    std::size_t generations = 0;
    std::vector<GenerationStats> trace;
};

struct RunResult {
    ParetoFront archive;        // sorted by Ploss, then VD
    Population final_population;
    RunReport report;
};

/// Constraint-domination.
bool dominates(const Individual& a, const Individual& b);

/// Fast non-dominated sort. Sets rank on every member and returns the fronts
/// (indices, ascending within each front).
std::vector<std::vector<std::size_t>> nondominated_sort(Population& pop);

/// Crowding distance of the members listed in front. An objective with zero
/// range contributes nothing, so an all-duplicate front is all zeros.
std::vector<double> crowding_distance(const Population& pop, const std::vector<std::size_t>& front);

/// Sorts, then stores rank and crowding on each member.
void assign_rank_and_crowding(Population& pop);

/// Strict ordering: lower rank, then larger crowding, then lower index.
bool crowded_compare(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib);

/// Best ceil(N/2) by crowded_compare get +1. Writes labels into pop.
LabeledSets label_population(Population& pop);

struct KnnResult {
    Label label = Label::minus;
    int vote_sum = 0;
};

KnnResult knn_classify(const ControlVector& candidate, const LabeledSets& sets, std::size_t k,
                       const SearchSpace& space);

/// Reflects v into [lo, hi].
double reflect_into(double v, double lo, double hi);

/// x_r1 + f (x_r2 - x_r3) in the real space, reflected into bounds.
std::vector<double> de_mutation(const Population& pop, std::size_t i, double f, const SearchSpace& space,
                                Rng& rng);

/// Binomial crossover with one forced index, then discrete rounding (ties
/// toward the target) and clamping.
ControlVector de_crossover(const ControlVector& target, const std::vector<double>& donor, double cr,
                           const SearchSpace& space, Rng& rng);

struct Preselection {
    ControlVector trial;
    std::size_t candidate = 0;
    KnnResult vote;
};

Preselection preselect_offspring(std::size_t parent, const Population& pop, const LabeledSets& sets,
                                 const MoeaParams& params, const SearchSpace& space, Rng& rng);

/// Merges parents then offspring and keeps N by rank and crowding.
Population environmental_selection(const Population& parents, const Population& offspring);

/// Adds pop to the archive, keeps the non-dominated set without duplicate
/// objective points, and truncates to cap by repeatedly dropping the most
/// crowded member.
void update_archive(ParetoFront& archive, const Population& pop, std::size_t cap);

/// Evaluates every vector, using up to jobs threads. Results are in input order.
std::vector<Evaluation> evaluate_batch(const NetworkCase& c, const std::vector<ControlVector>& us,
                                       unsigned jobs);

Individual make_individual(ControlVector u, const Evaluation& e);

RunResult run(const NetworkCase& c, const MoeaParams& params, unsigned jobs = 1);

} // namespace orpd
