#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orpd/network.hpp"
#include "orpd/powerflow.hpp"

namespace orpd {

using FrontPoints = std::vector<ObjectivePair>;

enum class MetricMode { raw, normalized };

struct MetricReport {
    double gd = 0.0;
    double spread = 0.0;
    double igd = 0.0;
    std::size_t approx_size = 0;
    std::size_t reference_size = 0;
    MetricMode mode = MetricMode::raw;
};

/// Mean distance from each approx point to its nearest reference point.
double gd(const FrontPoints& approx, const FrontPoints& reference);

/// Mean distance from each reference point to its nearest approx point.
double igd(const FrontPoints& approx, const FrontPoints& reference);

/// Distribution indicator. The front is sorted by Ploss (then VD); its end
/// points are compared with the reference's minimal-Ploss and minimal-VD
/// points. Throws std::invalid_argument for fewer than 2 points; returns 0
/// when the denominator vanishes.
double spread(const FrontPoints& front, const FrontPoints& reference);

/// All three indicators. Normalized mode rescales both sets by the
/// reference's per-objective range first.
MetricReport compute_metrics(const FrontPoints& approx, const FrontPoints& reference,
                             MetricMode mode = MetricMode::raw);

/// Mutually non-dominated subset, duplicates removed, sorted by Ploss then VD.
FrontPoints nondominated_filter(const FrontPoints& pts);

struct ReferenceParams {
    std::size_t n_weights = 100;
    std::size_t per_run_budget = 10000;
    std::size_t pop = 50;
    double f = 0.5;
    double cr = 0.9;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Scalarization {
    double w = 1.0; // weight on normalized loss
    double loss_offset = 0.0, loss_scale = 1.0;
    double vd_offset = 0.0, vd_scale = 1.0;

    double operator()(const ObjectivePair& o) const {
        return w * (o.p_loss - loss_offset) / loss_scale + (1.0 - w) * (o.vd - vd_offset) / vd_scale;
    }
};

struct SingleRunResult {
    ControlVector u;
    Evaluation evaluation;
    double fitness = 0.0;
    std::size_t evaluations = 0;
};

/// Single-objective DE (rand/1/bin) with greedy feasibility-first replacement.
SingleRunResult minimize_scalarized(const NetworkCase& c, const Scalarization& s, std::size_t budget,
                                    std::size_t pop, double f, double cr, std::uint64_t seed);

struct ReferenceResult {
    FrontPoints front;
    std::vector<SingleRunResult> runs; // one per weight, weights ascending
    std::vector<double> weights;
    bool raw_units = false;            // anchors unusable for normalization
    std::vector<std::string> warnings;
};

/// Weighted-sum sweep. Runs at w = 1 and w = 0 are the anchors that set the
/// normalization for the interior weights.
ReferenceResult build_reference_front(const NetworkCase& c, const ReferenceParams& params, unsigned jobs = 1);

} // namespace orpd
