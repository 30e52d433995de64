#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "orpd/powerflow.hpp"

namespace orpd {

struct FcmParams {
    std::size_t n_clusters = 2;
    double fuzziness = 2.0;
    double tolerance = 1e-6;
    std::size_t max_iter = 300;
    std::size_t restarts = 0; // extra seeded random initializations
    std::uint64_t seed = 1;

    void validate() const;
};

struct FcmResult {
    Eigen::MatrixXd membership; // points x clusters, rows sum to 1
    Eigen::MatrixXd centers;    // clusters x dims
    std::vector<double> objective_history; // J after each membership update
    std::size_t iterations = 0;
    bool converged = false;
    bool duplicate_centers = false;
};

/// Min-max per column; a zero-range column maps to zeros.
Eigen::MatrixXd normalize_objectives(const std::vector<ObjectivePair>& front);

/// Fuzzy c-means. Centers start at the per-column minimal points (then
/// farthest-point picks if there are more clusters than columns).
FcmResult fcm(const Eigen::MatrixXd& points, const FcmParams& params);

/// Objective J = sum_p sum_q eta^n ||s_p - c_q||^2.
double fcm_objective(const Eigen::MatrixXd& points, const Eigen::MatrixXd& membership,
                     const Eigen::MatrixXd& centers, double fuzziness);

/// Row argmax, ties to the lower column.
std::vector<int> assign_clusters(const Eigen::MatrixXd& membership);

/// Relabels so cluster 0 has the lowest mean of column 0 (normalized Ploss),
/// and so on. Empty clusters sort last. Returns the permutation old -> new.
std::vector<int> canonical_cluster_order(std::vector<int>& labels, const Eigen::MatrixXd& normalized,
                                         std::size_t n_clusters);

enum class GreyReference { ideal, negative };

Eigen::MatrixXd grey_relational_coefficients(const Eigen::MatrixXd& normalized, GreyReference ref,
                                             double rho = 0.5);

/// pr_l = sum_k gr_lk w_k^2 / sqrt(sum_k w_k^2).
Eigen::VectorXd grp_projection(const Eigen::MatrixXd& gr, const std::vector<double>& weights);

Eigen::VectorXd priority_membership(const Eigen::VectorXd& pr_plus, const Eigen::VectorXd& pr_minus);

struct GrpScores {
    Eigen::MatrixXd normalized;
    Eigen::MatrixXd gr_plus, gr_minus;
    Eigen::VectorXd pr_plus, pr_minus, priority;
};

GrpScores grp_scores(const std::vector<ObjectivePair>& front, const std::vector<double>& weights, double rho);

/// Per cluster, the member with the highest priority (ties: lower Ploss,
/// then lower index). Returns -1 for an empty cluster.
std::vector<long> select_bcs(const std::vector<ObjectivePair>& front, const std::vector<int>& labels,
                             const Eigen::VectorXd& priority, std::size_t n_clusters);

struct DecisionParams {
    FcmParams fcm;
    std::vector<double> weights{0.5, 0.5};
    double rho = 0.5;
};

struct BcsReport {
    Eigen::MatrixXd normalized;
    FcmResult clustering;
    std::vector<int> cluster;          // canonical labels
    GrpScores whole;                   // whole-front GRP
    Eigen::VectorXd cluster_priority;  // p_l recomputed within each cluster
    std::vector<std::size_t> bcs;      // front index per cluster (one entry in single mode)
    std::vector<int> bcs_cluster;      // cluster of each BCS entry
    bool single_bcs = false;
    std::vector<std::string> warnings;
};

/// Clustering plus per-cluster GRP. Falls back to a single whole-front BCS
/// when the front is too small or a cluster comes out empty.
BcsReport analyze(const std::vector<ObjectivePair>& front, const DecisionParams& params);

} // namespace orpd
