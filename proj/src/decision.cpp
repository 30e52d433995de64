#include "orpd/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace orpd {

void FcmParams::validate() const {
    if (n_clusters < 2) throw std::invalid_argument("number of clusters must be at least 2");
    if (!(fuzziness > 1.0)) throw std::invalid_argument("fuzziness must exceed 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("fcm tolerance must be positive");
    if (max_iter == 0) throw std::invalid_argument("fcm max_iter must be positive");
}

Eigen::MatrixXd normalize_objectives(const std::vector<ObjectivePair>& front) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(front.size()), 2);
    for (std::size_t i = 0; i < front.size(); ++i) {
        m(static_cast<Eigen::Index>(i), 0) = front[i].p_loss;
        m(static_cast<Eigen::Index>(i), 1) = front[i].vd;
    }
    if (front.empty()) return m;
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        const double lo = m.col(k).minCoeff();
        const double range = m.col(k).maxCoeff() - lo;
        if (range > 0.0)
            m.col(k) = (m.col(k).array() - lo) / range;
        else
            m.col(k).setZero();
    }
    return m;
}

namespace {

Eigen::MatrixXd memberships(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& centers, double fuzz) {
    const Eigen::Index np = pts.rows(), nc = centers.rows();
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(np, nc);
    const double e = 2.0 / (fuzz - 1.0);
    Eigen::VectorXd d(nc);
    for (Eigen::Index p = 0; p < np; ++p) {
        int zeros = 0;
        for (Eigen::Index q = 0; q < nc; ++q) {
            d[q] = (pts.row(p) - centers.row(q)).norm();
            if (d[q] == 0.0) ++zeros;
        }
        if (zeros > 0) {
            for (Eigen::Index q = 0; q < nc; ++q) u(p, q) = d[q] == 0.0 ? 1.0 / zeros : 0.0;
            continue;
        }
        for (Eigen::Index q = 0; q < nc; ++q) {
            double s = 0.0;
            for (Eigen::Index r = 0; r < nc; ++r) s += std::pow(d[q] / d[r], e);
            u(p, q) = 1.0 / s;
        }
        u.row(p) /= u.row(p).sum();
    }
    return u;
}

Eigen::MatrixXd update_centers(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& u, const Eigen::MatrixXd& old,
                               double fuzz) {
    Eigen::MatrixXd c = old;
    for (Eigen::Index q = 0; q < u.cols(); ++q) {
        const Eigen::VectorXd w = u.col(q).array().pow(fuzz);
        const double s = w.sum();
        if (s > 0.0) c.row(q) = (w.transpose() * pts) / s;
    }
    return c;
}

FcmResult fcm_from(const Eigen::MatrixXd& pts, Eigen::MatrixXd centers, const FcmParams& params) {
    FcmResult r;
    Eigen::MatrixXd u = memberships(pts, centers, params.fuzziness);
    r.objective_history.push_back(fcm_objective(pts, u, centers, params.fuzziness));
    for (std::size_t it = 1; it <= params.max_iter; ++it) {
        const Eigen::MatrixXd next = update_centers(pts, u, centers, params.fuzziness);
        double move = 0.0;
        for (Eigen::Index q = 0; q < next.rows(); ++q) move = std::max(move, (next.row(q) - centers.row(q)).norm());
        centers = next;
        u = memberships(pts, centers, params.fuzziness);
        r.objective_history.push_back(fcm_objective(pts, u, centers, params.fuzziness));
        r.iterations = it;
        if (move <= params.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.membership = std::move(u);
    r.centers = std::move(centers);
    return r;
}

Eigen::MatrixXd initial_centers(const Eigen::MatrixXd& pts, std::size_t nc) {
    const Eigen::Index np = pts.rows();
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index k = 0; k < pts.cols() && chosen.size() < nc; ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index p = 1; p < np; ++p)
            if (pts(p, k) < pts(best, k)) best = p;
        const bool taken = std::any_of(chosen.begin(), chosen.end(),
                                       [&](Eigen::Index c) { return pts.row(c) == pts.row(best); });
        if (!taken) chosen.push_back(best);
    }
    while (chosen.size() < nc) {
        Eigen::Index best = 0;
        double best_d = -1.0;
        for (Eigen::Index p = 0; p < np; ++p) {
            double dmin = std::numeric_limits<double>::infinity();
            for (auto c : chosen) dmin = std::min(dmin, (pts.row(p) - pts.row(c)).norm());
            if (dmin > best_d) {
                best_d = dmin;
                best = p;
            }
        }
        chosen.push_back(best);
    }
    Eigen::MatrixXd c(static_cast<Eigen::Index>(nc), pts.cols());
    for (std::size_t q = 0; q < nc; ++q) c.row(static_cast<Eigen::Index>(q)) = pts.row(chosen[q]);
    return c;
}

std::size_t distinct_rows(const Eigen::MatrixXd& pts) {
    std::set<std::vector<double>> s;
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
        std::vector<double> v(static_cast<std::size_t>(pts.cols()));
        for (Eigen::Index k = 0; k < pts.cols(); ++k) v[static_cast<std::size_t>(k)] = pts(p, k);
        s.insert(std::move(v));
    }
    return s.size();
}

} // namespace

double fcm_objective(const Eigen::MatrixXd& points, const Eigen::MatrixXd& membership,
                     const Eigen::MatrixXd& centers, double fuzziness) {
    double j = 0.0;
    for (Eigen::Index p = 0; p < points.rows(); ++p)
        for (Eigen::Index q = 0; q < centers.rows(); ++q)
            j += std::pow(membership(p, q), fuzziness) * (points.row(p) - centers.row(q)).squaredNorm();
    return j;
}

FcmResult fcm(const Eigen::MatrixXd& points, const FcmParams& params) {
    params.validate();
    if (static_cast<std::size_t>(points.rows()) < params.n_clusters)
        throw std::invalid_argument("fcm needs at least as many points as clusters");
    FcmResult best = fcm_from(points, initial_centers(points, params.n_clusters), params);
    if (params.restarts > 0) {
        std::mt19937_64 rng(params.seed);
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(points.rows()));
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t r = 0; r < params.restarts; ++r) {
            std::shuffle(idx.begin(), idx.end(), rng);
            Eigen::MatrixXd c(static_cast<Eigen::Index>(params.n_clusters), points.cols());
            for (std::size_t q = 0; q < params.n_clusters; ++q) c.row(static_cast<Eigen::Index>(q)) = points.row(idx[q]);
            FcmResult cand = fcm_from(points, c, params);
            if (cand.objective_history.back() < best.objective_history.back()) best = std::move(cand);
        }
    }
    best.duplicate_centers = distinct_rows(points) < params.n_clusters;
    for (Eigen::Index a = 0; a < best.centers.rows(); ++a)
        for (Eigen::Index b = a + 1; b < best.centers.rows(); ++b)
            if (best.centers.row(a) == best.centers.row(b)) best.duplicate_centers = true;
    return best;
}

std::vector<int> assign_clusters(const Eigen::MatrixXd& membership) {
    std::vector<int> labels(static_cast<std::size_t>(membership.rows()));
    for (Eigen::Index p = 0; p < membership.rows(); ++p) {
        Eigen::Index best = 0;
        for (Eigen::Index q = 1; q < membership.cols(); ++q)
            if (membership(p, q) > membership(p, best)) best = q;
        labels[static_cast<std::size_t>(p)] = static_cast<int>(best);
    }
    return labels;
}

std::vector<int> canonical_cluster_order(std::vector<int>& labels, const Eigen::MatrixXd& normalized,
                                         std::size_t n_clusters) {
    std::vector<double> sum(n_clusters, 0.0);
    std::vector<std::size_t> count(n_clusters, 0);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const auto q = static_cast<std::size_t>(labels[p]);
        sum[q] += normalized(static_cast<Eigen::Index>(p), 0);
        ++count[q];
    }
    std::vector<int> order(n_clusters);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        if ((count[ua] == 0) != (count[ub] == 0)) return count[ub] == 0;
        if (count[ua] == 0) return false;
        return sum[ua] / static_cast<double>(count[ua]) < sum[ub] / static_cast<double>(count[ub]);
    });
    std::vector<int> perm(n_clusters);
    for (std::size_t r = 0; r < n_clusters; ++r) perm[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
    for (auto& l : labels) l = perm[static_cast<std::size_t>(l)];
    return perm;
}

Eigen::MatrixXd grey_relational_coefficients(const Eigen::MatrixXd& normalized, GreyReference ref, double rho) {
    const double target = ref == GreyReference::ideal ? 0.0 : 1.0;
    const Eigen::MatrixXd delta = (normalized.array() - target).abs().matrix();
    if (delta.size() == 0) return delta;
    const double dmin = delta.minCoeff();
    const double dmax = delta.maxCoeff();
    if (dmax == 0.0) return Eigen::MatrixXd::Ones(normalized.rows(), normalized.cols());
    return ((dmin + rho * dmax) / (delta.array() + rho * dmax)).matrix();
}

Eigen::VectorXd grp_projection(const Eigen::MatrixXd& gr, const std::vector<double>& weights) {
    if (static_cast<Eigen::Index>(weights.size()) != gr.cols())
        throw std::invalid_argument("weight count does not match indicator count");
    Eigen::VectorXd w2(gr.cols());
    for (Eigen::Index k = 0; k < gr.cols(); ++k) {
        const double w = weights[static_cast<std::size_t>(k)];
        if (!(w > 0.0)) throw std::invalid_argument("grp weights must be positive");
        w2[k] = w * w;
    }
    return gr * w2 / std::sqrt(w2.sum());
}

Eigen::VectorXd priority_membership(const Eigen::VectorXd& pr_plus, const Eigen::VectorXd& pr_minus) {
    return (pr_plus.array() / (pr_plus.array() + pr_minus.array())).matrix();
}

GrpScores grp_scores(const std::vector<ObjectivePair>& front, const std::vector<double>& weights, double rho) {
    GrpScores s;
    s.normalized = normalize_objectives(front);
    s.gr_plus = grey_relational_coefficients(s.normalized, GreyReference::ideal, rho);
    s.gr_minus = grey_relational_coefficients(s.normalized, GreyReference::negative, rho);
    s.pr_plus = grp_projection(s.gr_plus, weights);
    s.pr_minus = grp_projection(s.gr_minus, weights);
    s.priority = priority_membership(s.pr_plus, s.pr_minus);
    return s;
}

std::vector<long> select_bcs(const std::vector<ObjectivePair>& front, const std::vector<int>& labels,
                             const Eigen::VectorXd& priority, std::size_t n_clusters) {
    std::vector<long> best(n_clusters, -1);
    for (std::size_t p = 0; p < front.size(); ++p) {
        auto& b = best[static_cast<std::size_t>(labels[p])];
        if (b < 0) {
            b = static_cast<long>(p);
            continue;
        }
        const double pp = priority[static_cast<Eigen::Index>(p)];
        const double pb = priority[b];
        if (pp > pb || (pp == pb && front[p].p_loss < front[static_cast<std::size_t>(b)].p_loss))
            b = static_cast<long>(p);
    }
    return best;
}

BcsReport analyze(const std::vector<ObjectivePair>& front, const DecisionParams& params) {
    if (front.empty()) throw std::invalid_argument("cannot analyze an empty front");
    params.fcm.validate();
    BcsReport r;
    r.normalized = normalize_objectives(front);
    r.whole = grp_scores(front, params.weights, params.rho);
    const std::size_t nc = params.fcm.n_clusters;
    r.cluster.assign(front.size(), 0);
    r.cluster_priority = r.whole.priority;

    auto single = [&](const std::string& why) {
        r.single_bcs = true;
        r.warnings.push_back(why + "; reporting a single compromise solution");
        const std::vector<int> one(front.size(), 0);
        const auto b = select_bcs(front, one, r.whole.priority, 1);
        r.bcs = {static_cast<std::size_t>(b[0])};
        r.bcs_cluster = {r.cluster[static_cast<std::size_t>(b[0])]};
        return r;
    };

    if (front.size() < nc) return single("front has fewer points than clusters");

    r.clustering = fcm(r.normalized, params.fcm);
    if (r.clustering.duplicate_centers) r.warnings.push_back("fcm produced duplicate cluster centers");
    r.cluster = assign_clusters(r.clustering.membership);
    const auto perm = canonical_cluster_order(r.cluster, r.normalized, nc);
    {
        Eigen::MatrixXd mem(r.clustering.membership.rows(), r.clustering.membership.cols());
        Eigen::MatrixXd cen(r.clustering.centers.rows(), r.clustering.centers.cols());
        for (std::size_t q = 0; q < nc; ++q) {
            const auto to = static_cast<Eigen::Index>(perm[q]);
            mem.col(to) = r.clustering.membership.col(static_cast<Eigen::Index>(q));
            cen.row(to) = r.clustering.centers.row(static_cast<Eigen::Index>(q));
        }
        r.clustering.membership = std::move(mem);
        r.clustering.centers = std::move(cen);
    }

    for (std::size_t q = 0; q < nc; ++q) {
        std::vector<std::size_t> members;
        for (std::size_t p = 0; p < front.size(); ++p)
            if (r.cluster[p] == static_cast<int>(q)) members.push_back(p);
        if (members.empty()) return single("cluster " + std::to_string(q + 1) + " is empty");
        std::vector<ObjectivePair> sub;
        for (auto p : members) sub.push_back(front[p]);
        const auto s = grp_scores(sub, params.weights, params.rho);
        for (std::size_t i = 0; i < members.size(); ++i)
            r.cluster_priority[static_cast<Eigen::Index>(members[i])] = s.priority[static_cast<Eigen::Index>(i)];
    }
    const auto b = select_bcs(front, r.cluster, r.cluster_priority, nc);
    for (std::size_t q = 0; q < nc; ++q) {
        r.bcs.push_back(static_cast<std::size_t>(b[q]));
        r.bcs_cluster.push_back(static_cast<int>(q));
    }
    return r;
}

} // namespace orpd
