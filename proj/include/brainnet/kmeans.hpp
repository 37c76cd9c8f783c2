#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"
#include "brainnet/rng.hpp"

namespace brainnet {

struct KMeansResult {
    std::vector<int> labels;  ///< 1..k
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_history;  ///< one entry per assignment step
};

/// Lloyd's algorithm seeded with k distinct random rows.
///
/// Nearest-centroid ties go to the lowest centroid index. An empty cluster is
/// refilled with the point farthest from its own centroid (taken from a
/// cluster that keeps at least one member). Assignment is parallel over
/// points; centroid sums run in fixed point order, so the result is bitwise
/// independent of the thread count.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iter = 300) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (d < 1) throw InvalidInput("kmeans: points need at least one column");
    if (k < 1) throw InvalidInput("kmeans: k must be positive");
    if (k > n) throw InvalidInput("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));
    if (!points.allFinite()) throw InvalidInput("kmeans: non-finite input");

    KMeansResult res;
    res.centroids.resize(k, d);
    const auto seeds = rng.sample_without_replacement(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) res.centroids.row(c) = points.row(static_cast<Index>(seeds[static_cast<std::size_t>(c)]));

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
    const double slack = 1e-12 * std::max(1.0, points.squaredNorm());

    for (int iter = 0;; ++iter) {
        bool changed = false;
        std::vector<char> moved(static_cast<std::size_t>(n), 0);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = (points.row(static_cast<Index>(i)) - res.centroids.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assign[i] != best) moved[i] = 1;
            assign[i] = best;
            dist[i] = best_d;
        }, 128);
        for (char m : moved) changed |= (m != 0);

        double inertia = 0.0;
        for (double v : dist) inertia += v;
        if (!res.inertia_history.empty() && inertia > res.inertia_history.back() + slack)
            throw std::logic_error("kmeans: inertia increased");
        res.inertia_history.push_back(inertia);
        res.inertia = inertia;
        res.iterations = iter + 1;
        if (!changed) break;
        const bool last = iter + 1 >= max_iter;

        // Centroid update, then refill of empty clusters.
        std::vector<Index> count(static_cast<std::size_t>(k), 0);
        auto recompute = [&] {
            res.centroids.setZero();
            std::fill(count.begin(), count.end(), 0);
            for (Index i = 0; i < n; ++i) {
                res.centroids.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
                ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            }
            for (int c = 0; c < k; ++c)
                if (count[static_cast<std::size_t>(c)] > 0) res.centroids.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
        };
        recompute();
        bool refilled = false;
        for (int c = 0; c < k; ++c) {
            if (count[static_cast<std::size_t>(c)] > 0) continue;
            Index far = -1;
            double far_d = -1.0;
            for (Index i = 0; i < n; ++i) {
                const int own = assign[static_cast<std::size_t>(i)];
                if (count[static_cast<std::size_t>(own)] <= 1) continue;
                const double dd = (points.row(i) - res.centroids.row(own)).squaredNorm();
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            if (far < 0) throw std::logic_error("kmeans: no donor point for an empty cluster");
            --count[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
            assign[static_cast<std::size_t>(far)] = c;
            count[static_cast<std::size_t>(c)] = 1;
            refilled = true;
        }
        if (refilled) recompute();
        if (last) {
            // Out of iterations: report the labels as they stand against
            // their own centroids.
            res.inertia = 0.0;
            for (Index i = 0; i < n; ++i)
                res.inertia += (points.row(i) - res.centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
            res.inertia_history.push_back(res.inertia);
            break;
        }
    }

    res.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) res.labels[static_cast<std::size_t>(i)] = assign[static_cast<std::size_t>(i)] + 1;
    return res;
}

/// Lowest-inertia result of `restarts` independent runs drawn from one rng
/// stream. Ties keep the earlier run.
inline KMeansResult kmeans_best_of(const Eigen::MatrixXd& points, int k, Rng& rng, int restarts, int max_iter = 300) {
    if (restarts < 1) throw InvalidInput("kmeans: restarts must be positive");
    KMeansResult best = kmeans(points, k, rng, max_iter);
    for (int r = 1; r < restarts; ++r) {
        KMeansResult next = kmeans(points, k, rng, max_iter);
        if (next.inertia < best.inertia) best = std::move(next);
    }
    return best;
}

}  // namespace brainnet
