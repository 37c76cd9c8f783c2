#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"
#include "brainnet/spatial_graph.hpp"
#include "brainnet/stats.hpp"

namespace brainnet {

struct ConsistencyReport {
    double value = 0.0;                 ///< mean over scored regions
    std::vector<double> per_region;     ///< NaN for regions with no usable voxel
    std::vector<int> singleton_regions; ///< 1-based labels scored as 1 by convention
    std::size_t excluded_voxels = 0;    ///< voxels whose profile is all zero
    int scored_regions = 0;
};

/// Mean over regions of the mean pairwise Pearson correlation between the
/// connectivity profiles (taken against `profile_parcellation`) of voxels in
/// the same region of `p`. Voxels with an all-zero profile are dropped first.
/// A region left with one voxel scores 1 and is listed in singleton_regions;
/// a region left empty is skipped.
inline ConsistencyReport regional_consistency(const SparseSymMatrix& conn, const Parcellation& p,
                                              const Parcellation& profile_parcellation) {
    if (static_cast<std::size_t>(conn.n()) != p.size() || p.size() != profile_parcellation.size())
        throw InvalidInput("regional_consistency: connectivity and parcellations cover different voxel counts");
    if (profile_parcellation.k() < 2)
        throw InvalidInput("regional_consistency: profiles need a parcellation with at least two regions");
    const Eigen::MatrixXd profiles = compute_profiles(conn, profile_parcellation);
    const Eigen::MatrixXd z = standardize_rows(profiles);

    ConsistencyReport rep;
    const auto k = static_cast<std::size_t>(p.k());
    std::vector<Eigen::VectorXd> sum(k, Eigen::VectorXd::Zero(profiles.cols()));
    std::vector<double> self(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t v = 0; v < p.size(); ++v) {
        const int l = p.label(v);
        if (l == 0) continue;
        if (profiles.row(static_cast<Index>(v)).isZero(0.0)) {
            ++rep.excluded_voxels;
            continue;
        }
        const auto r = static_cast<std::size_t>(l - 1);
        sum[r] += z.row(static_cast<Index>(v)).transpose();
        self[r] += z.row(static_cast<Index>(v)).squaredNorm();
        ++count[r];
    }

    // Sum over ordered pairs a != b of z_a . z_b = |sum z|^2 - sum |z|^2.
    rep.per_region.assign(k, std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    bool any_pair = false;
    for (std::size_t r = 0; r < k; ++r) {
        const double m = static_cast<double>(count[r]);
        if (count[r] == 0) continue;
        if (count[r] == 1) {
            rep.per_region[r] = 1.0;
            rep.singleton_regions.push_back(static_cast<int>(r + 1));
        } else {
            rep.per_region[r] = (sum[r].squaredNorm() - self[r]) / (m * (m - 1.0));
            any_pair = true;
        }
        total += rep.per_region[r];
        ++rep.scored_regions;
    }
    if (!any_pair) throw InvalidInput("regional_consistency: every region has at most one usable voxel");
    rep.value = total / rep.scored_regions;
    return rep;
}

struct ComparisonReport {
    ConsistencyReport connectivity;
    std::vector<double> random_values;  ///< consistency of each random parcellation
    TTestResult test;                   ///< one-sided: connectivity regions > random regions
    bool exceeds_all = false;
};

/// Consistency of a connectivity-based parcellation against a set of random
/// parcellations with the same k. The Welch test compares the per-region
/// consistencies of p_conn with the pooled per-region values of the random
/// parcellations (alternative: p_conn is higher).
inline ComparisonReport compare_parcellations(const SparseSymMatrix& conn, const Parcellation& p_conn,
                                              std::span<const Parcellation> p_rand,
                                              const Parcellation& profile_parcellation) {
    if (p_rand.empty()) throw InvalidInput("compare_parcellations: no random parcellations given");
    ComparisonReport out;
    out.connectivity = regional_consistency(conn, p_conn, profile_parcellation);
    std::vector<double> a, b;
    for (double v : out.connectivity.per_region)
        if (!std::isnan(v)) a.push_back(v);
    out.exceeds_all = true;
    for (const auto& pr : p_rand) {
        if (pr.k() != p_conn.k())
            throw InvalidInput("compare_parcellations: random parcellation has k=" + std::to_string(pr.k()) +
                               ", expected " + std::to_string(p_conn.k()));
        const auto rep = regional_consistency(conn, pr, profile_parcellation);
        out.random_values.push_back(rep.value);
        out.exceeds_all = out.exceeds_all && out.connectivity.value > rep.value;
        for (double v : rep.per_region)
            if (!std::isnan(v)) b.push_back(v);
    }
    out.test = welch_t_test(a, b, {.pooled = false, .alternative = Alternative::greater});
    return out;
}

}  // namespace brainnet
