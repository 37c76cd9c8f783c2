#pragma once

#include <cmath>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"

namespace brainnet {

struct Offset {
    int dx = 0;
    int dy = 0;
    int dz = 0;
};

/// Lattice offsets with 0 < |d| <= radius. 32 entries at radius 2.
inline std::vector<Offset> neighbor_offsets(double radius = 2.0) {
    std::vector<Offset> out;
    const int reach = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    for (int dz = -reach; dz <= reach; ++dz)
        for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx) {
                const int d2 = dx * dx + dy * dy + dz * dz;
                // Ties at exactly r are included; the slack absorbs r*r rounding.
                if (d2 > 0 && d2 <= r2 + 1e-9) out.push_back({dx, dy, dz});
            }
    return out;
}

using Edge = std::pair<Index, Index>;

/// Undirected spatial edges (i < j) between in-mask voxels within radius,
/// sorted by (i, j).
inline std::vector<Edge> build_adjacency(const VoxelMask& mask, double radius = 2.0) {
    const auto offsets = neighbor_offsets(radius);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const Coord c = mask.coord(i);
        std::vector<Index> nbrs;
        for (const auto& o : offsets) {
            const Index j = mask.index_of({c.x + o.dx, c.y + o.dy, c.z + o.dz});
            if (j > static_cast<Index>(i)) nbrs.push_back(j);
        }
        std::sort(nbrs.begin(), nbrs.end());
        for (Index j : nbrs) edges.emplace_back(static_cast<Index>(i), j);
    }
    return edges;
}

/// Neighbour lists in compressed form, built from an undirected edge list.
class AdjacencyList {
public:
    AdjacencyList(std::size_t n, std::span<const Edge> edges) : offsets_(n + 1, 0) {
        for (const auto& [i, j] : edges) {
            ++offsets_[static_cast<std::size_t>(i) + 1];
            ++offsets_[static_cast<std::size_t>(j) + 1];
        }
        for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
        targets_.resize(offsets_[n]);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const auto& [i, j] : edges) {
            targets_[fill[static_cast<std::size_t>(i)]++] = j;
            targets_[fill[static_cast<std::size_t>(j)]++] = i;
        }
        for (std::size_t i = 0; i < n; ++i)
            std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                      targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }

    AdjacencyList(const VoxelMask& mask, double radius = 2.0) : AdjacencyList(mask.size(), build_adjacency(mask, radius)) {}

    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::span<const Index> neighbors(std::size_t i) const {
        return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<Index> targets_;
};

/// Row v holds the total connectivity of voxel v into each region of p.
/// Voxels labelled 0 keep an all-zero row.
inline Eigen::MatrixXd compute_profiles(const SparseSymMatrix& conn, const Parcellation& p) {
    if (static_cast<std::size_t>(conn.n()) != p.size())
        throw InvalidInput("connectivity has " + std::to_string(conn.n()) + " voxels, parcellation " +
                           std::to_string(p.size()));
    Eigen::MatrixXd profiles = Eigen::MatrixXd::Zero(conn.n(), p.k());
    parallel_for(p.size(), [&](std::size_t v) {
        if (p.label(v) == 0) return;
        const auto cols = conn.row_cols(static_cast<Index>(v));
        const auto vals = conn.row_values(static_cast<Index>(v));
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const int l = p.label(static_cast<std::size_t>(cols[t]));
            if (l > 0) profiles(static_cast<Index>(v), l - 1) += vals[t];
        }
    });
    return profiles;
}

/// Pearson correlation; 0 when either input has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InvalidInput("pearson: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    if (a.size() < 2) throw InvalidInput("pearson: need at least two entries");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    double amax = 0.0, bmax = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        amax = std::max(amax, std::abs(a[i]));
        bmax = std::max(bmax, std::abs(b[i]));
    }
    // Same degeneracy rule as standardize_rows.
    if (!(std::sqrt(saa) > 1e-14 * amax) || !(std::sqrt(sbb) > 1e-14 * bmax)) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return pearson(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                   std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

/// Rows centred and scaled to unit norm, so that the dot product of two rows
/// is their Pearson correlation. Zero-variance rows become all-zero.
inline Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& rows) {
    Eigen::MatrixXd z = rows;
    for (Index i = 0; i < z.rows(); ++i) {
        auto r = z.row(i);
        r.array() -= r.mean();
        const double norm = r.norm();
        if (norm > 0.0 && norm > 1e-14 * rows.row(i).cwiseAbs().maxCoeff())
            r /= norm;
        else
            r.setZero();
    }
    return z;
}

/// Number of connected components of the graph with an edge wherever the
/// stored weight is non-zero.
inline int count_components(const SparseSymMatrix& g) {
    const auto n = static_cast<std::size_t>(g.n());
    std::vector<char> seen(n, 0);
    int components = 0;
    std::vector<Index> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++components;
        seen[s] = 1;
        stack.assign(1, static_cast<Index>(s));
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            const auto cols = g.row_cols(v);
            const auto vals = g.row_values(v);
            for (std::size_t t = 0; t < cols.size(); ++t) {
                if (vals[t] == 0.0 || seen[static_cast<std::size_t>(cols[t])]) continue;
                seen[static_cast<std::size_t>(cols[t])] = 1;
                stack.push_back(cols[t]);
            }
        }
    }
    return components;
}

/// How negative profile correlations enter the similarity graph.
enum class CorrelationPolicy {
    clamp,     ///< max(0, r)
    shift,     ///< (r + 1) / 2
    absolute,  ///< |r|
};

struct SimilarityGraph {
    SparseSymMatrix weights;
    int components = 0;
    std::size_t edges = 0;
};

/// Spatial similarity graph: spatial edges weighted by profile correlation.
/// Zero-weight edges are dropped. Edges are weighted independently, so the
/// result does not depend on the thread count.
inline SimilarityGraph build_similarity(const VoxelMask& mask, std::span<const Edge> spatial_edges,
                                        const Eigen::MatrixXd& profiles,
                                        CorrelationPolicy policy = CorrelationPolicy::clamp) {
    if (static_cast<std::size_t>(profiles.rows()) != mask.size())
        throw InvalidInput("profile rows do not match mask size");
    const Eigen::MatrixXd z = standardize_rows(profiles);
    std::vector<double> w(spatial_edges.size(), 0.0);
    parallel_for(spatial_edges.size(), [&](std::size_t e) {
        const auto [i, j] = spatial_edges[e];
        const bool degenerate = z.row(i).squaredNorm() == 0.0 || z.row(j).squaredNorm() == 0.0;
        if (degenerate) return;  // undefined correlation drops the edge
        const double r = std::clamp(z.row(i).dot(z.row(j)), -1.0, 1.0);
        switch (policy) {
            case CorrelationPolicy::clamp: w[e] = std::max(0.0, r); break;
            case CorrelationPolicy::shift: w[e] = 0.5 * (r + 1.0); break;
            case CorrelationPolicy::absolute: w[e] = std::abs(r); break;
        }
    });
    std::vector<Triplet> trips;
    trips.reserve(spatial_edges.size());
    for (std::size_t e = 0; e < spatial_edges.size(); ++e)
        if (w[e] > 0.0) trips.push_back({spatial_edges[e].first, spatial_edges[e].second, w[e]});
    SimilarityGraph g;
    g.weights = SparseSymMatrix::from_triplets(static_cast<Index>(mask.size()), trips);
    g.components = count_components(g.weights);
    g.edges = trips.size();
    return g;
}

inline SimilarityGraph build_similarity(const VoxelMask& mask, const SparseSymMatrix& conn,
                                        const Parcellation& profile_parcellation, double radius = 2.0,
                                        CorrelationPolicy policy = CorrelationPolicy::clamp) {
    const auto edges = build_adjacency(mask, radius);
    return build_similarity(mask, edges, compute_profiles(conn, profile_parcellation), policy);
}

}  // namespace brainnet
