#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"
#include "brainnet/eigensolve.hpp"
#include "brainnet/kmeans.hpp"
#include "brainnet/rng.hpp"
#include "brainnet/spatial_graph.hpp"

namespace brainnet {

/// Wall-clock seconds spent per pipeline stage.
struct StageTimes {
    double similarity = 0.0;
    double eigensolve = 0.0;
    double kmeans = 0.0;

    StageTimes& operator+=(const StageTimes& o) {
        similarity += o.similarity;
        eigensolve += o.eigensolve;
        kmeans += o.kmeans;
        return *this;
    }
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

struct SpectralOptions {
    bool row_normalize = true;
    LanczosOptions lanczos{};
    int kmeans_max_iter = 300;
    /// Independent k-means runs; the lowest-inertia labelling wins.
    int kmeans_restarts = 10;
};

/// Spectral clustering of a similarity graph into k regions.
///
/// Uses the k smallest eigenvectors of D^{-1/2}(D-W)D^{-1/2}, maps them to
/// eigenvectors of I - D^{-1}W by u = D^{-1/2}x, optionally scales each row to
/// unit length, then runs k-means on the rows. Every node needs a positive
/// degree.
inline Parcellation spectral_cluster(const SparseSymMatrix& sim, int k, Rng& rng, const SpectralOptions& opts = {},
                                     StageTimes* times = nullptr) {
    const Index n = sim.n();
    if (k < 1) throw InvalidInput("spectral_cluster: k must be positive");
    if (k > n) throw InvalidInput("spectral_cluster: k=" + std::to_string(k) + " exceeds node count " + std::to_string(n));
    if (k == 1) return Parcellation(std::vector<int>(static_cast<std::size_t>(n), 1), 1);
    if (k == n) {
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i) + 1;
        return Parcellation(std::move(labels), k);
    }
    const auto degree = sim.row_sums();
    auto t0 = std::chrono::steady_clock::now();
    const SparseSymMatrix lsym = normalized_laplacian(sim);
    const EigResult eig = smallest_k(lsym, k, rng, opts.lanczos);
    if (times) times->eigensolve += detail::seconds_since(t0);

    Eigen::MatrixXd embed = eig.vectors;
    for (Index i = 0; i < n; ++i) embed.row(i) /= std::sqrt(degree[static_cast<std::size_t>(i)]);
    if (opts.row_normalize) {
        for (Index i = 0; i < n; ++i) {
            const double norm = embed.row(i).norm();
            if (norm > 0.0) embed.row(i) /= norm;
        }
    }
    t0 = std::chrono::steady_clock::now();
    const KMeansResult km = kmeans_best_of(embed, k, rng, opts.kmeans_restarts, opts.kmeans_max_iter);
    if (times) times->kmeans += detail::seconds_since(t0);
    return Parcellation(km.labels, k);
}

struct RandomParcellationReport {
    /// Mask components that received no seed and were attached to a region
    /// wholesale; each one makes that region spatially discontiguous.
    std::size_t unseeded_components = 0;
};

/// Random spatial segmentation by multi-source region growing.
///
/// k distinct seed voxels are drawn uniformly; regions then take turns in
/// round-robin order, each claiming one unassigned voxel from its BFS
/// frontier per turn, over the radius-r adjacency. Mask components without a
/// seed are assigned whole to the region whose seed index is nearest to the
/// component's lowest voxel index (ties to the lower region).
inline Parcellation random_parcellation(const VoxelMask& mask, int k, Rng& rng, double radius = 2.0,
                                        RandomParcellationReport* report = nullptr) {
    const std::size_t n = mask.size();
    if (k < 1) throw InvalidInput("random_parcellation: k must be positive");
    if (static_cast<std::size_t>(k) > n)
        throw InvalidInput("random_parcellation: k=" + std::to_string(k) + " exceeds voxel count " + std::to_string(n));
    const AdjacencyList adj(mask, radius);
    const auto seeds = rng.sample_without_replacement(n, static_cast<std::size_t>(k));

    std::vector<int> labels(n, 0);
    std::vector<std::deque<Index>> frontier(static_cast<std::size_t>(k));
    auto claim = [&](std::size_t region, Index v) {
        labels[static_cast<std::size_t>(v)] = static_cast<int>(region) + 1;
        for (Index u : adj.neighbors(static_cast<std::size_t>(v)))
            if (labels[static_cast<std::size_t>(u)] == 0) frontier[region].push_back(u);
    };
    for (std::size_t r = 0; r < seeds.size(); ++r) labels[seeds[r]] = static_cast<int>(r) + 1;
    for (std::size_t r = 0; r < seeds.size(); ++r) claim(r, static_cast<Index>(seeds[r]));

    for (bool progress = true; progress;) {
        progress = false;
        for (std::size_t r = 0; r < frontier.size(); ++r) {
            auto& q = frontier[r];
            while (!q.empty() && labels[static_cast<std::size_t>(q.front())] != 0) q.pop_front();
            if (q.empty()) continue;
            const Index v = q.front();
            q.pop_front();
            claim(r, v);
            progress = true;
        }
    }

    std::size_t unseeded = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (labels[s] != 0) continue;
        // s is the lowest index of a component with no seed.
        ++unseeded;
        int best_region = 1;
        std::size_t best_gap = std::numeric_limits<std::size_t>::max();
        for (std::size_t r = 0; r < seeds.size(); ++r) {
            const std::size_t gap = seeds[r] > s ? seeds[r] - s : s - seeds[r];
            if (gap < best_gap) {
                best_gap = gap;
                best_region = static_cast<int>(r) + 1;
            }
        }
        std::vector<Index> stack{static_cast<Index>(s)};
        labels[s] = best_region;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index u : adj.neighbors(static_cast<std::size_t>(v)))
                if (labels[static_cast<std::size_t>(u)] == 0) {
                    labels[static_cast<std::size_t>(u)] = best_region;
                    stack.push_back(u);
                }
        }
    }
    if (report) report->unseeded_components = unseeded;
    return Parcellation(std::move(labels), k);
}

/// Region labels (1-based) whose voxels are not connected under the radius-r
/// adjacency restricted to the region.
inline std::vector<int> discontiguous_regions(const VoxelMask& mask, const Parcellation& p, double radius = 2.0) {
    const AdjacencyList adj(mask, radius);
    const auto members = p.members();
    std::vector<char> seen(mask.size(), 0);
    std::vector<int> bad;
    for (std::size_t r = 0; r < members.size(); ++r) {
        if (members[r].empty()) continue;
        const int label = static_cast<int>(r) + 1;
        std::vector<Index> stack{members[r].front()};
        seen[static_cast<std::size_t>(members[r].front())] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (Index u : adj.neighbors(static_cast<std::size_t>(v))) {
                if (seen[static_cast<std::size_t>(u)] || p.label(static_cast<std::size_t>(u)) != label) continue;
                seen[static_cast<std::size_t>(u)] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
        if (reached != members[r].size()) bad.push_back(label);
    }
    return bad;
}

/// Adjusted Rand Index over voxels labelled in both parcellations.
/// Returns 1 when both partitions are trivially identical (e.g. one region).
inline double parcellation_similarity(const Parcellation& a, const Parcellation& b) {
    if (a.size() != b.size())
        throw InvalidInput("parcellation_similarity: sizes " + std::to_string(a.size()) + " and " +
                           std::to_string(b.size()) + " differ");
    std::map<std::pair<int, int>, double> table;
    std::vector<double> rows(static_cast<std::size_t>(a.k()) + 1, 0.0);
    std::vector<double> cols(static_cast<std::size_t>(b.k()) + 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int la = a.label(i), lb = b.label(i);
        if (la == 0 || lb == 0) continue;
        table[{la, lb}] += 1.0;
        rows[static_cast<std::size_t>(la)] += 1.0;
        cols[static_cast<std::size_t>(lb)] += 1.0;
        total += 1.0;
    }
    auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, c] : table) index += pairs(c);
    for (double r : rows) sum_rows += pairs(r);
    for (double c : cols) sum_cols += pairs(c);
    const double all = pairs(total);
    if (all <= 0.0) return 1.0;
    const double expected = sum_rows * sum_cols / all;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    const double denom = maximum - expected;
    if (std::abs(denom) < 1e-12 * std::max(1.0, maximum)) return 1.0;
    return (index - expected) / denom;
}

struct IterativeOptions {
    double sim_threshold = 0.9;
    int max_rounds = 10;
    double radius = 2.0;
    CorrelationPolicy policy = CorrelationPolicy::clamp;
    SpectralOptions spectral{};
};

struct IterativeResult {
    Parcellation parcellation;
    std::vector<double> round_ari;  ///< ARI of each round's result vs the parcellation it was profiled on
    bool converged = false;
    StageTimes times{};

    int rounds() const { return static_cast<int>(round_ari.size()); }

    /// "round i ARI=x" lines.
    std::string log() const {
        std::string s;
        for (std::size_t i = 0; i < round_ari.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "round %zu ARI=%.17g\n", i + 1, round_ari[i]);
            s += buf;
        }
        return s;
    }
};

/// Sub-matrix on the listed nodes, reindexed 0..|keep|-1.
inline SparseSymMatrix induced_subgraph(const SparseSymMatrix& g, std::span<const Index> keep) {
    std::vector<Index> remap(static_cast<std::size_t>(g.n()), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) remap[static_cast<std::size_t>(keep[i])] = static_cast<Index>(i);
    std::vector<Triplet> trips;
    for (const auto& t : g.upper_triplets()) {
        const Index a = remap[static_cast<std::size_t>(t.row)], b = remap[static_cast<std::size_t>(t.col)];
        if (a >= 0 && b >= 0) trips.push_back({a, b, t.value});
    }
    return SparseSymMatrix::from_triplets(static_cast<Index>(keep.size()), trips);
}

/// Region count of the random initial segmentation when none is given:
/// fine enough that profiles carry detail, capped at the voxel count.
inline int default_init_regions(std::size_t n_voxels, int k) {
    return static_cast<int>(std::min<std::size_t>(n_voxels, static_cast<std::size_t>(std::max(k, 200))));
}

/// Connectivity-based parcellation: profile against the current parcellation,
/// rebuild the spatial similarity graph, spectrally cluster it, and repeat
/// until consecutive parcellations agree (ARI >= sim_threshold) or the round
/// budget runs out. Voxels isolated in a round's similarity graph are
/// labelled 0 in that round's result.
inline IterativeResult parcellate_iterative(const VoxelMask& mask, const SparseSymMatrix& conn, int k,
                                            const Parcellation& init, Rng& rng, const IterativeOptions& opts = {}) {
    const std::size_t n = mask.size();
    if (static_cast<std::size_t>(conn.n()) != n || init.size() != n)
        throw InvalidInput("parcellate_iterative: mask, connectivity and initial parcellation sizes differ");
    if (init.k() < 2) throw InvalidInput("parcellate_iterative: initial parcellation needs at least 2 regions");
    if (k < 1 || static_cast<std::size_t>(k) > n) throw InvalidInput("parcellate_iterative: invalid k");

    IterativeResult res;
    if (k == 1) {
        res.parcellation = Parcellation(std::vector<int>(n, 1), 1);
        res.round_ari.push_back(parcellation_similarity(res.parcellation, init));
        res.converged = true;
        return res;
    }

    const auto edges = build_adjacency(mask, opts.radius);
    Parcellation current = init;
    for (int round = 1; round <= opts.max_rounds; ++round) {
        auto t0 = std::chrono::steady_clock::now();
        const SimilarityGraph sim = build_similarity(mask, edges, compute_profiles(conn, current), opts.policy);
        res.times.similarity += detail::seconds_since(t0);

        const auto degree = sim.weights.row_sums();
        std::vector<Index> active;
        for (std::size_t v = 0; v < n; ++v)
            if (degree[v] > 0.0) active.push_back(static_cast<Index>(v));
        if (active.size() < static_cast<std::size_t>(k))
            throw InvalidInput("parcellate_iterative: round " + std::to_string(round) + " left only " +
                               std::to_string(active.size()) + " connected voxels for k=" + std::to_string(k));

        const Parcellation sub =
            spectral_cluster(induced_subgraph(sim.weights, active), k, rng, opts.spectral, &res.times);
        std::vector<int> labels(n, 0);
        for (std::size_t i = 0; i < active.size(); ++i) labels[static_cast<std::size_t>(active[i])] = sub.label(i);
        Parcellation next(std::move(labels), k);

        const double ari = parcellation_similarity(next, current);
        res.round_ari.push_back(ari);
        current = std::move(next);
        if (ari >= opts.sim_threshold) {
            res.converged = true;
            break;
        }
    }
    res.parcellation = std::move(current);
    return res;
}

}  // namespace brainnet
