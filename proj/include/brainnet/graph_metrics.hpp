#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "brainnet/io.hpp"
#include "brainnet/network.hpp"
#include "brainnet/parallel.hpp"

namespace brainnet {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Hop distances from every node (BFS per source). Unreachable pairs hold
/// kUnreachable.
inline std::vector<std::vector<int>> shortest_paths(const BinaryNetwork& g) {
    const int n = g.size();
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nbrs[static_cast<std::size_t>(i)] = g.neighbors(i);
    std::vector<std::vector<int>> dist(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), kUnreachable));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t s) {
        auto& d = dist[s];
        d[s] = 0;
        std::deque<int> q{static_cast<int>(s)};
        while (!q.empty()) {
            const int v = q.front();
            q.pop_front();
            for (int u : nbrs[static_cast<std::size_t>(v)]) {
                if (d[static_cast<std::size_t>(u)] != kUnreachable) continue;
                d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(v)] + 1;
                q.push_back(u);
            }
        }
    }, 16);
    return dist;
}

inline int count_components(const BinaryNetwork& g) {
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    int c = 0;
    for (int s = 0; s < g.size(); ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        ++c;
        std::vector<int> stack{s};
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u : g.neighbors(v))
                if (!seen[static_cast<std::size_t>(u)]) {
                    seen[static_cast<std::size_t>(u)] = 1;
                    stack.push_back(u);
                }
        }
    }
    return c;
}

/// Mean hop distance over ordered pairs i != j that can reach each other.
/// Disconnected pairs are left out rather than counted as infinite.
inline double cpl(const std::vector<std::vector<int>>& dist) {
    const std::size_t n = dist.size();
    if (n < 2) throw InvalidInput("cpl: need at least two nodes");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dist[i][j] != kUnreachable) {
                sum += dist[i][j];
                ++pairs;
            }
    if (pairs == 0) throw InvalidInput("cpl: no pair of nodes is connected");
    return sum / static_cast<double>(pairs);
}

inline double cpl(const BinaryNetwork& g) { return cpl(shortest_paths(g)); }

/// Mean of 1/d(i,j) over all ordered pairs i != j, with 1/inf = 0.
inline double global_efficiency(const std::vector<std::vector<int>>& dist) {
    const std::size_t n = dist.size();
    if (n < 2) throw InvalidInput("global_efficiency: need at least two nodes");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dist[i][j] != kUnreachable) sum += 1.0 / dist[i][j];
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

inline double global_efficiency(const BinaryNetwork& g) { return global_efficiency(shortest_paths(g)); }

/// Local coefficient 2*triangles / (deg (deg-1)), taken as 0 below degree 2;
/// returns the mean over nodes.
inline double clustering_coefficient(const BinaryNetwork& g) {
    const int n = g.size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        const auto deg = static_cast<double>(nb.size());
        if (nb.size() < 2) continue;
        double triangles = 0.0;
        for (std::size_t a = 0; a < nb.size(); ++a)
            for (std::size_t b = a + 1; b < nb.size(); ++b)
                if (g.has_edge(nb[a], nb[b])) triangles += 1.0;
        total += 2.0 * triangles / (deg * (deg - 1.0));
    }
    return total / n;
}

/// Fraction of the N(N-1) ordered node pairs joined by an edge.
inline double sparsity(const BinaryNetwork& g) {
    const double n = g.size();
    if (g.size() < 2) throw InvalidInput("sparsity: need at least two nodes");
    return 2.0 * static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

struct MetricsReport {
    int k = 0;  ///< region count of the source network
    double cpl = 0.0;
    double e_global = 0.0;
    double clustering = 0.0;
    double sparsity = 0.0;
    int n_components = 0;
    int n_nodes = 0;
};

inline MetricsReport compute_metrics(const BinaryNetwork& g, int k_regions = -1) {
    const auto dist = shortest_paths(g);
    MetricsReport r;
    r.k = k_regions >= 0 ? k_regions : g.size() + static_cast<int>(g.removed().size());
    r.cpl = cpl(dist);
    r.e_global = global_efficiency(dist);
    r.clustering = clustering_coefficient(g);
    r.sparsity = sparsity(g);
    r.n_components = count_components(g);
    r.n_nodes = g.size();
    return r;
}

inline std::string metrics_csv_header() { return "k,cpl,e_global,clustering,sparsity,n_components"; }

inline std::string metrics_csv_row(const MetricsReport& r) {
    return std::to_string(r.k) + "," + io::format_double(r.cpl) + "," + io::format_double(r.e_global) + "," +
           io::format_double(r.clustering) + "," + io::format_double(r.sparsity) + "," + std::to_string(r.n_components);
}

}  // namespace brainnet
