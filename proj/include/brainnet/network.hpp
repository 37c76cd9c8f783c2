#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"
#include "brainnet/io.hpp"

namespace brainnet {

/// Region-level weighted network: symmetric, non-negative k x k weights.
struct BrainNetwork {
    Eigen::MatrixXd weights;
    std::vector<std::size_t> region_sizes;

    int k() const { return static_cast<int>(weights.rows()); }
};

/// Undirected unweighted graph with no self-loops.
///
/// `original_ids[i]` maps node i back to its region index (0-based) in the
/// network it came from; `removed` lists regions dropped as isolated.
class BinaryNetwork {
public:
    BinaryNetwork() = default;

    explicit BinaryNetwork(int n) : n_(n), adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
        original_ids_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) original_ids_[static_cast<std::size_t>(i)] = i;
    }

    static BinaryNetwork from_edges(int n, std::span<const std::pair<int, int>> edges) {
        BinaryNetwork g(n);
        for (auto [a, b] : edges) g.add_edge(a, b);
        return g;
    }

    int size() const noexcept { return n_; }

    void add_edge(int a, int b) {
        if (a == b) return;
        if (a < 0 || b < 0 || a >= n_ || b >= n_) throw InvalidInput("edge endpoint out of range");
        adj_[idx(a, b)] = adj_[idx(b, a)] = 1;
    }
    void remove_edge(int a, int b) { adj_[idx(a, b)] = adj_[idx(b, a)] = 0; }

    bool has_edge(int a, int b) const { return adj_[idx(a, b)] != 0; }

    std::vector<int> neighbors(int a) const {
        std::vector<int> out;
        for (int b = 0; b < n_; ++b)
            if (adj_[idx(a, b)]) out.push_back(b);
        return out;
    }

    int degree(int a) const {
        int d = 0;
        for (int b = 0; b < n_; ++b) d += adj_[idx(a, b)];
        return d;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (char c : adj_) e += static_cast<std::size_t>(c);
        return e / 2;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b)
                if (has_edge(a, b)) out.emplace_back(a, b);
        return out;
    }

    /// Node-induced subgraph; original ids are carried through.
    BinaryNetwork induced(std::span<const int> keep) const {
        BinaryNetwork g(static_cast<int>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            g.original_ids_[i] = original_ids_[static_cast<std::size_t>(keep[i])];
            for (std::size_t j = i + 1; j < keep.size(); ++j)
                if (has_edge(keep[i], keep[j])) g.add_edge(static_cast<int>(i), static_cast<int>(j));
        }
        return g;
    }

    const std::vector<int>& original_ids() const noexcept { return original_ids_; }
    const std::vector<int>& removed() const noexcept { return removed_; }
    void set_removed(std::vector<int> r) { removed_ = std::move(r); }

    friend bool operator==(const BinaryNetwork& a, const BinaryNetwork& b) { return a.n_ == b.n_ && a.adj_ == b.adj_; }

private:
    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b); }

    int n_ = 0;
    std::vector<char> adj_;
    std::vector<int> original_ids_;
    std::vector<int> removed_;
};

namespace detail {
inline void check_sizes(const SparseSymMatrix& conn, const Parcellation& p) {
    if (static_cast<std::size_t>(conn.n()) != p.size())
        throw InvalidInput("connectivity has " + std::to_string(conn.n()) + " voxels, parcellation " +
                           std::to_string(p.size()));
    const auto sizes = p.region_sizes();
    for (std::size_t r = 0; r < sizes.size(); ++r)
        if (sizes[r] == 0) throw InvalidInput("region " + std::to_string(r + 1) + " is empty");
}
}  // namespace detail

/// W(R_i, R_j) = max over voxel pairs (a in R_i, b in R_j) of conn(a, b).
/// The diagonal holds within-region maxima; preprocessing strips it.
inline BrainNetwork build_network_max(const SparseSymMatrix& conn, const Parcellation& p) {
    detail::check_sizes(conn, p);
    BrainNetwork net;
    net.weights = Eigen::MatrixXd::Zero(p.k(), p.k());
    net.region_sizes = p.region_sizes();
    for (Index a = 0; a < conn.n(); ++a) {
        const int la = p.label(static_cast<std::size_t>(a));
        if (la == 0) continue;
        const auto cols = conn.row_cols(a);
        const auto vals = conn.row_values(a);
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const int lb = p.label(static_cast<std::size_t>(cols[t]));
            if (lb == 0) continue;
            double& w = net.weights(la - 1, lb - 1);
            w = std::max(w, vals[t]);
        }
    }
    return net;
}

/// Sums of conn over ordered voxel pairs between (and within) regions.
inline Eigen::MatrixXd region_sums(const SparseSymMatrix& conn, const Parcellation& p) {
    detail::check_sizes(conn, p);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p.k(), p.k());
    for (Index a = 0; a < conn.n(); ++a) {
        const int la = p.label(static_cast<std::size_t>(a));
        if (la == 0) continue;
        const auto cols = conn.row_cols(a);
        const auto vals = conn.row_values(a);
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const int lb = p.label(static_cast<std::size_t>(cols[t]));
            if (lb != 0) c(la - 1, lb - 1) += vals[t];
        }
    }
    return c;
}

/// W(R_i, R_j) = C_ij / sqrt(C_ii C_jj), 0 when either within-region sum is 0.
/// Bounded by 1 (Cauchy-Schwarz).
inline BrainNetwork build_network_normalized(const SparseSymMatrix& conn, const Parcellation& p) {
    const Eigen::MatrixXd c = region_sums(conn, p);
    BrainNetwork net;
    net.region_sizes = p.region_sizes();
    net.weights = Eigen::MatrixXd::Zero(p.k(), p.k());
    for (int i = 0; i < p.k(); ++i)
        for (int j = 0; j < p.k(); ++j) {
            const double denom = c(i, i) * c(j, j);
            if (denom > 0.0) net.weights(i, j) = c(i, j) / std::sqrt(denom);
        }
    return net;
}

enum class EdgeWeight { max, normalized };

inline BrainNetwork build_network(const SparseSymMatrix& conn, const Parcellation& p, EdgeWeight kind) {
    return kind == EdgeWeight::max ? build_network_max(conn, p) : build_network_normalized(conn, p);
}

/// Row-stochastic copy with a zero diagonal; zero rows stay zero.
inline Eigen::MatrixXd row_normalized(const BrainNetwork& net) {
    Eigen::MatrixXd w = net.weights;
    w.diagonal().setZero();
    for (Index i = 0; i < w.rows(); ++i) {
        const double s = w.row(i).sum();
        if (s > 0.0) w.row(i) /= s;
    }
    return w;
}

/// Edge (i, j) survives when its row-normalized weight reaches eps in either
/// direction (and is positive).
inline std::vector<std::vector<char>> surviving_edges(const BrainNetwork& net, double eps) {
    const Eigen::MatrixXd w = row_normalized(net);
    const auto k = static_cast<std::size_t>(w.rows());
    std::vector<std::vector<char>> keep(k, std::vector<char>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double wij = w(static_cast<Index>(i), static_cast<Index>(j));
            const double wji = w(static_cast<Index>(j), static_cast<Index>(i));
            const bool d_ij = wij > 0.0 && wij >= eps;
            const bool d_ji = wji > 0.0 && wji >= eps;
            keep[i][j] = d_ij || d_ji;
        }
    return keep;
}

/// Strip self-loops, row-normalize, threshold at eps, symmetrize with OR, and
/// drop isolated nodes. Throws when every node ends up isolated.
inline BinaryNetwork preprocess(const BrainNetwork& net, double eps = 0.01) {
    if (eps < 0.0) throw InvalidInput("preprocess: eps must be non-negative");
    const auto keep = surviving_edges(net, eps);
    const int k = net.k();
    BinaryNetwork full(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) full.add_edge(i, j);
    std::vector<int> kept, removed;
    for (int i = 0; i < k; ++i) (full.degree(i) > 0 ? kept : removed).push_back(i);
    if (kept.empty()) throw InvalidInput("preprocess: every node is isolated at eps=" + io::format_double(eps));
    BinaryNetwork out = full.induced(kept);
    out.set_removed(std::move(removed));
    return out;
}

/// Weighted network with self-loops stripped and every edge that fails the
/// eps test zeroed; surviving edges keep their original weight.
inline BrainNetwork threshold_weighted(const BrainNetwork& net, double eps) {
    const auto keep = surviving_edges(net, eps);
    BrainNetwork out = net;
    out.weights.diagonal().setZero();
    for (int i = 0; i < net.k(); ++i)
        for (int j = 0; j < net.k(); ++j)
            if (i != j && !keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) out.weights(i, j) = 0.0;
    return out;
}

// ---- serialization --------------------------------------------------------

/// Sparse triples (i <= j, non-zero weights) preceded by a header comment
/// "# network k=<k> removed=<comma list>"; removed lists nodes with no
/// off-diagonal weight.
inline void write_network(const BrainNetwork& net, std::ostream& out) {
    out << "# network k=" << net.k() << " removed=";
    bool first = true;
    for (int i = 0; i < net.k(); ++i) {
        double off = 0.0;
        for (int j = 0; j < net.k(); ++j)
            if (j != i) off += net.weights(i, j);
        if (off > 0.0) continue;
        out << (first ? "" : ",") << i;
        first = false;
    }
    out << '\n';
    for (int i = 0; i < net.k(); ++i)
        for (int j = i; j < net.k(); ++j)
            if (net.weights(i, j) != 0.0) out << i << ' ' << j << ' ' << io::format_double(net.weights(i, j)) << '\n';
}

inline void write_network(const BrainNetwork& net, const std::string& path) {
    auto out = io::detail::open_out(path);
    write_network(net, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Reads a network file. Without a header, k is one past the largest index.
inline BrainNetwork read_network(std::istream& in, const std::string& source = "<network>") {
    std::stringstream body;
    body << in.rdbuf();
    const std::string text = body.str();
    Index k = -1;
    const std::string tag = "# network k=";
    if (text.compare(0, tag.size(), tag) == 0) {
        const auto end = text.find_first_of(" \n", tag.size());
        try {
            k = std::stoll(text.substr(tag.size(), end - tag.size()));
        } catch (const std::exception&) {
            throw ParseError(source, 1, "bad network header");
        }
    }
    if (k < 0) {
        std::istringstream scan(text);
        k = io::infer_dimension(scan, source);
    }
    std::istringstream parse(text);
    const SparseSymMatrix m = io::read_sparse(parse, k, source, {.strict_nonnegative = true});
    BrainNetwork net;
    net.weights = m.to_dense();
    return net;
}

inline BrainNetwork read_network(const std::string& path) {
    auto in = io::detail::open_in(path);
    return read_network(in, path);
}

}  // namespace brainnet
