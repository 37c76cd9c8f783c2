#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/eigensolve.hpp"
#include "brainnet/io.hpp"
#include "brainnet/network.hpp"

namespace brainnet {

/// Eigenvalues of the random-walk Laplacian I - D^-1 W, ascending.
struct Spectrum {
    std::vector<double> eigenvalues;
    double lambda2 = 0.0;
    int modularity = 0;
    double gamma = 0.3;
    double near_bipartite_gap = 0.0;  ///< 2 - lambda_max
    std::vector<int> removed;         ///< isolated nodes dropped before the solve

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct SpectrumOptions {
    double gamma = 0.3;
    /// Drop zero-degree nodes instead of rejecting the network.
    bool remove_isolated = true;
    int dense_cap = 4096;
    /// Values this close to 0 or 2 are reported as exactly 0 or 2.
    double snap = 1e-12;
};

/// Spectrum of the weighted network with self-loops stripped. I - D^-1 W is
/// similar to D^-1/2 (D - W) D^-1/2, which is what gets diagonalized.
inline Spectrum spectrum(const BrainNetwork& net, const SpectrumOptions& opts = {}) {
    Eigen::MatrixXd w = net.weights;
    w.diagonal().setZero();
    if (!w.allFinite() || (w.array() < 0.0).any()) throw InvalidInput("spectrum: weights must be finite and non-negative");
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw InvalidInput("spectrum: weights are not symmetric");

    Spectrum s;
    s.gamma = opts.gamma;
    std::vector<Index> keep;
    for (Index i = 0; i < w.rows(); ++i) {
        if (w.row(i).sum() > 0.0) {
            keep.push_back(i);
        } else if (opts.remove_isolated) {
            s.removed.push_back(static_cast<int>(i));
        } else {
            throw InvalidInput("spectrum: node " + std::to_string(i) + " has zero degree");
        }
    }
    if (keep.empty()) throw InvalidInput("spectrum: network has no edges");
    const auto k = static_cast<Index>(keep.size());
    if (k > opts.dense_cap)
        throw InvalidInput("spectrum: " + std::to_string(k) + " nodes exceeds the dense solver cap " +
                           std::to_string(opts.dense_cap));

    Eigen::MatrixXd sub(k, k);
    for (Index a = 0; a < k; ++a)
        for (Index b = 0; b < k; ++b) sub(a, b) = w(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    const Eigen::VectorXd inv_sqrt = sub.rowwise().sum().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd lsym = -(inv_sqrt.asDiagonal() * sub * inv_sqrt.asDiagonal());
    lsym.diagonal().array() += 1.0;
    lsym = 0.5 * (lsym + lsym.transpose()).eval();

    const EigResult eig = dense_sym_eig(lsym);
    s.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
    for (double& v : s.eigenvalues) {
        if (std::abs(v) <= opts.snap) v = 0.0;
        if (std::abs(v - 2.0) <= opts.snap) v = 2.0;
    }
    s.lambda2 = k >= 2 ? s.eigenvalues[1] : 0.0;
    s.modularity = static_cast<int>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                                  [&](double v) { return v < opts.gamma; }));
    s.near_bipartite_gap = 2.0 - s.eigenvalues.back();
    return s;
}

inline Spectrum spectrum(const BrainNetwork& net, double gamma) {
    SpectrumOptions o;
    o.gamma = gamma;
    return spectrum(net, o);
}

/// Counts over `bins` equal-width bins covering [0, 2]. The last bin is
/// closed; values within 1e-9 of a bin edge go to the bin on their right,
/// so 1.5 lands in [1.5, 2] even after rounding.
inline std::vector<std::size_t> spectral_histogram(const Spectrum& s, int bins = 40) {
    if (bins < 1) throw InvalidInput("spectral_histogram: bins must be at least 1");
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    const double width = 2.0 / bins;
    for (double v : s.eigenvalues) {
        double pos = v / width;
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) < 1e-9) pos = nearest;
        const auto b = std::clamp(static_cast<long>(std::floor(pos)), 0L, static_cast<long>(bins - 1));
        ++counts[static_cast<std::size_t>(b)];
    }
    return counts;
}

/// 1-Wasserstein distance between the empirical eigenvalue distributions:
/// the integral over t in (0,1) of |F1^-1(t) - F2^-1(t)|.
inline double spectral_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("spectral_distance: empty spectrum");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    // Merge the quantile breakpoints i/na and j/nb.
    std::size_t i = 0, j = 0;
    double t = 0.0, total = 0.0;
    while (i < x.size() && j < y.size()) {
        const double next_a = static_cast<double>(i + 1) / na;
        const double next_b = static_cast<double>(j + 1) / nb;
        const double next = std::min(next_a, next_b);
        total += (next - t) * std::abs(x[i] - y[j]);
        t = next;
        if (next_a <= next) ++i;
        if (next_b <= next) ++j;
    }
    return total;
}

inline double spectral_distance(const Spectrum& a, const Spectrum& b) {
    return spectral_distance(a.eigenvalues, b.eigenvalues);
}

inline void write_spectrum(const Spectrum& s, std::ostream& out) {
    for (double v : s.eigenvalues) out << io::format_double(v) << '\n';
}

inline void write_histogram(const std::vector<std::size_t>& counts, std::ostream& out) {
    out << "bin_left,count\n";
    const double width = 2.0 / static_cast<double>(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        out << io::format_double(width * static_cast<double>(b)) << ',' << counts[b] << '\n';
}

}  // namespace brainnet
