#pragma once

// Brute-force reference computations shared by the unit and acceptance tests.
// None of them call into the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "brainnet/network.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::vector<std::vector<double>> floyd_warshall(const brainnet::BinaryNetwork& g) {
    const auto n = static_cast<std::size_t>(g.size());
    std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (g.has_edge(static_cast<int>(i), static_cast<int>(j))) d[i][j] = 1.0;
    }
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
    return d;
}

/// Mean local clustering by triangle enumeration (0 for degree < 2).
inline double clustering(const brainnet::BinaryNetwork& g) {
    const int n = g.size();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        int deg = 0, tri = 0;
        for (int a = 0; a < n; ++a) deg += g.has_edge(i, a);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) tri += g.has_edge(i, a) && g.has_edge(i, b) && g.has_edge(a, b);
        if (deg >= 2) total += 2.0 * tri / (deg * (deg - 1.0));
    }
    return total / n;
}

struct GraphMeasures {
    double cpl = 0, e_global = 0, clustering = 0, sparsity = 0;
    bool has_pair = false;
};

inline GraphMeasures measures(const brainnet::BinaryNetwork& g) {
    const int n = g.size();
    const auto fw = floyd_warshall(g);
    double sum = 0, inv = 0, pairs = 0, edges = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            edges += g.has_edge(i, j);
            if (i == j) continue;
            const double d = fw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (d < kInf) {
                sum += d;
                pairs += 1;
                inv += 1.0 / d;
            }
        }
    GraphMeasures m;
    m.has_pair = pairs > 0;
    m.cpl = pairs > 0 ? sum / pairs : 0.0;
    m.e_global = inv / (n * (n - 1.0));
    m.clustering = clustering(g);
    m.sparsity = edges / (n * (n - 1.0));
    return m;
}

/// Two-colouring by BFS.
inline bool is_bipartite(const brainnet::BinaryNetwork& g) {
    std::vector<int> colour(static_cast<std::size_t>(g.size()), -1);
    for (int s = 0; s < g.size(); ++s) {
        if (colour[static_cast<std::size_t>(s)] >= 0) continue;
        colour[static_cast<std::size_t>(s)] = 0;
        std::vector<int> q{s};
        while (!q.empty()) {
            const int v = q.back();
            q.pop_back();
            for (int u = 0; u < g.size(); ++u) {
                if (!g.has_edge(v, u)) continue;
                if (colour[static_cast<std::size_t>(u)] < 0) {
                    colour[static_cast<std::size_t>(u)] = 1 - colour[static_cast<std::size_t>(v)];
                    q.push_back(u);
                } else if (colour[static_cast<std::size_t>(u)] == colour[static_cast<std::size_t>(v)]) {
                    return false;
                }
            }
        }
    }
    return true;
}

/// Upper tail P(T > |t|) of Student's t by integrating the density.
inline double t_tail(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
    auto pdf = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double a = std::abs(t);
    return integrator.integrate([&](double u) { return pdf(a + u); }, 0.0, kInf);
}

/// Welch statistic and Satterthwaite degrees of freedom.
inline std::pair<double, double> welch(const std::vector<double>& a, const std::vector<double>& b) {
    auto mv = [](const std::vector<double>& x) {
        double m = 0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        double s = 0;
        for (double v : x) s += (v - m) * (v - m);
        return std::pair{m, s / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = mv(a);
    const auto [mb, vb] = mv(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 / ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
    return {t, df};
}

}  // namespace oracles
