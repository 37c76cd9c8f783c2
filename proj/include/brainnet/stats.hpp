#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "brainnet/error.hpp"

namespace brainnet {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidInput("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
    if (x.size() < 2) throw InvalidInput("variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

namespace detail {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
inline double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw InvalidInput("student_t: df must be positive");
    if (std::isnan(t)) throw InvalidInput("student_t: t is NaN");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

enum class Alternative { two_sided, greater, less };

struct TTestOptions {
    bool pooled = false;  ///< Student's equal-variance test instead of Welch
    Alternative alternative = Alternative::two_sided;
};

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Two-sample t-test, Welch by default. `greater` tests mean(a) > mean(b).
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, const TTestOptions& opts = {}) {
    if (a.size() < 2 || b.size() < 2) throw InvalidInput("t-test: each sample needs at least two values");
    for (double v : a)
        if (!std::isfinite(v)) throw InvalidInput("t-test: non-finite value");
    for (double v : b)
        if (!std::isfinite(v)) throw InvalidInput("t-test: non-finite value");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double sa = variance(a), sb = variance(b);
    if (sa == 0.0 && sb == 0.0) throw InvalidInput("t-test: both samples have zero variance");

    TTestResult r;
    double se = 0.0;
    if (opts.pooled) {
        r.df = na + nb - 2.0;
        const double sp2 = ((na - 1.0) * sa + (nb - 1.0) * sb) / r.df;
        se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    } else {
        const double va = sa / na, vb = sb / nb;
        se = std::sqrt(va + vb);
        r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    }
    r.t = (ma - mb) / se;
    if (r.t == 0.0) {
        r.p = opts.alternative == Alternative::two_sided ? 1.0 : 0.5;
        return r;
    }
    const double two = student_t_two_sided(r.t, r.df);
    switch (opts.alternative) {
        case Alternative::two_sided: r.p = two; break;
        case Alternative::greater: r.p = r.t > 0.0 ? 0.5 * two : 1.0 - 0.5 * two; break;
        case Alternative::less: r.p = r.t < 0.0 ? 0.5 * two : 1.0 - 0.5 * two; break;
    }
    return r;
}

/// Ranks starting at 1; tied values share the mean of their ranks.
inline std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}

/// Spearman rank correlation (Pearson on average ranks). NaN when either
/// input is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("spearman: need two equal-length samples of size >= 2");
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace brainnet
