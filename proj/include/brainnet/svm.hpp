#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/error.hpp"
#include "brainnet/io.hpp"
#include "brainnet/parallel.hpp"
#include "brainnet/rng.hpp"

namespace brainnet {

/// Per-subject feature table for a two-group study.
struct GroupSample {
    std::vector<std::string> feature_names;
    std::vector<std::string> subjects;
    std::vector<std::string> groups;  ///< group label per subject
    Eigen::MatrixXd values;           ///< subjects x features

    int feature_index(const std::string& name) const {
        const auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) throw InvalidInput("unknown feature '" + name + "'");
        return static_cast<int>(it - feature_names.begin());
    }

    /// Distinct group labels in order of first appearance.
    std::vector<std::string> group_names() const {
        std::vector<std::string> out;
        for (const auto& g : groups)
            if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
        return out;
    }

    /// Values of one feature for the members of one group.
    std::vector<double> column(const std::string& feature, const std::string& group) const {
        const int f = feature_index(feature);
        std::vector<double> out;
        for (std::size_t s = 0; s < groups.size(); ++s)
            if (groups[s] == group) out.push_back(values(static_cast<Index>(s), f));
        return out;
    }
};

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}
}  // namespace detail

/// CSV with header "subject,group,<feature>,...".
inline GroupSample read_group_sample(std::istream& in, const std::string& source = "<groups>") {
    GroupSample g;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        const auto cells = detail::split_csv(line);
        if (!header) {
            if (cells.size() < 3 || cells[0] != "subject" || cells[1] != "group")
                throw ParseError(source, lineno, "expected header 'subject,group,<features>'");
            g.feature_names.assign(cells.begin() + 2, cells.end());
            header = true;
            continue;
        }
        if (cells.size() != g.feature_names.size() + 2)
            throw ParseError(source, lineno, "expected " + std::to_string(g.feature_names.size() + 2) + " fields, got " +
                                                 std::to_string(cells.size()));
        g.subjects.push_back(cells[0]);
        g.groups.push_back(cells[1]);
        std::vector<double> row;
        for (std::size_t c = 2; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (cells[c].empty() || *end != '\0' || !std::isfinite(v))
                throw ParseError(source, lineno, "bad number '" + cells[c] + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (!header) throw ParseError(source, lineno, "missing header");
    g.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(g.feature_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) g.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return g;
}

inline GroupSample read_group_sample(const std::string& path) {
    auto in = io::detail::open_in(path);
    return read_group_sample(in, path);
}

struct LinearModel {
    Eigen::VectorXd w;
    double b = 0.0;
    int epochs = 0;
    double gap = 0.0;

    double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return w.dot(x) + b; }
};

struct SvmOptions {
    double C = 1.0;
    double gap_tol = 1e-6;
    int max_epochs = 200000;
};

/// Soft-margin linear SVM (hinge loss, L2 penalty) trained by dual coordinate
/// descent. The bias is learned as the weight of a constant feature 1.
/// Coordinates are visited in an rng-driven order each epoch; training stops
/// once the duality gap is at most gap_tol.
inline LinearModel train_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, Rng& rng, const SvmOptions& opts = {}) {
    const Index n = x.rows(), d = x.cols();
    if (static_cast<std::size_t>(n) != y.size() || n == 0) throw InvalidInput("svm: label count mismatch");
    if (!(opts.C > 0.0)) throw InvalidInput("svm: C must be positive");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v != 1 && v != -1) throw InvalidInput("svm: labels must be +1 or -1");
        (v > 0 ? pos : neg) = true;
    }
    if (!pos || !neg) throw InvalidInput("svm: training data has a single class");

    Eigen::MatrixXd xa(n, d + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    Eigen::VectorXd qd = xa.rowwise().squaredNorm();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    LinearModel m;
    for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            const auto ii = static_cast<Index>(i);
            const double yi = y[i];
            const double g = yi * w.dot(xa.row(ii)) - 1.0;
            double pg = g;
            if (alpha(ii) == 0.0) pg = std::min(g, 0.0);
            else if (alpha(ii) == opts.C) pg = std::max(g, 0.0);
            if (pg == 0.0) continue;
            const double old = alpha(ii);
            alpha(ii) = std::clamp(old - g / qd(ii), 0.0, opts.C);
            w += (alpha(ii) - old) * yi * xa.row(ii).transpose();
        }
        double hinge = 0.0;
        for (Index i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * w.dot(xa.row(i)));
        const double primal = 0.5 * w.squaredNorm() + opts.C * hinge;
        const double dual = alpha.sum() - 0.5 * w.squaredNorm();
        m.gap = primal - dual;
        m.epochs = epoch;
        if (m.gap <= opts.gap_tol) break;
    }
    if (m.gap > opts.gap_tol)
        throw ConvergenceError("svm: duality gap " + io::format_double(m.gap) + " after " + std::to_string(m.epochs) + " epochs");
    m.w = w.head(d);
    m.b = w(d);
    return m;
}

struct LoocvResult {
    std::vector<std::string> groups;  ///< the two group labels
    std::vector<double> accuracy;     ///< fraction of each group's subjects classified correctly
    std::vector<int> predicted;       ///< per subject: index into groups
};

/// Leave-one-out cross-validation of a linear SVM on the named features.
/// Features are z-scored with training-fold statistics. Each fold draws its
/// own rng stream from `rng`, so folds can run in parallel deterministically.
inline LoocvResult loocv_linear_svm(const GroupSample& sample, const std::vector<std::string>& features, Rng& rng,
                                    const SvmOptions& opts = {}) {
    const auto names = sample.group_names();
    if (names.size() != 2) throw InvalidInput("loocv: need exactly two groups, found " + std::to_string(names.size()));
    if (features.empty()) throw InvalidInput("loocv: no features selected");
    const Index n = static_cast<Index>(sample.subjects.size());
    Eigen::MatrixXd x(n, static_cast<Index>(features.size()));
    for (std::size_t f = 0; f < features.size(); ++f) x.col(static_cast<Index>(f)) = sample.values.col(sample.feature_index(features[f]));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) y[static_cast<std::size_t>(s)] = sample.groups[static_cast<std::size_t>(s)] == names[0] ? 1 : -1;

    std::vector<Rng> streams;
    for (Index s = 0; s < n; ++s) streams.push_back(rng.split());

    LoocvResult res;
    res.groups = names;
    res.predicted.assign(static_cast<std::size_t>(n), -1);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t held) {
        std::vector<Index> train;
        for (Index s = 0; s < n; ++s)
            if (static_cast<std::size_t>(s) != held) train.push_back(s);
        Eigen::MatrixXd xt(static_cast<Index>(train.size()), x.cols());
        std::vector<int> yt;
        for (std::size_t r = 0; r < train.size(); ++r) {
            xt.row(static_cast<Index>(r)) = x.row(train[r]);
            yt.push_back(y[static_cast<std::size_t>(train[r])]);
        }
        const Eigen::RowVectorXd mu = xt.colwise().mean();
        Eigen::RowVectorXd sd = ((xt.rowwise() - mu).colwise().squaredNorm() / std::max<double>(1.0, static_cast<double>(train.size()) - 1.0)).cwiseSqrt();
        for (Index c = 0; c < sd.size(); ++c)
            if (!(sd(c) > 0.0)) sd(c) = 1.0;
        xt = (xt.rowwise() - mu).array().rowwise() / sd.array();
        const LinearModel m = train_linear_svm(xt, yt, streams[held], opts);
        const Eigen::VectorXd probe = ((x.row(static_cast<Index>(held)) - mu).array() / sd.array()).transpose();
        res.predicted[held] = m.decision(probe) >= 0.0 ? 0 : 1;
    }, 1);

    std::vector<double> correct(2, 0.0), total(2, 0.0);
    for (Index s = 0; s < n; ++s) {
        const int truth = y[static_cast<std::size_t>(s)] > 0 ? 0 : 1;
        total[static_cast<std::size_t>(truth)] += 1.0;
        if (res.predicted[static_cast<std::size_t>(s)] == truth) correct[static_cast<std::size_t>(truth)] += 1.0;
    }
    res.accuracy = {correct[0] / total[0], correct[1] / total[1]};
    return res;
}

}  // namespace brainnet
