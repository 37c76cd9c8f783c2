#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/core.hpp"
#include "brainnet/rng.hpp"

namespace brainnet {

/// Eigenpairs in ascending eigenvalue order, one unit-norm column per value.
struct EigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd residuals;
    int restarts = 0;
    std::size_t matvecs = 0;
};

/// Flips each column so that its largest-magnitude entry is positive.
inline void fix_signs(Eigen::MatrixXd& vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

/// Full spectrum of a dense symmetric matrix.
inline EigResult dense_sym_eig(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw InvalidInput("dense_sym_eig: matrix is not square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw InvalidInput("dense_sym_eig: matrix asymmetric by " + std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw ConvergenceError("dense_sym_eig: decomposition failed");
    EigResult r;
    r.values = solver.eigenvalues();
    r.vectors = solver.eigenvectors();
    fix_signs(r.vectors);
    r.residuals.resize(r.values.size());
    for (Index i = 0; i < r.values.size(); ++i)
        r.residuals(i) = (a * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm();
    return r;
}

struct LanczosOptions {
    double tol = 1e-8;       ///< bound on ||Ax - theta x|| per returned pair
    int max_restarts = 1000;
    int subspace = 0;        ///< Krylov dimension; 0 picks min(n, max(2k+1, 40))
};

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

namespace detail {

/// Removes the components of w along the columns of basis (two passes of
/// classical Gram-Schmidt).
inline void orthogonalize(Eigen::VectorXd& w, const Eigen::Ref<const Eigen::MatrixXd>& basis) {
    if (basis.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= basis * (basis.transpose() * w);
}

inline Eigen::VectorXd random_unit(Index n, Rng& rng, const Eigen::MatrixXd& locked,
                                   const Eigen::Ref<const Eigen::MatrixXd>& basis) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::VectorXd v(n);
        for (Index i = 0; i < n; ++i) v(i) = rng.normal();
        orthogonalize(v, locked);
        orthogonalize(v, basis);
        const double norm = v.norm();
        if (norm > 1e-8) return v / norm;
    }
    throw ConvergenceError("lanczos: cannot extend an exhausted Krylov basis");
}

}  // namespace detail

/// Largest k eigenpairs of a symmetric operator, restricted to the orthogonal
/// complement of `locked` (orthonormal columns, may be empty).
///
/// Thick-restart Lanczos with full reorthogonalization. After each cycle the
/// top Ritz vectors are kept together with the residual direction, so the
/// projected matrix is an arrowhead followed by a tridiagonal tail. Results
/// come back in descending order.
inline EigResult lanczos_largest(const MatVec& op, Index n, int k, const LanczosOptions& opts, Rng& rng,
                                 const Eigen::MatrixXd& locked = Eigen::MatrixXd()) {
    const Index avail = n - locked.cols();
    if (k < 1) throw InvalidInput("lanczos: k must be positive");
    if (k > avail)
        throw InvalidInput("lanczos: requested " + std::to_string(k) + " pairs from a space of dimension " +
                           std::to_string(avail));
    const Index m = opts.subspace > 0 ? std::min<Index>(avail, std::max<Index>(opts.subspace, k + 1))
                                      : std::min<Index>(avail, std::max<Index>(2 * k + 1, 40));
    // Internal target sits below tol so the explicitly recomputed residuals
    // still satisfy the bound.
    const double target = 0.25 * opts.tol;

    Eigen::MatrixXd basis(n, m + 1);
    Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
    basis.col(0) = detail::random_unit(n, rng, locked, basis.leftCols(0));

    EigResult out;
    Eigen::VectorXd w(n);
    Index start = 0;
    double norm_est = 0.0;

    for (int cycle = 0;; ++cycle) {
        Index used = m;
        double beta_last = 0.0;
        bool exhausted = false;
        for (Index j = start; j < m; ++j) {
            op(basis.col(j), w);
            ++out.matvecs;
            detail::orthogonalize(w, locked);
            const double alpha = basis.col(j).dot(w);
            tmat(j, j) = alpha;
            detail::orthogonalize(w, basis.leftCols(j + 1));
            const double beta = w.norm();
            norm_est = std::max({norm_est, std::abs(alpha), beta});
            if (j + 1 + locked.cols() >= n) {
                // Krylov space fills the whole admissible space: projection is exact.
                used = j + 1;
                exhausted = true;
                break;
            }
            if (beta <= 1e-12 * std::max(1.0, norm_est)) {
                basis.col(j + 1) = detail::random_unit(n, rng, locked, basis.leftCols(j + 1));
                if (j + 1 < m) tmat(j + 1, j) = tmat(j, j + 1) = 0.0;
                else beta_last = 0.0;
                continue;
            }
            basis.col(j + 1) = w / beta;
            if (j + 1 < m) tmat(j + 1, j) = tmat(j, j + 1) = beta;
            else beta_last = beta;
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(tmat.topLeftCorner(used, used));
        if (ritz.info() != Eigen::Success) throw ConvergenceError("lanczos: projected eigenproblem failed");
        const Eigen::VectorXd& theta = ritz.eigenvalues();
        const Eigen::MatrixXd& y = ritz.eigenvectors();

        const Index want = std::min<Index>(k, used);
        bool converged = want == k;
        Eigen::VectorXd est(want);
        for (Index t = 0; t < want; ++t) {
            est(t) = std::abs(beta_last * y(used - 1, used - 1 - t));
            if (est(t) > target) converged = false;
        }

        if (converged || exhausted) {
            if (want < k) throw ConvergenceError("lanczos: Krylov space smaller than k");
            out.values.resize(k);
            out.vectors.resize(n, k);
            for (Index t = 0; t < k; ++t) {
                out.values(t) = theta(used - 1 - t);
                out.vectors.col(t) = basis.leftCols(used) * y.col(used - 1 - t);
                out.vectors.col(t).normalize();
            }
            out.residuals = est;
            out.restarts = cycle;
            return out;
        }
        if (cycle >= opts.max_restarts)
            throw ConvergenceError("lanczos: no convergence after " + std::to_string(cycle) +
                                   " restarts; worst residual estimate " + std::to_string(est.maxCoeff()));

        // Keep the top `keep` Ritz vectors plus the residual direction.
        const Index keep = std::min<Index>(used - 1, k + (used - k) / 2);
        Eigen::MatrixXd kept(n, keep);
        for (Index t = 0; t < keep; ++t) kept.col(t) = basis.leftCols(used) * y.col(used - 1 - t);
        basis.col(keep) = basis.col(used);
        basis.leftCols(keep) = kept;
        tmat.setZero();
        for (Index t = 0; t < keep; ++t) {
            tmat(t, t) = theta(used - 1 - t);
            tmat(t, keep) = tmat(keep, t) = beta_last * y(used - 1, used - 1 - t);
        }
        start = keep;
    }
}

/// D^{-1/2} (D - W) D^{-1/2}. Throws on a zero-degree row.
inline SparseSymMatrix normalized_laplacian(const SparseSymMatrix& w) {
    const auto degree = w.row_sums();
    std::vector<double> inv_sqrt(degree.size());
    for (std::size_t i = 0; i < degree.size(); ++i) {
        if (!(degree[i] > 0.0))
            throw InvalidInput("normalized_laplacian: node " + std::to_string(i) + " has zero degree");
        inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
    }
    std::vector<Triplet> trips;
    std::vector<double> diag(degree.size(), 1.0);
    for (const auto& t : w.upper_triplets()) {
        const double s = inv_sqrt[static_cast<std::size_t>(t.row)] * inv_sqrt[static_cast<std::size_t>(t.col)];
        if (t.row == t.col)
            diag[static_cast<std::size_t>(t.row)] -= t.value * s;
        else
            trips.push_back({t.row, t.col, -t.value * s});
    }
    for (std::size_t i = 0; i < diag.size(); ++i) trips.push_back({static_cast<Index>(i), static_cast<Index>(i), diag[i]});
    return SparseSymMatrix::from_triplets(w.n(), trips);
}

/// Smallest k eigenpairs of a symmetric normalized Laplacian (spectrum in
/// [0, 2]), found as the largest pairs of 2I - L using only products with L.
///
/// A single Krylov sequence sees one direction per repeated eigenvalue, so
/// after convergence the solver searches the complement of the accepted
/// vectors and merges anything that beats the current k-th value; this
/// repeats until the complement has nothing better. That recovers repeated
/// eigenvalues such as the zero eigenvalue of a disconnected graph.
inline EigResult smallest_k(const SparseSymMatrix& lsym, int k, Rng& rng, const LanczosOptions& opts = {}) {
    const Index n = lsym.n();
    if (k < 1) throw InvalidInput("smallest_k: k must be positive");
    if (k >= n)
        throw InvalidInput("smallest_k: k=" + std::to_string(k) + " must be below n=" + std::to_string(n));
    const MatVec shifted = [&lsym](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.resize(x.size());
        lsym.multiply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                      std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
        y = 2.0 * x - y;
    };

    EigResult best = lanczos_largest(shifted, n, k, opts, rng);
    for (;;) {
        const Index room = n - best.vectors.cols();
        if (room <= 0) break;
        const int extra = static_cast<int>(std::min<Index>(k, room));
        EigResult more = lanczos_largest(shifted, n, extra, opts, rng, best.vectors);
        best.matvecs += more.matvecs;
        best.restarts += more.restarts;
        const double floor = best.values(k - 1);
        if (more.values(0) <= floor + opts.tol) break;
        // Merge both descending lists and keep the top k.
        std::vector<std::pair<double, Eigen::VectorXd>> pool;
        for (Index t = 0; t < k; ++t) pool.emplace_back(best.values(t), best.vectors.col(t));
        for (Index t = 0; t < more.values.size(); ++t) pool.emplace_back(more.values(t), more.vectors.col(t));
        std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (Index t = 0; t < k; ++t) {
            best.values(t) = pool[static_cast<std::size_t>(t)].first;
            best.vectors.col(t) = pool[static_cast<std::size_t>(t)].second;
        }
    }

    // Map back to the Laplacian, ascending, and verify the shift explicitly.
    EigResult out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    out.residuals.resize(k);
    out.matvecs = best.matvecs;
    out.restarts = best.restarts;
    for (Index t = 0; t < k; ++t) {
        out.values(t) = 2.0 - best.values(t);
        out.vectors.col(t) = best.vectors.col(t);
    }
    fix_signs(out.vectors);
    for (Index t = 0; t < k; ++t) {
        const Eigen::VectorXd lx = lsym.multiply(Eigen::VectorXd(out.vectors.col(t)));
        out.residuals(t) = (lx - out.values(t) * out.vectors.col(t)).norm();
        if (out.residuals(t) > opts.tol)
            throw ConvergenceError("smallest_k: residual " + std::to_string(out.residuals(t)) + " for pair " +
                                   std::to_string(t) + " exceeds tolerance");
    }
    return out;
}

}  // namespace brainnet
