#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "brainnet/error.hpp"
#include "brainnet/parallel.hpp"

namespace brainnet {

using Index = std::int64_t;

struct Coord {
    int x = 0;
    int y = 0;
    int z = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
};

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::int64_t volume() const { return std::int64_t{nx} * ny * nz; }
    bool contains(const Coord& c) const {
        return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < nx && c.y < ny && c.z < nz;
    }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// In-mask voxels of a 3D lattice, densely indexed in insertion (file) order.
class VoxelMask {
public:
    VoxelMask() = default;

    /// Throws InvalidInput on an empty list, a duplicate coordinate or a
    /// coordinate outside dims.
    VoxelMask(Dims dims, std::vector<Coord> voxels) : dims_(dims), voxels_(std::move(voxels)) {
        if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0)
            throw InvalidInput("mask dimensions must be positive");
        if (voxels_.empty()) throw InvalidInput("empty mask");
        lookup_.assign(static_cast<std::size_t>(dims_.volume()), -1);
        for (std::size_t i = 0; i < voxels_.size(); ++i) {
            const Coord& c = voxels_[i];
            if (!dims_.contains(c))
                throw InvalidInput("voxel " + describe(c) + " out of bounds");
            auto& slot = lookup_[linear(c)];
            if (slot >= 0) throw InvalidInput("duplicate voxel " + describe(c));
            slot = static_cast<Index>(i);
        }
    }

    /// Every lattice point of a dims-sized cuboid, x fastest.
    static VoxelMask cuboid(Dims dims) {
        std::vector<Coord> v;
        v.reserve(static_cast<std::size_t>(dims.volume()));
        for (int z = 0; z < dims.nz; ++z)
            for (int y = 0; y < dims.ny; ++y)
                for (int x = 0; x < dims.nx; ++x) v.push_back({x, y, z});
        return VoxelMask(dims, std::move(v));
    }

    const Dims& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return voxels_.size(); }
    const std::vector<Coord>& voxels() const noexcept { return voxels_; }
    const Coord& coord(std::size_t i) const { return voxels_[i]; }

    /// Dense index of c, or -1 when c is outside the mask.
    Index index_of(const Coord& c) const {
        if (!dims_.contains(c)) return -1;
        return lookup_[linear(c)];
    }

    static std::string describe(const Coord& c) {
        return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
    }

private:
    std::size_t linear(const Coord& c) const {
        return static_cast<std::size_t>((std::int64_t{c.z} * dims_.ny + c.y) * dims_.nx + c.x);
    }

    Dims dims_;
    std::vector<Coord> voxels_;
    std::vector<Index> lookup_;
};

struct Triplet {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
};

/// Symmetric sparse matrix in compressed-row form, both triangles stored.
///
/// Built from upper-or-lower triplets; value(i,j) == value(j,i) always holds.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    explicit SparseSymMatrix(Index n) : n_(n), row_ptr_(static_cast<std::size_t>(n) + 1, 0) {}

    /// Each undirected pair may appear at most once, as (i,j) or (j,i).
    /// Throws InvalidInput on out-of-range indices or duplicate pairs.
    static SparseSymMatrix from_triplets(Index n, std::span<const Triplet> entries) {
        SparseSymMatrix m(n);
        std::vector<Triplet> full;
        full.reserve(entries.size() * 2);
        for (const auto& t : entries) {
            if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n)
                throw InvalidInput("index (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                   ") out of range for n=" + std::to_string(n));
            full.push_back(t);
            if (t.row != t.col) full.push_back({t.col, t.row, t.value});
        }
        std::sort(full.begin(), full.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t i = 1; i < full.size(); ++i) {
            if (full[i].row == full[i - 1].row && full[i].col == full[i - 1].col)
                throw InvalidInput("duplicate entry (" + std::to_string(full[i].row) + "," +
                                   std::to_string(full[i].col) + ")");
        }
        m.cols_.reserve(full.size());
        m.vals_.reserve(full.size());
        for (const auto& t : full) {
            ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
            m.cols_.push_back(t.col);
            m.vals_.push_back(t.value);
        }
        std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
        return m;
    }

    Index n() const noexcept { return n_; }
    /// Stored entries, counting both triangles.
    std::size_t stored() const noexcept { return vals_.size(); }

    std::span<const Index> row_cols(Index i) const {
        const auto b = row_ptr_[static_cast<std::size_t>(i)];
        const auto e = row_ptr_[static_cast<std::size_t>(i) + 1];
        return {cols_.data() + b, static_cast<std::size_t>(e - b)};
    }
    std::span<const double> row_values(Index i) const {
        const auto b = row_ptr_[static_cast<std::size_t>(i)];
        const auto e = row_ptr_[static_cast<std::size_t>(i) + 1];
        return {vals_.data() + b, static_cast<std::size_t>(e - b)};
    }

    double value(Index i, Index j) const {
        const auto cols = row_cols(i);
        const auto it = std::lower_bound(cols.begin(), cols.end(), j);
        if (it == cols.end() || *it != j) return 0.0;
        return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
    }

    /// Entries with row <= col, row-major order.
    std::vector<Triplet> upper_triplets() const {
        std::vector<Triplet> out;
        for (Index i = 0; i < n_; ++i) {
            const auto cols = row_cols(i);
            const auto vals = row_values(i);
            for (std::size_t t = 0; t < cols.size(); ++t)
                if (cols[t] >= i) out.push_back({i, cols[t], vals[t]});
        }
        return out;
    }

    /// y = A x. Rows are independent, so the result is bitwise identical for
    /// any thread count.
    void multiply(std::span<const double> x, std::span<double> y) const {
        parallel_for(static_cast<std::size_t>(n_), [&](std::size_t i) {
            const auto cols = row_cols(static_cast<Index>(i));
            const auto vals = row_values(static_cast<Index>(i));
            double acc = 0.0;
            for (std::size_t t = 0; t < cols.size(); ++t) acc += vals[t] * x[static_cast<std::size_t>(cols[t])];
            y[i] = acc;
        }, 512);
    }

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y(n_);
        multiply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                 std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
        return y;
    }

    /// Row sums (weighted degrees).
    std::vector<double> row_sums() const {
        std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
        for (Index i = 0; i < n_; ++i)
            for (double v : row_values(i)) d[static_cast<std::size_t>(i)] += v;
        return d;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
        for (Index i = 0; i < n_; ++i) {
            const auto cols = row_cols(i);
            const auto vals = row_values(i);
            for (std::size_t t = 0; t < cols.size(); ++t) d(i, cols[t]) = vals[t];
        }
        return d;
    }

    bool all_nonnegative() const {
        return std::all_of(vals_.begin(), vals_.end(), [](double v) { return v >= 0.0; });
    }

private:
    Index n_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<Index> cols_;
    std::vector<double> vals_;
};

/// Voxel-to-region labelling. Labels are 1..k; 0 marks an excluded voxel.
class Parcellation {
public:
    Parcellation() = default;

    /// Throws InvalidInput when a label exceeds k or a region 1..k is empty.
    Parcellation(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
        if (k_ < 0) throw InvalidInput("region count must be non-negative");
        std::vector<char> seen(static_cast<std::size_t>(k_) + 1, 0);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            const int l = labels_[i];
            if (l < 0 || l > k_)
                throw InvalidInput("label " + std::to_string(l) + " at voxel " + std::to_string(i) +
                                   " outside 0.." + std::to_string(k_));
            seen[static_cast<std::size_t>(l)] = 1;
        }
        for (int r = 1; r <= k_; ++r)
            if (!seen[static_cast<std::size_t>(r)]) throw InvalidInput("region " + std::to_string(r) + " is empty");
    }

    /// Relabels arbitrary non-negative ids to 1..k in order of first
    /// appearance; id 0 stays excluded.
    static Parcellation compact(std::span<const int> raw) {
        std::unordered_map<int, int> remap;
        std::vector<int> out(raw.size(), 0);
        int next = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] <= 0) continue;
            auto [it, inserted] = remap.try_emplace(raw[i], next + 1);
            if (inserted) ++next;
            out[i] = it->second;
        }
        return Parcellation(std::move(out), next);
    }

    std::size_t size() const noexcept { return labels_.size(); }
    int k() const noexcept { return k_; }
    int label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    /// Voxel indices per region; entry r-1 lists region r.
    std::vector<std::vector<Index>> members() const {
        std::vector<std::vector<Index>> m(static_cast<std::size_t>(k_));
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] > 0) m[static_cast<std::size_t>(labels_[i] - 1)].push_back(static_cast<Index>(i));
        return m;
    }

    std::vector<std::size_t> region_sizes() const {
        std::vector<std::size_t> s(static_cast<std::size_t>(k_), 0);
        for (int l : labels_)
            if (l > 0) ++s[static_cast<std::size_t>(l - 1)];
        return s;
    }

    std::size_t excluded_count() const {
        return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 0));
    }

    friend bool operator==(const Parcellation&, const Parcellation&) = default;

private:
    std::vector<int> labels_;
    int k_ = 0;
};

}  // namespace brainnet
