#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "brainnet/core.hpp"

namespace brainnet::io {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

/// Line reader that drops '#' comments and blank lines and tracks line numbers.
class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    /// Next non-empty line split into whitespace-separated fields.
    std::optional<std::vector<std::string>> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::istringstream ss(line);
            std::vector<std::string> fields;
            for (std::string f; ss >> f;) fields.push_back(std::move(f));
            if (!fields.empty()) return fields;
        }
        return std::nullopt;
    }

    std::size_t line() const noexcept { return line_no_; }
    const std::string& source() const noexcept { return source_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

    template <class T>
    T parse(const std::string& field, const char* what) const {
        T value{};
        if constexpr (std::is_floating_point_v<T>) {
            // from_chars for double is unavailable on some toolchains; strtod is exact.
            char* end = nullptr;
            value = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0') fail(std::string("bad ") + what + " '" + field + "'");
        } else {
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc{} || ptr != field.data() + field.size())
                fail(std::string("bad ") + what + " '" + field + "'");
        }
        return value;
    }

    void expect_fields(const std::vector<std::string>& f, std::size_t n, const char* what) const {
        if (f.size() != n)
            fail(std::string("expected ") + std::to_string(n) + " fields for " + what + ", got " +
                 std::to_string(f.size()));
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace detail

// ---- mask ----------------------------------------------------------------

inline VoxelMask read_mask(std::istream& in, const std::string& source = "<mask>") {
    detail::LineReader r(in, source);
    auto header = r.next();
    if (!header) throw ParseError(source, r.line(), "missing dimension header");
    r.expect_fields(*header, 3, "dimension header");
    Dims dims{r.parse<int>((*header)[0], "nx"), r.parse<int>((*header)[1], "ny"), r.parse<int>((*header)[2], "nz")};
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) r.fail("dimensions must be positive");
    std::vector<Coord> voxels;
    std::map<std::tuple<int, int, int>, std::size_t> first_seen;
    while (auto f = r.next()) {
        r.expect_fields(*f, 3, "voxel");
        Coord c{r.parse<int>((*f)[0], "x"), r.parse<int>((*f)[1], "y"), r.parse<int>((*f)[2], "z")};
        if (!dims.contains(c)) r.fail("voxel " + VoxelMask::describe(c) + " out of bounds");
        auto [it, inserted] = first_seen.try_emplace({c.x, c.y, c.z}, r.line());
        if (!inserted)
            r.fail("duplicate voxel " + VoxelMask::describe(c) + " (first at line " + std::to_string(it->second) + ")");
        voxels.push_back(c);
    }
    if (voxels.empty()) throw InvalidInput(source + ": empty mask");
    return VoxelMask(dims, std::move(voxels));
}

inline VoxelMask read_mask(const std::string& path) {
    auto in = detail::open_in(path);
    return read_mask(in, path);
}

inline void write_mask(const VoxelMask& mask, std::ostream& out) {
    const auto& d = mask.dims();
    out << d.nx << ' ' << d.ny << ' ' << d.nz << '\n';
    for (const auto& c : mask.voxels()) out << c.x << ' ' << c.y << ' ' << c.z << '\n';
}

inline void write_mask(const VoxelMask& mask, const std::string& path) {
    auto out = detail::open_out(path);
    write_mask(mask, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ---- sparse matrix -------------------------------------------------------

struct SparseReadOptions {
    /// Reject negative weights (connectivity inputs are streamline counts).
    bool strict_nonnegative = false;
};

inline SparseSymMatrix read_sparse(std::istream& in, Index n, const std::string& source = "<sparse>",
                                   SparseReadOptions opts = {}) {
    detail::LineReader r(in, source);
    struct Seen {
        double value;
        bool transposed;
        std::size_t line;
    };
    std::map<std::pair<Index, Index>, Seen> seen;
    std::vector<Triplet> entries;
    while (auto f = r.next()) {
        r.expect_fields(*f, 3, "triple");
        const auto i = r.parse<Index>((*f)[0], "row index");
        const auto j = r.parse<Index>((*f)[1], "column index");
        const auto w = r.parse<double>((*f)[2], "weight");
        if (i < 0 || j < 0 || i >= n || j >= n)
            r.fail("index (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for n=" + std::to_string(n));
        if (opts.strict_nonnegative && w < 0.0) r.fail("negative weight " + (*f)[2]);
        const bool transposed = i > j;
        const auto key = std::minmax(i, j);
        auto [it, inserted] = seen.try_emplace({key.first, key.second}, Seen{w, transposed, r.line()});
        if (!inserted) {
            if (it->second.transposed == transposed || i == j)
                r.fail("duplicate entry (" + std::to_string(i) + "," + std::to_string(j) + "), first at line " +
                       std::to_string(it->second.line));
            if (it->second.value != w)
                r.fail("asymmetric entries for (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                       "): " + format_double(it->second.value) + " vs " + format_double(w));
            continue;
        }
        entries.push_back({key.first, key.second, w});
    }
    return SparseSymMatrix::from_triplets(n, entries);
}

inline SparseSymMatrix read_sparse(const std::string& path, Index n, SparseReadOptions opts = {}) {
    auto in = detail::open_in(path);
    return read_sparse(in, n, path, opts);
}

inline void write_sparse(const SparseSymMatrix& m, std::ostream& out) {
    for (const auto& t : m.upper_triplets()) out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
}

inline void write_sparse(const SparseSymMatrix& m, const std::string& path) {
    auto out = detail::open_out(path);
    write_sparse(m, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Largest index mentioned in a triples file plus one; lets tools infer n.
inline Index infer_dimension(std::istream& in, const std::string& source = "<sparse>") {
    detail::LineReader r(in, source);
    Index n = 0;
    while (auto f = r.next()) {
        r.expect_fields(*f, 3, "triple");
        n = std::max({n, r.parse<Index>((*f)[0], "row index") + 1, r.parse<Index>((*f)[1], "column index") + 1});
    }
    return n;
}

// ---- parcellation --------------------------------------------------------

inline void write_parcellation(const Parcellation& p, std::ostream& out) {
    out << p.size() << ' ' << p.k() << '\n';
    for (int l : p.labels()) out << l << '\n';
}

inline void write_parcellation(const Parcellation& p, const std::string& path) {
    auto out = detail::open_out(path);
    write_parcellation(p, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// expected_n < 0 accepts whatever size the header declares.
inline Parcellation read_parcellation(std::istream& in, Index expected_n, const std::string& source = "<parcellation>") {
    detail::LineReader r(in, source);
    auto header = r.next();
    if (!header) throw ParseError(source, r.line(), "missing 'n k' header");
    r.expect_fields(*header, 2, "header");
    const auto n = r.parse<Index>((*header)[0], "voxel count");
    const auto k = r.parse<int>((*header)[1], "region count");
    if (n < 0 || k < 0) r.fail("negative header value");
    if (expected_n >= 0 && n != expected_n)
        r.fail("parcellation has " + std::to_string(n) + " voxels, expected " + std::to_string(expected_n));
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    while (auto f = r.next()) {
        r.expect_fields(*f, 1, "label");
        if (static_cast<Index>(labels.size()) == n) r.fail("more than " + std::to_string(n) + " labels");
        const int l = r.parse<int>((*f)[0], "label");
        if (l < 0 || l > k) r.fail("label " + std::to_string(l) + " outside 0.." + std::to_string(k));
        labels.push_back(l);
    }
    if (static_cast<Index>(labels.size()) != n)
        throw ParseError(source, r.line(),
                         "missing voxel lines: got " + std::to_string(labels.size()) + " of " + std::to_string(n));
    try {
        return Parcellation(std::move(labels), k);
    } catch (const InvalidInput& e) {
        throw ParseError(source, r.line(), e.what());
    }
}

inline Parcellation read_parcellation(const std::string& path, Index expected_n = -1) {
    auto in = detail::open_in(path);
    return read_parcellation(in, expected_n, path);
}

}  // namespace brainnet::io
