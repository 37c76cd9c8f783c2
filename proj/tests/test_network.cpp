#include <gtest/gtest.h>

#include <sstream>

#include "brainnet/graph_metrics.hpp"
#include "brainnet/network.hpp"
#include "brainnet/rng.hpp"

using namespace brainnet;

namespace {

struct Instance {
    SparseSymMatrix conn;
    Parcellation p;
};

Instance random_instance(Index n, int k, double density, Rng& rng) {
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j)
            if (rng.uniform() < density) t.push_back({i, j, std::floor(rng.uniform() * 20.0)});
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k) + 1;
    // Shuffle so regions are not simply strided.
    rng.shuffle(labels);
    return {SparseSymMatrix::from_triplets(n, t), Parcellation(labels, k)};
}

BrainNetwork uniform_complete(int k, double w) {
    BrainNetwork net;
    net.weights = Eigen::MatrixXd::Constant(k, k, w);
    net.weights.diagonal().setZero();
    return net;
}

}  // namespace

TEST(NetworkMax, TakesLargestVoxelPair) {
    // R1 = {a, b}, R2 = {c}
    const auto conn = SparseSymMatrix::from_triplets(3, std::vector<Triplet>{{0, 2, 3.0}, {1, 2, 5.0}});
    const Parcellation p({1, 1, 2}, 2);
    const auto net = build_network_max(conn, p);
    EXPECT_EQ(net.weights(0, 1), 5.0);
    EXPECT_EQ(net.weights(1, 0), 5.0);
}

TEST(NetworkMax, UnconnectedRegionsGetZero) {
    const auto conn = SparseSymMatrix::from_triplets(3, std::vector<Triplet>{{0, 1, 3.0}});
    const auto net = build_network_max(conn, Parcellation({1, 1, 2}, 2));
    EXPECT_EQ(net.weights(0, 1), 0.0);
    EXPECT_EQ(net.weights(0, 0), 3.0);
}

TEST(NetworkMax, MatchesBruteForce) {
    Rng rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = random_instance(20, 3, 0.3, rng);
        const auto net = build_network_max(inst.conn, inst.p);
        const Eigen::MatrixXd d = inst.conn.to_dense();
        for (int a = 1; a <= 3; ++a)
            for (int b = 1; b <= 3; ++b) {
                double best = 0.0;
                for (Index u = 0; u < 20; ++u)
                    for (Index v = 0; v < 20; ++v)
                        if (inst.p.label(static_cast<std::size_t>(u)) == a && inst.p.label(static_cast<std::size_t>(v)) == b)
                            best = std::max(best, d(u, v));
                EXPECT_EQ(net.weights(a - 1, b - 1), best);
            }
    }
}

TEST(NetworkMax, MonotoneInConnections) {
    Rng rng(2);
    const auto inst = random_instance(25, 4, 0.2, rng);
    const auto before = build_network_max(inst.conn, inst.p);
    auto trips = inst.conn.upper_triplets();
    for (auto& t : trips) t.value += rng.uniform();
    trips.push_back({0, 24, 50.0});
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    trips.erase(std::unique(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) { return a.row == b.row && a.col == b.col; }), trips.end());
    const auto after = build_network_max(SparseSymMatrix::from_triplets(25, trips), inst.p);
    EXPECT_TRUE((after.weights.array() >= before.weights.array()).all());
}

TEST(NetworkNormalized, HandBuiltInstance) {
    // R1 = {0, 1}, R2 = {2, 3}. Internal ordered-pair sums are 2 * 2 = 4,
    // cross ordered-pair sum (R1 -> R2) is 1.
    const auto conn = SparseSymMatrix::from_triplets(4, std::vector<Triplet>{{0, 1, 2.0}, {2, 3, 2.0}, {1, 2, 1.0}});
    const Parcellation p({1, 1, 2, 2}, 2);
    const Eigen::MatrixXd c = region_sums(conn, p);
    EXPECT_EQ(c(0, 0), 4.0);
    EXPECT_EQ(c(1, 1), 4.0);
    EXPECT_EQ(c(0, 1), 1.0);
    const auto net = build_network_normalized(conn, p);
    EXPECT_DOUBLE_EQ(net.weights(0, 1), 0.25);
}

TEST(NetworkNormalized, ZeroWithinSumGivesZeroWeight) {
    const auto conn = SparseSymMatrix::from_triplets(3, std::vector<Triplet>{{0, 2, 1.0}});
    const auto net = build_network_normalized(conn, Parcellation({1, 1, 2}, 2));
    EXPECT_EQ(net.weights(0, 1), 0.0);
}

TEST(NetworkNormalized, MatchesBruteForce) {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = random_instance(18, 3, 0.4, rng);
        const auto net = build_network_normalized(inst.conn, inst.p);
        const Eigen::MatrixXd d = inst.conn.to_dense();
        Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
        for (Index u = 0; u < 18; ++u)
            for (Index v = 0; v < 18; ++v) c(inst.p.label(static_cast<std::size_t>(u)) - 1, inst.p.label(static_cast<std::size_t>(v)) - 1) += d(u, v);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double want = c(i, i) > 0 && c(j, j) > 0 ? c(i, j) / std::sqrt(c(i, i) * c(j, j)) : 0.0;
                EXPECT_NEAR(net.weights(i, j), want, 1e-12);
            }
    }
}

TEST(NetworkNormalized, BoundedByOneForGramConnectivity) {
    // conn = X X^T is positive semidefinite, where Cauchy-Schwarz applies.
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(16, 5);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
        const Eigen::MatrixXd d = x * x.transpose();
        std::vector<Triplet> t;
        for (Index i = 0; i < 16; ++i)
            for (Index j = i; j < 16; ++j) t.push_back({i, j, d(i, j)});
        std::vector<int> raw(16);
        for (int v = 0; v < 16; ++v) raw[static_cast<std::size_t>(v)] = 1 + v % 4;
        const auto net = build_network_normalized(SparseSymMatrix::from_triplets(16, t), Parcellation(raw, 4));
        EXPECT_LE(net.weights.maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(NetworkNormalized, CanExceedOneForGeneralConnectivity) {
    // Within sums C11 = C22 = 2 (ordered pairs), cross sum C12 = 4: weight 4 / 2 = 2.
    const auto conn = SparseSymMatrix::from_triplets(4, std::vector<Triplet>{{0, 1, 1.0}, {2, 3, 1.0}, {0, 2, 2.0}, {1, 3, 2.0}});
    const auto net = build_network_normalized(conn, Parcellation({1, 1, 2, 2}, 2));
    EXPECT_DOUBLE_EQ(net.weights(0, 1), 2.0);
}

TEST(Network, PermutationEquivariant) {
    Rng rng(4);
    const auto inst = random_instance(30, 5, 0.3, rng);
    const std::vector<int> perm{3, 1, 5, 2, 4};  // old label -> new label
    std::vector<int> relabeled(inst.p.labels());
    for (auto& l : relabeled) l = perm[static_cast<std::size_t>(l - 1)];
    const Parcellation q(relabeled, 5);
    for (auto kind : {EdgeWeight::max, EdgeWeight::normalized}) {
        const auto a = build_network(inst.conn, inst.p, kind);
        const auto b = build_network(inst.conn, q, kind);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) EXPECT_NEAR(a.weights(i, j), b.weights(perm[static_cast<std::size_t>(i)] - 1, perm[static_cast<std::size_t>(j)] - 1), 1e-12);
    }
}

TEST(Network, RejectsSizeMismatch) {
    const SparseSymMatrix conn(4);
    EXPECT_THROW(build_network_max(conn, Parcellation({1, 2, 2}, 2)), InvalidInput);
}

TEST(Preprocess, UniformCompleteBecomesComplete) {
    const auto g = preprocess(uniform_complete(5, 3.0), 0.01);
    EXPECT_EQ(g.size(), 5);
    EXPECT_EQ(g.edge_count(), 10u);
    EXPECT_TRUE(g.removed().empty());
}

TEST(Preprocess, ZeroEpsKeepsEveryPositiveWeight) {
    BrainNetwork net = uniform_complete(4, 0.0);
    net.weights(0, 1) = net.weights(1, 0) = 1e-9;
    net.weights(2, 3) = net.weights(3, 2) = 5.0;
    net.weights(1, 2) = net.weights(2, 1) = 1.0;
    const auto g = preprocess(net, 0.0);
    EXPECT_EQ(g.edge_count(), 3u);
}

TEST(Preprocess, LeafWeakFromBothEndsIsRemoved) {
    // A triangle 0-1-2 of weight 10, plus node 3 tied to each of them by 0.01.
    // Node 3's row normalizes to 1/3 per edge, and the triangle rows give
    // each tie about 5e-4, so eps = 0.4 cuts node 3 off from both ends.
    BrainNetwork net = uniform_complete(4, 0.0);
    for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}}) net.weights(a, b) = net.weights(b, a) = 10.0;
    for (int a = 0; a < 3; ++a) net.weights(a, 3) = net.weights(3, a) = 0.01;
    const auto g = preprocess(net, 0.4);
    EXPECT_EQ(g.size(), 3);
    EXPECT_EQ(g.removed(), (std::vector<int>{3}));
    EXPECT_EQ(g.original_ids(), (std::vector<int>{0, 1, 2}));
}

TEST(Preprocess, SingleEdgeLeafSurvivesFromItsOwnSide) {
    // A leaf's only edge normalizes to 1 on the leaf's row, so OR keeps it.
    BrainNetwork net = uniform_complete(4, 0.0);
    for (int leaf = 1; leaf <= 2; ++leaf) net.weights(0, leaf) = net.weights(leaf, 0) = 1000.0;
    net.weights(0, 3) = net.weights(3, 0) = 0.001;
    net.weights(3, 3) = 100.0;
    const auto g = preprocess(net, 0.01);
    EXPECT_EQ(g.size(), 4);
    EXPECT_TRUE(g.has_edge(0, 3));
}

TEST(Preprocess, AllIsolatedIsAnError) {
    EXPECT_THROW(preprocess(uniform_complete(4, 0.0), 0.01), InvalidInput);
}

TEST(Preprocess, EdgeSetsNestAndSparsityFallsWithEps) {
    Rng rng(5);
    BrainNetwork net;
    net.weights = Eigen::MatrixXd::Zero(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = i + 1; j < 40; ++j) net.weights(i, j) = net.weights(j, i) = std::exp(3.0 * rng.normal());
    const std::vector<double> eps{0.0, 1e-4, 1e-3, 1e-2, 3e-2};
    std::vector<std::vector<char>> prev;
    double prev_sparsity = 2.0;
    for (double e : eps) {
        const auto keep = surviving_edges(net, e);
        if (!prev.empty())
            for (int i = 0; i < 40; ++i)
                for (int j = 0; j < 40; ++j)
                    if (keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) EXPECT_TRUE(prev[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        prev = keep;
        std::size_t edges = 0;
        for (int i = 0; i < 40; ++i)
            for (int j = i + 1; j < 40; ++j) edges += static_cast<std::size_t>(keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        const double s = 2.0 * static_cast<double>(edges) / (40.0 * 39.0);
        EXPECT_LE(s, prev_sparsity);
        prev_sparsity = s;
    }
}

TEST(ThresholdWeighted, KeepsOriginalWeightsOfSurvivors) {
    BrainNetwork net = uniform_complete(3, 0.0);
    net.weights(0, 1) = net.weights(1, 0) = 100.0;
    net.weights(0, 2) = net.weights(2, 0) = 0.5;
    net.weights(1, 1) = 7.0;
    const auto t = threshold_weighted(net, 0.01);
    EXPECT_EQ(t.weights(0, 1), 100.0);
    EXPECT_EQ(t.weights(0, 2), 0.5);  // survives from node 2's side
    EXPECT_EQ(t.weights(1, 1), 0.0);
}

TEST(NetworkIo, RoundTripWithHeader) {
    BrainNetwork net = uniform_complete(4, 0.0);
    net.weights(0, 1) = net.weights(1, 0) = 0.1;
    net.weights(1, 2) = net.weights(2, 1) = 1.0 / 3.0;
    std::stringstream s;
    write_network(net, s);
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "# network k=4 removed=3");
    const auto back = read_network(s);
    EXPECT_EQ(back.weights, net.weights);
}

TEST(NetworkIo, HeaderlessEdgeList) {
    std::istringstream in("0 1 1\n0 2 1\n1 2 1\n");
    const auto net = read_network(in);
    EXPECT_EQ(net.k(), 3);
    EXPECT_EQ(net.weights(2, 1), 1.0);
}
