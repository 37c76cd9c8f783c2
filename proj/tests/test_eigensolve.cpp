#include <gtest/gtest.h>

#include "brainnet/eigensolve.hpp"
#include "test_graphs.hpp"

using namespace brainnet;

TEST(DenseEig, IdentityAndDiagonal) {
    const auto id = dense_sym_eig(Eigen::MatrixXd::Identity(3, 3));
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(id.values(i), 1.0);

    Eigen::MatrixXd d = Eigen::Vector3d(3, 1, 2).asDiagonal();
    const auto r = dense_sym_eig(d);
    EXPECT_DOUBLE_EQ(r.values(0), 1.0);
    EXPECT_DOUBLE_EQ(r.values(1), 2.0);
    EXPECT_DOUBLE_EQ(r.values(2), 3.0);
    EXPECT_DOUBLE_EQ(std::abs(r.vectors(1, 0)), 1.0);
    EXPECT_DOUBLE_EQ(std::abs(r.vectors(2, 1)), 1.0);
    EXPECT_DOUBLE_EQ(std::abs(r.vectors(0, 2)), 1.0);
}

TEST(DenseEig, TraceAndResiduals) {
    Rng rng(1);
    Eigen::MatrixXd a(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
    const auto r = dense_sym_eig(a);
    EXPECT_NEAR(r.values.sum(), a.trace(), 1e-9);
    const double norm = a.norm();
    for (int i = 0; i < 50; ++i) EXPECT_LE((a * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm(), 1e-8 * norm);
}

TEST(DenseEig, RejectsAsymmetry) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    a(0, 1) = 1e-6;
    EXPECT_THROW(dense_sym_eig(a), InvalidInput);
}

TEST(SmallestK, MatchesDenseOnRandomLaplacians) {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const auto w = testing_graphs::random_weighted(200, 0.05, rng, true);
        const auto l = normalized_laplacian(w);
        const auto dense = dense_sym_eig(l.to_dense());
        const auto it = smallest_k(l, 10, rng);
        for (int i = 0; i < 10; ++i) EXPECT_NEAR(it.values(i), dense.values(i), 1e-8);
        EXPECT_LE((it.vectors.transpose() * it.vectors - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-8);
        for (int i = 0; i < 10; ++i) {
            EXPECT_LE(it.residuals(i), 1e-8);
            EXPECT_GE(it.values(i), -1e-8);
            EXPECT_LE(it.values(i), 2.0 + 1e-8);
        }
    }
}

TEST(SmallestK, ZeroMultiplicityEqualsComponentCount) {
    // Three disjoint 10-cliques.
    std::vector<Triplet> t;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 10; ++i)
            for (int j = i + 1; j < 10; ++j) t.push_back({c * 10 + i, c * 10 + j, 1.0});
    const auto l = normalized_laplacian(SparseSymMatrix::from_triplets(30, t));
    Rng rng(3);
    const auto r = smallest_k(l, 5, rng);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.values(i), 0.0, 1e-8);
    EXPECT_NEAR(r.values(3), 10.0 / 9.0, 1e-8);
}

TEST(SmallestK, SingleEdge) {
    const auto l = normalized_laplacian(SparseSymMatrix::from_triplets(2, std::vector<Triplet>{{0, 1, 1.0}}));
    Rng rng(4);
    const auto r = smallest_k(l, 1, rng);
    EXPECT_NEAR(r.values(0), 0.0, 1e-8);
    const auto d = dense_sym_eig(l.to_dense());
    EXPECT_NEAR(d.values(0), 0.0, 1e-12);
    EXPECT_NEAR(d.values(1), 2.0, 1e-12);
}

TEST(SmallestK, RejectsKNotBelowN) {
    const auto l = normalized_laplacian(SparseSymMatrix::from_triplets(2, std::vector<Triplet>{{0, 1, 1.0}}));
    Rng rng(4);
    EXPECT_THROW(smallest_k(l, 2, rng), InvalidInput);
}

TEST(SmallestK, DeterministicForFixedSeed) {
    Rng g(5);
    const auto l = normalized_laplacian(testing_graphs::random_weighted(120, 0.08, g, true));
    Rng a(77), b(77);
    const auto ra = smallest_k(l, 6, a);
    const auto rb = smallest_k(l, 6, b);
    EXPECT_EQ(ra.values, rb.values);
    EXPECT_EQ(ra.vectors, rb.vectors);
    for (int c = 0; c < 6; ++c) {
        Index big = 0;
        ra.vectors.col(c).cwiseAbs().maxCoeff(&big);
        EXPECT_GT(ra.vectors(big, c), 0.0);
    }
}

TEST(NormalizedLaplacian, RejectsZeroDegree) {
    const auto w = SparseSymMatrix::from_triplets(3, std::vector<Triplet>{{0, 1, 1.0}});
    EXPECT_THROW(normalized_laplacian(w), InvalidInput);
}
