#include <gtest/gtest.h>

#include <atomic>
#include <numeric>

#include "mmse/linprog.hpp"
#include "mmse/parallel.hpp"
#include "mmse/sequence.hpp"

using namespace mmse;

TEST(Simplex, SmallMaximizationAsMinimization) {
    // max 3x + 2y st x + y <= 4, x + 3y <= 6, x <= 3  ->  x = 3, y = 1, value 11.
    const std::vector<double> c{-3.0, -2.0};
    lp::Constraints ub{{{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3}};
    const auto r = lp::minimize(c, ub, {});
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.objective, -11.0, 1e-12);
    EXPECT_NEAR(r.x[0], 3.0, 1e-12);
    EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Simplex, EqualityConstraintsNeedPhaseOne) {
    // min x + 2y + 4z st x + y + z = 1, x - z = 0.2: objective 1.8 + z, so z = 0.
    const std::vector<double> c{1, 2, 4};
    lp::Constraints eq{{{1, 1, 1}, {1, 0, -1}}, {1, 0.2}};
    const auto r = lp::minimize(c, {}, eq);
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.x[0] + r.x[1] + r.x[2], 1.0, 1e-12);
    EXPECT_NEAR(r.x[0] - r.x[2], 0.2, 1e-12);
    EXPECT_NEAR(r.objective, 1.8, 1e-12);
    EXPECT_NEAR(r.x[2], 0.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
    lp::Constraints eq{{{1, 1}}, {-1}};
    EXPECT_EQ(lp::minimize(std::vector<double>{1, 1}, {}, eq).status, lp::Status::infeasible);
    lp::Constraints ub{{{1, -1}}, {1}};
    EXPECT_EQ(lp::minimize(std::vector<double>{-1, 0}, ub, {}).status, lp::Status::unbounded);
}

TEST(Simplex, DegenerateProblemTerminates) {
    // Classic cycling example for the largest-coefficient rule.
    const std::vector<double> c{-0.75, 150, -0.02, 6};
    lp::Constraints ub{{{0.25, -60, -0.04, 9}, {0.5, -90, -0.02, 3}, {0, 0, 1, 0}}, {0, 0, 1}};
    const auto r = lp::minimize(c, ub, {});
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.objective, -0.05, 1e-12);
}

TEST(HullDistance, InsideAndOutside) {
    const std::vector<double> a{1, 0}, b{0, 1};
    const std::vector<std::span<const double>> pts{a, b};
    const std::vector<double> mid{0.3, 0.7};
    auto in = lp::hull_distance(mid, pts);
    ASSERT_TRUE(in.solved);
    EXPECT_LE(in.residual, 1e-12);
    EXPECT_NEAR(in.coefficients[0], 0.3, 1e-12);
    // (1,1) is at L-infinity distance 1/2 from the segment, attained at (1/2, 1/2).
    const std::vector<double> out{1, 1};
    auto o = lp::hull_distance(out, pts);
    ASSERT_TRUE(o.solved);
    EXPECT_NEAR(o.residual, 0.5, 1e-12);
}

TEST(Kronecker, PointsInCubeAndDeterministic) {
    KroneckerSequence seq(5);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto p = seq.point(i);
        ASSERT_EQ(p.size(), 5u);
        for (double x : p) {
            EXPECT_GE(x, 0.0);
            EXPECT_LT(x, 1.0);
        }
        EXPECT_EQ(p, KroneckerSequence(5).point(i));
    }
}

TEST(Simplex, CubeToSimplexAndRandomPoints) {
    const auto s = cube_to_simplex({0.1, 0.5, 0.9});
    EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-15);
    for (double x : s) EXPECT_GT(x, 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto r = random_simplex_point(4, rng);
        EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-15);
        for (double x : r) EXPECT_GE(x, 0.0);
    }
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, true);
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(
                     10, [](std::size_t i) { if (i == 7) throw std::runtime_error("boom"); }, true),
                 std::runtime_error);
}
