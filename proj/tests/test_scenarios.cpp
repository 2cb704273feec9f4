#include <gtest/gtest.h>

#include <cmath>

#include "mmse/scenarios.hpp"
#include "mmse/solver.hpp"

using namespace mmse;

TEST(SegmentScenario, SolutionAndInvariance) {
    for (const auto& base : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.3, 0.7},
                             std::vector<double>{0.9, 0.1}}) {
        const auto s = example_41(base);
        validate(s);
        const auto sol = solve_mmse(s.xi, s.ambiguity, s.partition);
        EXPECT_NEAR(sol.eta_blocks[0], 4.0, 1e-9);
        EXPECT_NEAR(sol.alpha, 4.0, 1e-9);
        EXPECT_NEAR(sol.w_hat[0], 0.5, 1e-7);
        EXPECT_TRUE(sol.converged);
    }
    EXPECT_THROW(example_41({0.5, 0.6}), InvalidInput);
}

// Reference values from a 40-digit evaluation of the same sums.
TEST(TruncatedGeometric, ClosureValuesAtForty) {
    const auto ex = example_42_truncated(40);
    validate(ex.scenario);
    const auto& c = ex.closure;
    EXPECT_EQ(c.N, 40u);
    EXPECT_NEAR(c.rho_series, 0.73172052231922082658, 1e-13);
    EXPECT_NEAR(c.sign_sum, -0.14940230488310789564, 1e-13);
    EXPECT_NEAR(c.F_value, -1.9219484935448191727, 1e-11);
    EXPECT_NEAR(c.lambda_star, 11.068564284653670975, 1e-10);
    ASSERT_EQ(c.p.size(), 39u);
    EXPECT_NEAR(c.p[0], c.lambda_star / 4.0 + 2.0 * (1.0 - c.lambda_star) / 9.0, 1e-15);
    EXPECT_DOUBLE_EQ(c.tail_mass_p1, std::ldexp(1.0, -40));
    EXPECT_EQ(ex.scenario.xi[0], 1.0);
    EXPECT_NEAR(ex.scenario.xi[9], 1024.0 / 10000.0, 1e-15);
}

TEST(TruncatedGeometric, RhoMatchesSeriesAndTailBoundShrinks) {
    double prev_bound = INFINITY;
    for (std::size_t n : {10u, 20u, 30u, 40u}) {
        const auto ex = example_42_truncated(n);
        const auto r = rho(ex.scenario.xi, ex.scenario.ambiguity);
        EXPECT_NEAR(r.value, 0.73172052231922082658, ex.closure.tail_bound + 1e-12) << n;
        EXPECT_LT(ex.closure.tail_bound, prev_bound);
        prev_bound = ex.closure.tail_bound;
    }
    EXPECT_THROW(example_42_truncated(4), InvalidInput);
    EXPECT_THROW(example_42_truncated(61), InvalidInput);
}

TEST(TruncatedGeometric, ClosedFormIsNotTheOptimum) {
    const auto ex = example_42_truncated(40);
    const auto d = example_42_discrepancy(ex);
    EXPECT_FALSE(d.agree);
    EXPECT_FALSE(d.formula_feasible);
    EXPECT_GT(d.lambda_star, 1.0);
    EXPECT_LT(d.formula_first_weight, 0.0);
    EXPECT_GT(d.formula_hull_residual, 1e-3);
    // The closed-form lambda* is the unconstrained stationary point of the truncated line.
    EXPECT_NEAR(d.formula_unconstrained_slope, 0.0, 1e-9 * std::abs(ex.closure.F_value) + 1e-9);
    EXPECT_LE(d.solver_kkt_residual, 1e-9);
    EXPECT_NEAR(d.lambda_hat, 1.0, 1e-9);
}

TEST(DriftTree, TreeShape) {
    const auto s = example_43_tree(2, 0.5);
    validate(s);
    EXPECT_EQ(s.space.size(), 4u);
    ASSERT_EQ(s.filtration.size(), 3u);
    EXPECT_EQ(s.partition, s.filtration[1]);
    EXPECT_EQ(s.xi, RandomVariable({-2, 0, 0, 2}));
    EXPECT_THROW(example_43_tree(1, 0.5), InvalidInput);
    EXPECT_THROW(example_43_tree(5, 0.5), InvalidInput);
}

TEST(DriftTree, SeparationWitnessAndRecursion) {
    const auto r = example_43_separation(2, 0.5, 1);
    EXPECT_GT(r.max_difference, 1e-6);
    EXPECT_FALSE(r.witness.empty());
    EXPECT_LE(r.recursion_discrepancy, 1e-12);
    EXPECT_EQ(r.cases.size(), 3u + 4u);
    EXPECT_THROW(example_43_separation(2, 0.5, 3), InvalidInput);
}

TEST(ConditionalSublinear, TerminalLevelIsPayoffAndRootIsRho) {
    const auto s = example_43_tree(3, 0.4);
    const auto cs = conditional_sublinear(s.xi, s.ambiguity, s.filtration);
    ASSERT_EQ(cs.esssup.size(), 4u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(cs.esssup.back()[i], s.xi[i], 1e-12);
    const double r = rho(s.xi, s.ambiguity).value;
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(cs.recursion[0][i], r, 1e-12);
    // Drift +-0.4 per step, three steps.
    EXPECT_NEAR(r, 1.2, 1e-12);
    EXPECT_LE(cs.max_discrepancy, 1e-12);
    EXPECT_THROW(conditional_sublinear(s.xi, s.ambiguity, {}), InvalidInput);
    EXPECT_THROW(conditional_sublinear(s.xi, s.ambiguity, {s.filtration[2], s.filtration[1]}), InvalidInput);
}

TEST(Validate, RejectsMismatchedParts) {
    auto s = example_41();
    s.xi = RandomVariable({1, 2, 3});
    EXPECT_THROW(validate(s), InvalidInput);
    auto t = example_41();
    t.partition = Partition::trivial(3);
    EXPECT_THROW(validate(t), InvalidInput);
}
