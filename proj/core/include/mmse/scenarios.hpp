#pragma once

// Problem instances: the two-atom segment example, the truncated geometric
// example with its closed-form stationarity system, and drift-tilted binary
// trees where the minimax estimator can be compared with the conditional
// sublinear expectation.

#include <cstddef>
#include <string>
#include <vector>

#include "mmse/ambiguity.hpp"
#include "mmse/space.hpp"

namespace mmse {

struct Scenario {
    std::string name;
    std::string description;
    SampleSpace space;
    Partition partition;
    AmbiguitySet ambiguity;
    RandomVariable xi;
    /// Optional filtration F_0..F_T for tree scenarios; empty otherwise.
    std::vector<Partition> filtration;
};

/// Throws unless all parts agree on the atom count and space.
void validate(const Scenario& s);

/// Two atoms, vertices (1/3, 2/3) and (2/3, 1/3), xi = (2, 6), trivial partition.
Scenario example_41(std::vector<double> base_weights = {0.5, 0.5});

struct Ex42Closure {
    std::size_t N = 0;
    /// Closed form: lambda* = (F - sum 2/3^m y_m) / sum y_m (1/2^m - 2/3^m), y_m = 2^m/m^4 - 1.
    double lambda_star = 0.0;
    /// p_i = lambda*/2^i + 2(1-lambda*)/3^i for i = 2..N.
    std::vector<double> p;
    double F_value = 0.0;
    /// Bound on |rho_M - rho_N| for all M > N (series tail plus renormalization).
    double tail_bound = 0.0;
    /// 2/3 + sum_{n=2}^N (2/3^n)(2^n/n^4).
    double rho_series = 0.0;
    /// -1/6 + sum_{n=2}^N (1/n^4 - 2^{n+1}/(3^n n^4)).
    double sign_sum = 0.0;
    /// Truncated tail masses of the unnormalized vertices: 2^-N and 3^-N.
    double tail_mass_p1 = 0.0;
    double tail_mass_p2 = 0.0;
};

struct Ex42 {
    Scenario scenario;
    Ex42Closure closure;
};

/// Atoms 1..N, P1 ~ 1/2^n, P2 ~ 2/3^n (renormalized), xi(1) = 1, xi(n) = 2^n/n^4, P0 = barycenter.
Ex42 example_42_truncated(std::size_t N);

struct Ex42Discrepancy {
    double lambda_star = 0.0;
    double lambda_hat = 0.0;
    bool agree = false;
    /// lambda* in [0, 1] and the implied weight on atom 1 nonnegative.
    bool formula_feasible = false;
    double formula_first_weight = 0.0;
    /// d/dlambda Var_{P_lambda}(xi) at lambda* on the unnormalized truncated line.
    double formula_unconstrained_slope = 0.0;
    /// Projected-gradient residual |l - clamp(l + G'(l), 0, 1)|, evaluated on the segment.
    double formula_kkt_residual = 0.0;
    double solver_kkt_residual = 0.0;
    double solver_gap = 0.0;
    /// L-infinity distance of the closed-form p vector to the segment [P1, P2].
    double formula_hull_residual = 0.0;
};

/// Solves the truncated problem and compares with the closed form.
Ex42Discrepancy example_42_discrepancy(const Ex42& ex, double tol = kDefaultTolerance);

/// Drift-tilted tree, xi = terminal value of the +-1 walk, partition F_1.
Scenario example_43_tree(std::size_t depth, double tilt);

struct ConditionalSublinear {
    /// Blockwise max over vertices of E_P[xi | F_t], one entry per partition.
    std::vector<RandomVariable> esssup;
    /// One-step backward recursion with the vertex transition kernels.
    std::vector<RandomVariable> recursion;
    double max_discrepancy = 0.0;
};

/// Conditional sublinear expectation along a filtration (partitions refining forward).
ConditionalSublinear conditional_sublinear(const RandomVariable& xi, const AmbiguitySet& a,
                                           const std::vector<Partition>& filtration);

struct SeparationCase {
    std::string payoff;
    /// max over atoms of |E(xi | F_t) - eta^|
    double difference = 0.0;
};

struct SeparationReport {
    std::vector<SeparationCase> cases;
    double max_difference = 0.0;
    std::string witness;
    /// Largest recursion-vs-esssup discrepancy seen across the payoffs.
    double recursion_discrepancy = 0.0;
};

/// Compares the sublinear conditional expectation at time t with the minimax
/// estimator for F_t over terminal sum, |terminal sum|, max(sum, 0) and atom indicators.
SeparationReport example_43_separation(std::size_t depth, double tilt, std::size_t t = 1,
                                       double tol = kDefaultTolerance);

} // namespace mmse
