#pragma once

// Brute-force cross-checks for the solver at desk scale. Everything here
// re-derives conditional means and variances from raw atom sums and shares
// no code path with space.cpp or solver.cpp.

#include <cstddef>
#include <vector>

#include "mmse/ambiguity.hpp"
#include "mmse/space.hpp"

namespace mmse::oracle {

struct GridResult {
    MixtureWeights best_w;
    double best_value = 0.0;
    /// Actual lattice spacing 1/round(1/step).
    double grid_step = 0.0;
    std::size_t evaluated = 0;
};

/// Maximizes the conditional variance over the simplex lattice (k <= 4).
GridResult grid_maximize_G(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                           double step);

/// max_j E_{P_j}[(xi - eta_w)^2] - G(w), recomputed from raw sums.
double duality_gap_at(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                      const MixtureWeights& w);

struct MixtureIdentity {
    double residual = 0.0;
    double left = 0.0;
    double right = 0.0;
    /// max over blocks of |lambda_1 + lambda_2 - 1|
    double weight_sum_residual = 0.0;
};

/**
 * Both sides of the two-measure mixture decomposition
 *
 *   E_{P^l}[(xi - l1 eta1 - l2 eta2)^2]
 *     = l E_1[(xi-eta1)^2] + (1-l) E_2[(xi-eta2)^2]
 *       + l E_1[l2^2 (eta1-eta2)^2] + (1-l) E_2[l1^2 (eta1-eta2)^2]
 *
 * with eta_i = E_{P_i}[xi|C], P^l = l P_1 + (1-l) P_2 and blockwise
 * l1 = l P_1(B)/P^l(B), l2 = (1-l) P_2(B)/P^l(B).
 */
MixtureIdentity mixture_identity_check(const RandomVariable& xi, const Measure& p1, const Measure& p2,
                                       const Partition& c, double lambda);

struct BruteForceEstimate {
    std::vector<double> eta_blocks;
    double alpha = 0.0;
    /// Bound on |eta_grid - eta_true| (L2 over blocks) from strong convexity; O(sqrt(step)).
    double eta_error_bound = 0.0;
    /// Bound on alpha_grid - alpha_true; first order in the step because of kinks.
    double alpha_error_bound = 0.0;
    std::size_t evaluated = 0;
};

/**
 * Grid search of min over block values of max over the hull of E_P[(xi-eta)^2]
 * (block count <= 3, k <= 3), with eta clamped to [min xi, max xi].
 *
 * The inner maximum over the w-lattice of a function linear in w is attained
 * at a lattice vertex, i.e. a hull vertex, so it is evaluated there exactly.
 */
BruteForceEstimate brute_force_estimate(const RandomVariable& xi, const AmbiguitySet& a,
                                        const Partition& c, double eta_grid_step, double w_grid_step);

} // namespace mmse::oracle
