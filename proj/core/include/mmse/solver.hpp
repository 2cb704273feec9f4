#pragma once

// Minimum mean square estimation under a sublinear expectation.
//
// For a mixture P_w of the hull vertices, the inner problem
// inf_eta E_{P_w}[(xi - eta)^2] over C-measurable eta is solved by
// eta_w = E_{P_w}[xi | C], leaving the concave conditional-variance
// functional G(w). Maximizing G over the weight simplex yields the worst-case
// measure P^ and the estimator eta^ = E_{P^}[xi | C]; the duality gap
// rho((xi - eta_w)^2) - G(w) certifies the saddle point.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmse/ambiguity.hpp"
#include "mmse/space.hpp"

namespace mmse {

struct EstimatorSolution {
    RandomVariable eta_hat;
    std::vector<double> eta_blocks;
    MixtureWeights w_hat;
    double alpha = 0.0;
    double gap = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Conditional variance of xi under P_w given c.
double objective_G(const MixtureWeights& w, const RandomVariable& xi, const AmbiguitySet& a,
                   const Partition& c);

/// Component j is E_{P_j}[(xi - eta_w)^2]; a supergradient of G at w.
std::vector<double> gradient_G(const MixtureWeights& w, const RandomVariable& xi,
                               const AmbiguitySet& a, const Partition& c);

/**
 * Frank-Wolfe ascent on G over the weight simplex.
 *
 * Each iteration takes the better of the Frank-Wolfe step (toward the vertex
 * with the largest gradient component) and the away step, followed by a
 * Newton step restricted to the active face. All steps use exact line search
 * by bisection on the directional derivative. Stops once the duality gap is
 * below tol and further polishing stops paying off, or after max_iter.
 */
EstimatorSolution solve_mmse(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                             double tol = kDefaultTolerance, std::size_t max_iter = 100000,
                             const std::optional<MixtureWeights>& start = std::nullopt);

struct SaddleReport {
    bool passed = false;
    /// min_j (value - E_{P_j}[(xi - eta^)^2]); >= -tol when P^ is worst case for eta^.
    double left_margin = 0.0;
    /// min over candidate eta of (E_{P^}[(xi - eta)^2] - value); >= -tol when eta^ is optimal under P^.
    double right_margin = 0.0;
    /// E_{P^}[(xi - eta^)^2], the middle term of the two-sided inequality.
    double value = 0.0;
    /// |value - alpha|
    double alpha_residual = 0.0;
};

/// Checks E_{P}[(xi-eta^)^2] <= E_{P^}[(xi-eta^)^2] <= E_{P^}[(xi-eta)^2] at vertices and perturbed eta.
SaddleReport verify_saddle(const EstimatorSolution& sol, const RandomVariable& xi,
                           const AmbiguitySet& a, const Partition& c,
                           double tol = kDefaultTolerance);

struct UniquenessReport {
    bool eta_unique = false;
    /// Largest blockwise difference of eta^ across restarts.
    double eta_spread = 0.0;
    /// Largest L-infinity difference of w^ across restarts.
    double w_spread = 0.0;
    /// Number of clusters of w^ at resolution 1e-6.
    std::size_t distinct_w = 0;
    std::vector<EstimatorSolution> runs;
};

/// Solves from every vertex, the barycenter and (restarts - k - 1) random starts.
UniquenessReport uniqueness_probe(const RandomVariable& xi, const AmbiguitySet& a,
                                  const Partition& c, double tol, std::size_t restarts,
                                  std::uint64_t seed = 42, bool parallel = false);

} // namespace mmse
