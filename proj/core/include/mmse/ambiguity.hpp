#pragma once

// Representation sets of sublinear expectations: convex hulls of finitely
// many measures equivalent to P0, the worst-case expectation rho over them,
// the conditional renormalization used by the stability (pasting) property,
// and binary-tree constructions that are stable by design.

#include <cstddef>
#include <string>
#include <vector>

#include "mmse/space.hpp"

namespace mmse {

/// Convex combination weights over the vertices of an AmbiguitySet.
class MixtureWeights {
public:
    explicit MixtureWeights(std::vector<double> w);
    static MixtureWeights unit(std::size_t k, std::size_t j);
    static MixtureWeights barycenter(std::size_t k);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t j) const { return w_[j]; }
    const std::vector<double>& values() const { return w_; }

private:
    std::vector<double> w_;
};

/// Convex hull of k >= 1 vertex measures on one SampleSpace, all equivalent to P0.
class AmbiguitySet {
public:
    AmbiguitySet(SampleSpace space, std::vector<Measure> vertices);

    const SampleSpace& space() const { return space_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t atom_count() const { return space_.size(); }
    const std::vector<Measure>& vertices() const { return vertices_; }
    const Measure& vertex(std::size_t j) const { return vertices_[j]; }

private:
    SampleSpace space_;
    std::vector<Measure> vertices_;
};

struct RhoValue {
    double value = 0.0;
    std::size_t vertex = 0;
};

Measure mix(const AmbiguitySet& a, const MixtureWeights& w);

/// max over the hull of E_P[xi]; attained at a vertex (lowest index on ties).
RhoValue rho(const RandomVariable& xi, const AmbiguitySet& a);

/// rho((xi - eta)^2).
double rho_residual_sq(const RandomVariable& xi, const RandomVariable& eta, const AmbiguitySet& a);

/// Measure with density f^P / f^P_C.
Measure g_transform(const Measure& p, const Partition& c);

/// L-infinity distance of a density to the hull of the vertex densities.
struct HullMembership {
    double residual = 0.0;
    bool solved = false;
};
HullMembership hull_membership(const AmbiguitySet& a, std::span<const double> density);

enum class StabilityVerdict { stable, violated, inconclusive };
std::string to_string(StabilityVerdict v);

struct StabilityReport {
    std::size_t checked_points = 0;
    double worst_violation = 0.0;
    StabilityVerdict verdict = StabilityVerdict::inconclusive;
};

/**
 * Sampled certificate that g_transform(P, c) stays in the hull.
 *
 * Checked points: every vertex, the barycenter, and sample_count mixtures
 * drawn from a low-discrepancy sequence. P -> g is nonlinear, so "stable"
 * means "no violation found", not a proof.
 */
StabilityReport stability_check(const AmbiguitySet& a, const Partition& c, std::size_t sample_count,
                                double tol = kDefaultTolerance);

enum class PastingRegime { exact, approximate };
std::string to_string(PastingRegime r);

struct TreeModel {
    SampleSpace space;
    AmbiguitySet set;
    /// F_0 (trivial) .. F_depth (finest), refining forward in time.
    std::vector<Partition> filtration;
    PastingRegime regime = PastingRegime::exact;
    std::size_t depth = 0;
};

/// Up-probability interval at one node of a binary tree.
struct NodeInterval {
    double lo = 0.5;
    double hi = 0.5;
};

/**
 * Rectangular (node-wise) ambiguity on the depth-d binary tree with uniform P0.
 *
 * Atom i encodes a path: bit (depth-1-s) of i is step s, 0 = down, 1 = up.
 * Node at level s with prefix p has index 2^s - 1 + p. Vertices take every
 * endpoint choice per node, so the set is closed under pasting.
 */
TreeModel rectangular_tree(std::size_t depth, const std::vector<NodeInterval>& nodes);

/**
 * Drift-tilted tree: up-probability (1 + tilt*mu)/2 with mu in {-1,+1}.
 *
 * depth <= 4: node-wise drifts, 2^(2^depth - 1) vertices, exact pasting.
 * depth 5..12: one drift per time step (2^depth vertices), approximate.
 */
TreeModel pasting_construct(std::size_t depth, double tilt);

} // namespace mmse
