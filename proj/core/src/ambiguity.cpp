#include "mmse/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmse/linprog.hpp"
#include "mmse/sequence.hpp"

namespace mmse {

MixtureWeights::MixtureWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw InvalidInput("mixture weights are empty");
    for (std::size_t j = 0; j < w_.size(); ++j) {
        if (!std::isfinite(w_[j]) || w_[j] < 0.0)
            throw InvalidInput("mixture weight [" + std::to_string(j) + "] is negative or not finite");
    }
    const double s = std::accumulate(w_.begin(), w_.end(), 0.0);
    if (std::abs(s - 1.0) > kWeightSumTolerance)
        throw InvalidInput("mixture weights sum to " + std::to_string(s) + ", expected 1");
}

MixtureWeights MixtureWeights::unit(std::size_t k, std::size_t j) {
    std::vector<double> w(k, 0.0);
    w.at(j) = 1.0;
    return MixtureWeights(std::move(w));
}

MixtureWeights MixtureWeights::barycenter(std::size_t k) {
    return MixtureWeights(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

AmbiguitySet::AmbiguitySet(SampleSpace space, std::vector<Measure> vertices)
    : space_(std::move(space)), vertices_(std::move(vertices)) {
    if (vertices_.empty()) throw InvalidInput("ambiguity set needs at least one vertex");
    for (std::size_t j = 0; j < vertices_.size(); ++j) {
        if (!(vertices_[j].space() == space_))
            throw InvalidInput("vertex " + std::to_string(j) + " lives on a different sample space");
        if (!vertices_[j].is_equivalent())
            throw InvalidInput("vertex " + std::to_string(j) + " is not equivalent to P0");
    }
}

Measure mix(const AmbiguitySet& a, const MixtureWeights& w) {
    if (w.size() != a.vertex_count())
        throw InvalidInput("mixture has " + std::to_string(w.size()) + " weights for " +
                           std::to_string(a.vertex_count()) + " vertices");
    std::vector<double> out(a.atom_count(), 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        const auto v = a.vertex(j).weights();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[j] * v[i];
    }
    return Measure(a.space(), std::move(out));
}

RhoValue rho(const RandomVariable& xi, const AmbiguitySet& a) {
    RhoValue best{expectation(xi, a.vertex(0)), 0};
    for (std::size_t j = 1; j < a.vertex_count(); ++j) {
        const double e = expectation(xi, a.vertex(j));
        if (e > best.value) best = {e, j};
    }
    return best;
}

double rho_residual_sq(const RandomVariable& xi, const RandomVariable& eta, const AmbiguitySet& a) {
    return rho((xi - eta).squared(), a).value;
}

Measure g_transform(const Measure& p, const Partition& c) {
    if (c.atom_count() != p.size()) throw InvalidInput("g_transform: partition size mismatch");
    const auto mass = p.block_masses(c);
    std::vector<double> base(c.block_count(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) base[c.block_of(i)] += p.space().base_weight(i);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t b = c.block_of(i);
        if (!(mass[b] > 0.0))
            throw InvalidInput("g_transform: block " + std::to_string(b) + " has zero mass");
        out[i] = p.weight(i) * base[b] / mass[b];
    }
    return Measure(p.space(), std::move(out));
}

HullMembership hull_membership(const AmbiguitySet& a, std::span<const double> density) {
    std::vector<std::span<const double>> points;
    points.reserve(a.vertex_count());
    for (const auto& v : a.vertices()) points.push_back(v.density());
    const auto d = lp::hull_distance(density, points);
    return {d.residual, d.solved};
}

std::string to_string(StabilityVerdict v) {
    switch (v) {
    case StabilityVerdict::stable: return "stable";
    case StabilityVerdict::violated: return "violated";
    case StabilityVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

StabilityReport stability_check(const AmbiguitySet& a, const Partition& c, std::size_t sample_count,
                                double tol) {
    const std::size_t k = a.vertex_count();
    if (sample_count < k)
        throw InvalidInput("stability_check: sample_count " + std::to_string(sample_count) +
                           " is below the vertex count " + std::to_string(k));

    std::vector<MixtureWeights> points;
    points.reserve(k + 1 + sample_count);
    for (std::size_t j = 0; j < k; ++j) points.push_back(MixtureWeights::unit(k, j));
    points.push_back(MixtureWeights::barycenter(k));
    if (k > 1) {
        const KroneckerSequence seq(k);
        for (std::size_t s = 0; s < sample_count; ++s) {
            auto w = cube_to_simplex(seq.point(s));
            // Absorb rounding so the weights sum to 1 within tolerance.
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            for (double& x : w) x /= total;
            points.emplace_back(std::move(w));
        }
    }

    StabilityReport report;
    bool all_solved = true;
    for (const auto& w : points) {
        const Measure g = g_transform(mix(a, w), c);
        const HullMembership h = hull_membership(a, g.density());
        ++report.checked_points;
        if (!h.solved) {
            all_solved = false;
            continue;
        }
        report.worst_violation = std::max(report.worst_violation, h.residual);
    }
    if (report.worst_violation > tol)
        report.verdict = StabilityVerdict::violated;
    else
        report.verdict = all_solved ? StabilityVerdict::stable : StabilityVerdict::inconclusive;
    return report;
}

std::string to_string(PastingRegime r) {
    return r == PastingRegime::exact ? "exact" : "approximate";
}

namespace {

SampleSpace tree_space(std::size_t depth) {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string s(depth, '-');
        for (std::size_t step = 0; step < depth; ++step)
            if ((i >> (depth - 1 - step)) & 1U) s[step] = '+';
        labels[i] = std::move(s);
    }
    return SampleSpace(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::vector<Partition> tree_filtration(std::size_t depth) {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<Partition> out;
    for (std::size_t t = 0; t <= depth; ++t) {
        const std::size_t blocks = std::size_t{1} << t;
        const std::size_t width = n / blocks;
        std::vector<std::vector<std::size_t>> b(blocks);
        for (std::size_t i = 0; i < n; ++i) b[i / width].push_back(i);
        out.emplace_back(n, std::move(b));
    }
    return out;
}

/// Path weights when the up-probability at node (s, prefix) is up(s, prefix).
template <class UpProb>
std::vector<double> path_weights(std::size_t depth, UpProb up) {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < depth; ++s) {
            const std::size_t prefix = i >> (depth - s);
            const bool is_up = (i >> (depth - 1 - s)) & 1U;
            const double q = up(s, prefix);
            w[i] *= is_up ? q : 1.0 - q;
        }
    }
    return w;
}

void check_interval(const NodeInterval& iv, std::size_t node) {
    if (!(iv.lo > 0.0 && iv.hi < 1.0 && iv.lo <= iv.hi))
        throw InvalidInput("node " + std::to_string(node) +
                           ": up-probability interval must satisfy 0 < lo <= hi < 1");
}

} // namespace

TreeModel rectangular_tree(std::size_t depth, const std::vector<NodeInterval>& nodes) {
    if (depth < 1 || depth > 4)
        throw InvalidInput("rectangular_tree: depth must be in [1, 4]");
    const std::size_t node_count = (std::size_t{1} << depth) - 1;
    if (nodes.size() != node_count)
        throw InvalidInput("rectangular_tree: expected " + std::to_string(node_count) + " node intervals");
    for (std::size_t v = 0; v < node_count; ++v) check_interval(nodes[v], v);

    SampleSpace space = tree_space(depth);
    const std::size_t vertex_count = std::size_t{1} << node_count;
    std::vector<Measure> vertices;
    vertices.reserve(vertex_count);
    for (std::size_t mask = 0; mask < vertex_count; ++mask) {
        auto w = path_weights(depth, [&](std::size_t s, std::size_t prefix) {
            const std::size_t node = (std::size_t{1} << s) - 1 + prefix;
            return ((mask >> node) & 1U) ? nodes[node].lo : nodes[node].hi;
        });
        vertices.emplace_back(space, std::move(w));
    }
    AmbiguitySet set(space, std::move(vertices));
    return TreeModel{space, std::move(set), tree_filtration(depth), PastingRegime::exact, depth};
}

TreeModel pasting_construct(std::size_t depth, double tilt) {
    if (depth < 1 || depth > 12) throw InvalidInput("pasting_construct: depth must be in [1, 12]");
    if (!(tilt > 0.0 && tilt < 1.0)) throw InvalidInput("pasting_construct: tilt must be in (0, 1)");
    const NodeInterval iv{(1.0 - tilt) / 2.0, (1.0 + tilt) / 2.0};
    if (depth <= 4)
        return rectangular_tree(depth, std::vector<NodeInterval>((std::size_t{1} << depth) - 1, iv));

    SampleSpace space = tree_space(depth);
    const std::size_t vertex_count = std::size_t{1} << depth;
    std::vector<Measure> vertices;
    vertices.reserve(vertex_count);
    for (std::size_t mask = 0; mask < vertex_count; ++mask) {
        auto w = path_weights(depth, [&](std::size_t s, std::size_t) {
            return ((mask >> s) & 1U) ? iv.lo : iv.hi;
        });
        vertices.emplace_back(space, std::move(w));
    }
    AmbiguitySet set(space, std::move(vertices));
    return TreeModel{space, std::move(set), tree_filtration(depth), PastingRegime::approximate, depth};
}

} // namespace mmse
