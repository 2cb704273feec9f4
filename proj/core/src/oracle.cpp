#include "mmse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mmse::oracle {

namespace {

constexpr double kMaxEvaluations = 2e9;

struct Raw {
    std::size_t n = 0, nb = 0;
    std::vector<std::size_t> block;
    std::vector<double> x;
};

Raw raw(const RandomVariable& xi, const Partition& c) {
    Raw r;
    r.n = xi.size();
    r.nb = c.block_count();
    r.x.assign(xi.values().begin(), xi.values().end());
    r.block.resize(r.n);
    for (std::size_t b = 0; b < c.block_count(); ++b)
        for (std::size_t atom : c.block(b)) r.block[atom] = b;
    return r;
}

/// sum_w p(w) (x(w) - mean of x on its block under p)^2, straight from the sums.
double conditional_variance(const Raw& r, const std::vector<double>& p) {
    std::vector<double> m0(r.nb, 0.0), m1(r.nb, 0.0);
    for (std::size_t i = 0; i < r.n; ++i) {
        m0[r.block[i]] += p[i];
        m1[r.block[i]] += p[i] * r.x[i];
    }
    double v = 0.0;
    for (std::size_t i = 0; i < r.n; ++i) {
        const double d = r.x[i] - m1[r.block[i]] / m0[r.block[i]];
        v += p[i] * d * d;
    }
    return v;
}

} // namespace

GridResult grid_maximize_G(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                           double step) {
    const std::size_t k = a.vertex_count();
    if (k > 4) throw InvalidInput("grid_maximize_G: at most 4 vertices");
    if (!(step >= 1e-4 && step <= 0.25)) throw InvalidInput("grid_maximize_G: step must be in [1e-4, 0.25]");
    if (xi.size() != a.atom_count() || c.atom_count() != a.atom_count())
        throw InvalidInput("grid_maximize_G: size mismatch");
    const auto m = static_cast<std::size_t>(std::llround(1.0 / step));
    double points = 1.0;
    for (std::size_t j = 1; j < k; ++j) points *= static_cast<double>(m + j) / static_cast<double>(j);
    if (points > kMaxEvaluations) throw InvalidInput("grid_maximize_G: lattice too large");

    const Raw r = raw(xi, c);
    const double h = 1.0 / static_cast<double>(m);
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> best_w;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t evaluated = 0;
    std::vector<double> w(k), p(r.n);

    // Compositions of m in ascending lexicographic order, so the first strict
    // maximum is the lexicographically smallest argmax.
    auto visit = [&] {
        for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(idx[j]) * h;
        std::fill(p.begin(), p.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            const auto v = a.vertex(j).weights();
            for (std::size_t i = 0; i < r.n; ++i) p[i] += w[j] * v[i];
        }
        const double g = conditional_variance(r, p);
        ++evaluated;
        if (g > best) {
            best = g;
            best_w = w;
        }
    };
    std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t j, std::size_t remaining) {
        if (j + 1 == k) {
            idx[j] = remaining;
            visit();
            return;
        }
        for (std::size_t v = 0; v <= remaining; ++v) {
            idx[j] = v;
            walk(j + 1, remaining - v);
        }
    };
    walk(0, m);
    double s = 0.0;
    for (double x : best_w) s += x;
    for (double& x : best_w) x /= s;
    return GridResult{MixtureWeights(best_w), best, h, evaluated};
}

double duality_gap_at(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                      const MixtureWeights& w) {
    if (w.size() != a.vertex_count() || xi.size() != a.atom_count() || c.atom_count() != a.atom_count())
        throw InvalidInput("duality_gap_at: size mismatch");
    const Raw r = raw(xi, c);
    std::vector<double> p(r.n, 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto v = a.vertex(j).weights();
        for (std::size_t i = 0; i < r.n; ++i) p[i] += w[j] * v[i];
    }
    std::vector<double> m0(r.nb, 0.0), m1(r.nb, 0.0);
    for (std::size_t i = 0; i < r.n; ++i) {
        m0[r.block[i]] += p[i];
        m1[r.block[i]] += p[i] * r.x[i];
    }
    double inner = 0.0;
    double outer = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.n; ++i) {
        const double d = r.x[i] - m1[r.block[i]] / m0[r.block[i]];
        inner += p[i] * d * d;
    }
    for (std::size_t j = 0; j < a.vertex_count(); ++j) {
        const auto v = a.vertex(j).weights();
        double s = 0.0;
        for (std::size_t i = 0; i < r.n; ++i) {
            const double d = r.x[i] - m1[r.block[i]] / m0[r.block[i]];
            s += v[i] * d * d;
        }
        outer = std::max(outer, s);
    }
    return outer - inner;
}

MixtureIdentity mixture_identity_check(const RandomVariable& xi, const Measure& p1, const Measure& p2,
                                       const Partition& c, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("mixture_identity_check: lambda must be in (0, 1)");
    if (!p1.is_equivalent() || !p2.is_equivalent())
        throw InvalidInput("mixture_identity_check: measures must be equivalent to P0");
    if (p1.size() != xi.size() || p2.size() != xi.size() || c.atom_count() != xi.size())
        throw InvalidInput("mixture_identity_check: size mismatch");
    const Raw r = raw(xi, c);

    std::vector<double> mass1(r.nb, 0.0), mass2(r.nb, 0.0), sum1(r.nb, 0.0), sum2(r.nb, 0.0);
    for (std::size_t i = 0; i < r.n; ++i) {
        mass1[r.block[i]] += p1.weight(i);
        mass2[r.block[i]] += p2.weight(i);
        sum1[r.block[i]] += p1.weight(i) * r.x[i];
        sum2[r.block[i]] += p2.weight(i) * r.x[i];
    }
    std::vector<double> eta1(r.nb), eta2(r.nb), l1(r.nb), l2(r.nb);
    MixtureIdentity out;
    for (std::size_t b = 0; b < r.nb; ++b) {
        eta1[b] = sum1[b] / mass1[b];
        eta2[b] = sum2[b] / mass2[b];
        const double mass_mix = lambda * mass1[b] + (1.0 - lambda) * mass2[b];
        l1[b] = lambda * mass1[b] / mass_mix;
        l2[b] = (1.0 - lambda) * mass2[b] / mass_mix;
        out.weight_sum_residual = std::max(out.weight_sum_residual, std::abs(l1[b] + l2[b] - 1.0));
    }

    double left = 0.0, var1 = 0.0, var2 = 0.0, cross1 = 0.0, cross2 = 0.0;
    for (std::size_t i = 0; i < r.n; ++i) {
        const std::size_t b = r.block[i];
        const double pl = lambda * p1.weight(i) + (1.0 - lambda) * p2.weight(i);
        const double e = r.x[i] - l1[b] * eta1[b] - l2[b] * eta2[b];
        left += pl * e * e;
        const double d1 = r.x[i] - eta1[b];
        const double d2 = r.x[i] - eta2[b];
        const double spread = (eta1[b] - eta2[b]) * (eta1[b] - eta2[b]);
        var1 += p1.weight(i) * d1 * d1;
        var2 += p2.weight(i) * d2 * d2;
        cross1 += p1.weight(i) * l2[b] * l2[b] * spread;
        cross2 += p2.weight(i) * l1[b] * l1[b] * spread;
    }
    out.left = left;
    out.right = lambda * var1 + (1.0 - lambda) * var2 + lambda * cross1 + (1.0 - lambda) * cross2;
    out.residual = std::abs(out.left - out.right);
    return out;
}

BruteForceEstimate brute_force_estimate(const RandomVariable& xi, const AmbiguitySet& a,
                                        const Partition& c, double eta_grid_step, double w_grid_step) {
    const std::size_t k = a.vertex_count();
    const std::size_t nb = c.block_count();
    if (nb > 3) throw InvalidInput("brute_force_estimate: at most 3 blocks");
    if (k > 3) throw InvalidInput("brute_force_estimate: at most 3 vertices");
    if (!(eta_grid_step > 0.0)) throw InvalidInput("brute_force_estimate: eta step must be positive");
    if (!(w_grid_step > 0.0 && w_grid_step <= 1.0))
        throw InvalidInput("brute_force_estimate: w step must be in (0, 1]");
    if (xi.size() != a.atom_count() || c.atom_count() != a.atom_count())
        throw InvalidInput("brute_force_estimate: size mismatch");
    const Raw r = raw(xi, c);

    // Per vertex and block: mass, mean and centered second moment.
    std::vector<double> mass(k * nb, 0.0), mean(k * nb, 0.0), var(k * nb, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const auto v = a.vertex(j).weights();
        for (std::size_t i = 0; i < r.n; ++i) {
            mass[j * nb + r.block[i]] += v[i];
            mean[j * nb + r.block[i]] += v[i] * r.x[i];
        }
        for (std::size_t b = 0; b < nb; ++b) mean[j * nb + b] /= mass[j * nb + b];
        for (std::size_t i = 0; i < r.n; ++i) {
            const double d = r.x[i] - mean[j * nb + r.block[i]];
            var[j * nb + r.block[i]] += v[i] * d * d;
        }
    }

    const double lo = *std::min_element(r.x.begin(), r.x.end());
    const double hi = *std::max_element(r.x.begin(), r.x.end());
    std::vector<double> axis;
    for (std::size_t i = 0;; ++i) {
        const double v = lo + static_cast<double>(i) * eta_grid_step;
        if (v >= hi) {
            axis.push_back(hi);
            break;
        }
        axis.push_back(v);
    }
    if (std::pow(static_cast<double>(axis.size()), static_cast<double>(nb)) * static_cast<double>(k) >
        kMaxEvaluations)
        throw InvalidInput("brute_force_estimate: eta grid too large");

    BruteForceEstimate out;
    out.alpha = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(nb, 0);
    std::vector<double> eta(nb);
    while (true) {
        for (std::size_t b = 0; b < nb; ++b) eta[b] = axis[idx[b]];
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            double f = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                const double d = eta[b] - mean[j * nb + b];
                f += mass[j * nb + b] * d * d + var[j * nb + b];
            }
            worst = std::max(worst, f);
        }
        ++out.evaluated;
        if (worst < out.alpha) {
            out.alpha = worst;
            out.eta_blocks = eta;
        }
        std::size_t b = 0;
        while (b < nb && ++idx[b] == axis.size()) idx[b++] = 0;
        if (b == nb) break;
    }

    // F = max_j f_j is convex with kinks, so the grid error in alpha is first
    // order: F(p) - alpha <= L * delta for the grid point p nearest eta*, where
    // delta bounds the distance to p. Strong convexity (modulus 2 * min mass)
    // turns that into a distance bound for the grid argmin. The Lipschitz
    // constant starts global (2 (hi - lo)) and is then tightened on the ball
    // around the grid argmin that must contain the segment from eta* to p.
    const double min_mass = *std::min_element(mass.begin(), mass.end());
    const double delta = 0.5 * eta_grid_step * std::sqrt(static_cast<double>(nb));
    double lipschitz = 2.0 * (hi - lo);
    out.alpha_error_bound = lipschitz * delta;
    out.eta_error_bound = std::sqrt(out.alpha_error_bound / min_mass);
    for (int round = 0; round < 3; ++round) {
        const double radius = out.eta_error_bound + delta;
        double local = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double g2 = 0.0, mmax = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                const double g = 2.0 * mass[j * nb + b] * (out.eta_blocks[b] - mean[j * nb + b]);
                g2 += g * g;
                mmax = std::max(mmax, mass[j * nb + b]);
            }
            local = std::max(local, std::sqrt(g2) + 2.0 * mmax * radius);
        }
        lipschitz = std::min(lipschitz, local);
        out.alpha_error_bound = std::min(out.alpha_error_bound, lipschitz * delta);
        out.eta_error_bound = std::min(out.eta_error_bound, std::sqrt(out.alpha_error_bound / min_mass));
    }
    return out;
}

} // namespace mmse::oracle
