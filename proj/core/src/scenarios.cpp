#include "mmse/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmse/linprog.hpp"
#include "mmse/solver.hpp"

namespace mmse {

void validate(const Scenario& s) {
    const std::size_t n = s.space.size();
    if (!(s.ambiguity.space() == s.space)) throw InvalidInput("scenario: ambiguity set uses another space");
    if (s.partition.atom_count() != n) throw InvalidInput("scenario: partition atom count mismatch");
    if (s.xi.size() != n) throw InvalidInput("scenario: xi has the wrong number of atoms");
    for (std::size_t t = 0; t < s.filtration.size(); ++t) {
        if (s.filtration[t].atom_count() != n)
            throw InvalidInput("scenario: filtration[" + std::to_string(t) + "] atom count mismatch");
        if (t > 0 && !s.filtration[t].refines(s.filtration[t - 1]))
            throw InvalidInput("scenario: filtration[" + std::to_string(t) + "] does not refine its predecessor");
    }
}

Scenario example_41(std::vector<double> base_weights) {
    SampleSpace space({"w1", "w2"}, std::move(base_weights));
    std::vector<Measure> vertices{Measure(space, {1.0 / 3.0, 2.0 / 3.0}), Measure(space, {2.0 / 3.0, 1.0 / 3.0})};
    AmbiguitySet set(space, std::move(vertices));
    return Scenario{"ex41",
                    "two-atom segment between (1/3, 2/3) and (2/3, 1/3), xi = (2, 6), no information",
                    space,
                    Partition::trivial(2),
                    std::move(set),
                    RandomVariable({2.0, 6.0}),
                    {}};
}

namespace {

double ex42_xi(std::size_t n) {
    if (n == 1) return 1.0;
    const double nd = static_cast<double>(n);
    return std::pow(2.0, nd) / (nd * nd * nd * nd);
}

} // namespace

Ex42 example_42_truncated(std::size_t N) {
    if (N < 5 || N > 60) throw InvalidInput("example_42_truncated: N must be in [5, 60]");
    const double eps1 = std::ldexp(1.0, -static_cast<int>(N));
    const double eps2 = std::pow(3.0, -static_cast<double>(N));

    std::vector<std::string> atoms(N);
    std::vector<double> p1(N), p2(N), base(N), xi(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const double nd = static_cast<double>(n);
        atoms[n - 1] = "n" + std::to_string(n);
        p1[n - 1] = std::pow(2.0, -nd) / (1.0 - eps1);
        p2[n - 1] = 2.0 * std::pow(3.0, -nd) / (1.0 - eps2);
        xi[n - 1] = ex42_xi(n);
    }
    for (std::size_t i = 0; i < N; ++i) base[i] = 0.5 * (p1[i] + p2[i]);
    // Base weights must sum to 1 within 1e-12; absorb rounding.
    double total = 0.0;
    for (double b : base) total += b;
    for (double& b : base) b /= total;
    for (auto* p : {&p1, &p2}) {
        double s = 0.0;
        for (double v : *p) s += v;
        for (double& v : *p) v /= s;
    }

    SampleSpace space(std::move(atoms), std::move(base));
    std::vector<Measure> vertices{Measure(space, p1), Measure(space, p2)};
    AmbiguitySet set(space, std::move(vertices));
    Scenario scenario{"ex42",
                      "geometric segment P1 ~ 1/2^n, P2 ~ 2/3^n truncated at N = " + std::to_string(N) +
                          ", xi(n) = 2^n/n^4",
                      space,
                      Partition::trivial(N),
                      std::move(set),
                      RandomVariable(std::move(xi)),
                      {}};

    Ex42Closure cl;
    cl.N = N;
    double num_f = 0.0, den_f = 0.0, b0 = 0.0;
    cl.rho_series = 2.0 / 3.0;
    cl.sign_sum = -1.0 / 6.0;
    for (std::size_t m = 2; m <= N; ++m) {
        const double md = static_cast<double>(m);
        const double y = ex42_xi(m) - 1.0;
        const double d = std::pow(2.0, -md) - 2.0 * std::pow(3.0, -md);
        num_f += d * y * y;
        den_f += d * y;
        b0 += 2.0 * std::pow(3.0, -md) * y;
        cl.rho_series += 2.0 * std::pow(3.0, -md) * ex42_xi(m);
        cl.sign_sum += 1.0 / (md * md * md * md) - std::pow(2.0, md + 1.0) / (std::pow(3.0, md) * md * md * md * md);
    }
    cl.F_value = num_f / (2.0 * den_f);
    cl.lambda_star = (cl.F_value - b0) / den_f;
    cl.p.resize(N - 1);
    for (std::size_t i = 2; i <= N; ++i) {
        const double id = static_cast<double>(i);
        cl.p[i - 2] = cl.lambda_star * std::pow(2.0, -id) + 2.0 * (1.0 - cl.lambda_star) * std::pow(3.0, -id);
    }
    // Series tail: sum_{n>N} 2 (2/3)^n / n^4 <= 3 * 2 (2/3)^{N+1} / (N+1)^4.
    const double n1 = static_cast<double>(N + 1);
    const double series_tail = 6.0 * std::pow(2.0 / 3.0, n1) / (n1 * n1 * n1 * n1);
    const double renorm = (cl.rho_series + series_tail) * eps2 / (1.0 - eps2);
    cl.tail_bound = 2.0 * (series_tail + renorm);
    cl.tail_mass_p1 = eps1;
    cl.tail_mass_p2 = eps2;
    return Ex42{std::move(scenario), std::move(cl)};
}

Ex42Discrepancy example_42_discrepancy(const Ex42& ex, double tol) {
    const Scenario& s = ex.scenario;
    const Ex42Closure& cl = ex.closure;
    Ex42Discrepancy out;
    out.lambda_star = cl.lambda_star;

    const auto sol = solve_mmse(s.xi, s.ambiguity, s.partition, tol);
    out.lambda_hat = sol.w_hat[0];
    out.solver_gap = sol.gap;
    out.agree = std::abs(out.lambda_hat - out.lambda_star) <= 1e-5;

    const auto clamp01 = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    const auto grad = gradient_G(sol.w_hat, s.xi, s.ambiguity, s.partition);
    const double slope_hat = grad[0] - grad[1];
    out.solver_kkt_residual = std::abs(out.lambda_hat - clamp01(out.lambda_hat + slope_hat));

    // Unnormalized truncated line, with y_1 = 0 after the shift xi -> xi - 1.
    double a1 = 0.0, b0 = 0.0, b1 = 0.0;
    for (std::size_t m = 2; m <= cl.N; ++m) {
        const double md = static_cast<double>(m);
        const double y = s.xi[m - 1] - 1.0;
        const double d = std::pow(2.0, -md) - 2.0 * std::pow(3.0, -md);
        a1 += d * y * y;
        b0 += 2.0 * std::pow(3.0, -md) * y;
        b1 += d * y;
    }
    out.formula_unconstrained_slope = a1 - 2.0 * (b0 + b1 * cl.lambda_star) * b1;

    double tail = 0.0;
    for (double p : cl.p) tail += p;
    out.formula_first_weight = 1.0 - tail;
    out.formula_feasible = cl.lambda_star >= 0.0 && cl.lambda_star <= 1.0 && out.formula_first_weight >= 0.0 &&
                           std::all_of(cl.p.begin(), cl.p.end(), [](double p) { return p >= 0.0; });

    // On the segment the derivative at lambda* is the unconstrained one; the
    // projection then measures how far lambda* sits from a constrained KKT point.
    const double formula_slope = out.formula_feasible ? [&] {
        const auto w = MixtureWeights({cl.lambda_star, 1.0 - cl.lambda_star});
        const auto g = gradient_G(w, s.xi, s.ambiguity, s.partition);
        return g[0] - g[1];
    }()
                                                      : out.formula_unconstrained_slope;
    out.formula_kkt_residual = std::abs(cl.lambda_star - clamp01(cl.lambda_star + formula_slope));

    std::vector<double> target(cl.N);
    target[0] = out.formula_first_weight;
    std::copy(cl.p.begin(), cl.p.end(), target.begin() + 1);
    std::vector<std::span<const double>> points;
    for (const auto& v : s.ambiguity.vertices()) points.push_back(v.weights());
    out.formula_hull_residual = lp::hull_distance(target, points).residual;
    return out;
}

Scenario example_43_tree(std::size_t depth, double tilt) {
    if (depth < 2 || depth > 4) throw InvalidInput("example_43_tree: depth must be in [2, 4]");
    TreeModel tree = pasting_construct(depth, tilt);
    const std::size_t n = tree.space.size();
    std::vector<double> walk(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < depth; ++s) walk[i] += ((i >> (depth - 1 - s)) & 1U) ? 1.0 : -1.0;
    Partition f1 = tree.filtration[1];
    return Scenario{"tree",
                    "binary tree of depth " + std::to_string(depth) + ", up-probability (1 +- " +
                        std::to_string(tilt) + ")/2 per node, xi = terminal value of the walk",
                    tree.space,
                    std::move(f1),
                    std::move(tree.set),
                    RandomVariable(std::move(walk)),
                    std::move(tree.filtration)};
}

ConditionalSublinear conditional_sublinear(const RandomVariable& xi, const AmbiguitySet& a,
                                           const std::vector<Partition>& filtration) {
    if (filtration.empty()) throw InvalidInput("conditional_sublinear: empty filtration");
    for (std::size_t t = 0; t < filtration.size(); ++t) {
        if (filtration[t].atom_count() != a.atom_count())
            throw InvalidInput("conditional_sublinear: partition size mismatch");
        if (t > 0 && !filtration[t].refines(filtration[t - 1]))
            throw InvalidInput("conditional_sublinear: partitions do not form a filtration");
    }
    if (xi.size() != a.atom_count()) throw InvalidInput("conditional_sublinear: xi size mismatch");

    const std::size_t steps = filtration.size();
    ConditionalSublinear out;
    out.esssup.reserve(steps);
    for (const auto& c : filtration) {
        std::vector<double> best(c.block_count(), -std::numeric_limits<double>::infinity());
        for (const auto& v : a.vertices()) {
            const auto ce = c.block_values(cond_expectation(xi, v, c));
            for (std::size_t b = 0; b < best.size(); ++b) best[b] = std::max(best[b], ce[b]);
        }
        out.esssup.push_back(c.expand(best));
    }

    out.recursion.assign(steps, RandomVariable{});
    out.recursion[steps - 1] = out.esssup[steps - 1];
    for (std::size_t t = steps - 1; t-- > 0;) {
        const Partition& coarse = filtration[t];
        const Partition& fine = filtration[t + 1];
        const auto next = fine.block_values(out.recursion[t + 1]);
        std::vector<double> value(coarse.block_count(), -std::numeric_limits<double>::infinity());
        for (const auto& v : a.vertices()) {
            const auto fine_mass = v.block_masses(fine);
            const auto coarse_mass = v.block_masses(coarse);
            std::vector<double> acc(coarse.block_count(), 0.0);
            for (std::size_t fb = 0; fb < fine.block_count(); ++fb) {
                const std::size_t cb = coarse.block_of(fine.block(fb).front());
                acc[cb] += fine_mass[fb] / coarse_mass[cb] * next[fb];
            }
            for (std::size_t b = 0; b < acc.size(); ++b) value[b] = std::max(value[b], acc[b]);
        }
        out.recursion[t] = coarse.expand(value);
    }

    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < xi.size(); ++i)
            out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.esssup[t][i] - out.recursion[t][i]));
    return out;
}

SeparationReport example_43_separation(std::size_t depth, double tilt, std::size_t t, double tol) {
    const Scenario base = example_43_tree(depth, tilt);
    if (t >= base.filtration.size()) throw InvalidInput("example_43_separation: t beyond the horizon");
    const std::size_t n = base.space.size();

    std::vector<std::pair<std::string, RandomVariable>> payoffs;
    payoffs.emplace_back("terminal_sum", base.xi);
    std::vector<double> abs_sum(n), pos_sum(n);
    for (std::size_t i = 0; i < n; ++i) {
        abs_sum[i] = std::abs(base.xi[i]);
        pos_sum[i] = std::max(base.xi[i], 0.0);
    }
    payoffs.emplace_back("abs_terminal_sum", RandomVariable(abs_sum));
    payoffs.emplace_back("positive_part", RandomVariable(pos_sum));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> ind(n, 0.0);
        ind[i] = 1.0;
        payoffs.emplace_back("indicator_" + base.space.atoms()[i], RandomVariable(std::move(ind)));
    }

    SeparationReport report;
    for (const auto& [name, payoff] : payoffs) {
        const auto cs = conditional_sublinear(payoff, base.ambiguity, base.filtration);
        const auto sol = solve_mmse(payoff, base.ambiguity, base.filtration[t], tol);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(cs.esssup[t][i] - sol.eta_hat[i]));
        report.cases.push_back({name, diff});
        report.recursion_discrepancy = std::max(report.recursion_discrepancy, cs.max_discrepancy);
        if (diff > report.max_difference) {
            report.max_difference = diff;
            report.witness = name;
        }
    }
    return report;
}

} // namespace mmse
