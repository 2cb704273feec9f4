#include "mmse/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mmse/parallel.hpp"
#include "mmse/sequence.hpp"

namespace mmse {

namespace {

constexpr double kMinBlockMass = 1e-14;
constexpr double kBarycenterPull = 1e-12;
constexpr int kBisectionSteps = 60;
constexpr std::size_t kPolishBudget = 25;

/// Dense view of one problem instance; every quantity below is a centered sum.
class VarianceModel {
public:
    VarianceModel(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c)
        : n_(a.atom_count()), k_(a.vertex_count()), nb_(c.block_count()), xi_(xi.values().begin(), xi.values().end()),
          block_(n_), vertex_(k_ * n_) {
        if (xi.size() != n_) throw InvalidInput("xi has the wrong number of atoms");
        if (c.atom_count() != n_) throw InvalidInput("partition has the wrong number of atoms");
        for (std::size_t i = 0; i < n_; ++i) block_[i] = c.block_of(i);
        for (std::size_t j = 0; j < k_; ++j) {
            const auto v = a.vertex(j).weights();
            std::copy(v.begin(), v.end(), vertex_.begin() + static_cast<std::ptrdiff_t>(j * n_));
        }
    }

    std::size_t k() const { return k_; }
    std::size_t blocks() const { return nb_; }

    struct State {
        std::vector<double> w;
        std::vector<double> pw;
        std::vector<double> mass;
        std::vector<double> eta;
        std::vector<double> grad;
        double value = 0.0;
        double gap = 0.0;
    };

    std::vector<double> combine(const std::vector<double>& coeff) const {
        std::vector<double> out(n_, 0.0);
        for (std::size_t j = 0; j < k_; ++j) {
            if (coeff[j] == 0.0) continue;
            const double* v = &vertex_[j * n_];
            for (std::size_t i = 0; i < n_; ++i) out[i] += coeff[j] * v[i];
        }
        return out;
    }

    /// Conditional means of xi under atom weights p; false when a block is (nearly) null.
    bool conditional_means(const std::vector<double>& p, std::vector<double>& mass,
                           std::vector<double>& eta) const {
        mass.assign(nb_, 0.0);
        eta.assign(nb_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            mass[block_[i]] += p[i];
            eta[block_[i]] += p[i] * xi_[i];
        }
        bool ok = true;
        for (std::size_t b = 0; b < nb_; ++b) {
            if (!(mass[b] >= kMinBlockMass)) ok = false;
            eta[b] = mass[b] > 0.0 ? eta[b] / mass[b] : 0.0;
        }
        return ok;
    }

    double weighted_residual(const double* p, const std::vector<double>& eta) const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double r = xi_[i] - eta[block_[i]];
            s += p[i] * r * r;
        }
        return s;
    }

    State evaluate(std::vector<double> w) const {
        State st;
        st.pw = combine(w);
        if (!conditional_means(st.pw, st.mass, st.eta)) {
            for (double& x : w) x = (1.0 - kBarycenterPull) * x + kBarycenterPull / static_cast<double>(k_);
            st.pw = combine(w);
            if (!conditional_means(st.pw, st.mass, st.eta))
                throw InvalidInput("mixture has a block of zero mass");
        }
        st.w = std::move(w);
        st.value = weighted_residual(st.pw.data(), st.eta);
        st.grad.resize(k_);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k_; ++j) {
            st.grad[j] = weighted_residual(&vertex_[j * n_], st.eta);
            top = std::max(top, st.grad[j]);
        }
        st.gap = top - st.value;
        return st;
    }

    /// Derivative of G(w/|w|) along d at w + gamma*d, given pw and pd = combine(d).
    ///
    /// G is homogeneous of degree one, so the raw derivative d.grad picks up
    /// G * sum(d); rounding in sum(d) would swamp tiny slopes near the optimum.
    double slope(const std::vector<double>& pw, const std::vector<double>& pd, double gamma) const {
        std::vector<double> p(n_), mass, eta;
        double total = 0.0, drift = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            p[i] = pw[i] + gamma * pd[i];
            total += p[i];
            drift += pd[i];
        }
        conditional_means(p, mass, eta);
        const double value = weighted_residual(p.data(), eta) / total;
        return (weighted_residual(pd.data(), eta) - value * drift) / total;
    }

    /// Exact maximizer of the concave slice gamma -> G(w + gamma*d) on [0, gamma_max].
    double line_search(const State& st, const std::vector<double>& d, double gamma_max) const {
        if (!(gamma_max > 0.0)) return 0.0;
        const auto pd = combine(d);
        if (slope(st.pw, pd, 0.0) <= 0.0) return 0.0;
        if (slope(st.pw, pd, gamma_max) >= 0.0) return gamma_max;
        double lo = 0.0, hi = gamma_max;
        for (int it = 0; it < kBisectionSteps; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (slope(st.pw, pd, mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    /// Hessian of G restricted to the given vertex indices.
    Eigen::MatrixXd hessian(const State& st, const std::vector<std::size_t>& support) const {
        const std::size_t m = support.size();
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(nb_));
        for (std::size_t s = 0; s < m; ++s) {
            const double* v = &vertex_[support[s] * n_];
            for (std::size_t i = 0; i < n_; ++i)
                u(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(block_[i])) +=
                    v[i] * (xi_[i] - st.eta[block_[i]]);
        }
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t b = 0; b < nb_; ++b) {
            const auto col = u.col(static_cast<Eigen::Index>(b));
            h.noalias() -= (2.0 / st.mass[b]) * col * col.transpose();
        }
        return h;
    }

private:
    std::size_t n_, k_, nb_;
    std::vector<double> xi_;
    std::vector<std::size_t> block_;
    std::vector<double> vertex_;
};

void normalize(std::vector<double>& w) {
    for (double& x : w)
        if (x < 0.0) x = 0.0;
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (v[j] > v[best]) best = j;
    return best;
}

/// Frank-Wolfe or away step, whichever has the steeper ascent slope.
bool vertex_step(const VarianceModel& model, VarianceModel::State& st) {
    const std::size_t k = model.k();
    const std::size_t fw = argmax_lowest(st.grad);
    const double fw_slope = st.grad[fw] - st.value;

    std::size_t away = k;
    for (std::size_t j = 0; j < k; ++j) {
        if (st.w[j] <= 0.0) continue;
        if (away == k || st.grad[j] < st.grad[away]) away = j;
    }
    const double away_slope = away < k ? st.value - st.grad[away] : 0.0;

    std::vector<double> d(k);
    double gamma_max;
    const bool toward = fw_slope >= away_slope || away == k || st.w[away] >= 1.0;
    if (toward) {
        for (std::size_t j = 0; j < k; ++j) d[j] = -st.w[j];
        d[fw] += 1.0;
        gamma_max = 1.0;
    } else {
        for (std::size_t j = 0; j < k; ++j) d[j] = st.w[j];
        d[away] -= 1.0;
        gamma_max = st.w[away] / (1.0 - st.w[away]);
    }
    const double gamma = model.line_search(st, d, gamma_max);
    if (gamma <= 0.0) return false;
    std::vector<double> w(st.w);
    for (std::size_t j = 0; j < k; ++j) w[j] += gamma * d[j];
    if (gamma == gamma_max && toward) {
        std::fill(w.begin(), w.end(), 0.0);
        w[fw] = 1.0;
    } else if (gamma == gamma_max) {
        w[away] = 0.0;
    }
    normalize(w);
    st = model.evaluate(std::move(w));
    return true;
}

/// Regularized Newton step on the face spanned by the current support.
bool face_newton_step(const VarianceModel& model, VarianceModel::State& st) {
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < model.k(); ++j)
        if (st.w[j] > 0.0) support.push_back(j);
    const std::size_t m = support.size();
    if (m < 2) return false;

    const Eigen::MatrixXd h = model.hessian(st, support);
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    const double reg = 1e-12 * scale;
    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(mi + 1, mi + 1);
    kkt.topLeftCorner(mi, mi) = h - reg * Eigen::MatrixXd::Identity(mi, mi);
    kkt.block(0, mi, mi, 1).setConstant(-1.0);
    kkt.block(mi, 0, 1, mi).setConstant(1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mi + 1);
    for (std::size_t s = 0; s < m; ++s) rhs(static_cast<Eigen::Index>(s)) = -st.grad[support[s]];
    const Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
    if (!sol.allFinite()) return false;

    // Project onto sum(d) = 0; the KKT solve only satisfies it to rounding.
    double drift = 0.0;
    for (std::size_t s = 0; s < m; ++s) drift += sol(static_cast<Eigen::Index>(s));
    drift /= static_cast<double>(m);

    std::vector<double> d(model.k(), 0.0);
    double gamma_max = 2.0;
    std::size_t blocking = model.k();
    for (std::size_t s = 0; s < m; ++s) {
        const double dj = sol(static_cast<Eigen::Index>(s)) - drift;
        d[support[s]] = dj;
        if (dj < 0.0) {
            const double limit = -st.w[support[s]] / dj;
            if (limit < gamma_max) {
                gamma_max = limit;
                blocking = support[s];
            }
        }
    }
    const double gamma = model.line_search(st, d, gamma_max);
    if (gamma <= 0.0) return false;
    std::vector<double> w(st.w);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += gamma * d[j];
    if (gamma == gamma_max && blocking < model.k()) w[blocking] = 0.0;
    normalize(w);
    auto next = model.evaluate(std::move(w));
    // Near the optimum G moves below its own rounding error; only reject clear decreases.
    if (next.value < st.value - 1e-14 * std::max(1.0, std::abs(st.value))) return false;
    st = std::move(next);
    return true;
}

EstimatorSolution make_solution(const VarianceModel::State& st, const Partition& c, std::size_t iterations,
                                bool converged) {
    EstimatorSolution sol{c.expand(st.eta), st.eta, MixtureWeights(st.w), st.value, st.gap, iterations, converged};
    return sol;
}

} // namespace

double objective_G(const MixtureWeights& w, const RandomVariable& xi, const AmbiguitySet& a,
                   const Partition& c) {
    if (w.size() != a.vertex_count()) throw InvalidInput("objective_G: weight count mismatch");
    const VarianceModel model(xi, a, c);
    return model.evaluate(w.values()).value;
}

std::vector<double> gradient_G(const MixtureWeights& w, const RandomVariable& xi,
                               const AmbiguitySet& a, const Partition& c) {
    if (w.size() != a.vertex_count()) throw InvalidInput("gradient_G: weight count mismatch");
    const VarianceModel model(xi, a, c);
    return model.evaluate(w.values()).grad;
}

EstimatorSolution solve_mmse(const RandomVariable& xi, const AmbiguitySet& a, const Partition& c,
                             double tol, std::size_t max_iter,
                             const std::optional<MixtureWeights>& start) {
    if (!(tol > 0.0)) throw InvalidInput("solve_mmse: tolerance must be positive");
    if (max_iter < 1) throw InvalidInput("solve_mmse: max_iter must be at least 1");
    const VarianceModel model(xi, a, c);
    const std::size_t k = model.k();
    if (start && start->size() != k) throw InvalidInput("solve_mmse: start has the wrong length");

    VarianceModel::State st = model.evaluate(start ? start->values() : MixtureWeights::barycenter(k).values());
    VarianceModel::State best = st;
    std::size_t iterations = 0;
    std::size_t polish = 0;
    std::size_t stalls = 0;

    while (iterations < max_iter) {
        const double floor = 1e-15 * std::max(1.0, std::abs(st.value));
        if (st.gap <= floor) break;
        if (best.gap <= tol) {
            if (polish >= kPolishBudget || stalls >= 3) break;
            ++polish;
        }
        ++iterations;
        const double before = st.gap;
        const bool moved = vertex_step(model, st);
        const bool refined = face_newton_step(model, st);
        if (st.gap < best.gap) best = st;
        if (!moved && !refined) break;
        stalls = st.gap < 0.5 * before ? 0 : stalls + 1;
    }
    return make_solution(best, c, iterations, best.gap <= tol);
}

SaddleReport verify_saddle(const EstimatorSolution& sol, const RandomVariable& xi,
                           const AmbiguitySet& a, const Partition& c, double tol) {
    SaddleReport r;
    const Measure p_hat = mix(a, sol.w_hat);
    const auto loss = [&](const Measure& p, const RandomVariable& eta) {
        return expectation((xi - eta).squared(), p);
    };
    r.value = loss(p_hat, sol.eta_hat);
    r.alpha_residual = std::abs(r.value - sol.alpha);

    r.left_margin = std::numeric_limits<double>::infinity();
    for (const auto& v : a.vertices()) r.left_margin = std::min(r.left_margin, r.value - loss(v, sol.eta_hat));

    r.right_margin = std::numeric_limits<double>::infinity();
    const auto blocks = c.block_values(sol.eta_hat);
    for (double delta : {1e-3, 1e-1}) {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            for (double sign : {-1.0, 1.0}) {
                auto shifted = blocks;
                shifted[b] += sign * delta;
                r.right_margin = std::min(r.right_margin, loss(p_hat, c.expand(shifted)) - r.value);
            }
        }
    }
    r.right_margin = std::min(r.right_margin, loss(p_hat, cond_expectation(xi, p_hat, c)) - r.value);
    for (const auto& v : a.vertices())
        r.right_margin = std::min(r.right_margin, loss(p_hat, cond_expectation(xi, v, c)) - r.value);

    r.passed = c.is_measurable(sol.eta_hat, tol) && r.left_margin >= -tol && r.right_margin >= -tol &&
               r.alpha_residual <= tol;
    return r;
}

UniquenessReport uniqueness_probe(const RandomVariable& xi, const AmbiguitySet& a,
                                  const Partition& c, double tol, std::size_t restarts,
                                  std::uint64_t seed, bool parallel) {
    if (restarts < 2) throw InvalidInput("uniqueness_probe: restarts must be at least 2");
    const std::size_t k = a.vertex_count();
    std::vector<MixtureWeights> starts;
    for (std::size_t j = 0; j < k; ++j) starts.push_back(MixtureWeights::unit(k, j));
    starts.push_back(MixtureWeights::barycenter(k));
    std::mt19937_64 rng(seed);
    for (std::size_t r = k + 1; r < restarts; ++r) starts.emplace_back(random_simplex_point(k, rng));

    UniquenessReport report;
    report.runs.resize(starts.size(), EstimatorSolution{RandomVariable{}, {}, MixtureWeights::unit(k, 0)});
    parallel_for(
        starts.size(), [&](std::size_t i) { report.runs[i] = solve_mmse(xi, a, c, tol, 100000, starts[i]); },
        parallel);

    std::vector<const MixtureWeights*> clusters;
    for (const auto& run : report.runs) {
        for (std::size_t b = 0; b < run.eta_blocks.size(); ++b)
            report.eta_spread = std::max(report.eta_spread,
                                         std::abs(run.eta_blocks[b] - report.runs.front().eta_blocks[b]));
        bool found = false;
        for (const auto* w : clusters) {
            double dist = 0.0;
            for (std::size_t j = 0; j < k; ++j) dist = std::max(dist, std::abs((*w)[j] - run.w_hat[j]));
            report.w_spread = std::max(report.w_spread, dist);
            if (dist <= 1e-6) found = true;
        }
        if (!found) clusters.push_back(&run.w_hat);
    }
    report.distinct_w = clusters.size();
    report.eta_unique = report.eta_spread <= 1e-7;
    return report;
}

} // namespace mmse
