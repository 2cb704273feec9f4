#include "mmse/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmse/space.hpp"

namespace mmse::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-12;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0), obj_(cols + 1, 0.0), basis_(rows, 0) {}

    double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, n_); }
    double rhs(std::size_t i) const { return at(i, n_); }
    std::size_t& basic(std::size_t i) { return basis_[i]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    /// Objective row holds reduced costs; obj_[n_] is minus the objective value.
    void set_costs(std::span<const double> cost) {
        std::fill(obj_.begin(), obj_.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) obj_[j] = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) obj_[j] -= cb * at(i, j);
        }
    }

    double objective() const { return -obj_[n_]; }
    double reduced_cost(std::size_t j) const { return obj_[j]; }

    void pivot(std::size_t r, std::size_t col) {
        const double p = at(r, col);
        for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = at(i, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
            at(i, col) = 0.0;
        }
        const double f = obj_[col];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= n_; ++j) obj_[j] -= f * at(r, j);
            obj_[col] = 0.0;
        }
        basis_[r] = col;
    }

    /// Runs Bland-rule simplex over columns [0, allowed). Returns optimal / unbounded / limit.
    Status run(std::size_t allowed, std::size_t max_pivots, std::size_t& pivots) {
        while (pivots < max_pivots) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (obj_[j] < -kCostEps) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return Status::optimal;

            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a <= kPivotEps) continue;
                const double ratio = rhs(i) / a;
                const bool better = leave == m_ || ratio < best - 1e-15;
                const bool tie = !better && ratio <= best + 1e-15 && basis_[i] < basis_[leave];
                if (better || tie) {
                    best = std::min(best, ratio);
                    leave = i;
                }
            }
            if (leave == m_) return Status::unbounded;
            pivot(leave, enter);
            ++pivots;
        }
        return Status::iteration_limit;
    }

private:
    std::size_t m_, n_;
    std::vector<double> t_;
    std::vector<double> obj_;
    std::vector<std::size_t> basis_;
};

} // namespace

Result minimize(std::span<const double> c, const Constraints& ub, const Constraints& eq,
                std::size_t max_pivots) {
    const std::size_t n = c.size();
    const std::size_t m_ub = ub.rows.size();
    const std::size_t m_eq = eq.rows.size();
    if (ub.rhs.size() != m_ub || eq.rhs.size() != m_eq)
        throw InvalidInput("lp: constraint rows and rhs differ in length");
    for (const auto& r : ub.rows)
        if (r.size() != n) throw InvalidInput("lp: inequality row has wrong width");
    for (const auto& r : eq.rows)
        if (r.size() != n) throw InvalidInput("lp: equality row has wrong width");

    const std::size_t m = m_ub + m_eq;
    // Columns: originals, one slack per inequality, one artificial per row.
    const std::size_t slack0 = n;
    const std::size_t art0 = n + m_ub;
    const std::size_t total = art0 + m;
    Tableau tab(m, total);

    for (std::size_t i = 0; i < m; ++i) {
        const bool is_ub = i < m_ub;
        const auto& row = is_ub ? ub.rows[i] : eq.rows[i - m_ub];
        double b = is_ub ? ub.rhs[i] : eq.rhs[i - m_ub];
        const double sign = b < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * row[j];
        if (is_ub) tab.at(i, slack0 + i) = sign;
        tab.at(i, art0 + i) = 1.0;
        tab.rhs(i) = sign * b;
        tab.basic(i) = art0 + i;
    }

    Result out;
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = art0; j < total; ++j) phase1[j] = 1.0;
    tab.set_costs(phase1);
    Status s = tab.run(total, max_pivots, out.pivots);
    if (s == Status::iteration_limit) return out;
    if (tab.objective() > 1e-9) {
        out.status = Status::infeasible;
        return out;
    }

    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basic(i) < art0) continue;
        for (std::size_t j = 0; j < art0; ++j) {
            if (std::abs(tab.at(i, j)) > kPivotEps) {
                tab.pivot(i, j);
                ++out.pivots;
                break;
            }
        }
    }

    std::vector<double> phase2(total, 0.0);
    std::copy(c.begin(), c.end(), phase2.begin());
    tab.set_costs(phase2);
    s = tab.run(art0, max_pivots, out.pivots);
    out.status = s;
    if (s != Status::optimal) return out;

    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basic(i) < n) out.x[tab.basic(i)] = std::max(0.0, tab.rhs(i));
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
    return out;
}

HullDistance hull_distance(std::span<const double> target,
                           const std::vector<std::span<const double>>& points) {
    const std::size_t dim = target.size();
    const std::size_t k = points.size();
    if (k == 0) throw InvalidInput("hull_distance: no points");
    for (const auto& p : points)
        if (p.size() != dim) throw InvalidInput("hull_distance: dimension mismatch");

    // Variables: v_0..v_{k-1}, t.   min t
    //   sum_j v_j p_j[i] - t <=  target[i]
    //  -sum_j v_j p_j[i] - t <= -target[i]
    //   sum_j v_j = 1
    const std::size_t nv = k + 1;
    std::vector<double> cost(nv, 0.0);
    cost[k] = 1.0;
    Constraints ub, eq;
    ub.rows.reserve(2 * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> up(nv), down(nv);
        for (std::size_t j = 0; j < k; ++j) {
            up[j] = points[j][i];
            down[j] = -points[j][i];
        }
        up[k] = -1.0;
        down[k] = -1.0;
        ub.rows.push_back(std::move(up));
        ub.rhs.push_back(target[i]);
        ub.rows.push_back(std::move(down));
        ub.rhs.push_back(-target[i]);
    }
    std::vector<double> simplex(nv, 1.0);
    simplex[k] = 0.0;
    eq.rows.push_back(std::move(simplex));
    eq.rhs.push_back(1.0);

    const Result r = minimize(cost, ub, eq);
    HullDistance out;
    if (r.status != Status::optimal) return out;
    out.solved = true;
    out.coefficients.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(k));
    // Recompute the residual from the coefficients rather than trusting t.
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += out.coefficients[j] * points[j][i];
        worst = std::max(worst, std::abs(s - target[i]));
    }
    out.residual = worst;
    return out;
}

} // namespace mmse::lp
