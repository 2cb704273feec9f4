#include "mmse/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmse {

KroneckerSequence::KroneckerSequence(std::size_t dim) : alpha_(dim) {
    // phi_d is the unique positive root of x^{d+1} = x + 1.
    double phi = 2.0;
    for (int it = 0; it < 64; ++it)
        phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dim + 1));
    double a = 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
        a /= phi;
        alpha_[j] = a - std::floor(a);
    }
}

std::vector<double> KroneckerSequence::point(std::uint64_t index) const {
    std::vector<double> u(alpha_.size());
    const double n = static_cast<double>(index + 1);
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double v = 0.5 + n * alpha_[j];
        u[j] = v - std::floor(v);
    }
    return u;
}

std::vector<double> cube_to_simplex(const std::vector<double>& u) {
    std::vector<double> w(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = std::min(std::max(u[j], 1e-300), 1.0 - 1e-16);
        w[j] = -std::log(x);
    }
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    return w;
}

std::vector<double> random_simplex_point(std::size_t k, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(k);
    for (double& x : w) x = expo(rng);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    return w;
}

} // namespace mmse
