#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mmse {

/**
 * Additive-recurrence (Kronecker / R_d) low-discrepancy sequence in [0,1)^d.
 *
 * Works in any dimension, which Halton does not at k in the hundreds.
 */
class KroneckerSequence {
public:
    explicit KroneckerSequence(std::size_t dim);
    std::vector<double> point(std::uint64_t index) const;
    std::size_t dim() const { return alpha_.size(); }

private:
    std::vector<double> alpha_;
};

/// Maps a point of the unit cube to the simplex through normalized exponential spacings.
std::vector<double> cube_to_simplex(const std::vector<double>& u);

/// Uniform point of the simplex of dimension k.
std::vector<double> random_simplex_point(std::size_t k, std::mt19937_64& rng);

} // namespace mmse
