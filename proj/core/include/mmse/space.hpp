#pragma once

// Finite probability spaces: atoms with a strictly positive base measure,
// random variables, partitions (sub-sigma-algebras) and measures, plus the
// linear and conditional expectations built on them.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmse {

/// Raised whenever an input violates a construction invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kMinAtomWeight = 1e-12;
inline constexpr double kDefaultTolerance = 1e-9;

/**
 * Finite sample space with base measure P0.
 *
 * Copies are cheap: the atom data is shared and immutable.
 */
class SampleSpace {
public:
    SampleSpace(std::vector<std::string> atoms, std::vector<double> base_weights);

    /// n atoms labelled w1..wn with P0 uniform.
    static SampleSpace uniform(std::size_t n);

    std::size_t size() const { return data_->weights.size(); }
    const std::vector<std::string>& atoms() const { return data_->atoms; }
    std::span<const double> base_weights() const { return data_->weights; }
    double base_weight(std::size_t i) const { return data_->weights[i]; }

    bool operator==(const SampleSpace& other) const;

private:
    struct Data {
        std::vector<std::string> atoms;
        std::vector<double> weights;
    };
    std::shared_ptr<const Data> data_;
};

/// Real-valued random variable on a finite space (one value per atom).
class RandomVariable {
public:
    RandomVariable() = default;
    explicit RandomVariable(std::vector<double> values);
    static RandomVariable constant(std::size_t n, double c);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

    RandomVariable operator+(const RandomVariable& rhs) const;
    RandomVariable operator-(const RandomVariable& rhs) const;
    RandomVariable operator*(double s) const;
    RandomVariable squared() const;

    double min() const;
    double max() const;

    bool operator==(const RandomVariable&) const = default;

private:
    std::vector<double> values_;
};

/**
 * Partition of the atom set into disjoint nonempty blocks.
 *
 * Canonical form: every block sorted, blocks ordered by smallest member.
 */
class Partition {
public:
    Partition(std::size_t atom_count, std::vector<std::vector<std::size_t>> blocks);

    static Partition trivial(std::size_t n);
    static Partition finest(std::size_t n);

    std::size_t atom_count() const { return block_of_.size(); }
    std::size_t block_count() const { return blocks_.size(); }
    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    const std::vector<std::size_t>& block(std::size_t b) const { return blocks_[b]; }
    std::size_t block_of(std::size_t atom) const { return block_of_[atom]; }

    /// True when every block of *this lies inside a block of coarser.
    bool refines(const Partition& coarser) const;
    /// True when x is constant on every block up to tol.
    bool is_measurable(const RandomVariable& x, double tol = 0.0) const;
    /// One value per block taken from a block-constant variable.
    std::vector<double> block_values(const RandomVariable& x) const;
    /// Expand per-block values to a per-atom variable.
    RandomVariable expand(std::span<const double> block_values) const;

    bool operator==(const Partition& other) const { return blocks_ == other.blocks_; }

private:
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<std::size_t> block_of_;
};

/// Probability measure on a SampleSpace; carries its density dP/dP0.
class Measure {
public:
    Measure(SampleSpace space, std::vector<double> weights);

    const SampleSpace& space() const { return space_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> density() const { return density_; }
    bool is_equivalent() const;

    /// Mass of every block of c.
    std::vector<double> block_masses(const Partition& c) const;

private:
    SampleSpace space_;
    std::vector<double> weights_;
    std::vector<double> density_;
};

struct EquivalenceCheck {
    bool equivalent = false;
    /// Set when some weight is positive but below kMinAtomWeight.
    bool ill_conditioned = false;
};

double expectation(const RandomVariable& xi, const Measure& p);
RandomVariable cond_expectation(const RandomVariable& xi, const Measure& p, const Partition& c);
RandomVariable cond_density(const Measure& p, const Partition& c);
EquivalenceCheck check_equivalence(const Measure& p);

} // namespace mmse
