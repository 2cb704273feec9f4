#include "mmse/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmse {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw InvalidInput(std::string(what) + "[" + std::to_string(i) + "] is not finite");
    }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw InvalidInput(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                           std::to_string(b) + ")");
}

} // namespace

SampleSpace::SampleSpace(std::vector<std::string> atoms, std::vector<double> base_weights) {
    if (base_weights.empty()) throw InvalidInput("sample space needs at least one atom");
    require_same_size(atoms.size(), base_weights.size(), "sample space atoms/base_weights");
    require_finite(base_weights, "base_weights");
    for (std::size_t i = 0; i < base_weights.size(); ++i) {
        if (!(base_weights[i] > 0.0))
            throw InvalidInput("base_weights[" + std::to_string(i) + "] must be positive");
    }
    const double sum = std::accumulate(base_weights.begin(), base_weights.end(), 0.0);
    if (std::abs(sum - 1.0) > kWeightSumTolerance)
        throw InvalidInput("base_weights sum to " + std::to_string(sum) + ", expected 1");
    data_ = std::make_shared<const Data>(Data{std::move(atoms), std::move(base_weights)});
}

SampleSpace SampleSpace::uniform(std::size_t n) {
    if (n == 0) throw InvalidInput("sample space needs at least one atom");
    std::vector<std::string> atoms(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = "w" + std::to_string(i + 1);
    return SampleSpace(std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool SampleSpace::operator==(const SampleSpace& other) const {
    if (data_ == other.data_) return true;
    return data_->atoms == other.data_->atoms && data_->weights == other.data_->weights;
}

// ---------------------------------------------------------------------------

RandomVariable::RandomVariable(std::vector<double> values) : values_(std::move(values)) {
    require_finite(values_, "random variable");
}

RandomVariable RandomVariable::constant(std::size_t n, double c) {
    return RandomVariable(std::vector<double>(n, c));
}

RandomVariable RandomVariable::operator+(const RandomVariable& rhs) const {
    require_same_size(size(), rhs.size(), "random variable sum");
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = values_[i] + rhs.values_[i];
    return RandomVariable(std::move(out));
}

RandomVariable RandomVariable::operator-(const RandomVariable& rhs) const {
    require_same_size(size(), rhs.size(), "random variable difference");
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = values_[i] - rhs.values_[i];
    return RandomVariable(std::move(out));
}

RandomVariable RandomVariable::operator*(double s) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= s;
    return RandomVariable(std::move(out));
}

RandomVariable RandomVariable::squared() const {
    std::vector<double> out(values_);
    for (double& v : out) v *= v;
    return RandomVariable(std::move(out));
}

double RandomVariable::min() const {
    if (values_.empty()) throw InvalidInput("empty random variable");
    return *std::min_element(values_.begin(), values_.end());
}

double RandomVariable::max() const {
    if (values_.empty()) throw InvalidInput("empty random variable");
    return *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------

Partition::Partition(std::size_t atom_count, std::vector<std::vector<std::size_t>> blocks)
    : blocks_(std::move(blocks)), block_of_(atom_count, atom_count) {
    if (atom_count == 0) throw InvalidInput("partition of an empty atom set");
    for (auto& b : blocks_) {
        if (b.empty()) throw InvalidInput("partition has an empty block");
        std::sort(b.begin(), b.end());
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
        for (std::size_t atom : blocks_[bi]) {
            if (atom >= atom_count)
                throw InvalidInput("partition references atom " + std::to_string(atom) +
                                   " outside [0, " + std::to_string(atom_count) + ")");
            if (block_of_[atom] != atom_count)
                throw InvalidInput("atom " + std::to_string(atom) + " appears in two blocks");
            block_of_[atom] = bi;
        }
    }
    for (std::size_t i = 0; i < atom_count; ++i) {
        if (block_of_[i] == atom_count)
            throw InvalidInput("atom " + std::to_string(i) + " is not covered by the partition");
    }
}

Partition Partition::trivial(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return Partition(n, {std::move(all)});
}

Partition Partition::finest(std::size_t n) {
    std::vector<std::vector<std::size_t>> blocks(n);
    for (std::size_t i = 0; i < n; ++i) blocks[i] = {i};
    return Partition(n, std::move(blocks));
}

bool Partition::refines(const Partition& coarser) const {
    if (coarser.atom_count() != atom_count()) return false;
    for (const auto& b : blocks_) {
        const std::size_t target = coarser.block_of(b.front());
        for (std::size_t atom : b)
            if (coarser.block_of(atom) != target) return false;
    }
    return true;
}

bool Partition::is_measurable(const RandomVariable& x, double tol) const {
    require_same_size(x.size(), atom_count(), "measurability check");
    for (const auto& b : blocks_) {
        const double v = x[b.front()];
        for (std::size_t atom : b)
            if (std::abs(x[atom] - v) > tol) return false;
    }
    return true;
}

std::vector<double> Partition::block_values(const RandomVariable& x) const {
    require_same_size(x.size(), atom_count(), "block values");
    std::vector<double> out(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) out[b] = x[blocks_[b].front()];
    return out;
}

RandomVariable Partition::expand(std::span<const double> block_values) const {
    require_same_size(block_values.size(), blocks_.size(), "block expansion");
    std::vector<double> out(atom_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = block_values[block_of_[i]];
    return RandomVariable(std::move(out));
}

// ---------------------------------------------------------------------------

Measure::Measure(SampleSpace space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
    require_same_size(weights_.size(), space_.size(), "measure weights");
    require_finite(weights_, "measure weights");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] < 0.0)
            throw InvalidInput("measure weight [" + std::to_string(i) + "] is negative");
    }
    const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(sum - 1.0) > kWeightSumTolerance)
        throw InvalidInput("measure weights sum to " + std::to_string(sum) + ", expected 1");
    density_.resize(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i)
        density_[i] = weights_[i] / space_.base_weight(i);
}

bool Measure::is_equivalent() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; });
}

std::vector<double> Measure::block_masses(const Partition& c) const {
    require_same_size(c.atom_count(), size(), "block masses");
    std::vector<double> mass(c.block_count(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) mass[c.block_of(i)] += weights_[i];
    return mass;
}

// ---------------------------------------------------------------------------

double expectation(const RandomVariable& xi, const Measure& p) {
    require_same_size(xi.size(), p.size(), "expectation");
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += p.weight(i) * xi[i];
    return s;
}

RandomVariable cond_expectation(const RandomVariable& xi, const Measure& p, const Partition& c) {
    require_same_size(xi.size(), p.size(), "conditional expectation");
    require_same_size(c.atom_count(), p.size(), "conditional expectation partition");
    std::vector<double> mass(c.block_count(), 0.0);
    std::vector<double> first(c.block_count(), 0.0);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        mass[c.block_of(i)] += p.weight(i);
        first[c.block_of(i)] += p.weight(i) * xi[i];
    }
    for (std::size_t b = 0; b < mass.size(); ++b) {
        if (!(mass[b] > 0.0))
            throw InvalidInput("block " + std::to_string(b) +
                               " has zero mass under the measure (not equivalent to P0)");
        first[b] /= mass[b];
    }
    return c.expand(first);
}

RandomVariable cond_density(const Measure& p, const Partition& c) {
    require_same_size(c.atom_count(), p.size(), "conditional density");
    const auto mass = p.block_masses(c);
    std::vector<double> base(c.block_count(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) base[c.block_of(i)] += p.space().base_weight(i);
    std::vector<double> ratio(c.block_count());
    for (std::size_t b = 0; b < ratio.size(); ++b) ratio[b] = mass[b] / base[b];
    return c.expand(ratio);
}

EquivalenceCheck check_equivalence(const Measure& p) {
    EquivalenceCheck out;
    out.equivalent = p.is_equivalent();
    for (double w : p.weights())
        if (w > 0.0 && w < kMinAtomWeight) out.ill_conditioned = true;
    return out;
}

} // namespace mmse
