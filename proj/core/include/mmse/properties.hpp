#pragma once

// Randomized scenario generators and the property suite behind `mmse props`.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmse/scenarios.hpp"

namespace mmse::props {

struct RunConfig {
    double tolerance = kDefaultTolerance;
    std::size_t max_iter = 100000;
    std::uint64_t seed = 42;
    bool parallel = false;
};

struct ScenarioShape {
    std::size_t min_atoms = 2, max_atoms = 6;
    std::size_t min_vertices = 2, max_vertices = 4;
    std::size_t max_blocks = 6;
};

/// Random atoms/vertices/partition; every vertex weight is at least 0.01.
Scenario random_scenario(std::mt19937_64& rng, const ScenarioShape& shape = {});

/// Rectangular tree with random node intervals, depth 2 or 3, partition F_t for random 0 < t < depth.
Scenario random_tree_scenario(std::mt19937_64& rng);

/**
 * Tree where every vertex is fair up to time t and uses level-constant up
 * probabilities afterwards; xi depends only on the steps after t. Every hull
 * member then makes xi independent of F_t.
 */
Scenario independence_scenario(std::mt19937_64& rng);

/// Block-conditional law of xi identical across blocks for every vertex.
bool independent_of_partition(const Scenario& s, double tol = 1e-12);

struct PropertyCount {
    std::string name;
    std::size_t passed = 0;
    std::size_t failed = 0;
    /// Violations on sets whose stability check failed: reported, not counted as failures.
    std::size_t flagged = 0;
    double worst = 0.0;
};

struct SuiteResult {
    std::vector<PropertyCount> properties;
    std::size_t cases = 0;
    bool ok() const;
};

/// inject_bug reverses the sub-additivity comparison (harness self-test).
SuiteResult run_property_suite(const RunConfig& config, std::size_t cases, bool inject_bug = false);

} // namespace mmse::props
