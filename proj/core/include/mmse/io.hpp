#pragma once

// Scenario files ("mmse-scenario/1") and solver reports, both JSON. Output is
// deterministic: object keys sorted, floats with 17 significant digits.

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mmse/scenarios.hpp"
#include "mmse/solver.hpp"

namespace mmse::io {

inline constexpr const char* kScenarioSchema = "mmse-scenario/1";
inline constexpr double kFileWeightTolerance = 1e-9;

/// Schema violation; what() starts with the offending field path.
class SchemaError : public InvalidInput {
public:
    SchemaError(std::string path, const std::string& message)
        : InvalidInput(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Sorted keys, two-space indent, floats as %.17g, trailing newline.
std::string dump(const nlohmann::json& j);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

Scenario load_scenario(const std::filesystem::path& path);
/// Writes the scenario; extra top-level keys (e.g. "closure") may be merged in.
void save_scenario(const std::filesystem::path& path, const Scenario& s,
                   const std::optional<nlohmann::json>& closure = std::nullopt);

nlohmann::json closure_to_json(const Ex42Closure& c);

nlohmann::json report_to_json(const Scenario& s, const EstimatorSolution& sol, const SaddleReport& saddle);
void save_report(const std::filesystem::path& path, const Scenario& s, const EstimatorSolution& sol,
                 const SaddleReport& saddle);

/// Reads eta_hat / w_hat / alpha / gap / iterations back from a report.
EstimatorSolution solution_from_report(const nlohmann::json& report, const Scenario& s);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace mmse::io
