#include "mmse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mmse/version.hpp"

namespace mmse::io {

using nlohmann::json;

namespace {

void dump_into(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += inner + json(it.key()).dump() + ": ";
            dump_into(it.value(), out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool scalars = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
        if (scalars) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                dump_into(j[i], out, indent + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += inner;
            dump_into(j[i], out, indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        return;
    }
    default:
        out += j.dump();
    }
}

std::string at(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string at(const std::string& parent, std::size_t index) {
    return parent + "[" + std::to_string(index) + "]";
}

const json& require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw SchemaError(key, "missing required field");
    return j.at(key);
}

std::vector<double> number_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw SchemaError(at(path, i), "expected a number");
        const double v = j[i].get<double>();
        if (!std::isfinite(v)) throw SchemaError(at(path, i), "not finite");
        out.push_back(v);
    }
    return out;
}

/// Checks a probability vector; renormalizes sums off by more than 1e-12 but within 1e-9.
std::vector<double> weight_array(const json& j, const std::string& path, std::size_t expected) {
    auto w = number_array(j, path);
    if (w.size() != expected)
        throw SchemaError(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] < 0.0) throw SchemaError(at(path, i), "negative weight " + std::to_string(w[i]));
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(sum - 1.0) > kFileWeightTolerance)
        throw SchemaError(path, "weights sum to " + std::to_string(sum) + ", expected 1 within 1e-9");
    if (std::abs(sum - 1.0) > kWeightSumTolerance)
        for (double& v : w) v /= sum;
    return w;
}

Partition partition_from(const json& j, const std::string& path, std::size_t n) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of blocks");
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t b = 0; b < j.size(); ++b) {
        const std::string bp = at(path, b);
        if (!j[b].is_array()) throw SchemaError(bp, "expected an array of atom indices");
        std::vector<std::size_t> block;
        for (std::size_t i = 0; i < j[b].size(); ++i) {
            if (!j[b][i].is_number_unsigned()) throw SchemaError(at(bp, i), "expected a nonnegative integer");
            block.push_back(j[b][i].get<std::size_t>());
        }
        blocks.push_back(std::move(block));
    }
    try {
        return Partition(n, std::move(blocks));
    } catch (const InvalidInput& e) {
        throw SchemaError(path, e.what());
    }
}

json partition_to(const Partition& c) {
    json out = json::array();
    for (const auto& b : c.blocks()) out.push_back(b);
    return out;
}

} // namespace

std::string dump(const json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["schema"] = kScenarioSchema;
    j["atoms"] = s.space.atoms();
    j["base_weights"] = std::vector<double>(s.space.base_weights().begin(), s.space.base_weights().end());
    j["partition"] = partition_to(s.partition);
    json vertices = json::array();
    for (const auto& v : s.ambiguity.vertices())
        vertices.push_back(std::vector<double>(v.weights().begin(), v.weights().end()));
    j["vertices"] = std::move(vertices);
    j["xi"] = std::vector<double>(s.xi.values().begin(), s.xi.values().end());
    j["meta"] = {{"name", s.name}, {"description", s.description}};
    if (!s.filtration.empty()) {
        json f = json::array();
        for (const auto& c : s.filtration) f.push_back(partition_to(c));
        j["filtration"] = std::move(f);
    }
    return j;
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("$", "expected a JSON object");
    static const std::set<std::string> known{"schema", "atoms", "base_weights", "partition", "vertices",
                                             "xi",     "meta",  "filtration",   "closure"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.contains(it.key())) throw SchemaError(it.key(), "unknown field");

    const json& schema = require(j, "schema");
    if (!schema.is_string() || schema.get<std::string>() != kScenarioSchema)
        throw SchemaError("schema", std::string("expected \"") + kScenarioSchema + "\"");

    const json& atoms_j = require(j, "atoms");
    if (!atoms_j.is_array() || atoms_j.empty()) throw SchemaError("atoms", "expected a nonempty array of strings");
    std::vector<std::string> atoms;
    for (std::size_t i = 0; i < atoms_j.size(); ++i) {
        if (!atoms_j[i].is_string()) throw SchemaError(at("atoms", i), "expected a string");
        atoms.push_back(atoms_j[i].get<std::string>());
    }
    const std::size_t n = atoms.size();

    auto base = weight_array(require(j, "base_weights"), "base_weights", n);
    for (std::size_t i = 0; i < n; ++i)
        if (!(base[i] > 0.0)) throw SchemaError(at("base_weights", i), "base weight must be positive");
    SampleSpace space(std::move(atoms), std::move(base));

    Partition partition = partition_from(require(j, "partition"), "partition", n);

    const json& vj = require(j, "vertices");
    if (!vj.is_array() || vj.empty()) throw SchemaError("vertices", "expected a nonempty array of weight arrays");
    std::vector<Measure> vertices;
    for (std::size_t v = 0; v < vj.size(); ++v) {
        const std::string vp = at("vertices", v);
        auto w = weight_array(vj[v], vp, n);
        for (std::size_t i = 0; i < n; ++i)
            if (!(w[i] > 0.0)) throw SchemaError(at(vp, i), "zero weight: vertex not equivalent to P0");
        vertices.emplace_back(space, std::move(w));
    }
    AmbiguitySet set(space, std::move(vertices));

    auto xi = number_array(require(j, "xi"), "xi");
    if (xi.size() != n) throw SchemaError("xi", "expected " + std::to_string(n) + " entries");

    Scenario s{"", "", space, std::move(partition), std::move(set), RandomVariable(std::move(xi)), {}};
    if (j.contains("meta")) {
        const json& meta = j.at("meta");
        if (!meta.is_object()) throw SchemaError("meta", "expected an object");
        for (auto it = meta.begin(); it != meta.end(); ++it) {
            if (!it.value().is_string()) throw SchemaError(at("meta", it.key()), "expected a string");
            if (it.key() == "name") s.name = it.value().get<std::string>();
            else if (it.key() == "description") s.description = it.value().get<std::string>();
        }
    }
    if (j.contains("filtration")) {
        const json& f = j.at("filtration");
        if (!f.is_array()) throw SchemaError("filtration", "expected an array of partitions");
        for (std::size_t t = 0; t < f.size(); ++t) s.filtration.push_back(partition_from(f[t], at("filtration", t), n));
        for (std::size_t t = 1; t < s.filtration.size(); ++t)
            if (!s.filtration[t].refines(s.filtration[t - 1]))
                throw SchemaError(at("filtration", t), "does not refine the previous partition");
    }
    return s;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const std::filesystem::path& path, const Scenario& s, const std::optional<json>& closure) {
    json j = scenario_to_json(s);
    if (closure) j["closure"] = *closure;
    write_text(path, dump(j));
}

json closure_to_json(const Ex42Closure& c) {
    return json{{"N", c.N},
                {"lambda_star", c.lambda_star},
                {"p", c.p},
                {"F_value", c.F_value},
                {"tail_bound", c.tail_bound},
                {"rho_series", c.rho_series},
                {"sign_sum", c.sign_sum},
                {"tail_mass_p1", c.tail_mass_p1},
                {"tail_mass_p2", c.tail_mass_p2}};
}

json report_to_json(const Scenario& s, const EstimatorSolution& sol, const SaddleReport& saddle) {
    json j;
    j["scenario"] = s.name;
    j["tool_version"] = kToolVersion;
    j["blocks"] = partition_to(s.partition);
    j["eta_hat"] = sol.eta_blocks;
    j["w_hat"] = sol.w_hat.values();
    j["alpha"] = sol.alpha;
    j["gap"] = sol.gap;
    j["iterations"] = sol.iterations;
    j["converged"] = sol.converged;
    j["saddle"] = {{"passed", saddle.passed},
                   {"left_margin", saddle.left_margin},
                   {"right_margin", saddle.right_margin},
                   {"value", saddle.value},
                   {"alpha_residual", saddle.alpha_residual}};
    return j;
}

void save_report(const std::filesystem::path& path, const Scenario& s, const EstimatorSolution& sol,
                 const SaddleReport& saddle) {
    write_text(path, dump(report_to_json(s, sol, saddle)));
}

EstimatorSolution solution_from_report(const json& report, const Scenario& s) {
    if (!report.is_object()) throw SchemaError("$", "report must be a JSON object");
    auto eta = number_array(require(report, "eta_hat"), "eta_hat");
    if (eta.size() != s.partition.block_count())
        throw SchemaError("eta_hat", "expected one value per block of the scenario partition");
    auto w = number_array(require(report, "w_hat"), "w_hat");
    if (w.size() != s.ambiguity.vertex_count()) throw SchemaError("w_hat", "expected one weight per vertex");
    const json& alpha = require(report, "alpha");
    if (!alpha.is_number()) throw SchemaError("alpha", "expected a number");
    EstimatorSolution sol{s.partition.expand(eta), eta, MixtureWeights(w), alpha.get<double>()};
    if (report.contains("gap") && report.at("gap").is_number()) sol.gap = report.at("gap").get<double>();
    if (report.contains("iterations") && report.at("iterations").is_number_unsigned())
        sol.iterations = report.at("iterations").get<std::size_t>();
    if (report.contains("converged") && report.at("converged").is_boolean())
        sol.converged = report.at("converged").get<bool>();
    return sol;
}

} // namespace mmse::io
