#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mmse/io.hpp"
#include "mmse/oracle.hpp"
#include "mmse/properties.hpp"
#include "mmse/version.hpp"

namespace mmse::cli {

namespace {

struct Options {
    double tol = kDefaultTolerance;
    bool tol_given = false;
    std::size_t max_iter = 100000;
    std::uint64_t seed = 42;
    bool parallel = false;
    std::string out;
    double grid = 0.01;
    std::size_t samples = 256;
    std::size_t N = 40;
    std::size_t depth = 2;
    double tilt = 0.5;
    std::size_t cases = 200;
    bool inject_bug = false;
    std::string csv;
    std::string scenario_path;
    std::string report_path;
    std::string name;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt(std::span<const double> v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

std::string default_report_path(const std::string& scenario) {
    std::filesystem::path p(scenario);
    return p.replace_extension(".report.json").filename().string();
}

int cmd_estimate(const Options& o, std::ostream& out) {
    const Scenario s = io::load_scenario(o.scenario_path);
    const auto sol = solve_mmse(s.xi, s.ambiguity, s.partition, o.tol, o.max_iter);
    const auto saddle = verify_saddle(sol, s.xi, s.ambiguity, s.partition, o.tol);
    const std::string path = o.out.empty() ? default_report_path(o.scenario_path) : o.out;
    io::save_report(path, s, sol, saddle);

    out << "scenario:   " << s.name << "\n"
        << "eta_hat:    " << fmt(sol.eta_blocks) << "\n"
        << "w_hat:      " << fmt(sol.w_hat.values()) << "\n"
        << "alpha:      " << fmt(sol.alpha) << "\n"
        << "gap:        " << fmt(sol.gap) << "\n"
        << "iterations: " << sol.iterations << "\n"
        << "converged:  " << (sol.converged ? "yes" : "no") << "\n"
        << "saddle:     " << (saddle.passed ? "passed" : "FAILED") << " (left " << fmt(saddle.left_margin)
        << ", right " << fmt(saddle.right_margin) << ")\n"
        << "report:     " << path << "\n";
    if (!sol.converged) return kNotConverged;
    return saddle.passed ? kOk : kCheckFailed;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const Scenario s = io::load_scenario(o.scenario_path);
    nlohmann::json report;
    try {
        report = nlohmann::json::parse(io::read_text(o.report_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw io::SchemaError("$", std::string("report is not valid JSON: ") + e.what());
    }
    const auto sol = io::solution_from_report(report, s);
    const auto saddle = verify_saddle(sol, s.xi, s.ambiguity, s.partition, o.tol);
    out << "left margin:    " << fmt(saddle.left_margin) << "\n"
        << "right margin:   " << fmt(saddle.right_margin) << "\n"
        << "alpha residual: " << fmt(saddle.alpha_residual) << "\n"
        << "saddle:         " << (saddle.passed ? "passed" : "FAILED") << "\n";
    return saddle.passed ? kOk : kCheckFailed;
}

int cmd_stability(const Options& o, std::ostream& out) {
    const Scenario s = io::load_scenario(o.scenario_path);
    const std::size_t samples = std::max(o.samples, s.ambiguity.vertex_count());
    const auto rep = stability_check(s.ambiguity, s.partition, samples, o.tol);
    out << "checked points:  " << rep.checked_points << "\n"
        << "worst violation: " << fmt(rep.worst_violation) << "\n"
        << "verdict:         " << to_string(rep.verdict) << "\n";
    switch (rep.verdict) {
    case StabilityVerdict::stable: return kOk;
    case StabilityVerdict::violated: return kCheckFailed;
    default: return kInconclusive;
    }
}

// G along the segment from every vertex to w_hat, for external plotting.
void write_segments_csv(const std::string& path, const Scenario& s, const MixtureWeights& w_hat) {
    std::ostringstream csv;
    csv << "vertex,t,G\n";
    const std::size_t k = s.ambiguity.vertex_count();
    for (std::size_t j = 0; j < k; ++j) {
        for (int step = 0; step <= 100; ++step) {
            const double t = step / 100.0;
            std::vector<double> w(k);
            for (std::size_t i = 0; i < k; ++i) w[i] = (1.0 - t) * (i == j ? 1.0 : 0.0) + t * w_hat[i];
            csv << j << "," << fmt(t) << "," << fmt(objective_G(MixtureWeights(w), s.xi, s.ambiguity, s.partition))
                << "\n";
        }
    }
    io::write_text(path, csv.str());
}

int cmd_oracle(const Options& o, std::ostream& out) {
    const Scenario s = io::load_scenario(o.scenario_path);
    const auto sol = solve_mmse(s.xi, s.ambiguity, s.partition, o.tol, o.max_iter);
    const auto grid = oracle::grid_maximize_G(s.xi, s.ambiguity, s.partition, o.grid);
    const double gap_at_grid = oracle::duality_gap_at(s.xi, s.ambiguity, s.partition, grid.best_w);
    out << "solver alpha:        " << fmt(sol.alpha) << "\n"
        << "grid step:           " << fmt(grid.grid_step) << "\n"
        << "grid best value:     " << fmt(grid.best_value) << "\n"
        << "grid best w:         " << fmt(grid.best_w.values()) << "\n"
        << "alpha - grid best:   " << fmt(sol.alpha - grid.best_value) << "\n"
        << "gap at grid best:    " << fmt(gap_at_grid) << "\n";
    bool ok = grid.best_value <= sol.alpha + 1e-10 && sol.alpha <= grid.best_value + gap_at_grid + 1e-10;

    if (s.partition.block_count() <= 3 && s.ambiguity.vertex_count() <= 3) {
        try {
            const auto bf = oracle::brute_force_estimate(s.xi, s.ambiguity, s.partition, o.grid, o.grid);
            double diff = 0.0;
            for (std::size_t b = 0; b < bf.eta_blocks.size(); ++b)
                diff += (bf.eta_blocks[b] - sol.eta_blocks[b]) * (bf.eta_blocks[b] - sol.eta_blocks[b]);
            diff = std::sqrt(diff);
            out << "brute-force eta:     " << fmt(bf.eta_blocks) << "\n"
                << "brute-force alpha:   " << fmt(bf.alpha) << "\n"
                << "eta distance:        " << fmt(diff) << " (bound " << fmt(bf.eta_error_bound) << ")\n";
            ok = ok && diff <= bf.eta_error_bound + 1e-9;
        } catch (const InvalidInput& e) {
            out << "brute-force:         skipped (" << e.what() << ")\n";
        }
    }
    if (!o.csv.empty()) write_segments_csv(o.csv, s, sol.w_hat);
    out << "oracle:              " << (ok ? "agrees" : "DISAGREES") << "\n";
    return ok ? kOk : kCheckFailed;
}

int cmd_scenario(const Options& o, std::ostream& out) {
    const std::string path = o.out.empty() ? o.name + ".json" : o.out;
    if (o.name == "ex41") {
        io::save_scenario(path, example_41());
    } else if (o.name == "ex42") {
        const auto ex = example_42_truncated(o.N);
        io::save_scenario(path, ex.scenario, io::closure_to_json(ex.closure));
        out << "lambda_star: " << fmt(ex.closure.lambda_star) << "\n"
            << "tail_bound:  " << fmt(ex.closure.tail_bound) << "\n";
    } else if (o.name == "tree") {
        io::save_scenario(path, example_43_tree(o.depth, o.tilt));
    } else {
        throw InvalidInput("unknown scenario '" + o.name + "' (expected ex41, ex42 or tree)");
    }
    out << "wrote " << path << "\n";
    return kOk;
}

int cmd_props(const Options& o, std::ostream& out) {
    props::RunConfig cfg{o.tol, o.max_iter, o.seed, o.parallel};
    const auto res = props::run_property_suite(cfg, o.cases, o.inject_bug);
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %7s %7s %7s  %s\n", "property", "passed", "failed", "flagged", "worst");
    out << line;
    for (const auto& p : res.properties) {
        std::snprintf(line, sizeof line, "%-28s %7zu %7zu %7zu  %.3e\n", p.name.c_str(), p.passed, p.failed,
                      p.flagged, p.worst);
        out << line;
    }
    out << "props: " << (res.ok() ? "PASS" : "FAIL") << " (cases " << res.cases << ", seed " << o.seed << ")\n";
    return res.ok() ? kOk : kCheckFailed;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Worst-case least-squares estimation over finite ambiguity sets", "mmse"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    auto add_tol = [&](CLI::App* sub) {
        sub->add_option("--tol", o.tol, "Absolute tolerance (default 1e-9, or MMSE_TOL)")
            ->check(CLI::PositiveNumber)
            ->each([&](const std::string&) { o.tol_given = true; });
    };
    auto add_solver = [&](CLI::App* sub) {
        add_tol(sub);
        sub->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    };

    auto* estimate = app.add_subcommand("estimate", "Solve a scenario and certify the saddle point");
    estimate->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
    add_solver(estimate);
    estimate->add_option("--out", o.out, "Report path (default <scenario>.report.json)");

    auto* verify = app.add_subcommand("verify", "Re-check the saddle inequalities of a report");
    verify->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
    verify->add_option("report", o.report_path, "Report JSON file")->required();
    add_tol(verify);

    auto* stability = app.add_subcommand("stability", "Sampled stability certificate");
    stability->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
    stability->add_option("--samples", o.samples, "Low-discrepancy samples")->check(CLI::PositiveNumber);
    add_tol(stability);

    auto* orc = app.add_subcommand("oracle", "Compare the solver with grid searches");
    orc->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
    orc->add_option("--grid", o.grid, "Grid step")->check(CLI::Range(1e-4, 0.25));
    orc->add_option("--csv", o.csv, "Write G along vertex-to-optimum segments as CSV");
    add_solver(orc);

    auto* scenario = app.add_subcommand("scenario", "Write a built-in scenario file");
    scenario->add_option("name", o.name, "ex41, ex42 or tree")->required();
    scenario->add_option("--N", o.N, "Truncation level for ex42");
    scenario->add_option("--depth", o.depth, "Tree depth");
    scenario->add_option("--tilt", o.tilt, "Tree drift tilt in (0, 1)");
    scenario->add_option("--out", o.out, "Output path (default <name>.json)");

    auto* propscmd = app.add_subcommand("props", "Randomized property suite");
    propscmd->add_option("--cases", o.cases, "Number of random cases")->check(CLI::PositiveNumber);
    propscmd->add_option("--seed", o.seed, "Seed");
    propscmd->add_flag("--parallel", o.parallel, "Run cases in parallel");
    add_solver(propscmd);
    propscmd->add_flag("--inject-bug", o.inject_bug)->group("");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageOrIo;
    }

    if (!o.tol_given) {
        if (const char* env = std::getenv("MMSE_TOL")) {
            char* end = nullptr;
            const double v = std::strtod(env, &end);
            if (end == env || *end != '\0' || !(v > 0.0)) {
                err << "error: MMSE_TOL must be a positive number, got '" << env << "'\n";
                return kUsageOrIo;
            }
            o.tol = v;
        }
    }

    try {
        if (*estimate) return cmd_estimate(o, out);
        if (*verify) return cmd_verify(o, out);
        if (*stability) return cmd_stability(o, out);
        if (*orc) return cmd_oracle(o, out);
        if (*scenario) return cmd_scenario(o, out);
        if (*propscmd) return cmd_props(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageOrIo;
    }
    return kUsageOrIo;
}

} // namespace mmse::cli
