#include <gtest/gtest.h>

#include <filesystem>

#include "mmse/io.hpp"

using namespace mmse;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir() {
    auto d = std::filesystem::temp_directory_path() /
             ("mmse_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

json ex41_json() { return io::scenario_to_json(example_41()); }

std::string error_of(const json& j) {
    try {
        io::scenario_from_json(j);
    } catch (const io::SchemaError& e) {
        return e.path();
    }
    return "";
}

} // namespace

TEST(Dump, SortedKeysAndFullPrecision) {
    const json j{{"b", 0.1}, {"a", {1, 2}}, {"c", json::object()}};
    EXPECT_EQ(io::dump(j), "{\n  \"a\": [1, 2],\n  \"b\": 0.10000000000000001,\n  \"c\": {}\n}\n");
}

TEST(ScenarioFile, RoundTripIsByteIdentical) {
    const auto dir = temp_dir();
    const auto ex = example_42_truncated(12);
    io::save_scenario(dir / "a.json", ex.scenario, io::closure_to_json(ex.closure));
    const auto back = io::load_scenario(dir / "a.json");
    EXPECT_EQ(back.space, ex.scenario.space);
    EXPECT_EQ(back.xi, ex.scenario.xi);
    EXPECT_EQ(back.name, "ex42");
    io::save_scenario(dir / "b.json", back, io::closure_to_json(ex.closure));
    EXPECT_EQ(io::read_text(dir / "a.json"), io::read_text(dir / "b.json"));

    const auto tree = example_43_tree(2, 0.5);
    io::save_scenario(dir / "t.json", tree);
    const auto t2 = io::load_scenario(dir / "t.json");
    ASSERT_EQ(t2.filtration.size(), 3u);
    EXPECT_EQ(t2.filtration[2], tree.filtration[2]);
}

TEST(ScenarioFile, CheckedInExampleLoads) {
    const auto s = io::load_scenario(std::filesystem::path(MMSE_SOURCE_DIR) / "scenarios" / "ex41.json");
    EXPECT_EQ(s.name, "ex41");
    EXPECT_EQ(io::dump(io::scenario_to_json(s)),
              io::read_text(std::filesystem::path(MMSE_SOURCE_DIR) / "scenarios" / "ex41.json"));
}

TEST(SchemaErrors, NameTheField) {
    auto j = ex41_json();
    j["vertices"][1][0] = -0.1;
    EXPECT_EQ(error_of(j), "vertices[1][0]");

    j = ex41_json();
    j["colour"] = "red";
    EXPECT_EQ(error_of(j), "colour");

    j = ex41_json();
    j.erase("xi");
    EXPECT_EQ(error_of(j), "xi");

    j = ex41_json();
    j["schema"] = "mmse-scenario/2";
    EXPECT_EQ(error_of(j), "schema");

    j = ex41_json();
    j["base_weights"] = {0.5, 0.6};
    EXPECT_EQ(error_of(j), "base_weights");

    j = ex41_json();
    j["partition"] = json::array({json::array({0u})});
    EXPECT_EQ(error_of(j), "partition");

    j = ex41_json();
    j["vertices"][0] = {0.0, 1.0};
    EXPECT_EQ(error_of(j), "vertices[0][0]");

    j = ex41_json();
    j["xi"][1] = "six";
    EXPECT_EQ(error_of(j), "xi[1]");
}

TEST(SchemaErrors, SyntaxErrorNamesFile) {
    const auto dir = temp_dir();
    io::write_text(dir / "bad.json", "{\"atoms\": [");
    try {
        io::load_scenario(dir / "bad.json");
        FAIL();
    } catch (const io::SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
}

TEST(WeightPolicy, ExactWithinTightToleranceRenormalizedWithinLoose) {
    auto j = ex41_json();
    j["vertices"][0] = {0.25, 0.75 + 5e-13};
    auto s = io::scenario_from_json(j);
    EXPECT_EQ(s.ambiguity.vertex(0).weight(1), 0.75 + 5e-13);

    j["vertices"][0] = {0.25, 0.75 + 5e-10};
    s = io::scenario_from_json(j);
    EXPECT_NEAR(s.ambiguity.vertex(0).weight(0) + s.ambiguity.vertex(0).weight(1), 1.0, 1e-15);
    EXPECT_LT(s.ambiguity.vertex(0).weight(1), 0.75 + 5e-10);

    j["vertices"][0] = {0.25, 0.75 + 5e-9};
    EXPECT_EQ(error_of(j), "vertices[0]");
}

TEST(Report, KeysAndReadBack) {
    const auto s = example_41();
    const auto sol = solve_mmse(s.xi, s.ambiguity, s.partition);
    const auto saddle = verify_saddle(sol, s.xi, s.ambiguity, s.partition);
    const auto r = io::report_to_json(s, sol, saddle);
    for (const char* key : {"scenario", "tool_version", "blocks", "eta_hat", "w_hat", "alpha", "gap", "iterations",
                            "converged", "saddle"})
        EXPECT_TRUE(r.contains(key)) << key;
    EXPECT_TRUE(r["saddle"]["passed"].get<bool>());

    const auto back = io::solution_from_report(json::parse(io::dump(r)), s);
    EXPECT_EQ(back.eta_blocks, sol.eta_blocks);
    EXPECT_EQ(back.w_hat.values(), sol.w_hat.values());
    EXPECT_EQ(back.alpha, sol.alpha);
    EXPECT_EQ(back.iterations, sol.iterations);
    EXPECT_TRUE(verify_saddle(back, s.xi, s.ambiguity, s.partition).passed);

    auto broken = r;
    broken["w_hat"] = {1.0};
    EXPECT_THROW(io::solution_from_report(broken, s), io::SchemaError);
}
