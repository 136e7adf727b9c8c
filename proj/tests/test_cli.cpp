#include <whitney/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace whitney::cli;

namespace {

std::string fixture(const std::string& name) { return std::string(WHITNEY_FIXTURE_DIR) + "/" + name; }

CommandArgs with(std::initializer_list<std::pair<const std::string, std::string>> files) {
    CommandArgs a;
    for (const auto& [role, name] : files) a.files[role] = fixture(name);
    return a;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(WS_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Refine, StableBundleNeedsOneIteration) {
    const auto r = run_command("refine", with({{"input", "stable_bundle.json"}}));
    EXPECT_EQ(r.exit_code, 0) << r.table;
    EXPECT_EQ(r.body["iterations"], 1);
    EXPECT_TRUE(r.body["emptied_points"].empty());
}

TEST(Refine, SquareDataPinsTheSlope) {
    const auto r = run_command("refine", with({{"input", "square_data.json"}}));
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_LE(r.body["iterations"].get<int>(), 2);
    // the origin's fiber loses its free slope
    EXPECT_EQ(r.body["fiber_dims_after"][0], 0);
    EXPECT_NEAR(r.body["offsets_after"][0][1].get<double>(), 0.0, 1e-4);
}

TEST(Refine, OscillatingDataEmptiesTheOrigin) {
    const auto r = run_command("refine", with({{"input", "oscillating_bundle.json"}}));
    EXPECT_EQ(r.exit_code, 2);
    ASSERT_FALSE(r.body["emptied_points"].empty());
    EXPECT_EQ(r.body["emptied_points"][0]["index"], 0);
    EXPECT_EQ(r.body["emptied_points"][0]["at"][0], 0);
}

TEST(Eliminate, KollarNowakFibersAreFullExactlyOnTheLocus) {
    const auto r = run_command("eliminate", with({{"input", "kollar_nowak.json"}}));
    EXPECT_EQ(r.exit_code, 0) << r.table;
    EXPECT_TRUE(r.body["equivalence"]["ok"]);
    EXPECT_EQ(r.body["samples"], 729);
    EXPECT_EQ(r.body["empty_fibers"], 0);
    // x1 = x2 = 0 meets the 9^3 grid in the 9 points of the x3 axis
    EXPECT_EQ(r.body["degenerate_points"], 9);
    EXPECT_EQ(r.body["full_fibers"], 9);
    EXPECT_EQ(r.body["fiber_dims"]["1"], 720);
}

TEST(Eliminate, SampleOverride) {
    auto a = with({{"input", "kollar_nowak.json"}});
    a.samples = 5;
    const auto r = run_command("eliminate", a);
    EXPECT_EQ(r.body["samples"], 125);
    EXPECT_EQ(r.body["degenerate_points"], 5);
}

TEST(Helly, CircleFamilyIsDominated) {
    auto a = with({{"input", "circle_family.json"}});
    a.sphere_samples = 1000;
    const auto r = run_command("helly", a);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_LE(r.body["C"].get<double>(), 10.0);
    EXPECT_LE(r.body["verification"]["worst_ratio"].get<double>(), r.body["C"].get<double>() * (1 + 1e-6));
}

TEST(Patch, CompatiblePiecesGlue) {
    const auto r = run_command("patch", with({{"plus", "patch_upper.json"}, {"minus", "patch_lower.json"}, {"region", "parabolic_strip.json"}}));
    EXPECT_EQ(r.exit_code, 0) << r.table;
    EXPECT_TRUE(r.body["cm"]["pass"]);
}

TEST(Patch, IncompatiblePiecesFailWithAWitness) {
    auto a = with({{"plus", "broken_upper.json"}, {"minus", "broken_lower.json"}, {"region", "parabolic_strip.json"}});
    auto r = run_command("patch", a);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.body["compatibility"]["failing_l"], 0);
    EXPECT_FALSE(r.body.contains("cm"));
    a.force = true;
    r = run_command("patch", a);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_TRUE(r.body["cm"].contains("witness_alpha"));
}

TEST(Synthesize, XyWedgeResidualsAreSmall) {
    const auto out = (std::filesystem::temp_directory_path() / "ws_xy_traces.json").string();
    auto a = with({{"input", "xy_wedge.json"}});
    a.out = out;
    a.sphere_samples = 1000;
    const auto r = run_command("synthesize", a);
    EXPECT_EQ(r.exit_code, 0) << r.table;
    EXPECT_LE(r.body["residuals"]["strip"].get<double>(), 1e-6);
    EXPECT_LE(r.body["residuals"]["curve"].get<double>(), 1e-6);
    EXPECT_LE(r.body["trace_error"].get<double>(), 1e-6);
    const auto doc = whitney::io::json::parse(slurp(out));
    EXPECT_TRUE(doc["pass"]);
    // value trace on the middle curve is x^2 / 2
    bool found = false;
    for (const auto& t : doc["traces"])
        if (t["curve"] == 1 && t["order"] == 0) {
            found = true;
            EXPECT_EQ(t["series"], whitney::io::json::parse(R"([{"num": 2, "den": 1, "coeff": "0.5"}])"));
        }
    EXPECT_TRUE(found);
}

TEST(Synthesize, ObstructionsExitWithTwo) {
    auto a = with({{"input", "slope_obstruction.json"}});
    a.sphere_samples = 1000;
    EXPECT_EQ(run_command("synthesize", a).exit_code, 2);
    a = with({{"input", "contradictory_rows.json"}});
    a.sphere_samples = 1000;
    const auto r = run_command("synthesize", a);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_TRUE(r.body["nonexistence"]["found"]);
}

TEST(Check, SectionBelongsAndCandidateResidualsAreReported) {
    auto r = run_command("check", with({{"bundle", "square_data.json"}, {"field", "square_section.json"}}));
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_LE(r.body["worst_distance"].get<double>(), 1e-12);
    r = run_command("check", with({{"bundle", "kollar_nowak.json"}, {"field", "kn_candidate.json"}}));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.body["distances"].size(), 729u);
}

TEST(Errors, UsageAndSchemaProblemsExitWithOne) {
    EXPECT_EQ(run_command("refine", with({{"input", "kollar_nowak.json"}})).exit_code, 1);
    CommandArgs missing;
    missing.files["input"] = fixture("does_not_exist.json");
    EXPECT_EQ(run_command("refine", missing).exit_code, 1);
    EXPECT_EQ(run_command("refine", CommandArgs{}).exit_code, 1);
    EXPECT_EQ(run_command("bogus", CommandArgs{}).exit_code, 1);
}

TEST(Determinism, ReportBodiesAreReproducible) {
    auto a = with({{"input", "circle_family.json"}});
    a.sphere_samples = 500;
    EXPECT_EQ(run_command("helly", a).body.dump(), run_command("helly", a).body.dump());
    auto b = with({{"input", "xy_wedge.json"}});
    b.sphere_samples = 500;
    EXPECT_EQ(run_command("synthesize", b).body.dump(), run_command("synthesize", b).body.dump());
    a.seed_override = 99;
    EXPECT_EQ(run_command("helly", a).body["seed"], 99);
}

TEST(Binary, ExitCodesAndReports) {
    const std::string F = std::string(WHITNEY_FIXTURE_DIR) + "/";
    EXPECT_EQ(run_binary("refine --input " + F + "stable_bundle.json"), 0);
    EXPECT_EQ(run_binary("refine --input " + F + "oscillating_bundle.json"), 2);
    EXPECT_EQ(run_binary("synthesize --input " + F + "xy_wedge.json"), 0);
    EXPECT_EQ(run_binary("refine"), 1);
    EXPECT_EQ(run_binary("frobnicate"), 1);
    EXPECT_EQ(run_binary("refine --input " + F + "missing.json"), 1);

    const auto dir = std::filesystem::temp_directory_path();
    const auto r1 = (dir / "ws_r1.json").string(), r2 = (dir / "ws_r2.json").string(), r3 = (dir / "ws_r3.json").string();
    EXPECT_EQ(run_binary("helly --input " + F + "circle_family.json --sphere-samples 800 --report " + r1), 0);
    EXPECT_EQ(run_binary("helly --input " + F + "circle_family.json --sphere-samples 800 --report " + r2), 0);
    EXPECT_EQ(slurp(r1), slurp(r2));
    const std::string seeded = "WS_SEED=5 " + std::string(WS_BINARY) + " helly --input " + F + "circle_family.json --sphere-samples 800 --report " + r3 +
                               " > /dev/null 2>&1";
    ASSERT_EQ(WEXITSTATUS(std::system(seeded.c_str())), 0);
    EXPECT_EQ(whitney::io::json::parse(slurp(r3))["seed"], 5);
    EXPECT_EQ(whitney::io::json::parse(slurp(r1))["seed"], 12345);
}
