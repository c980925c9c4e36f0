#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "tentlab/experiments/registry.hpp"
#include "test_support.hpp"

using namespace tentlab;

namespace {

std::vector<std::string> issues_of(const json& j) {
    try {
        parse_config_json(j);
    } catch (const ValidationError& e) {
        return e.issues();
    }
    return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
    for (const auto& s : issues)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("tentlab_test_" + name);
    std::filesystem::create_directories(d);
    return d;
}

} // namespace

TEST(Config, MinimalFillsDefaults) {
    const auto c = parse_config_json(json{{"experiment", "run_energy_identity"}});
    EXPECT_EQ(c.experiment, "run_energy_identity");
    EXPECT_DOUBLE_EQ(c.solver.dt, 1e-3);
    EXPECT_DOUBLE_EQ(c.tol("energy_rel"), 0.02);
    EXPECT_EQ(c.grid.P, 256);
}

TEST(Config, ShortNameAccepted) {
    const auto c = parse_config_json(json{{"experiment", "conservation"}});
    EXPECT_EQ(c.experiment, "run_conservation");
    EXPECT_EQ(c.m, 2);
}

TEST(Config, OverridesApplied) {
    const auto c = parse_config_json(json{{"experiment", "run_energy_identity"},
                                          {"grid", {{"P", 128}, {"L", 16.0}}},
                                          {"solver", {{"theta", 0.5}}},
                                          {"p", {1.5, "inf"}},
                                          {"tolerances", {{"energy_rel", 0.05}}}});
    EXPECT_EQ(c.grid.P, 128);
    EXPECT_DOUBLE_EQ(c.grid.L, 16.0);
    EXPECT_DOUBLE_EQ(c.solver.theta, 0.5);
    ASSERT_EQ(c.p_list.size(), 2u);
    EXPECT_TRUE(std::isinf(c.p_list[1]));
    EXPECT_DOUBLE_EQ(c.tol("energy_rel"), 0.05);
}

TEST(Config, RoundTripKeepsHash) {
    for (const auto& name : experiment_names()) {
        const auto c = default_config(name);
        const auto back = parse_config_json(to_json(c));
        EXPECT_EQ(config_hash(back), config_hash(c)) << name;
        EXPECT_EQ(config_hash(c).size(), 16u);
    }
}

TEST(Config, HashSeesSeed) {
    auto a = default_config("run_energy_identity");
    auto b = a;
    b.seed += 1;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ListsEveryIssue) {
    const auto issues = issues_of(json{{"experiment", "run_energy_identity"},
                                       {"colour", "red"},
                                       {"grid", {{"P", 100}, {"depth", 3}}},
                                       {"m", 0},
                                       {"solver", {{"theta", 0.2}}}});
    EXPECT_TRUE(mentions(issues, "colour"));
    EXPECT_TRUE(mentions(issues, "grid.depth"));
    EXPECT_TRUE(mentions(issues, "grid.P"));
    EXPECT_TRUE(mentions(issues, "m must be"));
    EXPECT_TRUE(mentions(issues, "theta"));
    EXPECT_GE(issues.size(), 5u);
}

TEST(Config, MissingExperimentListedWithOthers) {
    const auto issues = issues_of(json{{"T", -1.0}, {"bogus", 1}});
    EXPECT_TRUE(mentions(issues, "missing required key 'experiment'"));
    EXPECT_TRUE(mentions(issues, "bogus"));
    EXPECT_TRUE(mentions(issues, "T must be positive"));
}

TEST(Config, UnknownExperiment) {
    const auto issues = issues_of(json{{"experiment", "run_nothing"}});
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_TRUE(mentions(issues, "run_energy_identity"));
}

TEST(Config, UnknownToleranceRejected) {
    const auto issues = issues_of(json{{"experiment", "run_energy_identity"}, {"tolerances", {{"slope_rel", 0.1}}}});
    EXPECT_TRUE(mentions(issues, "tolerances.slope_rel"));
}

TEST(Config, ContrastBelowOneNamed) {
    const auto issues = issues_of(json{{"experiment", "run_energy_identity"}, {"coeffs", "rough(0.5,3)"}});
    EXPECT_TRUE(mentions(issues, "contrast"));
}

TEST(Config, WrongTypesReported) {
    const auto issues = issues_of(json{{"experiment", "run_energy_identity"}, {"m", "two"}, {"p", {"one"}}});
    EXPECT_GE(issues.size(), 2u);
}

TEST(Config, TextAndFileErrors) {
    EXPECT_THROW(parse_config_text("{not json"), ValidationError);
    EXPECT_THROW(parse_config(scratch_dir("cfg") / "absent.json"), ValidationError);
    const auto path = scratch_dir("cfg") / "ok.json";
    atomic_write(path, R"({"experiment": "run_fubini_identity", "samples": 3})");
    EXPECT_EQ(parse_config(path).samples, 3);
}

TEST(Ptsf, RoundTripBitwise) {
    const auto g = make_grid(2, 16, 4.0);
    SpaceTimeField u;
    for (int k = 0; k < 3; ++k) {
        u.times.push_back(0.1 * k);
        u.slices.push_back(test_support::random_field(g, 10 + static_cast<std::uint64_t>(k), 2));
    }
    const auto back = decode_ptsf(encode_ptsf(u));
    EXPECT_EQ(back.grid().dim(), 2);
    EXPECT_EQ(back.grid().points_per_axis(), 16);
    EXPECT_EQ(back.grid().box_length(), 4.0);
    EXPECT_EQ(back.times, u.times);
    ASSERT_EQ(back.size(), u.size());
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_TRUE(test_support::same_values(back.slices[k], u.slices[k]));
}

TEST(Ptsf, FileRoundTrip) {
    const auto g = make_grid(1, 32, 4.0);
    const auto f = test_support::random_field(g, 3);
    const auto path = scratch_dir("ptsf") / "f.ptsf";
    write_ptsf(path, f, 0.5);
    const auto u = read_ptsf(path);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_EQ(u.times[0], 0.5);
    EXPECT_TRUE(test_support::same_values(u.slices[0], f));
}

TEST(Ptsf, BadMagicRejected) {
    const auto g = make_grid(1, 32, 4.0);
    auto bytes = encode_ptsf(SpaceTimeField{{0.0}, {test_support::random_field(g, 1)}});
    bytes[0] = 'X';
    try {
        decode_ptsf(bytes);
        FAIL() << "expected an error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
    }
}

TEST(Ptsf, TruncatedRejected) {
    const auto g = make_grid(1, 32, 4.0);
    const auto bytes = encode_ptsf(SpaceTimeField{{0.0}, {test_support::random_field(g, 1)}});
    EXPECT_THROW(decode_ptsf(bytes.substr(0, 10)), ValidationError);
    EXPECT_THROW(decode_ptsf(bytes.substr(0, bytes.size() - 8)), ValidationError);
    EXPECT_THROW(decode_ptsf(bytes + "xx"), ValidationError);
}

TEST(Ptsf, NonFiniteRejected) {
    const auto g = make_grid(1, 8, 4.0);
    auto bytes = encode_ptsf(SpaceTimeField{{0.0}, {Field(g, 1)}});
    // Header is 30 bytes, then one time; overwrite the first real part.
    const double nan = std::nan("");
    std::memcpy(bytes.data() + 38, &nan, sizeof nan);
    EXPECT_THROW(decode_ptsf(bytes), ValidationError);
}

TEST(AtomicWrite, ReplacesContentsWithoutLeftovers) {
    const auto dir = scratch_dir("atomic");
    const auto path = dir / "out.txt";
    atomic_write(path, "first");
    atomic_write(path, "second");
    EXPECT_EQ(read_file(path), "second");
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().filename() == "out.txt" ? 0 : 1;
    EXPECT_EQ(files, 0);
}
