#include <cmath>

#include <gtest/gtest.h>

#include "tentlab/experiments/registry.hpp"
#include "test_support.hpp"

using namespace tentlab;

namespace {

ExperimentConfig small(const std::string& name) {
    auto c = default_config(name);
    c.grid = {1, 64, 8.0};
    return c;
}

void expect_all_finite(const ExperimentResult& r) {
    for (const auto& [k, v] : r.metrics) EXPECT_FALSE(std::isnan(v)) << k;
}

} // namespace

TEST(Registry, NamesAndLookup) {
    const auto names = experiment_names();
    EXPECT_EQ(names.size(), 13u);
    EXPECT_EQ(find_experiment("energy_identity").name, "run_energy_identity");
    EXPECT_THROW(find_experiment("nope"), ValidationError);
}

TEST(Energy, ZeroDataGivesZeros) {
    auto c = small("run_energy_identity");
    c.data = "zero";
    c.T = 0.1;
    c.solver.dt = 1e-2;
    const auto r = run_experiment(c);
    expect_all_finite(r);
    EXPECT_EQ(r.metrics.at("norm_uT"), 0.0);
    EXPECT_EQ(r.metrics.at("grad_l2l2"), 0.0);
    EXPECT_TRUE(r.passed());
}

TEST(Energy, HeatPassesOnSmallGrid) {
    auto c = small("run_energy_identity");
    c.T = 0.2;
    c.solver.dt = 1e-3;
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
    EXPECT_LE(r.metrics.at("max_norm_increase"), 1e-10);
}

TEST(Trace, ZeroDataHasNoError) {
    auto c = small("run_trace_convergence");
    c.data = "zero";
    c.T = 0.1;
    const auto r = run_experiment(c);
    expect_all_finite(r);
    EXPECT_EQ(r.metrics.at("trace_error_final"), 0.0);
}

TEST(Cylinders, ConstantTrajectoryRatiosAreOne) {
    const auto g = make_grid(1, 128, 16.0);
    SpaceTimeField u;
    for (int k = 0; k <= 400; ++k) {
        u.times.push_back(0.01 * k);
        u.slices.push_back(Field::constant(g, 1, cplx{2.0, -1.0}));
    }
    EXPECT_NEAR(reversed_holder_ratio(u, 1, {2.0, 0.0, 0.0, 0.25}), 1.0, 1e-12);
    const auto lp = local_lp_ratios(u, 1, 3.0, 1.0, nearest_point(g, 0.0));
    EXPECT_NEAR(lp.bound, 1.0, 1e-12);
    EXPECT_EQ(lp.holder, 0.0);
}

TEST(Ubc, HeatIsLpContraction) {
    const auto g = make_grid(1, 128, 16.0);
    const Semigroup S(make_polyharmonic(g, 1));
    for (double p : {1.5, 2.0, 3.0}) {
        const double v = lp_operator_norm_lower_bound(SemigroupEvolution{&S, 0.3}, g, 1, p, 4, 8, 5);
        EXPECT_LE(v, 1.0 + 1e-6) << "p=" << p;
        EXPECT_GT(v, 0.5);
    }
}

TEST(Conservation, ConstantsExact) {
    auto c = default_config("run_conservation");
    c.grid = {1, 128, 16.0};
    c.scales = {16.0};
    c.T = 0.01;
    const auto r = run_experiment(c);
    EXPECT_EQ(r.metrics.at("constant_max_error"), 0.0);
}

TEST(Duhamel, ZeroPerturbationMatchesFreeEvolution) {
    auto c = small("run_duhamel_crosscheck");
    c.T = 0.1;
    const auto r = run_experiment(c);
    EXPECT_LE(r.metrics.at("eps0_difference"), 1e-12);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
}

TEST(Fubini, IdentityHolds) {
    const auto r = run_experiment(default_config("run_fubini_identity"));
    EXPECT_LE(r.metrics.at("max_relative_error"), 1e-10);
}

TEST(Reproducibility, SameConfigSameMetrics) {
    for (const char* name : {"run_fubini_identity", "run_adjoint_duality"}) {
        auto c = default_config(name);
        c.samples = 5;
        const auto a = run_experiment(c).to_json();
        const auto b = run_experiment(c).to_json();
        EXPECT_EQ(a["metrics"], b["metrics"]) << name;
        EXPECT_EQ(a["provenance"]["config_hash"], b["provenance"]["config_hash"]);
    }
}

TEST(Result, RecheckFollowsMetrics) {
    auto c = default_config("run_fubini_identity");
    c.samples = 3;
    auto j = run_experiment(c).to_json();
    EXPECT_EQ(j["verdict"], "pass");
    EXPECT_TRUE(recheck_verdict(j));
    j["metrics"]["max_relative_error"] = 1.0;
    EXPECT_FALSE(recheck_verdict(j));
    j["metrics"]["max_relative_error"] = "nan";
    EXPECT_FALSE(recheck_verdict(j));
}

TEST(Result, JsonAndCsvEncoding) {
    ExperimentResult r;
    r.name = "x";
    r.metric("a", std::nan(""));
    r.metric("b", kInfinity);
    r.metric("c", 0.5);
    r.require("a_finite", "a", "finite");
    r.require("c_small", "c", "le", 1.0);
    r.curve("p=2", "c", 0.1);
    const auto j = r.to_json();
    EXPECT_EQ(j["metrics"]["a"], "nan");
    EXPECT_EQ(j["metrics"]["b"], "inf");
    EXPECT_EQ(j["verdict"], "fail");
    EXPECT_FALSE(j["criteria"][0]["pass"].get<bool>());
    EXPECT_TRUE(j["criteria"][1]["pass"].get<bool>());
    const auto csv = r.curves_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep_var,metric,value");
    EXPECT_NE(csv.find("p=2,c,0.10000000000000001"), std::string::npos);
}

TEST(Result, ProvenanceRecorded) {
    auto c = default_config("run_fubini_identity");
    c.samples = 2;
    c.seed = 99;
    const auto j = run_experiment(c).to_json();
    EXPECT_EQ(j["provenance"]["seed"], 99);
    EXPECT_EQ(j["provenance"]["config_hash"], config_hash(c));
    EXPECT_TRUE(j["provenance"].contains("versions"));
}
