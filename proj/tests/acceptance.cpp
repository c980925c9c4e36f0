// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [id ...]   (ids c1..c12; default all)

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tentlab/experiments/registry.hpp"

using namespace tentlab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

struct Criterion {
    std::string id;
    std::string title;
    double budget_s;
    std::function<Outcome()> run;
};

struct Ran {
    ExperimentConfig cfg;
    json result;
};

std::vector<Ran> history;

ExperimentResult run(const ExperimentConfig& cfg) {
    auto r = run_experiment(cfg);
    history.push_back({cfg, r.to_json()});
    return r;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// metric <= limit (or >= when `ge`), reported as "name=value <= limit".
void bound(Outcome& o, const ExperimentResult& r, const std::string& metric, double limit, bool ge = false) {
    const auto it = r.metrics.find(metric);
    const double v = it == r.metrics.end() ? std::nan("") : it->second;
    const bool ok = ge ? v >= limit : v <= limit;
    o.check(ok, metric + "=" + num(v) + (ge ? " >= " : " <= ") + num(limit));
}

void finite(Outcome& o, const ExperimentResult& r, const std::string& metric) {
    const auto it = r.metrics.find(metric);
    const double v = it == r.metrics.end() ? std::nan("") : it->second;
    o.check(std::isfinite(v), metric + "=" + num(v) + " finite");
}

void verdict(Outcome& o, const ExperimentResult& r) {
    std::string failed;
    for (const auto& c : r.criteria)
        if (!c.holds(r.metrics)) failed += (failed.empty() ? "" : ",") + c.name;
    o.check(r.passed(), r.name + " verdict" + (failed.empty() ? "" : " (" + failed + ")"));
}

ExperimentConfig cfg_for(const std::string& name, std::map<std::string, double> tolerances) {
    auto c = default_config(name);
    c.tolerances = std::move(tolerances);
    return c;
}

std::vector<Criterion> criteria() {
    std::vector<Criterion> out;

    out.push_back({"c1", "Fubini identity tent(p=2) = L2L2", 10.0, [] {
                       Outcome o;
                       for (int m : {1, 2}) {
                           auto c = cfg_for("run_fubini_identity", {{"fubini_rel", 1e-10}});
                           c.m = m;
                           c.samples = 20;
                           const auto r = run(c);
                           bound(o, r, "max_relative_error", 1e-10);
                       }
                       return o;
                   }});

    out.push_back({"c2", "heat energy identity", 30.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_energy_identity", {{"energy_rel", 0.02}});
                       c.grid = {1, 256, 32.0};
                       c.solver.dt = 1e-3;
                       c.T = 1.0;
                       const auto r = run(c);
                       bound(o, r, "energy_rel_error", 0.02);
                       verdict(o, r);
                       return o;
                   }});

    out.push_back({"c3", "energy chain, rough complex kappa=10", 60.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_energy_identity", {{"energy_rel", 0.02}});
                       c.coeffs = "rough(10,3)";
                       c.data = "dgaussian";
                       c.solver.theta = 1.0;
                       c.solver.dt = 1e-3;
                       c.T = 1.0;
                       const auto r = run(c);
                       const double slack = 10.0 * c.solver.tol_lin;
                       bound(o, r, "max_norm_increase", slack);
                       bound(o, r, "max_lower_violation", slack);
                       bound(o, r, "max_upper_violation", slack);
                       bound(o, r, "max_right_violation", slack);
                       return o;
                   }});

    out.push_back({"c4", "off-diagonal decay rates", 120.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_offdiag_fit", {{"slope_rel", 0.15}});
                       const auto r1 = run(c);
                       bound(o, r1, "slope_rel_error", 0.15);
                       c.m = 2;
                       const auto r2 = run(c);
                       bound(o, r2, "exponent_d_rel_error", 0.15);
                       verdict(o, r1);
                       verdict(o, r2);
                       return o;
                   }});

    out.push_back({"c5", "conservation of constants and x", 180.0, [] {
                       Outcome o;
                       const auto r = run(cfg_for("run_conservation", {{"sup_error", 1e-3}}));
                       bound(o, r, "constant_max_error", 0.0);
                       bound(o, r, "sup_error_largest", 1e-3);
                       bound(o, r, "worst_doubling_ratio", 0.5);
                       return o;
                   }});

    out.push_back({"c6", "Duhamel/Picard vs propagate", 120.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_duhamel_crosscheck", {{"duhamel_rel", 1e-3}});
                       c.picard_iters = 8;
                       const auto r = run(c);
                       bound(o, r, "relative_l2_difference", 1e-3);
                       verdict(o, r);
                       return o;
                   }});

    out.push_back({"c7", "adjoint duality, non-autonomous complex", 60.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_adjoint_duality", {});
                       c.samples = 50;
                       const auto r = run(c);
                       bound(o, r, "max_normalized_duality_error", 10.0 * c.solver.tol_lin);
                       bound(o, r, "autonomous", 0.0);
                       return o;
                   }});

    out.push_back({"c8", "comparability ratios under dilation", 300.0, [] {
                       Outcome o;
                       const auto r1 = run(cfg_for("run_equivalence_sweep", {{"dilation_rel", 0.25}}));
                       bound(o, r1, "max_dilation_change_tent", 0.25);
                       const auto r2 = run(cfg_for("run_carleson_bmo", {{"dilation_rel", 0.25}}));
                       bound(o, r2, "max_dilation_change", 0.25);
                       verdict(o, r1);
                       verdict(o, r2);
                       return o;
                   }});

    out.push_back({"c9", "reversed Hoelder ratio", 180.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_reversed_holder", {{"refine_rel", 0.2}});
                       c.samples = 100;
                       const auto r = run(c);
                       finite(o, r, "max_ratio");
                       bound(o, r, "refinement_change", 0.2);
                       return o;
                   }});

    out.push_back({"c10", "local Lp bound and time-Hoelder probe", 300.0, [] {
                       Outcome o;
                       auto c = cfg_for("run_local_lp_bound", {{"refine_rel", 0.25}});
                       c.samples = 50;
                       c.p_list = {2.2};
                       const auto r = run(c);
                       finite(o, r, "bound_ratio_p2.2");
                       finite(o, r, "holder_ratio_p2.2");
                       bound(o, r, "bound_refinement_change_p2.2", 0.25);
                       bound(o, r, "holder_refinement_change_p2.2", 0.25);
                       return o;
                   }});

    out.push_back({"c11", "functional identities", 30.0, [] {
                       Outcome o;
                       const auto r = run(cfg_for("run_functional_identities",
                                                  {{"rounding", 1e-10}, {"carleson_rel", 1e-8}, {"projection", 1e-10}}));
                       bound(o, r, "sharp_shift_rel_error", 1e-10);
                       bound(o, r, "homogeneity_rel_error", 1e-10);
                       bound(o, r, "carleson_tent_rel_error", 1e-8);
                       bound(o, r, "projection_idempotence_error", 1e-10);
                       return o;
                   }});

    out.push_back({"c12", "reproducibility of result metrics", 1e9, [] {
                       Outcome o;
                       std::set<std::string> seen;
                       const auto first = history;
                       for (const auto& h : first) seen.insert(h.cfg.experiment);
                       std::vector<Ran> todo = first;
                       for (const auto& name : experiment_names())
                           if (!seen.count(name)) todo.push_back({default_config(name), run(default_config(name)).to_json()});
                       int same = 0;
                       for (const auto& h : todo) {
                           const auto again = run_experiment(h.cfg).to_json();
                           const bool ok = again["metrics"] == h.result["metrics"] &&
                                           again["provenance"]["config_hash"] == h.result["provenance"]["config_hash"];
                           if (ok)
                               ++same;
                           else
                               o.check(false, h.cfg.experiment + " metrics differ");
                       }
                       o.check(same == static_cast<int>(todo.size()),
                               std::to_string(same) + "/" + std::to_string(todo.size()) + " runs identical");
                       return o;
                   }});
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& c : criteria()) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::string budget = c.budget_s < 1e8 ? " <= " + num(c.budget_s) + " s" : "";
        std::printf("%s %-4s %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), o.detail.c_str(),
                    secs, (budget + (in_time ? "" : " [over budget]")).c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
