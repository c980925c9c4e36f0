#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tentlab/config.hpp"
#include "tentlab/experiments/adjoint.hpp"
#include "tentlab/experiments/conservation.hpp"
#include "tentlab/experiments/cylinders.hpp"
#include "tentlab/experiments/duhamel.hpp"
#include "tentlab/experiments/energy.hpp"
#include "tentlab/experiments/equivalence.hpp"
#include "tentlab/experiments/identities.hpp"
#include "tentlab/experiments/misc.hpp"
#include "tentlab/experiments/offdiag.hpp"
#include "tentlab/io.hpp"

namespace tentlab {

struct ExperimentEntry {
    std::string name;
    std::function<ExperimentResult(const ExperimentConfig&)> run;
    std::function<void(ExperimentConfig&)> defaults;
};

inline const std::vector<ExperimentEntry>& experiment_registry() {
    static const std::vector<ExperimentEntry> reg{
        {"run_energy_identity", run_energy_identity,
         [](ExperimentConfig& c) {
             c.solver.dt = 1e-3;
             c.T = 1.0;
             c.tolerances = {{"energy_rel", 0.02}};
         }},
        {"run_offdiag_fit", run_offdiag_fit,
         [](ExperimentConfig& c) {
             c.grid = {1, 1024, 128.0};
             c.scales = {0.5, 1.0, 2.0};
             c.tolerances = {{"slope_rel", 0.15}};
         }},
        {"run_conservation", run_conservation,
         [](ExperimentConfig& c) {
             c.grid = {1, 512, 64.0};
             c.scales = {16.0, 32.0, 64.0};
             c.m = 2;
             c.coeffs = "rough(10,11)";
             c.T = 0.05;
             c.solver.dt = 5e-4;
             c.tolerances = {{"sup_error", 1e-3}};
         }},
        {"run_duhamel_crosscheck", run_duhamel_crosscheck,
         [](ExperimentConfig& c) {
             c.coeffs = "perturb(0.1,5)";
             c.solver.theta = 0.5;
             c.solver.dt = 5e-3;
             c.T = 0.5;
             c.picard_iters = 8;
             c.tolerances = {{"duhamel_rel", 1e-3}};
         }},
        {"run_adjoint_duality", run_adjoint_duality,
         [](ExperimentConfig& c) {
             c.grid = {1, 128, 16.0};
             c.coeffs = "bv(10,2,4,21)";
             c.T = 1.0;
             c.solver.dt = 1e-2;
             c.samples = 50;
             c.tolerances = {};
         }},
        {"run_equivalence_sweep", run_equivalence_sweep,
         [](ExperimentConfig& c) {
             c.T = 16.0;
             c.p_list = {2.0, 4.0};
             c.scales = {1.0, 2.0};
             c.samples = 400;
             c.tolerances = {{"dilation_rel", 0.25}};
         }},
        {"run_carleson_bmo", run_carleson_bmo,
         [](ExperimentConfig& c) {
             c.scales = {1.0, 2.0};
             c.samples = 400;
             c.data = "log";
             c.tolerances = {{"dilation_rel", 0.25}};
         }},
        {"run_reversed_holder", run_reversed_holder,
         [](ExperimentConfig& c) {
             c.coeffs = "rough(10,7)";
             c.T = 10.0;
             c.solver.dt = 1e-2;
             c.samples = 100;
             c.scales = {0.25, 0.5};
             c.tolerances = {{"refine_rel", 0.2}};
         }},
        {"run_local_lp_bound", run_local_lp_bound,
         [](ExperimentConfig& c) {
             c.coeffs = "rough(10,7)";
             c.T = 4.0;
             c.solver.dt = 1.0 / 256.0;
             c.samples = 50;
             c.p_list = {2.2};
             c.scales = {0.125, 1.0};
             c.tolerances = {{"refine_rel", 0.25}};
         }},
        {"run_trace_convergence", run_trace_convergence,
         [](ExperimentConfig& c) {
             c.T = 4.0;
             c.solver.dt = 1e-2;
             c.p_list = {1.5, 2.0};
             c.tolerances = {};
         }},
        {"run_ubc_probe", run_ubc_probe,
         [](ExperimentConfig& c) {
             c.grid = {1, 128, 16.0};
             c.coeffs = "bv(10,2,4,21)";
             c.T = 0.5;
             c.solver.dt = 1e-2;
             c.p_list = {1.8, 2.0, 2.2};
             c.samples = 4;
             c.probes = 4;
             c.tolerances = {{"contraction", 1e-6}};
         }},
        {"run_fubini_identity", run_fubini_identity,
         [](ExperimentConfig& c) {
             c.grid = {1, 128, 16.0};
             c.samples = 20;
             c.tolerances = {{"fubini_rel", 1e-10}};
         }},
        {"run_functional_identities", run_functional_identities,
         [](ExperimentConfig& c) {
             c.tolerances = {{"rounding", 1e-10}, {"carleson_rel", 1e-8}, {"projection", 1e-10}};
         }},
    };
    return reg;
}

inline std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& e : experiment_registry()) out.push_back(e.name);
    return out;
}

// Accepts the name with or without the "run_" prefix.
inline const ExperimentEntry& find_experiment(const std::string& name) {
    for (const auto& e : experiment_registry())
        if (e.name == name || e.name == "run_" + name) return e;
    std::string known;
    for (const auto& e : experiment_registry()) known += (known.empty() ? "" : ", ") + e.name;
    throw ValidationError("unknown experiment '" + name + "' (known: " + known + ")");
}

inline ExperimentConfig default_config(const std::string& name) {
    const auto& e = find_experiment(name);
    ExperimentConfig c;
    c.experiment = e.name;
    e.defaults(c);
    return c;
}

// Strict parse: the "experiment" key selects the defaults that the document overrides.
inline ExperimentConfig parse_config_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    if (!j.contains("experiment")) {
        std::vector<std::string> issues{"missing required key 'experiment'"};
        try {
            parse_config_json(j, ExperimentConfig{});
        } catch (const ValidationError& e) {
            for (const auto& s : e.issues())
                if (s != issues.front()) issues.push_back(s);
        }
        throw ValidationError(issues);
    }
    if (!j["experiment"].is_string()) throw ValidationError("key 'experiment' must be a string");
    ExperimentConfig base = default_config(j["experiment"].get<std::string>());
    json k = j;
    k["experiment"] = base.experiment;
    return parse_config_json(k, std::move(base));
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
    return parse_config_text(read_file(path));
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    return find_experiment(cfg.experiment).run(cfg);
}

} // namespace tentlab
