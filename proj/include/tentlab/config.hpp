#pragma once

#include <cstdint>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tentlab/coeffs.hpp"
#include "tentlab/propagator.hpp"

namespace tentlab {

using json = nlohmann::json;

struct GridSpec {
    int n = 1;
    int P = 256;
    double L = 32.0;

    Grid make() const { return make_grid(n, P, L); }
};

struct CoefficientPreset {
    enum class Kind { polyharmonic, rough, bv, perturb } kind = Kind::polyharmonic;
    double kappa = 1.0;
    double variation = 0.0;
    int pieces = 1;
    double eps = 0.0;
    std::uint64_t seed = 0;
};

// Accepts "polyharmonic", "rough(kappa,seed)", "bv(kappa,V,pieces,seed)",
// "perturb(eps,seed)" and the colon form "rough:10:42".
inline CoefficientPreset parse_preset(const std::string& text) {
    std::string name = text;
    std::vector<std::string> args;
    static const std::regex call(R"(^\s*([a-z]+)\s*\(([^)]*)\)\s*$)");
    std::smatch mt;
    if (std::regex_match(text, mt, call)) {
        name = mt[1];
        std::string rest = mt[2];
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            args.push_back(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    } else if (text.find(':') != std::string::npos) {
        std::size_t pos = text.find(':');
        name = text.substr(0, pos);
        while (pos != std::string::npos) {
            const auto next = text.find(':', pos + 1);
            args.push_back(text.substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1));
            pos = next;
        }
    }
    const auto num = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            const double v = std::stod(args.at(i), &used);
            if (args.at(i).find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ValidationError("coefficient preset '" + text + "': argument " + std::to_string(i + 1) +
                                  " is not a number");
        }
    };
    const auto want = [&](std::size_t k) {
        if (args.size() != k)
            throw ValidationError("coefficient preset '" + text + "' expects " + std::to_string(k) + " arguments");
    };
    CoefficientPreset p;
    if (name == "polyharmonic") {
        want(0);
    } else if (name == "rough") {
        want(2);
        p.kind = CoefficientPreset::Kind::rough;
        p.kappa = num(0);
        p.seed = static_cast<std::uint64_t>(num(1));
    } else if (name == "bv") {
        want(4);
        p.kind = CoefficientPreset::Kind::bv;
        p.kappa = num(0);
        p.variation = num(1);
        p.pieces = static_cast<int>(num(2));
        p.seed = static_cast<std::uint64_t>(num(3));
    } else if (name == "perturb") {
        want(2);
        p.kind = CoefficientPreset::Kind::perturb;
        p.eps = num(0);
        p.seed = static_cast<std::uint64_t>(num(1));
    } else {
        throw ValidationError("unknown coefficient preset '" + text + "' (polyharmonic, rough, bv, perturb)");
    }
    if (p.kappa < 1.0) throw ValidationError("contrast kappa must be >= 1 in preset '" + text + "'");
    if (p.variation < 0.0) throw ValidationError("total variation must be >= 0 in preset '" + text + "'");
    if (p.pieces < 1) throw ValidationError("pieces must be >= 1 in preset '" + text + "'");
    if (p.eps < 0.0) throw ValidationError("perturbation eps must be >= 0 in preset '" + text + "'");
    return p;
}

// horizon: time span over which bv pieces are laid out.
inline CoefficientField build_coefficients(const CoefficientPreset& p, const Grid& g, int m, int N,
                                           double horizon = 1.0) {
    switch (p.kind) {
    case CoefficientPreset::Kind::polyharmonic: return make_polyharmonic(g, m, N);
    case CoefficientPreset::Kind::rough: return make_rough(p.seed, p.kappa, g, m, N);
    case CoefficientPreset::Kind::bv: {
        TimeStructure ts;
        ts.kind = TimeStructure::Kind::bv;
        ts.variation = p.variation;
        ts.pieces = p.pieces;
        ts.horizon = horizon;
        return make_rough(p.seed, p.kappa, g, m, N, ts);
    }
    case CoefficientPreset::Kind::perturb: return make_perturbation(make_polyharmonic(g, m, N), p.eps, p.seed);
    }
    throw ValidationError("unreachable preset kind");
}

inline CoefficientField build_coefficients(const std::string& text, const Grid& g, int m, int N,
                                           double horizon = 1.0) {
    return build_coefficients(parse_preset(text), g, m, N, horizon);
}

inline const std::set<std::string>& data_kinds() {
    static const std::set<std::string> k{"gaussian", "dgaussian", "band", "step", "log", "constant", "zero"};
    return k;
}

struct ExperimentConfig {
    std::string experiment;
    GridSpec grid;
    std::string coeffs = "polyharmonic";
    int m = 1;
    int N = 1;
    std::vector<double> p_list{2.0};
    SolverConfig solver;
    double T = 1.0;
    std::uint64_t seed = 42;
    int samples = 100;
    int picard_iters = 8;
    int probes = 3;
    std::vector<double> scales;
    std::string data = "gaussian";
    std::map<std::string, double> tolerances;

    double tol(const std::string& key) const {
        const auto it = tolerances.find(key);
        if (it == tolerances.end()) throw ValidationError("tolerance '" + key + "' missing from config");
        return it->second;
    }
};

inline json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["grid"] = {{"n", c.grid.n}, {"P", c.grid.P}, {"L", c.grid.L}};
    j["coeffs"] = c.coeffs;
    j["m"] = c.m;
    j["N"] = c.N;
    j["p"] = json::array();
    for (double p : c.p_list) j["p"].push_back(p_to_json(p));
    j["solver"] = {{"dt", c.solver.dt},
                   {"theta", c.solver.theta},
                   {"tol_lin", c.solver.tol_lin},
                   {"max_lin_iters", c.solver.max_lin_iters},
                   {"restart", c.solver.restart}};
    j["T"] = c.T;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["picard_iters"] = c.picard_iters;
    j["probes"] = c.probes;
    j["scales"] = c.scales;
    j["data"] = c.data;
    j["tolerances"] = c.tolerances;
    return j;
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where,
                       std::vector<std::string>& issues) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) issues.push_back("unknown key '" + where + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where, std::vector<std::string>& issues) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const std::exception&) {
        issues.push_back("key '" + where + key + "' has the wrong type");
    }
}

} // namespace detail

// Overlay a JSON document on `base` (experiment defaults), collecting every issue.
inline ExperimentConfig parse_config_json(const json& j, ExperimentConfig base) {
    std::vector<std::string> issues;
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    detail::check_keys(j,
                       {"experiment", "grid", "coeffs", "m", "N", "p", "solver", "T", "seed", "samples",
                        "picard_iters", "probes", "scales", "data", "tolerances"},
                       "", issues);
    ExperimentConfig c = std::move(base);
    if (!j.contains("experiment") && c.experiment.empty()) issues.push_back("missing required key 'experiment'");
    detail::read(j, "experiment", c.experiment, "", issues);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_object()) {
            issues.push_back("key 'grid' must be an object");
        } else {
            detail::check_keys(g, {"n", "P", "L"}, "grid.", issues);
            detail::read(g, "n", c.grid.n, "grid.", issues);
            detail::read(g, "P", c.grid.P, "grid.", issues);
            detail::read(g, "L", c.grid.L, "grid.", issues);
        }
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (!s.is_object()) {
            issues.push_back("key 'solver' must be an object");
        } else {
            detail::check_keys(s, {"dt", "theta", "tol_lin", "max_lin_iters", "restart"}, "solver.", issues);
            detail::read(s, "dt", c.solver.dt, "solver.", issues);
            detail::read(s, "theta", c.solver.theta, "solver.", issues);
            detail::read(s, "tol_lin", c.solver.tol_lin, "solver.", issues);
            detail::read(s, "max_lin_iters", c.solver.max_lin_iters, "solver.", issues);
            detail::read(s, "restart", c.solver.restart, "solver.", issues);
        }
    }
    detail::read(j, "coeffs", c.coeffs, "", issues);
    detail::read(j, "m", c.m, "", issues);
    detail::read(j, "N", c.N, "", issues);
    if (j.contains("p")) {
        c.p_list.clear();
        if (!j["p"].is_array()) {
            issues.push_back("key 'p' must be an array");
        } else {
            for (const auto& v : j["p"]) {
                if (v.is_number())
                    c.p_list.push_back(v.get<double>());
                else if (v.is_string() && v.get<std::string>() == "inf")
                    c.p_list.push_back(kInfinity);
                else
                    issues.push_back("entries of 'p' must be numbers or \"inf\"");
            }
        }
    }
    detail::read(j, "T", c.T, "", issues);
    detail::read(j, "seed", c.seed, "", issues);
    detail::read(j, "samples", c.samples, "", issues);
    detail::read(j, "picard_iters", c.picard_iters, "", issues);
    detail::read(j, "probes", c.probes, "", issues);
    detail::read(j, "scales", c.scales, "", issues);
    detail::read(j, "data", c.data, "", issues);
    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object()) {
            issues.push_back("key 'tolerances' must be an object");
        } else {
            for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
                if (!c.tolerances.count(it.key()))
                    issues.push_back("unknown key 'tolerances." + it.key() + "'");
                else if (!it.value().is_number())
                    issues.push_back("key 'tolerances." + it.key() + "' must be a number");
                else
                    c.tolerances[it.key()] = it.value().get<double>();
            }
        }
    }

    // Semantic checks.
    if (c.grid.n != 1 && c.grid.n != 2) issues.push_back("grid.n must be 1 or 2");
    if (c.grid.P < 8 || (c.grid.P & (c.grid.P - 1)) != 0) issues.push_back("grid.P must be a power of two >= 8");
    if (!(c.grid.L > 0.0)) issues.push_back("grid.L must be positive");
    if (c.m < 1) issues.push_back("m must be >= 1");
    if (c.N < 1) issues.push_back("N must be >= 1");
    for (double p : c.p_list)
        if (!(p >= 1.0)) issues.push_back("every p must be >= 1");
    try {
        c.solver.validate();
    } catch (const ValidationError& e) {
        issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
    if (!(c.T > 0.0)) issues.push_back("T must be positive");
    if (c.samples < 1) issues.push_back("samples must be >= 1");
    if (c.picard_iters < 0) issues.push_back("picard_iters must be >= 0");
    if (c.probes < 1) issues.push_back("probes must be >= 1");
    if (!data_kinds().count(c.data)) issues.push_back("unknown data kind '" + c.data + "'");
    for (const auto& [k, v] : c.tolerances)
        if (!(v > 0.0)) issues.push_back("tolerance '" + k + "' must be positive");
    try {
        parse_preset(c.coeffs);
    } catch (const ValidationError& e) {
        issues.push_back(e.what());
    }
    if (!issues.empty()) throw ValidationError(issues);
    return c;
}

// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Hash of the canonical (key-sorted, compact) JSON dump.
inline std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(to_json(c).dump()); }

} // namespace tentlab
