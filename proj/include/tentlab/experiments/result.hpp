#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>
#include <nlohmann/json.hpp>

#include "tentlab/config.hpp"
#include "tentlab/version.hpp"

namespace tentlab {

// A verdict entry: metric `metric` compared against `threshold`.
// "le": value <= threshold, "ge": value >= threshold, "finite": value is finite.
struct Criterion {
    std::string name;
    std::string metric;
    std::string cmp;
    double threshold = 0.0;

    bool holds(const std::map<std::string, double>& metrics) const {
        const auto it = metrics.find(metric);
        if (it == metrics.end()) return false;
        const double v = it->second;
        if (cmp == "finite") return std::isfinite(v);
        if (std::isnan(v)) return false;
        if (cmp == "le") return v <= threshold;
        if (cmp == "ge") return v >= threshold;
        return false;
    }
};

struct CurveRow {
    std::string sweep_var;
    std::string metric;
    double value = 0.0;
};

inline json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    throw ValidationError("not a number: " + s);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Short form for metric keys and sweep labels: 2.2 rather than 2.2000000000000002.
inline std::string format_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct ExperimentResult {
    std::string name;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> notes;
    std::vector<Criterion> criteria;
    json provenance = json::object();
    std::vector<CurveRow> curves;

    void metric(const std::string& key, double v) { metrics[key] = v; }
    void note(const std::string& key, const std::string& v) { notes[key] = v; }
    void require(const std::string& crit, const std::string& key, const std::string& cmp, double threshold = 0.0) {
        criteria.push_back({crit, key, cmp, threshold});
    }
    void curve(const std::string& sweep_var, const std::string& key, double v) { curves.push_back({sweep_var, key, v}); }

    bool passed() const {
        for (const auto& c : criteria)
            if (!c.holds(metrics)) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["name"] = name;
        json m = json::object();
        for (const auto& [k, v] : metrics) m[k] = number_to_json(v);
        j["metrics"] = m;
        j["notes"] = notes;
        json crit = json::array();
        for (const auto& c : criteria)
            crit.push_back({{"name", c.name},
                            {"metric", c.metric},
                            {"cmp", c.cmp},
                            {"threshold", number_to_json(c.threshold)},
                            {"pass", c.holds(metrics)}});
        j["criteria"] = crit;
        j["verdict"] = passed() ? "pass" : "fail";
        j["provenance"] = provenance;
        return j;
    }

    std::string curves_csv() const {
        std::ostringstream os;
        os << "sweep_var,metric,value\n";
        for (const auto& r : curves) os << r.sweep_var << ',' << r.metric << ',' << format_double(r.value) << '\n';
        return os.str();
    }
};

// Re-derive every criterion from the metrics stored in a result.json document.
inline bool recheck_verdict(const json& result) {
    std::map<std::string, double> metrics;
    for (auto it = result.at("metrics").begin(); it != result.at("metrics").end(); ++it)
        metrics[it.key()] = number_from_json(it.value());
    for (const auto& c : result.at("criteria")) {
        const Criterion crit{c.at("name"), c.at("metric"), c.at("cmp"), number_from_json(c.at("threshold"))};
        if (!crit.holds(metrics)) return false;
    }
    return true;
}

inline json versions_json() {
    return {{"tentlab", std::string(kVersion)},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", std::string(fftw_version)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

inline json provenance_for(const ExperimentConfig& cfg) {
    return {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"config", to_json(cfg)}, {"versions", versions_json()}};
}

} // namespace tentlab
