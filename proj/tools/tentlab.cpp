// tentlab command-line front end.
//
// Exit codes: 0 success, 1 verify ran but a verdict failed, 2 validation or
// usage error, 3 numerical failure.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tentlab/experiments/registry.hpp"
#include "tentlab/functionals.hpp"
#include "tentlab/polynomial.hpp"
#include "tentlab/propagator.hpp"
#include "tentlab/semigroup.hpp"
#include "tentlab/version.hpp"

namespace fs = std::filesystem;
using namespace tentlab;

namespace {

struct Context {
    std::vector<std::string> argv;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json grid_json(const Grid& g) { return {{"n", g.dim()}, {"P", g.points_per_axis()}, {"L", g.box_length()}}; }

// Manifest for one run; `specs` is hashed so identical inputs share a hash.
void write_manifest(const Context& ctx, const fs::path& path, const json& specs, const json& seeds,
                    const std::string& hash = "") {
    json m;
    m["command_line"] = ctx.argv;
    m["config_hash"] = hash.empty() ? fnv1a_hex(specs.dump()) : hash;
    m["seeds"] = seeds;
    m["specs"] = specs;
    m["version"] = kVersion;
    m["versions"] = versions_json();
    m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    m["finished_at"] = utc_now();
    atomic_write(path, m.dump(2) + "\n");
}

fs::path manifest_for(const fs::path& artifact) {
    auto p = artifact;
    p += ".manifest.json";
    return p;
}

double parse_p(const std::string& s) {
    if (s == "inf") return kInfinity;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("--p must be a number or 'inf', got '" + s + "'");
}

// Initial data: a PTSF1 file (first slice) or a named profile on a fresh grid.
struct DataSource {
    std::string in;
    std::string data;
    int n = 1;
    int P = 256;
    double L = 32.0;
    int N = 1;
    std::uint64_t seed = 42;

    void add(CLI::App* cmd) {
        cmd->add_option("--in", in, "initial data (PTSF1, first slice)");
        cmd->add_option("--data", data, "named initial data instead of --in")
            ->check(CLI::IsMember(std::vector<std::string>(data_kinds().begin(), data_kinds().end())));
        cmd->add_option("--n", n, "dimension for --data")->check(CLI::Range(1, 2));
        cmd->add_option("--P", P, "points per axis for --data");
        cmd->add_option("--L", L, "box length for --data");
        cmd->add_option("--N", N, "components for --data");
        cmd->add_option("--seed", seed, "seed for --data");
    }

    Field load() const {
        if (in.empty() == data.empty()) throw ValidationError("give exactly one of --in and --data");
        if (!in.empty()) {
            if (!fs::exists(in)) throw ValidationError("input file not found: " + in);
            return read_ptsf(in).slices.front();
        }
        return make_data(make_grid(n, P, L), N, data, 1.0, seed);
    }

    json spec() const {
        if (!in.empty()) return {{"in", in}};
        return {{"data", data}, {"grid", {{"n", n}, {"P", P}, {"L", L}}}, {"N", N}};
    }
};

SpaceTimeField load_trajectory(const std::string& in) {
    if (in.empty()) throw ValidationError("--in is required");
    if (!fs::exists(in)) throw ValidationError("input file not found: " + in);
    return read_ptsf(in);
}

void emit_json(const json& j, const std::string& path) {
    if (path.empty())
        std::cout << j.dump(2) << "\n";
    else
        atomic_write(path, j.dump(2) + "\n");
}

int threads_from(int flag) {
    if (flag > 0) return flag;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs one experiment into `dir`; returns true when the verdict passes.
bool verify_one(const Context& ctx, const ExperimentConfig& cfg, const fs::path& dir, std::string& line) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_experiment(cfg);
    const json j = res.to_json();
    fs::create_directories(dir);
    atomic_write(dir / "result.json", j.dump(2) + "\n");
    atomic_write(dir / "curves.csv", res.curves_csv());
    json specs = to_json(cfg);
    write_manifest(ctx, dir / "manifest.json", specs, json{{"config", cfg.seed}}, config_hash(cfg));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2f s)", secs);
    line = cfg.experiment + ": " + (res.passed() ? "pass" : "fail") + buf;
    return res.passed();
}

struct ErrorOut {
    bool json_errors = false;

    int report(const std::string& kind, int code, const std::string& message,
               const std::vector<std::string>& issues = {}) const {
        if (json_errors) {
            json j{{"error", {{"kind", kind}, {"message", message}, {"issues", issues}}}, {"exit_code", code}};
            std::cerr << j.dump() << "\n";
        } else {
            std::cerr << "tentlab: " << kind << " error: " << message << "\n";
        }
        return code;
    }
};

} // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.argv.assign(argv, argv + argc);
    ErrorOut err;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--json-errors") err.json_errors = true;

    CLI::App app{"tentlab: parabolic systems, tent spaces and numerical experiments"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    bool json_errors = false;
    int threads = 0;
    app.add_flag("--json-errors", json_errors, "report errors on stderr as JSON");
    app.add_option("--threads", threads, "worker threads for verify --all")->envname("TENTLAB_THREADS");

    // solve
    auto* solve = app.add_subcommand("solve", "propagate initial data with variable coefficients");
    DataSource solve_src;
    solve_src.add(solve);
    std::string solve_coeffs = "polyharmonic", solve_out;
    int solve_m = 1;
    double solve_T = 1.0;
    SolverConfig solver_cfg;
    solve->add_option("--coeffs", solve_coeffs, "coefficient preset, e.g. rough:10:42");
    solve->add_option("--m", solve_m, "order m");
    solve->add_option("--T", solve_T, "final time");
    solve->add_option("--dt", solver_cfg.dt, "time step");
    solve->add_option("--theta", solver_cfg.theta, "theta scheme (1 or 1/2)");
    solve->add_option("--tol-lin", solver_cfg.tol_lin, "linear solver tolerance");
    solve->add_option("--out", solve_out, "output trajectory (PTSF1)")->required();

    // semigroup
    auto* semi = app.add_subcommand("semigroup", "apply exp(-tL) for constant coefficients");
    DataSource semi_src;
    semi_src.add(semi);
    std::string semi_preset = "polyharmonic", semi_out;
    int semi_m = 1;
    double semi_t = 1.0;
    semi->add_option("--preset", semi_preset, "constant-coefficient preset");
    semi->add_option("--m", semi_m, "order m");
    semi->add_option("--t", semi_t, "time");
    semi->add_option("--out", semi_out, "output field (PTSF1)")->required();

    // norm
    auto* norm = app.add_subcommand("norm", "evaluate a tent-space or BMO-type functional");
    std::string norm_kind, norm_in, norm_json, norm_p = "2";
    int norm_m = 1;
    std::size_t norm_slice = 0;
    norm->add_option("--kind", norm_kind, "functional")
        ->required()
        ->check(CLI::IsMember({"tent", "nontan", "carleson", "bmo", "bmom", "lpm"}));
    norm->add_option("--p", norm_p, "exponent (number or inf)");
    norm->add_option("--m", norm_m, "order m");
    norm->add_option("--in", norm_in, "trajectory (PTSF1)");
    norm->add_option("--slice", norm_slice, "slice for bmo, bmom and lpm");
    norm->add_option("--json", norm_json, "write the report here instead of stdout");

    // project
    auto* project = app.add_subcommand("project", "polynomial projection on a ball");
    std::string proj_in, proj_json, proj_weight = "flat";
    int proj_m = 1;
    double proj_r = 0.0;
    std::vector<double> proj_center;
    std::size_t proj_slice = 0;
    project->add_option("--in", proj_in, "field (PTSF1)");
    project->add_option("--slice", proj_slice, "slice index");
    project->add_option("--m", proj_m, "project onto degree <= m-1");
    project->add_option("--center", proj_center, "ball centre (n values, default origin)")->delimiter(',');
    project->add_option("--radius", proj_r, "ball radius")->required();
    project->add_option("--weight", proj_weight, "flat or smooth")->check(CLI::IsMember({"flat", "smooth"}));
    project->add_option("--json", proj_json, "write the projection here instead of stdout");

    // verify
    auto* verify = app.add_subcommand("verify", "run an experiment and emit result.json, curves.csv");
    std::string verify_name, verify_config, verify_out = "results";
    std::optional<std::uint64_t> verify_seed;
    bool verify_all = false;
    verify->add_option("experiment", verify_name, "experiment name");
    verify->add_flag("--all", verify_all, "run every registered experiment with defaults");
    verify->add_option("--config", verify_config, "config file (JSON)");
    verify->add_option("--seed", verify_seed, "override the config seed");
    verify->add_option("--out", verify_out, "output directory");

    // info
    auto* info = app.add_subcommand("info", "print PTSF1 header fields");
    std::string info_in;
    info->add_option("--in", info_in, "file (PTSF1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return err.report("usage", 2, e.what());
    }

    try {
        if (*solve) {
            const Field f = solve_src.load();
            const auto A = build_coefficients(solve_coeffs, f.grid(), solve_m, f.components(), solve_T);
            const Propagator P(A, solver_cfg);
            const auto traj = P.propagate(0.0, solve_T, f);
            write_ptsf(solve_out, traj);
            const json specs{{"grid", grid_json(f.grid())},
                             {"coeffs", solve_coeffs},
                             {"m", solve_m},
                             {"T", solve_T},
                             {"solver",
                              {{"dt", solver_cfg.dt}, {"theta", solver_cfg.theta}, {"tol_lin", solver_cfg.tol_lin}}},
                             {"input", solve_src.spec()}};
            write_manifest(ctx, manifest_for(solve_out), specs, json{{"data", solve_src.seed}});
            const auto st = P.stats();
            std::cout << "steps " << st.steps << ", linear iterations " << st.linear_iterations << ", worst residual "
                      << st.worst_residual << "\n";
        } else if (*semi) {
            const Field f = semi_src.load();
            const Semigroup S(build_coefficients(semi_preset, f.grid(), semi_m, f.components(), semi_t));
            write_ptsf(semi_out, S.apply(semi_t, f), semi_t);
            const json specs{{"grid", grid_json(f.grid())},
                             {"preset", semi_preset},
                             {"m", semi_m},
                             {"t", semi_t},
                             {"input", semi_src.spec()}};
            write_manifest(ctx, manifest_for(semi_out), specs, json{{"data", semi_src.seed}});
        } else if (*norm) {
            const double p = parse_p(norm_p);
            const auto u = load_trajectory(norm_in);
            if (norm_slice >= u.size()) throw ValidationError("--slice out of range");
            const Field& f = u.slices[norm_slice];
            NormReport r;
            if (norm_kind == "tent")
                r = tent_norm(gradient_trajectory(u, norm_m), p, norm_m);
            else if (norm_kind == "nontan")
                r = nontangential_norm(u, p, norm_m);
            else if (norm_kind == "carleson")
                r = carleson_norm(u, norm_m);
            else if (norm_kind == "bmo")
                r = bmo_norm(f);
            else if (norm_kind == "bmom")
                r = bmo_m_norm(f, norm_m);
            else
                r = lp_m_norm(f, norm_m, p);
            const json j{{"name", r.name},
                         {"value", number_to_json(r.value)},
                         {"p", number_to_json(r.p)},
                         {"m", r.m},
                         {"grid", {{"n", r.n}, {"P", r.P}, {"L", r.L}}},
                         {"truncation", {{"rmin", r.rmin}, {"rmax", r.rmax}, {"window", r.window}}}};
            emit_json(j, norm_json);
            if (!norm_json.empty())
                write_manifest(ctx, manifest_for(norm_json),
                               {{"kind", norm_kind}, {"p", norm_p}, {"m", norm_m}, {"in", norm_in}}, json::object());
        } else if (*project) {
            const auto u = load_trajectory(proj_in);
            if (proj_slice >= u.size()) throw ValidationError("--slice out of range");
            const Field& f = u.slices[proj_slice];
            if (proj_center.empty()) proj_center.assign(static_cast<std::size_t>(f.grid().dim()), 0.0);
            const auto P = poly_project(f, Ball{proj_center, proj_r}, proj_m, parse_weight(proj_weight));
            json basis = json::array(), coeffs = json::array();
            for (const auto& a : P.basis) basis.push_back(a.entries);
            for (const auto& comp : P.coeffs) {
                json c = json::array();
                for (const auto& v : comp) c.push_back({v.real(), v.imag()});
                coeffs.push_back(c);
            }
            const json j{{"ball", {{"center", proj_center}, {"radius", proj_r}}},
                         {"degree", P.degree},
                         {"weight", proj_weight},
                         {"coordinates", "scaled (x - center) / radius"},
                         {"basis", basis},
                         {"coefficients", coeffs},
                         {"gram_condition", P.gram_condition},
                         {"sup_ratio", number_to_json(P.sup_ratio)},
                         {"grid", grid_json(f.grid())}};
            emit_json(j, proj_json);
            if (!proj_json.empty())
                write_manifest(ctx, manifest_for(proj_json),
                               {{"in", proj_in}, {"m", proj_m}, {"center", proj_center}, {"radius", proj_r},
                                {"weight", proj_weight}},
                               json::object());
        } else if (*verify) {
            if (verify_all == !verify_name.empty())
                throw ValidationError("give exactly one of an experiment name and --all");
            if (verify_all) {
                if (!verify_config.empty()) throw ValidationError("--config cannot be combined with --all");
                std::vector<ExperimentConfig> jobs;
                for (const auto& name : experiment_names()) {
                    auto c = default_config(name);
                    if (verify_seed) c.seed = *verify_seed;
                    jobs.push_back(c);
                }
                std::vector<std::string> lines(jobs.size());
                std::vector<int> status(jobs.size(), 0);
                std::atomic<std::size_t> next{0};
                auto worker = [&] {
                    for (std::size_t i; (i = next++) < jobs.size();) {
                        try {
                            status[i] = verify_one(ctx, jobs[i], fs::path(verify_out) / jobs[i].experiment, lines[i]) ? 0 : 1;
                        } catch (const ValidationError& e) {
                            lines[i] = jobs[i].experiment + ": validation error: " + e.what();
                            status[i] = 2;
                        } catch (const std::exception& e) {
                            lines[i] = jobs[i].experiment + ": numerical error: " + e.what();
                            status[i] = 3;
                        }
                    }
                };
                const int nt = std::min<int>(threads_from(threads), static_cast<int>(jobs.size()));
                std::vector<std::thread> pool;
                for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
                for (auto& t : pool) t.join();
                int code = 0;
                for (std::size_t i = 0; i < jobs.size(); ++i) {
                    std::cout << lines[i] << "\n";
                    code = std::max(code, status[i]);
                }
                return code;
            }
            ExperimentConfig cfg = verify_config.empty() ? default_config(verify_name) : parse_config(verify_config);
            if (cfg.experiment != find_experiment(verify_name).name)
                throw ValidationError("config is for '" + cfg.experiment + "', not '" + verify_name + "'");
            if (verify_seed) cfg.seed = *verify_seed;
            std::string line;
            const bool ok = verify_one(ctx, cfg, verify_out, line);
            std::cout << line << "\n";
            return ok ? 0 : 1;
        } else if (*info) {
            const auto u = load_trajectory(info_in);
            const Grid& g = u.grid();
            std::cout << "format PTSF1\n"
                      << "n " << g.dim() << "\n"
                      << "P " << g.points_per_axis() << "\n"
                      << "L " << format_label(g.box_length()) << "\n"
                      << "N " << u.components() << "\n"
                      << "K " << u.size() << "\n"
                      << "t_first " << format_label(u.times.front()) << "\n"
                      << "t_last " << format_label(u.times.back()) << "\n";
        }
    } catch (const ValidationError& e) {
        return err.report("validation", 2, e.what(), e.issues());
    } catch (const NumericalError& e) {
        return err.report("numerical", 3, e.what());
    } catch (const fs::filesystem_error& e) {
        return err.report("validation", 2, e.what());
    }
    return 0;
}
