#pragma once

#include <cmath>

#include "tentlab/experiments/common.hpp"

namespace tentlab {

// Slice indices with times in [a, b] (closed) or (a, b) (open), up to rounding.
inline std::vector<std::size_t> slices_in(const SpaceTimeField& u, double a, double b, bool open) {
    std::vector<std::size_t> out;
    const double eps = 1e-9 * std::max(1.0, b);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double t = u.times[k];
        if (open ? (t > a + eps && t < b - eps) : (t >= a - eps && t <= b + eps)) out.push_back(k);
    }
    return out;
}

// (mean over slices and B(x, r) of |u|^q)^{1/q}; q = infinity gives the max.
inline double cylinder_mean(const SpaceTimeField& u, const std::vector<std::size_t>& ks, std::size_t x, double r,
                            double q) {
    const Grid& g = u.grid();
    const auto offs = ball_offsets(g, r);
    if (ks.empty() || offs.empty()) throw NumericalError("cylinder unresolved: no slices or grid points");
    Accumulator acc;
    double mx = 0.0;
    for (auto k : ks)
        for (const auto& o : offs) {
            const double a = std::sqrt(u.slices[k].modulus_sq(shifted_index(g, x, o)));
            if (std::isinf(q))
                mx = std::max(mx, a);
            else
                acc.add(std::pow(a, q));
        }
    if (std::isinf(q)) return mx;
    return std::pow(acc.value() / static_cast<double>(ks.size() * offs.size()), 1.0 / q);
}

// Grid point nearest to (x0, x1).
inline std::size_t nearest_point(const Grid& g, double x0, double x1 = 0.0) {
    const double h = g.spacing();
    const int P = g.points_per_axis();
    const int i0 = static_cast<int>(std::lround(x0 / h)) + P / 2;
    const int i1 = g.dim() == 2 ? static_cast<int>(std::lround(x1 / h)) + P / 2 : 0;
    return g.flat_index(i0, i1);
}

inline Grid refined(const GridSpec& s) { return make_grid(s.n, 2 * s.P, s.L); }

struct CylinderSample {
    double t = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;
    double r = 0.0;
};

// Reversed Hoelder: (avg_{Q_r} |u|^q)^{1/q} / (avg_{Q_{4r}} |u|^2)^{1/2}, q = 2 + 4m/n,
// Q_r(t, x) = [t - r^{2m}, t + r^{2m}] x B(x, r), sampled with (4r)^{2m} < t.
inline double reversed_holder_ratio(const SpaceTimeField& u, int m, const CylinderSample& c) {
    const Grid& g = u.grid();
    const double q = 2.0 + 4.0 * m / g.dim();
    const std::size_t x = nearest_point(g, c.x0, c.x1);
    const double s = std::pow(c.r, 2.0 * m), S = std::pow(4.0 * c.r, 2.0 * m);
    const double num = cylinder_mean(u, slices_in(u, c.t - s, c.t + s, false), x, c.r, q);
    const double den = cylinder_mean(u, slices_in(u, c.t - S, c.t + S, false), x, 4.0 * c.r, 2.0);
    if (den == 0.0) return num == 0.0 ? 0.0 : kInfinity;
    return num / den;
}

inline ExperimentResult run_reversed_holder(const ExperimentConfig& cfg) {
    auto res = start_result("run_reversed_holder", cfg);
    const int m = cfg.m;
    const double rlo = cfg.scales.size() >= 2 ? cfg.scales[0] : 0.25;
    const double rhi = cfg.scales.size() >= 2 ? cfg.scales[1] : 0.5;
    const double S = std::pow(4.0 * rhi, 2.0 * m);
    if (!(cfg.T > 2.0 * S)) throw ValidationError("run_reversed_holder: T must exceed 2 (4 r_max)^{2m}");
    if (4.0 * rhi > cfg.grid.L / 8.0) throw ValidationError("run_reversed_holder: 4 r_max must stay below L/8");

    const Grid g0 = cfg.grid.make();
    const double h = g0.spacing();
    CounterRng rng(cfg.seed, 301);
    std::vector<CylinderSample> samples;
    for (int i = 0; i < cfg.samples; ++i) {
        CylinderSample c;
        c.r = rng.uniform(rlo, rhi);
        const double Sr = std::pow(4.0 * c.r, 2.0 * m);
        const double t = rng.uniform(Sr, cfg.T - Sr);
        c.t = std::clamp(std::round(t / cfg.solver.dt) * cfg.solver.dt, Sr + cfg.solver.dt, cfg.T - Sr);
        c.x0 = std::round(rng.uniform(-0.125, 0.125) * cfg.grid.L / h) * h;
        if (g0.dim() == 2) c.x1 = std::round(rng.uniform(-0.125, 0.125) * cfg.grid.L / h) * h;
        samples.push_back(c);
    }

    std::vector<double> maxima;
    for (int level = 0; level < 2; ++level) {
        const Grid g = level == 0 ? g0 : refined(cfg.grid);
        SolverConfig sc = cfg.solver;
        if (level == 1) sc.dt *= 0.5;
        const CoefficientField A = build_coefficients(cfg.coeffs, g, m, cfg.N, cfg.T);
        const Propagator P(A, sc);
        const auto u = P.propagate(0.0, cfg.T, make_data(g, cfg.N, cfg.data, 1.0, cfg.seed));
        double mx = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double r = reversed_holder_ratio(u, m, samples[i]);
            mx = std::max(mx, r);
            if (level == 0) res.curve(sweep_label("sample", static_cast<double>(i)), "ratio", r);
        }
        maxima.push_back(mx);
        res.curve(sweep_label("P", g.points_per_axis()), "max_ratio", mx);
    }
    res.metric("q", 2.0 + 4.0 * m / cfg.grid.n);
    res.metric("max_ratio", maxima[0]);
    res.metric("max_ratio_refined", maxima[1]);
    res.metric("refinement_change", relative_change(maxima[0], maxima[1]));
    res.require("max_ratio_finite", "max_ratio", "finite");
    res.require("refinement_stable", "refinement_change", "le", cfg.tol("refine_rel"));
    return res;
}

struct LocalLpRatios {
    double bound = 0.0;  // sup_{s in (t/2, 2t)} (avg_B |u(s)|^p)^{1/p} / rhs
    double holder = 0.0; // t^alpha sup (avg_B |u(s') - u(s)|^p)^{1/p} / |s' - s|^alpha / rhs
};

// rhs = (avg_{(t/4, 4t)} avg_{B(x, 2 t^{1/2m})} |u|^2)^{1/2}, B = B(x, t^{1/2m}), alpha = 1/2 - 1/p.
inline LocalLpRatios local_lp_ratios(const SpaceTimeField& u, int m, double p, double t, std::size_t x,
                                     std::size_t max_holder_slices = 48) {
    const double r = std::pow(t, 1.0 / (2.0 * m));
    const double rhs = cylinder_mean(u, slices_in(u, 0.25 * t, 4.0 * t, true), x, 2.0 * r, 2.0);
    const auto inner_ks = slices_in(u, 0.5 * t, 2.0 * t, true);
    LocalLpRatios out;
    if (rhs == 0.0) return out;
    double best = 0.0;
    for (auto k : inner_ks) best = std::max(best, cylinder_mean(u, {k}, x, r, p));
    out.bound = best / rhs;

    const double alpha = 0.5 - 1.0 / p;
    std::vector<std::size_t> ks;
    const std::size_t stride = std::max<std::size_t>(1, (inner_ks.size() + max_holder_slices - 1) / max_holder_slices);
    for (std::size_t i = 0; i < inner_ks.size(); i += stride) ks.push_back(inner_ks[i]);
    const Grid& g = u.grid();
    const auto offs = ball_offsets(g, r);
    double hq = 0.0;
    for (std::size_t a = 0; a < ks.size(); ++a)
        for (std::size_t b = a + 1; b < ks.size(); ++b) {
            Accumulator acc;
            for (const auto& o : offs) {
                const std::size_t i = shifted_index(g, x, o);
                double d2 = 0.0;
                for (int c = 0; c < u.slices[ks[a]].components(); ++c)
                    d2 += std::norm(u.slices[ks[b]](c, i) - u.slices[ks[a]](c, i));
                acc.add(std::pow(d2, 0.5 * p));
            }
            const double diff = std::pow(acc.value() / static_cast<double>(offs.size()), 1.0 / p);
            const double gap = std::abs(u.times[ks[b]] - u.times[ks[a]]);
            hq = std::max(hq, diff / std::pow(gap, alpha));
        }
    out.holder = std::pow(t, alpha) * hq / rhs;
    return out;
}

inline ExperimentResult run_local_lp_bound(const ExperimentConfig& cfg) {
    auto res = start_result("run_local_lp_bound", cfg);
    const int m = cfg.m;
    const double tlo = cfg.scales.size() >= 2 ? cfg.scales[0] : 0.125;
    const double thi = cfg.scales.size() >= 2 ? cfg.scales[1] : 1.0;
    if (!(cfg.T >= 4.0 * thi)) throw ValidationError("run_local_lp_bound: T must be at least 4 t_max");
    if (2.0 * std::pow(thi, 1.0 / (2.0 * m)) > cfg.grid.L / 8.0)
        throw ValidationError("run_local_lp_bound: 2 t_max^{1/2m} must stay below L/8");
    const Grid g0 = cfg.grid.make();
    const double h = g0.spacing();
    CounterRng rng(cfg.seed, 401);
    std::vector<CylinderSample> samples;
    for (int i = 0; i < cfg.samples; ++i) {
        CylinderSample c;
        c.t = tlo * std::pow(thi / tlo, rng.uniform());
        c.x0 = std::round(rng.uniform(-0.125, 0.125) * cfg.grid.L / h) * h;
        if (g0.dim() == 2) c.x1 = std::round(rng.uniform(-0.125, 0.125) * cfg.grid.L / h) * h;
        samples.push_back(c);
    }
    const std::size_t np = cfg.p_list.size();
    std::vector<std::vector<double>> bound_max(np), holder_max(np);
    for (int level = 0; level < 2; ++level) {
        const Grid g = level == 0 ? g0 : refined(cfg.grid);
        SolverConfig sc = cfg.solver;
        if (level == 1) sc.dt *= 0.5;
        const CoefficientField A = build_coefficients(cfg.coeffs, g, m, cfg.N, cfg.T);
        const Propagator P(A, sc);
        const auto u = P.propagate(0.0, cfg.T, make_data(g, cfg.N, cfg.data, 1.0, cfg.seed));
        for (std::size_t ip = 0; ip < np; ++ip) {
            const double p = cfg.p_list[ip];
            double b = 0.0, hq = 0.0;
            for (const auto& c : samples) {
                const auto r = local_lp_ratios(u, m, p, c.t, nearest_point(g, c.x0, c.x1));
                b = std::max(b, r.bound);
                hq = std::max(hq, r.holder);
            }
            bound_max[ip].push_back(b);
            holder_max[ip].push_back(hq);
            res.curve(sweep_label("P", g.points_per_axis()), "bound_ratio_p" + format_label(p), b);
            res.curve(sweep_label("P", g.points_per_axis()), "holder_ratio_p" + format_label(p), hq);
        }
    }
    for (std::size_t ip = 0; ip < np; ++ip) {
        const std::string s = "_p" + format_label(cfg.p_list[ip]);
        const auto& bm = bound_max[ip];
        const auto& hm = holder_max[ip];
        res.metric("bound_ratio" + s, bm[0]);
        res.metric("bound_ratio_refined" + s, bm[1]);
        res.metric("holder_ratio" + s, hm[0]);
        res.metric("holder_ratio_refined" + s, hm[1]);
        res.metric("bound_refinement_change" + s, relative_change(bm[0], bm[1]));
        res.metric("holder_refinement_change" + s, relative_change(hm[0], hm[1]));
        res.require("bound_finite" + s, "bound_ratio" + s, "finite");
        res.require("holder_finite" + s, "holder_ratio" + s, "finite");
        res.require("bound_stable" + s, "bound_refinement_change" + s, "le", cfg.tol("refine_rel"));
        res.require("holder_stable" + s, "holder_refinement_change" + s, "le", cfg.tol("refine_rel"));
    }
    return res;
}

} // namespace tentlab
