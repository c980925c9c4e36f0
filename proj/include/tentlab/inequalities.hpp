#pragma once

#include <cmath>
#include <vector>

#include "tentlab/derivative.hpp"
#include "tentlab/polynomial.hpp"

namespace tentlab {

struct PoincareReport {
    std::vector<double> lhs_terms; // r^{k-m} ||nabla^k (f - P)||_{L^2(B)}, k = 0..m
    double lhs = 0.0;
    double rhs = 0.0; // ||nabla^m f||_{L^2(B)}
    double ratio = 0.0;
    bool degenerate = false; // rhs = 0 while lhs > 0
};

// Scaled Poincare inequality on B with P the flat L^2(B) projection onto degree <= m-1.
// Use a finite-difference scheme when f is a non-periodic polynomial: centered
// stencils are exact on low-degree polynomials away from the wrap-around.
inline PoincareReport poincare_check(const Field& f, int m, const Ball& ball, Scheme scheme = Scheme::spectral) {
    if (m < 1) throw ValidationError("poincare_check requires m >= 1");
    const Grid& g = f.grid();
    if (ball.radius < g.spacing()) throw NumericalError("ball unresolved: radius below grid spacing");
    const auto pts = ball_points(g, ball);
    const PolyProjection P = poly_project(f, ball, m, Weight::flat);
    const auto y = scaled_points(g, ball, pts);
    PoincareReport rep;
    for (int k = 0; k <= m; ++k) {
        const auto betas = multi_indices(g.dim(), k);
        const auto grads = grad_m(f, k, scheme);
        Accumulator acc;
        for (std::size_t b = 0; b < betas.size(); ++b)
            for (int c = 0; c < f.components(); ++c)
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const cplx d = grads[b](c, pts[i]) - P.derivative_scaled(c, betas[b], y[i]);
                    acc.add(std::norm(d));
                }
        const double norm_k = std::sqrt(acc.value() * g.cell_volume());
        rep.lhs_terms.push_back(std::pow(ball.radius, k - m) * norm_k);
        if (k == m) {
            Accumulator top;
            for (std::size_t b = 0; b < betas.size(); ++b)
                for (int c = 0; c < f.components(); ++c)
                    for (auto i : pts) top.add(std::norm(grads[b](c, i)));
            rep.rhs = std::sqrt(top.value() * g.cell_volume());
        }
    }
    for (double v : rep.lhs_terms) rep.lhs += v;
    // Rounding floor: ||nabla^m f|| at the level of r^{-m} ||f||_{L^2(B)} * 1e-10 counts as zero.
    Accumulator fb;
    for (int c = 0; c < f.components(); ++c)
        for (auto i : pts) fb.add(std::norm(f(c, i)));
    const double floor = 1e-10 * std::pow(ball.radius, -m) * std::sqrt(fb.value() * g.cell_volume());
    if (rep.rhs > floor) {
        rep.ratio = rep.lhs / rep.rhs;
    } else {
        rep.ratio = 0.0;
        rep.degenerate = rep.lhs > floor;
    }
    return rep;
}

struct GnReport {
    double q = 0.0;
    double theta = 0.0;
    double lhs = 0.0; // ||nabla^k f||_q
    double rhs = 0.0; // ||nabla^m f||_p^theta ||f||_r^{1-theta}
    double ratio = 0.0;
};

inline double gradient_lp(const Field& f, int k, double p, Scheme scheme) {
    if (k == 0) return lp_norm(f, p);
    const auto mod = gradient_modulus_sq(grad_m(f, k, scheme));
    std::vector<double> a(mod.size());
    for (std::size_t i = 0; i < mod.size(); ++i) a[i] = std::sqrt(mod[i]);
    return lp_norm_of(a, f.grid(), p);
}

// Gagliardo-Nirenberg: ||nabla^k f||_q against ||nabla^m f||_p^theta ||f||_r^{1-theta},
// theta = k/m, 1/q = theta/p + (1 - theta)/r.
inline GnReport gn_check(const Field& f, int m, int k, double p, double r, Scheme scheme = Scheme::spectral) {
    if (m < 1 || k < 0 || k > m) throw ValidationError("gn_check requires 0 <= k <= m, m >= 1");
    if (!(p >= 1.0) || !(r >= 1.0)) throw ValidationError("gn_check requires p, r >= 1");
    GnReport rep;
    rep.theta = static_cast<double>(k) / m;
    const double inv_q = rep.theta / p + (1.0 - rep.theta) / r;
    rep.q = inv_q > 0.0 ? 1.0 / inv_q : kInfinity;
    rep.lhs = gradient_lp(f, k, rep.q, scheme);
    const double top = k == 0 ? 1.0 : std::pow(gradient_lp(f, m, p, scheme), rep.theta);
    const double bottom = k == m ? 1.0 : std::pow(lp_norm(f, r), 1.0 - rep.theta);
    rep.rhs = top * bottom;
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    return rep;
}

} // namespace tentlab
