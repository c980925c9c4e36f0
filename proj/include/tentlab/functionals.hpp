#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tentlab/derivative.hpp"
#include "tentlab/grid.hpp"
#include "tentlab/polynomial.hpp"

namespace tentlab {

struct NormReport {
    std::string name;
    double value = 0.0;
    double p = 2.0;
    int m = 1;
    int n = 1;
    int P = 0;
    double L = 0.0;
    double rmin = 0.0;
    double rmax = 0.0;
    std::string window = "box";
    std::size_t unresolved_slices = 0; // slices whose ball radius fell below h (evaluated pointwise)
};

inline NormReport make_report(const std::string& name, const Grid& g, double p, int m) {
    NormReport r;
    r.name = name;
    r.p = p;
    r.m = m;
    r.n = g.dim();
    r.P = g.points_per_axis();
    r.L = g.box_length();
    return r;
}

// Volume of the unit ball in dimension n (n = 1, 2).
inline double unit_ball_volume(int n) { return n == 1 ? 2.0 : std::numbers::pi; }

// Balls B(x, 2^j h), j = 2 .. log2(P/8), centred at the grid points of the interior window.
struct DyadicBallFamily {
    std::vector<std::size_t> centers;
    std::vector<double> radii;

    explicit DyadicBallFamily(const Grid& g) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g.in_interior(i)) centers.push_back(i);
        for (int j = 2; (1 << j) <= g.points_per_axis() / 8; ++j) radii.push_back((1 << j) * g.spacing());
        if (radii.empty()) throw ValidationError("grid too coarse for the dyadic ball family");
    }
};

// Pointwise |F|^2 summed over components.
inline std::vector<double> density(const Field& f) {
    std::vector<double> d(f.points());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = f.modulus_sq(i);
    return d;
}

// Mean of a density over B(x, r) for every grid point x. Radii below h
// degenerate to the point value.
inline std::vector<double> ball_average(const Grid& g, const std::vector<double>& dens, double radius) {
    if (radius < g.spacing()) return dens;
    const auto offs = ball_offsets(g, radius);
    const double cnt = static_cast<double>(offs.size());
    std::vector<double> out(g.size(), 0.0);
    if (offs.size() <= 64) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            Accumulator acc;
            for (const auto& o : offs) acc.add(dens[shifted_index(g, x, o)]);
            out[x] = acc.value() / cnt;
        }
        return out;
    }
    // Circular correlation with the (symmetric) ball indicator via FFT.
    std::vector<cplx> a(g.size()), k(g.size(), cplx{});
    for (std::size_t i = 0; i < g.size(); ++i) a[i] = dens[i];
    for (const auto& o : offs) k[shifted_index(g, 0, o)] = 1.0;
    auto A = fft_forward(g, a);
    const auto K = fft_forward(g, k);
    for (std::size_t i = 0; i < A.size(); ++i) A[i] *= K[i];
    const auto c = fft_inverse(g, A);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::max(0.0, c[i].real() / cnt);
    return out;
}

// Sum of a density over B(center, r) for a grid-point centre, and the point count.
inline std::pair<double, std::size_t> ball_sum(const Grid& g, const std::vector<double>& dens, std::size_t center,
                                               const std::vector<Offset>& offs) {
    Accumulator acc;
    for (const auto& o : offs) acc.add(dens[shifted_index(g, center, o)]);
    return {acc.value(), offs.size()};
}

// Concatenate the components of several fields into one field.
inline Field stack(const std::vector<Field>& parts) {
    const Grid& g = parts.front().grid();
    int total = 0;
    for (const auto& p : parts) total += p.components();
    Field out(g, total);
    int c0 = 0;
    for (const auto& p : parts) {
        for (int c = 0; c < p.components(); ++c) std::copy(p.component(c).begin(), p.component(c).end(), out.component(c0 + c).begin());
        c0 += p.components();
    }
    return out;
}

// The trajectory of nabla^m u (all multi-indices stacked as components).
inline SpaceTimeField gradient_trajectory(const SpaceTimeField& u, int m, Scheme scheme = Scheme::spectral) {
    u.validate();
    SpaceTimeField F;
    F.times = u.times;
    for (const auto& s : u.slices) F.slices.push_back(stack(grad_m(s, m, scheme)));
    return F;
}

struct TentOptions {
    bool interior_window = false; // p < infinity: integrate A(x)^p over the whole box by default
};

// Tent norm of F with parabolic balls B(x, t^{1/2m}), left-endpoint Riemann sums in time.
inline NormReport tent_norm(const SpaceTimeField& F, double p, int m, const TentOptions& opt = {}) {
    F.validate();
    if (!(p > 0.0)) throw ValidationError("tent_norm requires p > 0");
    const Grid& g = F.grid();
    auto rep = make_report("tent", g, p, m);
    const auto w = F.left_weights();
    if (std::isinf(p)) {
        const DyadicBallFamily fam(g);
        rep.window = "interior";
        rep.rmin = fam.radii.front();
        rep.rmax = fam.radii.back();
        std::vector<std::vector<double>> dens;
        for (const auto& s : F.slices) dens.push_back(density(s));
        double best = 0.0;
        for (double r : fam.radii) {
            const auto offs = ball_offsets(g, r);
            const double T = std::pow(r, 2.0 * m);
            std::vector<double> wk(F.size(), 0.0);
            for (std::size_t k = 0; k < F.size(); ++k)
                wk[k] = std::clamp(std::min(w[k], T - F.times[k]), 0.0, w[k]);
            // Time-integrated density for this radius, then ball means.
            std::vector<double> integ(g.size(), 0.0);
            for (std::size_t x = 0; x < g.size(); ++x) {
                Accumulator acc;
                for (std::size_t k = 0; k < F.size(); ++k)
                    if (wk[k] > 0.0) acc.add(wk[k] * dens[k][x]);
                integ[x] = acc.value();
            }
            for (auto c : fam.centers) {
                const auto [sum, cnt] = ball_sum(g, integ, c, offs);
                best = std::max(best, sum / static_cast<double>(cnt));
            }
        }
        rep.value = std::sqrt(best);
        return rep;
    }
    std::vector<std::string> too_large;
    const double rlim = 0.25 * g.box_length() * (1.0 + 1e-12);
    std::vector<double> A2(g.size(), 0.0);
    std::vector<Accumulator> acc(g.size());
    rep.rmin = kInfinity;
    for (std::size_t k = 0; k < F.size(); ++k) {
        if (w[k] == 0.0) continue;
        const double r = std::pow(std::max(F.times[k], 0.0), 1.0 / (2.0 * m));
        if (r > rlim) {
            too_large.push_back("t=" + std::to_string(F.times[k]) + " (r=" + std::to_string(r) + ")");
            continue;
        }
        if (r < g.spacing()) ++rep.unresolved_slices;
        rep.rmin = std::min(rep.rmin, r);
        rep.rmax = std::max(rep.rmax, r);
        const auto avg = ball_average(g, density(F.slices[k]), r);
        for (std::size_t x = 0; x < g.size(); ++x) acc[x].add(w[k] * avg[x]);
    }
    if (!too_large.empty()) {
        std::vector<std::string> issues{"tent_norm unresolved: ball radius exceeds box_length/4 at the scales"};
        issues.insert(issues.end(), too_large.begin(), too_large.end());
        throw NumericalError(ValidationError(issues).what());
    }
    if (rep.rmin == kInfinity) rep.rmin = 0.0;
    std::vector<double> A(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) A[x] = std::sqrt(std::max(0.0, acc[x].value()));
    rep.window = opt.interior_window ? "interior" : "box";
    rep.value = lp_norm_of(A, g, p, opt.interior_window ? interior_mask(g) : std::vector<char>{});
    return rep;
}

// (sum_k dt_k ||F(t_k)||_2^2)^{1/2} with the same left-endpoint weights.
inline double space_time_l2(const SpaceTimeField& F) {
    const auto w = F.left_weights();
    Accumulator acc;
    for (std::size_t k = 0; k < F.size(); ++k) {
        if (w[k] == 0.0) continue;
        const double n = lp_norm(F.slices[k], 2);
        acc.add(w[k] * n * n);
    }
    return std::sqrt(acc.value());
}

// Kenig-Pipher function: max over dyadic delta of the L^2 average over
// [delta/2, delta) x B(x, delta^{1/2m}); L^p over the interior window.
inline NormReport nontangential_norm(const SpaceTimeField& u, double p, int m) {
    u.validate();
    if (!(p > 0.0)) throw ValidationError("nontangential_norm requires p > 0");
    const Grid& g = u.grid();
    auto rep = make_report("nontan", g, p, m);
    rep.window = "interior";
    const auto w = u.left_weights();
    double tmin = kInfinity, tmax = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (w[k] > 0.0 && u.times[k] > 0.0) {
            tmin = std::min(tmin, u.times[k]);
            tmax = std::max(tmax, u.times[k]);
        }
    if (tmin == kInfinity) throw NumericalError("nontangential_norm unresolved: no positive-time slices");
    std::vector<double> N2(g.size(), 0.0);
    rep.rmin = kInfinity;
    int used = 0;
    for (int j = static_cast<int>(std::floor(std::log2(tmin))); std::ldexp(1.0, j - 1) <= tmax; ++j) {
        const double delta = std::ldexp(1.0, j);
        const double r = std::pow(delta, 1.0 / (2.0 * m));
        if (r > 0.25 * g.box_length() * (1.0 + 1e-12)) break;
        std::vector<Accumulator> acc(g.size());
        double wsum = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (w[k] == 0.0 || u.times[k] < 0.5 * delta || u.times[k] >= delta) continue;
            wsum += w[k];
            if (r < g.spacing()) ++rep.unresolved_slices;
            const auto avg = ball_average(g, density(u.slices[k]), r);
            for (std::size_t x = 0; x < g.size(); ++x) acc[x].add(w[k] * avg[x]);
        }
        if (wsum == 0.0) continue;
        ++used;
        rep.rmin = std::min(rep.rmin, r);
        rep.rmax = std::max(rep.rmax, r);
        for (std::size_t x = 0; x < g.size(); ++x) N2[x] = std::max(N2[x], acc[x].value() / wsum);
    }
    if (used == 0) throw NumericalError("nontangential_norm unresolved: no dyadic scale fits the box");
    std::vector<double> Nv(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) Nv[x] = std::sqrt(N2[x]);
    rep.value = lp_norm_of(Nv, g, p, interior_mask(g));
    return rep;
}

// sup over the dyadic family of (omega_n / 2m) (1/|B|) int_0^{r^{2m}} int_B |F|^2,
// with |B| the discrete ball volume (count * h^n). F is the stacked nabla^m u.
inline NormReport carleson_from_gradient(const SpaceTimeField& F, int m) {
    const auto t = tent_norm(F, kInfinity, m);
    auto rep = t;
    rep.name = "carleson";
    rep.value = unit_ball_volume(F.grid().dim()) / (2.0 * m) * t.value * t.value;
    return rep;
}

inline NormReport carleson_norm(const SpaceTimeField& u, int m, Scheme scheme = Scheme::spectral) {
    return carleson_from_gradient(gradient_trajectory(u, m, scheme), m);
}

// Polynomial sharp function over the dyadic family: at x in the interior
// window, the largest projection residual RMS among family balls containing x.
// Zero outside the window.
// Family radii whose balls hold enough points to fit polynomials of degree < m.
inline std::vector<double> resolved_radii(const Grid& g, int m) {
    const DyadicBallFamily fam(g);
    const auto nb = multi_indices_upto(g.dim(), m - 1).size();
    std::vector<double> out;
    for (double r : fam.radii)
        if (ball_offsets(g, r).size() >= 4 * nb) out.push_back(r);
    if (out.empty()) throw ValidationError("grid too coarse for polynomial projections of degree " + std::to_string(m - 1));
    return out;
}

inline Field sharp_m(const Field& f, int m) {
    if (m < 1) throw ValidationError("sharp_m requires m >= 1");
    const Grid& g = f.grid();
    const DyadicBallFamily fam(g);
    const auto mask = interior_mask(g);
    std::vector<double> best(g.size(), 0.0);
    for (double r : resolved_radii(g, m)) {
        const BallStencil st(g, r, m - 1);
        for (auto c : fam.centers) {
            const double res = st.residual_rms(f, c);
            for (const auto& o : st.offsets()) {
                const auto x = shifted_index(g, c, o);
                if (mask[x]) best[x] = std::max(best[x], res);
            }
        }
    }
    Field out(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) out(0, i) = best[i];
    return out;
}

inline NormReport bmo_m_norm(const Field& f, int m) {
    auto rep = make_report("bmom", f.grid(), kInfinity, m);
    const auto radii = resolved_radii(f.grid(), m);
    rep.window = "interior";
    rep.rmin = radii.front();
    rep.rmax = radii.back();
    rep.value = lp_norm(sharp_m(f, m), kInfinity);
    return rep;
}

inline NormReport lp_m_norm(const Field& f, int m, double p) {
    auto rep = bmo_m_norm(f, m);
    rep.name = "lpm";
    rep.p = p;
    rep.value = lp_norm(sharp_m(f, m), p);
    return rep;
}

inline NormReport bmo_norm(const Field& f) {
    auto rep = bmo_m_norm(f, 1);
    rep.name = "bmo";
    return rep;
}

struct PolynomialFilter {
    PolyProjection polynomial;
    Field residual;
};

// Fit P of degree <= m-1 on B(0, L/4) and return f - P on the whole grid.
inline PolynomialFilter filter_polynomial(const Field& f, int m) {
    const Grid& g = f.grid();
    Ball ball{std::vector<double>(static_cast<std::size_t>(g.dim()), 0.0), 0.25 * g.box_length()};
    PolynomialFilter out{poly_project(f, ball, m), f};
    double x[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a < g.dim(); ++a) x[a] = g.coordinate(i, a);
        const auto y = out.polynomial.scaled(g, std::span<const double>(x, static_cast<std::size_t>(g.dim())));
        for (int c = 0; c < f.components(); ++c) out.residual(c, i) -= out.polynomial.eval_scaled(c, y);
    }
    return out;
}

// Windowed log|x|: log|x| times a smooth cutoff that is 1 for |x| <= 3L/8 and
// 0 near the box edge. The singular grid point carries the cell average of log|x|.
inline Field windowed_log(const Grid& g, double scale = 1.0) {
    Field f(g, 1);
    const double L = g.box_length();
    const double h = g.spacing();
    const int sub = 16;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += g.coordinate(i, a) * g.coordinate(i, a);
        const double r = std::sqrt(r2);
        double v;
        if (r == 0.0) {
            // Midpoint sub-sampling of the cell average of log|x / scale| around the origin.
            Accumulator acc;
            int cnt = 0;
            for (int a = 0; a < sub; ++a) {
                const double xa = (-0.5 + (a + 0.5) / sub) * h;
                if (g.dim() == 1) {
                    acc.add(std::log(std::abs(xa) / scale));
                    ++cnt;
                } else {
                    for (int b = 0; b < sub; ++b) {
                        const double xb = (-0.5 + (b + 0.5) / sub) * h;
                        acc.add(std::log(std::hypot(xa, xb) / scale));
                        ++cnt;
                    }
                }
            }
            v = acc.value() / cnt;
        } else {
            v = std::log(r / scale);
        }
        f(0, i) = v * smooth_cutoff(r, 0.375 * L, 0.5 * L);
    }
    return f;
}

} // namespace tentlab
