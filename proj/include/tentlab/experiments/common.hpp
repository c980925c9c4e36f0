#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/config.hpp"
#include "tentlab/experiments/result.hpp"
#include "tentlab/functionals.hpp"
#include "tentlab/propagator.hpp"

namespace tentlab {

// Initial data families. `scale` dilates the profile: f_scale(x) = f(x / scale).
inline Field make_data(const Grid& g, int N, const std::string& kind, double scale = 1.0, std::uint64_t seed = 0) {
    const double L = g.box_length();
    const auto r2_of = [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return r2 / (scale * scale);
    };
    const auto comp = [](int c) { return 1.0 / (c + 1.0); };
    if (kind == "gaussian")
        return Field::from_function(g, N, [&](int c, auto x) { return cplx{comp(c) * std::exp(-r2_of(x))}; });
    if (kind == "dgaussian")
        return Field::from_function(g, N, [&](int c, auto x) { return cplx{comp(c) * x[0] / scale * std::exp(-r2_of(x))}; });
    if (kind == "step")
        return Field::from_function(g, N, [&](int c, auto x) { return cplx{r2_of(x) <= 1.0 ? comp(c) : 0.0}; });
    if (kind == "band") {
        // Random trigonometric polynomial (wavelengths >= 2 scale) under a Gaussian window of width 2 scale.
        CounterRng rng(seed, 17);
        const int K = 4;
        std::vector<double> a(2 * K + 2), b(2 * K + 2);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        return Field::from_function(g, N, [&](int c, auto x) {
            double v = 0.0;
            for (int k = 0; k <= K; ++k) {
                double ph = std::numbers::pi * k * x[0] / (K * scale);
                if (g.dim() == 2) ph += std::numbers::pi * k * x[1] / (K * scale);
                v += a[static_cast<std::size_t>(k)] * std::cos(ph) + b[static_cast<std::size_t>(k)] * std::sin(ph);
            }
            return cplx{comp(c) * v * std::exp(-0.25 * r2_of(x))};
        });
    }
    if (kind == "log") {
        Field f = windowed_log(g, scale);
        if (N == 1) return f;
        std::vector<Field> parts;
        for (int c = 0; c < N; ++c) parts.push_back(comp(c) * f);
        return stack(parts);
    }
    if (kind == "constant") return Field::constant(g, N, 1.0);
    if (kind == "zero") return Field(g, N);
    (void)L;
    throw ValidationError("unknown data kind '" + kind + "'");
}

inline double sq_norm(const Field& f) {
    const double n = lp_norm(f, 2);
    return n * n;
}

// sum_alpha ||d^alpha f||_2^2 with the operator's derivative convention.
inline double grad_sq_norm(const Field& f, int m) {
    const auto mod = gradient_modulus_sq(grad_m(f, m));
    Accumulator acc;
    for (double v : mod) acc.add(v);
    return acc.value() * f.grid().cell_volume();
}

// Least-squares line y = a + b x; returns {a, b}.
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || x.size() != y.size()) throw NumericalError("fit_line needs at least two points");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = x[i];
        Y(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::Vector2d c = X.colPivHouseholderQr().solve(Y);
    return {c(0), c(1)};
}

inline double relative_change(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

inline ExperimentResult start_result(const std::string& name, const ExperimentConfig& cfg) {
    ExperimentResult r;
    r.name = name;
    r.provenance = provenance_for(cfg);
    return r;
}

inline std::string sweep_label(const std::string& var, double v) { return var + "=" + format_label(v); }

} // namespace tentlab
