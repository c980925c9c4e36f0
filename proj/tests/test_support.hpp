#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "tentlab/grid.hpp"
#include "tentlab/rng.hpp"

namespace test_support {

using tentlab::cplx;

// Real trigonometric polynomial with random coefficients for |k| <= kmax (per axis).
inline tentlab::Field band_limited(const tentlab::Grid& g, std::uint64_t seed, int kmax, int components = 1) {
    tentlab::CounterRng rng(seed);
    const double L = g.box_length();
    const int ky_max = g.dim() == 2 ? kmax : 0;
    std::vector<double> a, b;
    for (int c = 0; c < components; ++c)
        for (int kx = 0; kx <= kmax; ++kx)
            for (int ky = -ky_max; ky <= ky_max; ++ky) {
                a.push_back(rng.normal());
                b.push_back(rng.normal());
            }
    return tentlab::Field::from_function(g, components, [&](int c, auto x) {
        double v = 0.0;
        std::size_t idx = static_cast<std::size_t>(c) * static_cast<std::size_t>((kmax + 1) * (2 * ky_max + 1));
        for (int kx = 0; kx <= kmax; ++kx)
            for (int ky = -ky_max; ky <= ky_max; ++ky, ++idx) {
                double ph = 2 * std::numbers::pi * kx * x[0] / L;
                if (g.dim() == 2) ph += 2 * std::numbers::pi * ky * x[1] / L;
                v += a[idx] * std::cos(ph) + b[idx] * std::sin(ph);
            }
        return cplx{v};
    });
}

inline tentlab::Field random_field(const tentlab::Grid& g, std::uint64_t seed, int components = 1) {
    tentlab::CounterRng rng(seed);
    tentlab::Field f(g, components);
    for (auto& v : f.values()) v = cplx{rng.normal(), rng.normal()};
    return f;
}

inline tentlab::Field gaussian(const tentlab::Grid& g, double width = 1.0, double x0 = 0.0) {
    return tentlab::Field::from_function(g, 1, [&](int, auto x) {
        double r2 = (x[0] - x0) * (x[0] - x0);
        if (g.dim() == 2) r2 += x[1] * x[1];
        return cplx{std::exp(-r2 / (width * width))};
    });
}

// Bitwise equality of the stored values.
inline bool same_values(const tentlab::Field& a, const tentlab::Field& b) {
    const auto x = a.values();
    const auto y = b.values();
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
}

} // namespace test_support
