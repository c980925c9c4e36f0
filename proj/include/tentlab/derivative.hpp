#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tentlab/fft.hpp"
#include "tentlab/grid.hpp"

namespace tentlab {

enum class Scheme { spectral, fd2, fd4 };

inline Scheme parse_scheme(const std::string& s) {
    if (s == "spectral") return Scheme::spectral;
    if (s == "fd2") return Scheme::fd2;
    if (s == "fd4") return Scheme::fd4;
    throw ValidationError("unknown derivative scheme '" + s + "' (spectral, fd2, fd4)");
}

inline std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::spectral: return "spectral";
    case Scheme::fd2: return "fd2";
    case Scheme::fd4: return "fd4";
    }
    return "?";
}

// Fourier multipliers of the one-dimensional derivative D^a for every FFT bin.
// Finite-difference schemes are realized as the exact multipliers of their
// centered stencils, so the FFT evaluation agrees with the stencil to rounding.
// Higher orders compose the first- and second-order stencils.
class DerivativeTable {
public:
    DerivativeTable(const Grid& grid, Scheme scheme, int max_order)
        : grid_(grid), scheme_(scheme), max_order_(max_order) {
        const int P = grid.points_per_axis();
        const double h = grid.spacing();
        table_.assign(static_cast<std::size_t>((max_order + 1) * P), cplx{1.0, 0.0});
        for (int b = 0; b < P; ++b) {
            const double xi = grid.wavenumber(b);
            cplx s1;
            double s2;
            switch (scheme) {
            case Scheme::spectral:
                s1 = {0.0, xi};
                s2 = -xi * xi;
                break;
            case Scheme::fd2:
                s1 = {0.0, std::sin(xi * h) / h};
                s2 = -4.0 * std::pow(std::sin(0.5 * xi * h), 2) / (h * h);
                break;
            case Scheme::fd4:
                s1 = {0.0, (8.0 * std::sin(xi * h) - std::sin(2.0 * xi * h)) / (6.0 * h)};
                s2 = -(30.0 - 32.0 * std::cos(xi * h) + 2.0 * std::cos(2.0 * xi * h)) / (12.0 * h * h);
                break;
            }
            for (int a = 1; a <= max_order; ++a) {
                cplx v;
                if (scheme == Scheme::spectral)
                    v = std::pow(cplx{0.0, xi}, a);
                else if (a % 2 == 0)
                    v = std::pow(s2, a / 2);
                else
                    v = s1 * std::pow(s2, (a - 1) / 2);
                table_[static_cast<std::size_t>(a * P + b)] = v;
            }
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    Scheme scheme() const noexcept { return scheme_; }
    int max_order() const noexcept { return max_order_; }

    cplx axis(int order, int bin) const noexcept {
        return table_[static_cast<std::size_t>(order * grid_.points_per_axis() + bin)];
    }

    // Multiplier of D^alpha at the frequency with flat FFT index `freq`.
    cplx multiplier(const MultiIndex& alpha, std::size_t freq) const {
        if (alpha.order() > max_order_) throw ValidationError("derivative order exceeds table size");
        cplx v = axis(alpha[0], grid_.axis_index(freq, 0));
        if (grid_.dim() == 2) v *= axis(alpha[1], grid_.axis_index(freq, 1));
        return v;
    }

    // |xi|^2 at frequency `freq` in the continuum (spectral) sense.
    double xi_sq(std::size_t freq) const noexcept {
        double s = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const double xi = grid_.wavenumber(grid_.axis_index(freq, a));
            s += xi * xi;
        }
        return s;
    }

private:
    Grid grid_;
    Scheme scheme_;
    int max_order_;
    std::vector<cplx> table_;
};

inline std::vector<cplx> fft_forward(const Grid& g, std::span<const cplx> in) {
    std::vector<cplx> out(in.size());
    fft_plan(g.dim(), g.points_per_axis()).forward(in, out);
    return out;
}

inline std::vector<cplx> fft_inverse(const Grid& g, std::span<const cplx> in) {
    std::vector<cplx> out(in.size());
    fft_plan(g.dim(), g.points_per_axis()).inverse(in, out);
    return out;
}

// Fourier coefficients of every component, laid out like the field itself.
inline std::vector<cplx> to_spectrum(const Field& f) {
    std::vector<cplx> out(f.values().size());
    const auto& plan = fft_plan(f.grid().dim(), f.grid().points_per_axis());
    for (int c = 0; c < f.components(); ++c)
        plan.forward(f.component(c), std::span<cplx>(out).subspan(static_cast<std::size_t>(c) * f.points(), f.points()));
    return out;
}

inline Field from_spectrum(const Grid& g, int components, std::span<const cplx> spec) {
    Field f(g, components);
    const auto& plan = fft_plan(g.dim(), g.points_per_axis());
    for (int c = 0; c < components; ++c)
        plan.inverse(spec.subspan(static_cast<std::size_t>(c) * g.size(), g.size()), f.component(c));
    return f;
}

inline void check_finite(const Field& f, const char* where) {
    if (!f.all_finite()) throw NumericalError(std::string("non-finite values produced by ") + where);
}

// D^alpha applied componentwise.
inline Field derivative(const Field& f, const MultiIndex& alpha, Scheme scheme = Scheme::spectral) {
    if (alpha.dim() != f.grid().dim()) throw ValidationError("multi-index dimension does not match the grid");
    if (alpha.order() == 0) return f;
    DerivativeTable table(f.grid(), scheme, alpha.order());
    auto spec = to_spectrum(f);
    const std::size_t np = f.points();
    for (int c = 0; c < f.components(); ++c)
        for (std::size_t k = 0; k < np; ++k) spec[static_cast<std::size_t>(c) * np + k] *= table.multiplier(alpha, k);
    Field out = from_spectrum(f.grid(), f.components(), spec);
    check_finite(out, "derivative");
    return out;
}

// All D^alpha f with |alpha| = m, in the project-wide multi-index order.
inline std::vector<Field> grad_m(const Field& f, int m, Scheme scheme = Scheme::spectral) {
    if (m < 0) throw ValidationError("grad_m requires m >= 0");
    const auto alphas = multi_indices(f.grid().dim(), m);
    DerivativeTable table(f.grid(), scheme, m);
    const auto spec = to_spectrum(f);
    const std::size_t np = f.points();
    std::vector<Field> out;
    out.reserve(alphas.size());
    std::vector<cplx> work(spec.size());
    for (const auto& a : alphas) {
        for (int c = 0; c < f.components(); ++c)
            for (std::size_t k = 0; k < np; ++k) {
                const std::size_t i = static_cast<std::size_t>(c) * np + k;
                work[i] = spec[i] * table.multiplier(a, k);
            }
        out.push_back(from_spectrum(f.grid(), f.components(), work));
    }
    return out;
}

// sum_alpha (D^alpha)^* g_alpha, the discrete adjoint of grad_m.
inline Field grad_m_adjoint(const std::vector<Field>& g, int m, Scheme scheme = Scheme::spectral) {
    if (g.empty()) throw ValidationError("grad_m_adjoint needs at least one field");
    const Grid& grid = g.front().grid();
    const auto alphas = multi_indices(grid.dim(), m);
    if (alphas.size() != g.size()) throw ValidationError("grad_m_adjoint: wrong number of multi-index fields");
    DerivativeTable table(grid, scheme, m);
    const int N = g.front().components();
    const std::size_t np = grid.size();
    std::vector<cplx> acc(np * static_cast<std::size_t>(N), cplx{});
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        const auto spec = to_spectrum(g[a]);
        for (int c = 0; c < N; ++c)
            for (std::size_t k = 0; k < np; ++k) {
                const std::size_t i = static_cast<std::size_t>(c) * np + k;
                acc[i] += std::conj(table.multiplier(alphas[a], k)) * spec[i];
            }
    }
    return from_spectrum(grid, N, acc);
}

// Euclidean norm over multi-indices of the pointwise gradient: |nabla^k f|(x)^2.
inline std::vector<double> gradient_modulus_sq(const std::vector<Field>& grads) {
    std::vector<double> out(grads.front().points(), 0.0);
    for (const auto& g : grads)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += g.modulus_sq(i);
    return out;
}

} // namespace tentlab
