#pragma once

#include <vector>

#include "tentlab/coeffs.hpp"
#include "tentlab/derivative.hpp"

namespace tentlab {

// L_h u = sum_{alpha,beta} (D^alpha)^* a_{alpha beta} D^beta u for site
// matrices supplied by the caller. With adjoint = true the conjugate
// transposes of the site matrices are used, which yields the exact adjoint
// of L_h in the h^n-weighted inner product.
class EllipticOperator {
public:
    EllipticOperator(const Grid& grid, int m, int N, Scheme scheme = Scheme::spectral)
        : grid_(grid), m_(m), N_(N), alphas_(multi_indices(grid.dim(), m)), table_(grid, scheme, m) {
        const std::size_t np = grid.size();
        mult_.resize(alphas_.size() * np);
        for (std::size_t a = 0; a < alphas_.size(); ++a)
            for (std::size_t k = 0; k < np; ++k) mult_[a * np + k] = table_.multiplier(alphas_[a], k);
    }

    const Grid& grid() const noexcept { return grid_; }
    int m() const noexcept { return m_; }
    int N() const noexcept { return N_; }
    int M() const noexcept { return static_cast<int>(alphas_.size()); }
    int d() const noexcept { return N_ * M(); }
    const DerivativeTable& table() const noexcept { return table_; }
    const std::vector<MultiIndex>& alphas() const noexcept { return alphas_; }

    // a holds either one d x d matrix (constant in space) or one per grid point.
    void apply(const std::vector<cplx>& a, std::span<const cplx> u, std::span<cplx> out, bool adjoint = false) const {
        const std::size_t np = grid_.size();
        const std::size_t ms = static_cast<std::size_t>(d()) * static_cast<std::size_t>(d());
        const std::size_t sites = a.size() / ms;
        const auto& plan = fft_plan(grid_.dim(), grid_.points_per_axis());
        const int Mi = M();
        const int dd = d();
        std::vector<cplx> uhat(static_cast<std::size_t>(N_) * np);
        for (int j = 0; j < N_; ++j)
            plan.forward(u.subspan(static_cast<std::size_t>(j) * np, np),
                         std::span<cplx>(uhat).subspan(static_cast<std::size_t>(j) * np, np));
        if (sites == 1) {
            // Constant coefficients: apply the contracted symbol in frequency space.
            std::vector<cplx> ohat(uhat.size(), cplx{});
            for (int al = 0; al < Mi; ++al)
                for (int be = 0; be < Mi; ++be)
                    for (int i = 0; i < N_; ++i)
                        for (int j = 0; j < N_; ++j) {
                            const cplx c = entry(a, 0, ms, dd, al * N_ + i, be * N_ + j, adjoint);
                            if (c == cplx{}) continue;
                            const cplx* sa = &mult_[static_cast<std::size_t>(al) * np];
                            const cplx* sb = &mult_[static_cast<std::size_t>(be) * np];
                            const cplx* uj = &uhat[static_cast<std::size_t>(j) * np];
                            cplx* oi = &ohat[static_cast<std::size_t>(i) * np];
                            for (std::size_t k = 0; k < np; ++k) oi[k] += std::conj(sa[k]) * c * sb[k] * uj[k];
                        }
            for (int i = 0; i < N_; ++i)
                plan.inverse(std::span<const cplx>(ohat).subspan(static_cast<std::size_t>(i) * np, np),
                             out.subspan(static_cast<std::size_t>(i) * np, np));
            return;
        }
        // D^beta u_j in physical space, indexed (beta, j) -> beta * N + j.
        std::vector<cplx> g(static_cast<std::size_t>(dd) * np);
        std::vector<cplx> work(np);
        for (int be = 0; be < Mi; ++be)
            for (int j = 0; j < N_; ++j) {
                const cplx* sb = &mult_[static_cast<std::size_t>(be) * np];
                const cplx* uj = &uhat[static_cast<std::size_t>(j) * np];
                for (std::size_t k = 0; k < np; ++k) work[k] = sb[k] * uj[k];
                plan.inverse(work, std::span<cplx>(g).subspan(static_cast<std::size_t>(be * N_ + j) * np, np));
            }
        std::vector<cplx> flux(static_cast<std::size_t>(dd) * np, cplx{});
        for (std::size_t x = 0; x < np; ++x)
            for (int r = 0; r < dd; ++r) {
                cplx acc{};
                for (int c = 0; c < dd; ++c)
                    acc += entry(a, x, ms, dd, r, c, adjoint) * g[static_cast<std::size_t>(c) * np + x];
                flux[static_cast<std::size_t>(r) * np + x] = acc;
            }
        std::vector<cplx> ohat(static_cast<std::size_t>(N_) * np, cplx{});
        for (int al = 0; al < Mi; ++al)
            for (int i = 0; i < N_; ++i) {
                plan.forward(std::span<const cplx>(flux).subspan(static_cast<std::size_t>(al * N_ + i) * np, np), work);
                const cplx* sa = &mult_[static_cast<std::size_t>(al) * np];
                cplx* oi = &ohat[static_cast<std::size_t>(i) * np];
                for (std::size_t k = 0; k < np; ++k) oi[k] += std::conj(sa[k]) * work[k];
            }
        for (int i = 0; i < N_; ++i)
            plan.inverse(std::span<const cplx>(ohat).subspan(static_cast<std::size_t>(i) * np, np),
                         out.subspan(static_cast<std::size_t>(i) * np, np));
    }

    Field apply(const std::vector<cplx>& a, const Field& u, bool adjoint = false) const {
        Field out(grid_, N_);
        apply(a, u.values(), out.values(), adjoint);
        return out;
    }

    // Re <A grad^m u, grad^m u> summed with weight h^n.
    double energy_form(const std::vector<cplx>& a, const Field& u) const {
        const Field Lu = apply(a, u);
        return inner(Lu, u).real();
    }

private:
    static cplx entry(const std::vector<cplx>& a, std::size_t site, std::size_t ms, int dd, int r, int c,
                      bool adjoint) {
        const std::size_t base = (ms == a.size() ? 0 : site * ms);
        if (adjoint) return std::conj(a[base + static_cast<std::size_t>(c * dd + r)]);
        return a[base + static_cast<std::size_t>(r * dd + c)];
    }

    Grid grid_;
    int m_;
    int N_;
    std::vector<MultiIndex> alphas_;
    DerivativeTable table_;
    std::vector<cplx> mult_;
};

// L_{A(t)} for a coefficient field.
inline Field apply_operator(const CoefficientField& A, double t, const Field& u, bool adjoint = false,
                            Scheme scheme = Scheme::spectral) {
    const EllipticOperator op(A.grid, A.m, A.N, scheme);
    return op.apply(A.at(t), u, adjoint);
}

} // namespace tentlab
