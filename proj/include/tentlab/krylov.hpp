#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tentlab/error.hpp"
#include "tentlab/grid.hpp"

namespace tentlab {

using LinearMap = std::function<void(std::span<const cplx>, std::span<cplx>)>;

struct GmresResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

inline double norm2(std::span<const cplx> v) {
    Accumulator acc;
    for (const auto& z : v) acc.add(std::norm(z));
    return std::sqrt(acc.value());
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    Accumulator re, im;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx v = std::conj(a[i]) * b[i];
        re.add(v.real());
        im.add(v.imag());
    }
    return {re.value(), im.value()};
}

// Restarted GMRES with right preconditioning: solves A x = b starting from
// the contents of x. The returned residual is the true relative residual
// ||b - A x|| / ||b||, recomputed at every restart.
inline GmresResult gmres(const LinearMap& A, const LinearMap& Minv, std::span<const cplx> b, std::span<cplx> x,
                         double tol, int max_iters, int restart = 40) {
    const std::size_t n = b.size();
    GmresResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx{});
        res.converged = true;
        return res;
    }
    std::vector<cplx> r(n), w(n), z(n);
    std::vector<std::vector<cplx>> V(static_cast<std::size_t>(restart) + 1, std::vector<cplx>(n));
    std::vector<cplx> H(static_cast<std::size_t>((restart + 1) * restart));
    std::vector<cplx> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart));
    std::vector<cplx> g(static_cast<std::size_t>(restart) + 1);
    const auto h = [&](int i, int j) -> cplx& { return H[static_cast<std::size_t>(i * restart + j)]; };

    while (true) {
        A(x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        const double beta = norm2(r);
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            return res;
        }
        if (res.iterations >= max_iters) return res;
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), cplx{});
        g[0] = beta;
        int k = 0;
        for (; k < restart && res.iterations < max_iters; ++k) {
            ++res.iterations;
            Minv(V[static_cast<std::size_t>(k)], z);
            A(z, w);
            for (int i = 0; i <= k; ++i) {
                const cplx hij = dot(V[static_cast<std::size_t>(i)], w);
                h(i, k) = hij;
                const auto& vi = V[static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < n; ++j) w[j] -= hij * vi[j];
            }
            const double wn = norm2(w);
            h(k + 1, k) = wn;
            if (wn > 0.0)
                for (std::size_t j = 0; j < n; ++j) V[static_cast<std::size_t>(k) + 1][j] = w[j] / wn;
            for (int i = 0; i < k; ++i) {
                const cplx t = std::conj(cs[static_cast<std::size_t>(i)]) * h(i, k) +
                               std::conj(sn[static_cast<std::size_t>(i)]) * h(i + 1, k);
                h(i + 1, k) = -sn[static_cast<std::size_t>(i)] * h(i, k) + cs[static_cast<std::size_t>(i)] * h(i + 1, k);
                h(i, k) = t;
            }
            const cplx a = h(k, k);
            const cplx bb = h(k + 1, k);
            const double den = std::sqrt(std::norm(a) + std::norm(bb));
            if (den == 0.0) {
                cs[static_cast<std::size_t>(k)] = 1.0;
                sn[static_cast<std::size_t>(k)] = 0.0;
            } else {
                cs[static_cast<std::size_t>(k)] = a / den;
                sn[static_cast<std::size_t>(k)] = bb / den;
            }
            h(k, k) = den;
            h(k + 1, k) = 0.0;
            g[static_cast<std::size_t>(k) + 1] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
            g[static_cast<std::size_t>(k)] = std::conj(cs[static_cast<std::size_t>(k)]) * g[static_cast<std::size_t>(k)];
            if (std::abs(g[static_cast<std::size_t>(k) + 1]) / bnorm <= 0.5 * tol || wn == 0.0) {
                ++k;
                break;
            }
        }
        // Back-substitution for the Krylov coefficients, then x += M^{-1} V y.
        std::vector<cplx> y(static_cast<std::size_t>(k));
        for (int i = k - 1; i >= 0; --i) {
            cplx s = g[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s / h(i, i);
        }
        std::fill(w.begin(), w.end(), cplx{});
        for (int j = 0; j < k; ++j) {
            const auto& vj = V[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < n; ++i) w[i] += y[static_cast<std::size_t>(j)] * vj[i];
        }
        Minv(w, z);
        for (std::size_t i = 0; i < n; ++i) x[i] += z[i];
    }
}

} // namespace tentlab
