#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "tentlab/coeffs.hpp"
#include "tentlab/derivative.hpp"

namespace tentlab {

inline constexpr double kKernelResolution = 4.0; // t^{1/2m} >= 4h

// e^{-tL} for autonomous constant-in-space coefficients as a Fourier multiplier.
class Semigroup {
public:
    explicit Semigroup(const CoefficientField& A) : A_(A), table_(A.grid, Scheme::spectral, A.m) {
        if (!A.flags.autonomous || !A.flags.constant_in_space)
            throw ValidationError("semigroup needs autonomous constant-in-space coefficients");
        if (!(A.lambda > 0.0)) throw ValidationError("semigroup needs elliptic coefficients (lambda > 0)");
        const auto a = A.at(0.0);
        const auto alphas = multi_indices(A.grid.dim(), A.m);
        const std::size_t np = A.grid.size();
        const int N = A.N;
        if (N == 1) {
            scalar_.resize(np);
            for (std::size_t k = 0; k < np; ++k)
                scalar_[k] = contracted_symbol(a.data(), 1, alphas, table_, k)(0, 0);
        } else {
            symbols_.resize(np);
            vecs_.resize(np);
            inv_vecs_.resize(np);
            vals_.resize(np);
            diagonalizable_.assign(np, 0);
            for (std::size_t k = 0; k < np; ++k) {
                symbols_[k] = contracted_symbol(a.data(), N, alphas, table_, k);
                Eigen::ComplexEigenSolver<MatrixXc> es(symbols_[k]);
                if (es.info() != Eigen::Success) continue;
                const MatrixXc V = es.eigenvectors();
                Eigen::JacobiSVD<MatrixXc> svd(V);
                const auto sv = svd.singularValues();
                const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : kInfinity;
                if (cond > 1e8) continue; // nearly defective: fall back to Pade
                vecs_[k] = V;
                inv_vecs_[k] = V.inverse();
                vals_[k] = es.eigenvalues();
                diagonalizable_[k] = 1;
            }
        }
    }

    const CoefficientField& coefficients() const noexcept { return A_; }
    const Grid& grid() const noexcept { return A_.grid; }

    // Multiply a spectrum (component-major) by e^{-t sigma} (or its adjoint).
    void apply_spectrum(double t, std::vector<cplx>& spec, bool adjoint = false) const {
        const std::size_t np = grid().size();
        const int N = A_.N;
        if (N == 1) {
            for (std::size_t k = 0; k < np; ++k) {
                const cplx s = adjoint ? std::conj(scalar_[k]) : scalar_[k];
                spec[k] *= std::exp(-t * s);
            }
            return;
        }
        Eigen::VectorXcd v(N);
        for (std::size_t k = 0; k < np; ++k) {
            for (int c = 0; c < N; ++c) v(c) = spec[static_cast<std::size_t>(c) * np + k];
            const MatrixXc E = exp_matrix(t, k);
            const Eigen::VectorXcd w = adjoint ? (E.adjoint() * v).eval() : (E * v).eval();
            for (int c = 0; c < N; ++c) spec[static_cast<std::size_t>(c) * np + k] = w(c);
        }
    }

    Field apply(double t, const Field& f, bool adjoint = false) const {
        if (!(t >= 0.0)) throw ValidationError("semigroup time must be non-negative");
        if (f.grid() != grid() || f.components() != A_.N) throw ValidationError("field does not match semigroup");
        if (t == 0.0) return f;
        auto spec = to_spectrum(f);
        apply_spectrum(t, spec, adjoint);
        Field out = from_spectrum(grid(), A_.N, spec);
        check_finite(out, "semigroup apply");
        return out;
    }

    // e^{-tL} applied to the discrete delta 1/h^n at the origin in component 0.
    Field kernel(double t) const {
        if (!(t > 0.0)) throw ValidationError("kernel time must be positive");
        if (std::pow(t, 1.0 / (2.0 * A_.m)) < kKernelResolution * grid().spacing())
            throw NumericalError("kernel unresolved: t^(1/2m) below 4h at t = " + std::to_string(t));
        Field delta(grid(), A_.N);
        delta(0, grid().origin_index()) = 1.0 / grid().cell_volume();
        return apply(t, delta);
    }

    cplx scalar_symbol(std::size_t k) const { return scalar_.at(k); }

private:
    MatrixXc exp_matrix(double t, std::size_t k) const {
        if (diagonalizable_[k]) {
            Eigen::VectorXcd e(vals_[k].size());
            for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::exp(-t * vals_[k](i));
            return vecs_[k] * e.asDiagonal() * inv_vecs_[k];
        }
        const MatrixXc X = (-t) * symbols_[k];
        return X.exp();
    }

    CoefficientField A_;
    DerivativeTable table_;
    std::vector<cplx> scalar_;
    std::vector<MatrixXc> symbols_, vecs_, inv_vecs_;
    std::vector<Eigen::VectorXcd> vals_;
    std::vector<char> diagonalizable_;
};

struct KernelFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double residual = 0.0;           // RMS of the log-fit residual
    std::vector<double> prefactors;   // max |k(t)| * t^{n/2m} per t
    std::size_t points = 0;
};

// Least-squares fit of log|k(t,x)| + (n/2m) log t = log c1 - c2 z,
// z = (|x|^{2m}/t)^{1/(2m-1)}, over the interior window. For m >= 2 the
// kernel oscillates, so only local maxima of |k| along the first axis
// (the decay envelope) enter the fit.
inline KernelFit kernel_bound_fit(const Semigroup& S, const std::vector<double>& ts) {
    const Grid& g = S.grid();
    const int m = S.coefficients().m;
    const int n = g.dim();
    KernelFit fit;
    std::vector<double> zs, ys;
    for (double t : ts) {
        const Field k = S.kernel(t);
        double kmax = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) kmax = std::max(kmax, std::abs(k(0, i)));
        fit.prefactors.push_back(kmax * std::pow(t, n / (2.0 * m)));
        // Samples along the first axis through the origin, |x| within the window.
        const int P = g.points_per_axis();
        std::vector<double> r, v;
        for (int i = P / 2; i < P; ++i) {
            const std::size_t flat = n == 1 ? g.flat_index(i) : g.flat_index(i, P / 2);
            const double x = g.coordinate(flat, 0);
            if (x > 0.25 * g.box_length()) break;
            r.push_back(x);
            v.push_back(std::abs(k(0, flat)));
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (v[i] < 1e-12 * kmax) continue;
            if (m >= 2) {
                const bool left = i == 0 || v[i] >= v[i - 1];
                const bool right = i + 1 == r.size() || v[i] >= v[i + 1];
                if (!(left && right)) continue;
            }
            zs.push_back(std::pow(std::pow(r[i], 2.0 * m) / t, 1.0 / (2.0 * m - 1.0)));
            ys.push_back(std::log(v[i]) + n / (2.0 * m) * std::log(t));
        }
    }
    fit.points = zs.size();
    if (zs.size() < 2) throw NumericalError("kernel_bound_fit: too few resolved samples");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(zs.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(zs.size()));
    for (std::size_t i = 0; i < zs.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = -zs[i];
        y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    fit.c1 = std::exp(beta(0));
    fit.c2 = beta(1);
    fit.residual = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(zs.size()));
    return fit;
}

} // namespace tentlab
