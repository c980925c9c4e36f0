#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/derivative.hpp"
#include "tentlab/grid.hpp"
#include "tentlab/rng.hpp"

namespace tentlab {

using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

enum class TimeKind { autonomous, piecewise, modulated };

struct CoefficientFlags {
    bool autonomous = true;
    bool pointwise_elliptic = false;
    bool constant_in_space = true;
};

// A(t, x): one complex d x d matrix per site, d = N * M, with row/column
// (alpha, i) stored at alpha_index * N + i. Constant-in-space fields keep a
// single site. Time dependence is either piecewise constant on breakpoints or
// a single harmonic: A(t) = S0 + cos(omega t) S1 + sin(omega t) S2.
class CoefficientField {
public:
    Grid grid;
    int m = 1;
    int N = 1;
    TimeKind kind = TimeKind::autonomous;
    std::vector<double> breakpoints; // piecewise: slice j holds on [b_{j-1}, b_j)
    std::vector<std::vector<cplx>> slices;
    double omega = 2.0 * std::numbers::pi;
    double lambda = 0.0;
    double Lambda = 0.0;
    double Lambda_op = 0.0; // max operator norm over sites and times
    CoefficientFlags flags;
    std::string description;

    int M() const { return static_cast<int>(multi_indices(grid.dim(), m).size()); }
    int d() const { return N * M(); }
    std::size_t sites() const { return flags.constant_in_space ? 1 : grid.size(); }
    std::size_t matrix_size() const { return static_cast<std::size_t>(d()) * static_cast<std::size_t>(d()); }

    // Times at which A may change (empty when autonomous).
    std::vector<double> time_grid() const {
        if (kind == TimeKind::piecewise) return breakpoints;
        return {};
    }

    // Site matrices at time t, written to out (sites * d * d, row-major per site).
    void eval(double t, std::vector<cplx>& out) const {
        const std::size_t total = sites() * matrix_size();
        out.resize(total);
        switch (kind) {
        case TimeKind::autonomous:
            std::copy(slices[0].begin(), slices[0].end(), out.begin());
            break;
        case TimeKind::piecewise: {
            const auto j = static_cast<std::size_t>(
                std::upper_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin());
            std::copy(slices[j].begin(), slices[j].end(), out.begin());
            break;
        }
        case TimeKind::modulated: {
            const double c = std::cos(omega * t);
            const double s = std::sin(omega * t);
            for (std::size_t i = 0; i < total; ++i) out[i] = slices[0][i] + c * slices[1][i] + s * slices[2][i];
            break;
        }
        }
    }

    std::vector<cplx> at(double t) const {
        std::vector<cplx> out;
        eval(t, out);
        return out;
    }

    // Spatial average of A(t), used for preconditioning.
    std::vector<cplx> mean_matrix(double t) const {
        const auto a = at(t);
        const std::size_t ms = matrix_size();
        std::vector<cplx> out(ms, cplx{});
        for (std::size_t e = 0; e < ms; ++e) {
            Accumulator re, im;
            for (std::size_t s = 0; s < sites(); ++s) {
                re.add(a[s * ms + e].real());
                im.add(a[s * ms + e].imag());
            }
            out[e] = cplx{re.value(), im.value()} / static_cast<double>(sites());
        }
        return out;
    }

    // Times at which the ellipticity scan samples A.
    std::vector<double> sample_times() const {
        switch (kind) {
        case TimeKind::autonomous: return {0.0};
        case TimeKind::piecewise: {
            std::vector<double> ts{breakpoints.empty() ? 0.0 : breakpoints.front() - 1.0};
            ts.insert(ts.end(), breakpoints.begin(), breakpoints.end());
            return ts;
        }
        case TimeKind::modulated: {
            std::vector<double> ts;
            const double period = 2.0 * std::numbers::pi / omega;
            for (int k = 0; k < 64; ++k) ts.push_back(period * k / 64.0);
            return ts;
        }
        }
        return {0.0};
    }
};

// Contracted symbol sigma_ij(xi) = sum_{alpha,beta} conj(s_alpha) a^{ij}_{alpha beta} s_beta
// for a single site matrix `a`, with s the derivative multipliers at frequency `freq`.
inline MatrixXc contracted_symbol(const cplx* a, int N, const std::vector<MultiIndex>& alphas,
                                  const DerivativeTable& table, std::size_t freq) {
    const int M = static_cast<int>(alphas.size());
    const int d = N * M;
    std::vector<cplx> s(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) s[static_cast<std::size_t>(k)] = table.multiplier(alphas[static_cast<std::size_t>(k)], freq);
    MatrixXc sigma = MatrixXc::Zero(N, N);
    for (int al = 0; al < M; ++al)
        for (int be = 0; be < M; ++be) {
            const cplx w = std::conj(s[static_cast<std::size_t>(al)]) * s[static_cast<std::size_t>(be)];
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    sigma(i, j) += w * a[static_cast<std::size_t>((al * N + i) * d + be * N + j)];
        }
    return sigma;
}

inline MatrixXc site_matrix(const std::vector<cplx>& a, std::size_t site, int d) {
    MatrixXc A(d, d);
    const std::size_t off = site * static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = a[off + static_cast<std::size_t>(r * d + c)];
    return A;
}

enum class EllipticityMethod { pointwise_eig, fourier_symbol };

struct EllipticityReport {
    double lambda_est = 0.0;
    double Lambda_est = 0.0;
    double Lambda_op = 0.0;
    EllipticityMethod method = EllipticityMethod::pointwise_eig;
    double worst_time = 0.0;
    std::size_t worst_site = 0;
    std::vector<double> worst_xi;
};

inline double min_hermitian_eig(const MatrixXc& A) {
    const MatrixXc H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(H, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

inline EllipticityReport ellipticity_report(const CoefficientField& A,
                                            EllipticityMethod method = EllipticityMethod::pointwise_eig) {
    EllipticityReport rep;
    rep.method = method;
    const int d = A.d();
    rep.lambda_est = kInfinity;
    for (double t : A.sample_times()) {
        const auto a = A.at(t);
        for (std::size_t s = 0; s < A.sites(); ++s) {
            const MatrixXc S = site_matrix(a, s, d);
            rep.Lambda_est = std::max(rep.Lambda_est, S.cwiseAbs().maxCoeff());
            Eigen::JacobiSVD<MatrixXc> svd(S);
            rep.Lambda_op = std::max(rep.Lambda_op, svd.singularValues()(0));
            if (method == EllipticityMethod::pointwise_eig) {
                const double lo = min_hermitian_eig(S);
                if (lo < rep.lambda_est) {
                    rep.lambda_est = lo;
                    rep.worst_time = t;
                    rep.worst_site = s;
                }
            }
        }
    }
    if (method == EllipticityMethod::fourier_symbol) {
        if (!A.flags.constant_in_space || !A.flags.autonomous)
            throw ValidationError("fourier_symbol ellipticity needs autonomous constant-in-space coefficients");
        const auto a = A.at(0.0);
        const auto alphas = multi_indices(A.grid.dim(), A.m);
        const DerivativeTable table(A.grid, Scheme::spectral, A.m);
        for (std::size_t k = 1; k < A.grid.size(); ++k) {
            const MatrixXc sigma = contracted_symbol(a.data(), A.N, alphas, table, k);
            const double lo = min_hermitian_eig(sigma) / std::pow(table.xi_sq(k), A.m);
            if (lo < rep.lambda_est) {
                rep.lambda_est = lo;
                rep.worst_site = k;
            }
        }
        rep.worst_xi.clear();
        for (int ax = 0; ax < A.grid.dim(); ++ax)
            rep.worst_xi.push_back(A.grid.wavenumber(A.grid.axis_index(rep.worst_site, ax)));
    }
    return rep;
}

// Fill lambda, Lambda and the pointwise flag from a scan of the field.
inline void certify(CoefficientField& A) {
    const auto pw = ellipticity_report(A, EllipticityMethod::pointwise_eig);
    A.Lambda = pw.Lambda_est;
    A.Lambda_op = pw.Lambda_op;
    A.flags.pointwise_elliptic = pw.lambda_est > 0.0;
    if (A.flags.constant_in_space && A.flags.autonomous) {
        const auto fs = ellipticity_report(A, EllipticityMethod::fourier_symbol);
        A.lambda = fs.lambda_est;
    } else {
        A.lambda = pw.lambda_est;
    }
}

inline CoefficientField make_constant(const MatrixXc& A0, const Grid& grid, int m, int N) {
    if (m < 1 || N < 1) throw ValidationError("make_constant requires m >= 1 and N >= 1");
    CoefficientField A;
    A.grid = grid;
    A.m = m;
    A.N = N;
    const int d = A.d();
    if (A0.rows() != d || A0.cols() != d)
        throw ValidationError("constant coefficient matrix must be " + std::to_string(d) + "x" + std::to_string(d));
    if (!A0.allFinite()) throw ValidationError("constant coefficient matrix has non-finite entries");
    A.kind = TimeKind::autonomous;
    A.flags = {true, false, true};
    A.slices.assign(1, std::vector<cplx>(A.matrix_size()));
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A.slices[0][static_cast<std::size_t>(r * d + c)] = A0(r, c);
    A.description = "constant";
    certify(A);
    return A;
}

// Diagonal a_{alpha alpha} = m!/alpha! (identity across components), so that
// sum_{alpha beta} a_{alpha beta} xi^{alpha+beta} = |xi|^{2m} by the multinomial theorem.
inline MatrixXc polyharmonic_matrix(int n, int m, int N) {
    const auto alphas = multi_indices(n, m);
    const int d = N * static_cast<int>(alphas.size());
    MatrixXc A0 = MatrixXc::Zero(d, d);
    const auto fact = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        double w = fact(m);
        for (int e : alphas[a].entries) w /= fact(e);
        for (int i = 0; i < N; ++i) {
            const auto k = static_cast<Eigen::Index>(a) * N + i;
            A0(k, k) = w;
        }
    }
    return A0;
}

inline CoefficientField make_polyharmonic(const Grid& grid, int m, int N = 1) {
    auto A = make_constant(polyharmonic_matrix(grid.dim(), m, N), grid, m, N);
    A.description = "polyharmonic";
    return A;
}

struct TimeStructure {
    enum class Kind { autonomous, piecewise_constant, bv } kind = Kind::autonomous;
    int pieces = 1;
    double variation = 0.0;
    double horizon = 1.0; // pieces are equal subintervals of [0, horizon]
};

struct RoughOptions {
    bool complex = true;
    int cells_per_axis = 0; // 0 selects min(P, 32)
};

namespace detail {

inline MatrixXc random_unitary(CounterRng& rng, int d, bool complex) {
    MatrixXc Z(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const double re = rng.normal();
            const double im = complex ? rng.normal() : 0.0;
            Z(r, c) = cplx{re, im};
        }
    Eigen::HouseholderQR<MatrixXc> qr(Z);
    MatrixXc Q = qr.householderQ();
    const MatrixXc R = qr.matrixQR();
    for (int c = 0; c < d; ++c) {
        const cplx rc = R(c, c);
        const double mag = std::abs(rc);
        if (mag > 0.0) Q.col(c) *= rc / mag;
    }
    return Q;
}

inline std::uint64_t cell_stream(std::uint64_t salt, std::uint64_t piece, std::uint64_t cell) {
    return (salt << 48) ^ (piece << 32) ^ cell;
}

// One rough cell matrix: Hermitian part Q diag(mu) Q* with mu in [1, kappa],
// plus i * a * S with S Hermitian, |S_ij| <= 1 and a chosen so every entry
// modulus stays <= kappa.
inline MatrixXc rough_cell(std::uint64_t seed, std::uint64_t piece, std::uint64_t cell, int d, double kappa,
                           bool complex, int extremal) {
    CounterRng rng(seed, cell_stream(1, piece, cell));
    MatrixXc H;
    if (extremal >= 0) {
        H = MatrixXc::Identity(d, d);
        if (d == 1)
            H(0, 0) = extremal == 0 ? 1.0 : kappa;
        else
            H(1, 1) = kappa;
    } else {
        const MatrixXc Q = random_unitary(rng, d, complex);
        Eigen::VectorXd mu(d);
        for (int i = 0; i < d; ++i) mu(i) = rng.uniform(1.0, kappa);
        H = Q * mu.cast<cplx>().asDiagonal() * Q.adjoint();
        H = 0.5 * (H + H.adjoint()).eval();
    }
    if (!complex) return H;
    MatrixXc S(d, d);
    for (int r = 0; r < d; ++r) {
        S(r, r) = rng.uniform(-1.0, 1.0);
        for (int c = r + 1; c < d; ++c) {
            const double re = rng.uniform(-1.0, 1.0);
            const double im = rng.uniform(-1.0, 1.0);
            const double mag = std::hypot(re, im);
            const cplx z = mag > 1.0 ? cplx{re, im} / mag : cplx{re, im};
            S(r, c) = z;
            S(c, r) = std::conj(z);
        }
    }
    const double room = std::max(0.0, kappa - H.cwiseAbs().maxCoeff());
    const double a = rng.uniform() * room;
    return H + cplx{0.0, a} * S;
}

inline int cell_of(const Grid& g, std::size_t flat, int cells) {
    const int P = g.points_per_axis();
    const int c0 = g.axis_index(flat, 0) * cells / P;
    if (g.dim() == 1) return c0;
    return c0 * cells + g.axis_index(flat, 1) * cells / P;
}

// Per-grid-point expansion of one independent rough draw.
inline std::vector<cplx> rough_slice(const Grid& g, int d, double kappa, std::uint64_t seed, std::uint64_t piece,
                                     const RoughOptions& opt) {
    const int cells = opt.cells_per_axis > 0 ? std::min(opt.cells_per_axis, g.points_per_axis())
                                             : std::min(g.points_per_axis(), 32);
    const int total = g.dim() == 1 ? cells : cells * cells;
    const CounterRng pick(seed, cell_stream(2, piece, 0));
    const int e1 = static_cast<int>(pick.bits(0) % static_cast<std::uint64_t>(total));
    const int e2 = (e1 + total / 2) % total;
    std::vector<MatrixXc> cell_mats(static_cast<std::size_t>(total));
    for (int c = 0; c < total; ++c) {
        int extremal = -1;
        if (c == e1) extremal = 0;
        if (d == 1 && c == e2) extremal = 1;
        cell_mats[static_cast<std::size_t>(c)] =
            rough_cell(seed, piece, static_cast<std::uint64_t>(c), d, kappa, opt.complex, extremal);
    }
    const std::size_t ms = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    std::vector<cplx> out(g.size() * ms);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& C = cell_mats[static_cast<std::size_t>(cell_of(g, i, cells))];
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) out[i * ms + static_cast<std::size_t>(r * d + c)] = C(r, c);
    }
    return out;
}

} // namespace detail

// Pointwise-elliptic random coefficients with lambda = 1, Lambda = kappa,
// piecewise constant on a fixed lattice of physical cells.
inline CoefficientField make_rough(std::uint64_t seed, double kappa, const Grid& grid, int m, int N,
                                   const TimeStructure& ts = {}, const RoughOptions& opt = {}) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ValidationError("contrast kappa must be >= 1");
    if (m < 1 || N < 1) throw ValidationError("make_rough requires m >= 1 and N >= 1");
    CoefficientField A;
    A.grid = grid;
    A.m = m;
    A.N = N;
    const int d = A.d();
    if (kappa == 1.0) {
        A = make_constant(MatrixXc::Identity(d, d), grid, m, N);
        A.description = "rough(kappa=1)";
        return A;
    }
    A.flags = {true, true, false};
    A.description = "rough";
    using K = TimeStructure::Kind;
    const bool trivial_bv = ts.kind == K::bv && ts.variation == 0.0;
    if (ts.kind == K::autonomous || trivial_bv || ts.pieces <= 1) {
        A.kind = TimeKind::autonomous;
        A.slices.push_back(detail::rough_slice(grid, d, kappa, seed, 0, opt));
    } else {
        if (!(ts.horizon > 0.0)) throw ValidationError("time structure horizon must be positive");
        if (ts.variation < 0.0) throw ValidationError("total variation must be non-negative");
        A.kind = TimeKind::piecewise;
        A.flags.autonomous = false;
        for (int j = 1; j < ts.pieces; ++j) A.breakpoints.push_back(ts.horizon * j / ts.pieces);
        if (ts.kind == K::piecewise_constant) {
            for (int j = 0; j < ts.pieces; ++j)
                A.slices.push_back(detail::rough_slice(grid, d, kappa, seed, static_cast<std::uint64_t>(j), opt));
        } else {
            // Monotone path between two draws: total sup-norm variation is the
            // endpoint distance times the swept fraction, capped at V.
            const auto first = detail::rough_slice(grid, d, kappa, seed, 0, opt);
            const auto second = detail::rough_slice(grid, d, kappa, seed, 1, opt);
            double dist = 0.0;
            for (std::size_t i = 0; i < first.size(); ++i) dist = std::max(dist, std::abs(second[i] - first[i]));
            const double span = dist > 0.0 ? std::min(1.0, ts.variation / dist) : 0.0;
            for (int j = 0; j < ts.pieces; ++j) {
                const double w = span * j / (ts.pieces - 1);
                std::vector<cplx> s(first.size());
                for (std::size_t i = 0; i < s.size(); ++i) s[i] = (1.0 - w) * first[i] + w * second[i];
                A.slices.push_back(std::move(s));
            }
            A.description = "bv";
        }
    }
    certify(A);
    return A;
}

// Sup-norm total variation in time: sum of max-entry jumps across breakpoints.
inline double total_variation(const CoefficientField& A) {
    if (A.kind != TimeKind::piecewise) return 0.0;
    double tv = 0.0;
    for (std::size_t j = 1; j < A.slices.size(); ++j) {
        double jump = 0.0;
        for (std::size_t i = 0; i < A.slices[j].size(); ++i)
            jump = std::max(jump, std::abs(A.slices[j][i] - A.slices[j - 1][i]));
        tv += jump;
    }
    return tv;
}

// A(t,x) = base(x) + eps * B0(x) cos(omega t - phi(x)) with ||B0(x)||_op = 1 on
// every cell, so ||A - base||_inf <= eps in operator (hence entry) norm.
inline CoefficientField make_perturbation(const CoefficientField& base, double eps, std::uint64_t seed,
                                          const RoughOptions& opt = {}) {
    if (base.kind != TimeKind::autonomous) throw ValidationError("perturbation base must be autonomous");
    if (!(eps >= 0.0)) throw ValidationError("perturbation size must be non-negative");
    if (eps == 0.0) return base;
    if (eps >= base.lambda) throw ValidationError("ellipticity lost: eps >= lambda of the base coefficients");
    const Grid& g = base.grid;
    const int d = base.d();
    const std::size_t ms = base.matrix_size();
    const int cells = opt.cells_per_axis > 0 ? std::min(opt.cells_per_axis, g.points_per_axis())
                                             : std::min(g.points_per_axis(), 32);
    const int total = g.dim() == 1 ? cells : cells * cells;
    std::vector<MatrixXc> c1(static_cast<std::size_t>(total)), c2(static_cast<std::size_t>(total));
    for (int c = 0; c < total; ++c) {
        CounterRng rng(seed, detail::cell_stream(3, 0, static_cast<std::uint64_t>(c)));
        MatrixXc B(d, d);
        for (int r = 0; r < d; ++r)
            for (int k = 0; k < d; ++k) B(r, k) = cplx{rng.normal(), opt.complex ? rng.normal() : 0.0};
        Eigen::JacobiSVD<MatrixXc> svd(B);
        B /= svd.singularValues()(0);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        c1[static_cast<std::size_t>(c)] = eps * std::cos(phi) * B;
        c2[static_cast<std::size_t>(c)] = eps * std::sin(phi) * B;
    }
    CoefficientField A;
    A.grid = g;
    A.m = base.m;
    A.N = base.N;
    A.kind = TimeKind::modulated;
    A.flags = {false, false, false};
    A.description = "perturb(" + base.description + ")";
    A.slices.assign(3, std::vector<cplx>(g.size() * ms));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t bs = base.flags.constant_in_space ? 0 : i;
        const auto cell = static_cast<std::size_t>(detail::cell_of(g, i, cells));
        for (std::size_t e = 0; e < ms; ++e) {
            A.slices[0][i * ms + e] = base.slices[0][bs * ms + e];
            A.slices[1][i * ms + e] = c1[cell](static_cast<Eigen::Index>(e / static_cast<std::size_t>(d)),
                                              static_cast<Eigen::Index>(e % static_cast<std::size_t>(d)));
            A.slices[2][i * ms + e] = c2[cell](static_cast<Eigen::Index>(e / static_cast<std::size_t>(d)),
                                              static_cast<Eigen::Index>(e % static_cast<std::size_t>(d)));
        }
    }
    certify(A);
    if (!A.flags.pointwise_elliptic) {
        // Constant bases certified only through the symbol: keep the Garding bound.
        A.lambda = base.lambda - eps;
    }
    return A;
}

// sup over sampled times and sites of ||A(t,x) - base(x)||_op.
inline double perturbation_size(const CoefficientField& A, const CoefficientField& base) {
    double worst = 0.0;
    const auto b = base.at(0.0);
    const int d = A.d();
    for (double t : A.sample_times()) {
        const auto a = A.at(t);
        for (std::size_t s = 0; s < A.sites(); ++s) {
            const std::size_t bs = base.flags.constant_in_space ? 0 : s;
            const MatrixXc D = site_matrix(a, s, d) - site_matrix(b, bs, d);
            Eigen::JacobiSVD<MatrixXc> svd(D);
            worst = std::max(worst, svd.singularValues()(0));
        }
    }
    return worst;
}

} // namespace tentlab
