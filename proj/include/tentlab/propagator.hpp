#pragma once

#include <cmath>
#include <concepts>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tentlab/coeffs.hpp"
#include "tentlab/krylov.hpp"
#include "tentlab/operator.hpp"
#include "tentlab/rng.hpp"
#include "tentlab/semigroup.hpp"

namespace tentlab {

struct SolverConfig {
    double dt = 1e-3;
    double theta = 1.0;
    double tol_lin = 1e-10;
    int max_lin_iters = 2000;
    int restart = 40;

    void validate() const {
        std::vector<std::string> issues;
        if (!(dt > 0.0)) issues.push_back("solver dt must be positive");
        if (theta != 1.0 && theta != 0.5) issues.push_back("solver theta must be 1 or 0.5");
        if (!(tol_lin > 0.0 && tol_lin <= 1e-6)) issues.push_back("solver tol_lin must lie in (0, 1e-6]");
        if (max_lin_iters < 1) issues.push_back("solver max_lin_iters must be positive");
        if (restart < 1) issues.push_back("solver restart must be positive");
        if (!issues.empty()) throw ValidationError(issues);
    }
};

struct SolveStats {
    int steps = 0;
    int linear_iterations = 0;
    double worst_residual = 0.0;
};

// Theta-scheme propagator on the time lattice t_k = k * dt:
// (I + theta dt L(t_{k+1})) u_{k+1} = (I - (1 - theta) dt L(t_k)) u_k.
class Propagator {
public:
    Propagator(CoefficientField A, SolverConfig cfg)
        : A_(std::move(A)), cfg_(cfg), op_(A_.grid, A_.m, A_.N) {
        cfg_.validate();
        if (!(A_.lambda > 0.0)) throw ValidationError("propagator needs elliptic coefficients (lambda > 0)");
        if (!A_.flags.pointwise_elliptic && !(A_.flags.constant_in_space && A_.flags.autonomous))
            throw ValidationError("variable coefficients must be pointwise elliptic");
    }

    const CoefficientField& coefficients() const noexcept { return A_; }
    const SolverConfig& config() const noexcept { return cfg_; }
    const Grid& grid() const noexcept { return A_.grid; }
    const EllipticOperator& op() const noexcept { return op_; }
    // Accumulated linear-solver statistics (safe to read while other threads step).
    SolveStats stats() const {
        std::lock_guard lock(*stats_mu_);
        return stats_;
    }

    // Lattice index of a time that must be a multiple of dt.
    long lattice_index(double t) const {
        const double k = t / cfg_.dt;
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(k)))
            throw ValidationError("time " + std::to_string(t) + " is not on the solver lattice (multiple of dt)");
        return static_cast<long>(r);
    }
    double lattice_time(long k) const { return static_cast<double>(k) * cfg_.dt; }

    // One step from t_k to t_{k+1}.
    Field step(const Field& u, long k, bool adjoint = false) const {
        Field out = u;
        step_into(u, k, out, adjoint);
        return out;
    }

    Field step(const Field& u, double t) const { return step(u, lattice_index(t)); }

    SpaceTimeField propagate(double s, double t, const Field& f) const {
        check_input(f, s, t);
        const long k0 = lattice_index(s);
        const long k1 = lattice_index(t);
        SpaceTimeField traj;
        traj.times.push_back(lattice_time(k0));
        traj.slices.push_back(f);
        for (long k = k0; k < k1; ++k) {
            traj.slices.push_back(step(traj.slices.back(), k));
            traj.times.push_back(lattice_time(k + 1));
        }
        return traj;
    }

    Field propagate_final(double s, double t, const Field& f) const {
        check_input(f, s, t);
        const long k0 = lattice_index(s);
        const long k1 = lattice_index(t);
        Field u = f;
        Field next = f;
        for (long k = k0; k < k1; ++k) {
            step_into(u, k, next, false);
            std::swap(u, next);
        }
        return u;
    }

    // Exact discrete adjoint of propagate_final(s, t, .).
    Field adjoint_propagate(double s, double t, const Field& g) const {
        check_input(g, s, t);
        const long k0 = lattice_index(s);
        const long k1 = lattice_index(t);
        Field v = g;
        for (long k = k1 - 1; k >= k0; --k) {
            Field w = v;
            solve_implicit(v, k + 1, w, true);
            if (cfg_.theta != 1.0) {
                const Field Lw = op_.apply(A_.at(lattice_time(k)), w, true);
                for (std::size_t i = 0; i < w.values().size(); ++i)
                    w.values()[i] -= (1.0 - cfg_.theta) * cfg_.dt * Lw.values()[i];
            }
            v = std::move(w);
        }
        return v;
    }

private:
    void check_input(const Field& f, double s, double t) const {
        if (f.grid() != A_.grid || f.components() != A_.N) throw ValidationError("field does not match coefficients");
        if (!(s >= 0.0) || !(t >= s)) throw ValidationError("propagate requires 0 <= s <= t");
    }

    void step_into(const Field& u, long k, Field& out, bool adjoint) const {
        Field rhs = u;
        if (cfg_.theta != 1.0) {
            const Field Lu = op_.apply(A_.at(lattice_time(k)), u, adjoint);
            for (std::size_t i = 0; i < rhs.values().size(); ++i)
                rhs.values()[i] -= (1.0 - cfg_.theta) * cfg_.dt * Lu.values()[i];
        }
        out = u;
        solve_implicit(rhs, k + 1, out, adjoint);
    }

    // Solve (I + theta dt L(t_k)) x = b; x holds the initial guess on entry.
    void solve_implicit(const Field& b, long k, Field& x, bool adjoint) const {
        const double t = lattice_time(k);
        const auto a = A_.at(t);
        const double c = cfg_.theta * cfg_.dt;
        const LinearMap apply = [&](std::span<const cplx> in, std::span<cplx> out) {
            op_.apply(a, in, out, adjoint);
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + c * out[i];
        };
        const auto pre = preconditioner(t, c, adjoint);
        const LinearMap Minv = [&](std::span<const cplx> in, std::span<cplx> out) { pre.apply(in, out); };
        const auto res = gmres(apply, Minv, b.values(), x.values(), cfg_.tol_lin, cfg_.max_lin_iters, cfg_.restart);
        {
            std::lock_guard lock(*stats_mu_);
            stats_.steps += 1;
            stats_.linear_iterations += res.iterations;
            stats_.worst_residual = std::max(stats_.worst_residual, res.relative_residual);
        }
        if (!res.converged)
            throw NumericalError("linear solve did not reach tol_lin: relative residual " +
                                 std::to_string(res.relative_residual) + " after " + std::to_string(res.iterations) +
                                 " iterations at t = " + std::to_string(t));
        check_finite(x, "time step");
    }

    // (I + c sigma_mean(xi))^{-1} as a Fourier multiplier.
    struct Preconditioner {
        const Grid* grid;
        int N;
        std::vector<MatrixXc> inv;
        void apply(std::span<const cplx> in, std::span<cplx> out) const {
            const std::size_t np = grid->size();
            const auto& plan = fft_plan(grid->dim(), grid->points_per_axis());
            std::vector<cplx> spec(in.size());
            for (int c = 0; c < N; ++c)
                plan.forward(in.subspan(static_cast<std::size_t>(c) * np, np),
                             std::span<cplx>(spec).subspan(static_cast<std::size_t>(c) * np, np));
            Eigen::VectorXcd v(N);
            for (std::size_t k = 0; k < np; ++k) {
                for (int c = 0; c < N; ++c) v(c) = spec[static_cast<std::size_t>(c) * np + k];
                const Eigen::VectorXcd w = inv[k] * v;
                for (int c = 0; c < N; ++c) spec[static_cast<std::size_t>(c) * np + k] = w(c);
            }
            for (int c = 0; c < N; ++c)
                plan.inverse(std::span<const cplx>(spec).subspan(static_cast<std::size_t>(c) * np, np),
                             out.subspan(static_cast<std::size_t>(c) * np, np));
        }
    };

    Preconditioner preconditioner(double t, double c, bool adjoint) const {
        const auto mean = A_.mean_matrix(t);
        const auto alphas = multi_indices(A_.grid.dim(), A_.m);
        Preconditioner P{&A_.grid, A_.N, {}};
        P.inv.resize(A_.grid.size());
        for (std::size_t k = 0; k < A_.grid.size(); ++k) {
            MatrixXc s = contracted_symbol(mean.data(), A_.N, alphas, op_.table(), k);
            if (adjoint) s = s.adjoint().eval();
            P.inv[k] = (MatrixXc::Identity(A_.N, A_.N) + c * s).inverse();
        }
        return P;
    }

    CoefficientField A_;
    SolverConfig cfg_;
    EllipticOperator op_;
    std::shared_ptr<std::mutex> stats_mu_ = std::make_shared<std::mutex>();
    mutable SolveStats stats_;
};

// Forward and adjoint evolution over a fixed time interval.
template <class E>
concept Evolution = requires(const E& e, const Field& f) {
    { e.forward(f) } -> std::convertible_to<Field>;
    { e.adjoint(f) } -> std::convertible_to<Field>;
};

struct PropagatorEvolution {
    const Propagator* P;
    double s;
    double t;
    Field forward(const Field& f) const { return P->propagate_final(s, t, f); }
    Field adjoint(const Field& g) const { return P->adjoint_propagate(s, t, g); }
};

struct SemigroupEvolution {
    const Semigroup* S;
    double t;
    Field forward(const Field& f) const { return S->apply(t, f); }
    Field adjoint(const Field& g) const { return S->apply(t, g, true); }
};

// Axis-aligned physical box [lo, hi) (no periodic wrap).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    bool contains(const Grid& g, std::size_t flat) const {
        for (int a = 0; a < g.dim(); ++a) {
            const double x = g.coordinate(flat, a);
            if (x < lo[static_cast<std::size_t>(a)] || x >= hi[static_cast<std::size_t>(a)]) return false;
        }
        return true;
    }

    // Euclidean distance between two boxes.
    static double distance(const Box& a, const Box& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.lo.size(); ++k) {
            const double gap = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
            s += gap * gap;
        }
        return std::sqrt(s);
    }
};

inline void restrict_to(Field& f, const Box& box) {
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!box.contains(g, i))
            for (int c = 0; c < f.components(); ++c) f(c, i) = 0.0;
}

struct OffDiagonalReport {
    double value = 0.0;       // estimate of ||1_E Gamma 1_F|| (L^2 -> L^output_p), a lower bound
    double achieved_tol = 0.0; // last relative change of the estimate
    int iterations = 0;
    bool converged = false;
};

// Power iteration on 1_F Gamma^* 1_E Gamma 1_F with random restarts.
template <Evolution E>
OffDiagonalReport off_diagonal_norm(const E& ev, const Grid& g, int N, const Box& target, const Box& source,
                                    int probes, std::uint64_t seed, int max_iters = 60, double tol = 1e-8,
                                    double output_p = 2.0) {
    if (probes < 1) throw ValidationError("off_diagonal_norm needs at least one probe");
    OffDiagonalReport best;
    for (int p = 0; p < probes; ++p) {
        CounterRng rng(seed, static_cast<std::uint64_t>(p));
        Field x(g, N);
        for (auto& v : x.values()) v = cplx{rng.normal(), rng.normal()};
        restrict_to(x, source);
        double xn = lp_norm(x, 2);
        if (xn == 0.0) throw ValidationError("off_diagonal_norm: source box contains no grid points");
        x *= 1.0 / xn;
        double est = 0.0;
        OffDiagonalReport rep;
        for (int it = 0; it < max_iters; ++it) {
            Field y = ev.forward(x);
            restrict_to(y, target);
            const double val = output_p == 2.0 ? lp_norm(y, 2) : lp_norm(y, output_p);
            rep.iterations = it + 1;
            rep.achieved_tol = est > 0.0 ? std::abs(val - est) / val : 1.0;
            const double prev = est;
            est = std::max(est, val);
            if (val == 0.0) {
                rep.converged = true;
                break;
            }
            Field z = ev.adjoint(y);
            restrict_to(z, source);
            const double zn = lp_norm(z, 2);
            if (zn == 0.0) {
                rep.converged = true;
                break;
            }
            x = (1.0 / zn) * std::move(z);
            if (prev > 0.0 && std::abs(val - prev) <= tol * val) {
                rep.converged = true;
                break;
            }
        }
        rep.value = est;
        if (rep.value > best.value || p == 0) best = rep;
    }
    return best;
}

struct DuhamelResult {
    Field u;
    std::vector<double> contraction_factors;
    std::vector<double> increments; // ||u^{j+1}(t) - u^j(t)||_2
    int iterations = 0;
};

// Picard iteration for u(t) = e^{-tL0} f - int_0^t e^{-(t-s)L0} (L_{A(s)} - L0) u(s) ds,
// with the integral discretized by the midpoint rule on t_k = k dt.
inline DuhamelResult duhamel_picard(const Semigroup& base, const CoefficientField& A, const Field& f, double t,
                                    int picard_iters, double dt) {
    if (picard_iters < 0) throw ValidationError("picard_iters must be non-negative");
    if (!(dt > 0.0) || !(t >= 0.0)) throw ValidationError("duhamel_picard needs dt > 0 and t >= 0");
    const auto K = static_cast<long>(std::llround(t / dt));
    if (std::abs(K * dt - t) > 1e-9 * std::max(1.0, t)) throw ValidationError("t must be a multiple of dt");
    const CoefficientField& A0 = base.coefficients();
    if (A.grid != A0.grid || A.m != A0.m || A.N != A0.N) throw ValidationError("perturbation does not match base");
    const EllipticOperator op(A.grid, A.m, A.N);
    const auto a0 = A0.at(0.0);
    const std::size_t ms = A.matrix_size();

    std::vector<Field> free(static_cast<std::size_t>(K) + 1);
    free[0] = f;
    for (long k = 0; k < K; ++k) free[static_cast<std::size_t>(k) + 1] = base.apply(dt, free[static_cast<std::size_t>(k)]);
    std::vector<Field> u = free;

    // (A(s) - A0) site matrices at the midpoints.
    std::vector<std::vector<cplx>> diff(static_cast<std::size_t>(K));
    for (long k = 0; k < K; ++k) {
        auto a = A.at((static_cast<double>(k) + 0.5) * dt);
        for (std::size_t s = 0; s < a.size() / ms; ++s)
            for (std::size_t e = 0; e < ms; ++e) a[s * ms + e] -= a0[e];
        diff[static_cast<std::size_t>(k)] = std::move(a);
    }

    DuhamelResult out;
    double prev_inc = 0.0;
    int rising = 0;
    for (int j = 0; j < picard_iters; ++j) {
        std::vector<Field> next(u.size());
        next[0] = f;
        Field I(f.grid(), f.components());
        for (long k = 0; k < K; ++k) {
            Field mid = u[static_cast<std::size_t>(k)];
            mid += u[static_cast<std::size_t>(k) + 1];
            mid *= 0.5;
            Field G = op.apply(diff[static_cast<std::size_t>(k)], mid);
            G *= -dt;
            I = base.apply(dt, I);
            I += base.apply(0.5 * dt, G);
            next[static_cast<std::size_t>(k) + 1] = free[static_cast<std::size_t>(k) + 1] + I;
        }
        const double inc = lp_norm(next.back() - u.back(), 2);
        out.increments.push_back(inc);
        if (j > 0) {
            const double factor = prev_inc > 0.0 ? inc / prev_inc : 0.0;
            out.contraction_factors.push_back(factor);
            rising = factor >= 1.0 ? rising + 1 : 0;
            if (rising >= 2) throw NumericalError("Picard divergence: contraction factor >= 1 twice in a row");
        }
        prev_inc = inc;
        u = std::move(next);
        out.iterations = j + 1;
        if (inc <= 1e-14 * std::max(lp_norm(u.back(), 2), 1e-300)) break;
    }
    out.u = u.back();
    return out;
}

} // namespace tentlab
