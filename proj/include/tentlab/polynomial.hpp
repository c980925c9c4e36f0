#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/grid.hpp"

namespace tentlab {

enum class Weight { flat, smooth };

inline Weight parse_weight(const std::string& s) {
    if (s == "flat") return Weight::flat;
    if (s == "smooth") return Weight::smooth;
    throw ValidationError("unknown projection weight '" + s + "' (flat, smooth)");
}

inline constexpr double kMaxGramCondition = 1e10;

// y^alpha for a point y in scaled coordinates.
inline double monomial(const MultiIndex& a, const std::array<double, 2>& y) {
    double v = 1.0;
    for (int k = 0; k < a.dim(); ++k) v *= std::pow(y[static_cast<std::size_t>(k)], a[k]);
    return v;
}

// d^beta/dy^beta of y^alpha.
inline double monomial_derivative(const MultiIndex& a, const MultiIndex& b, const std::array<double, 2>& y) {
    double v = 1.0;
    for (int k = 0; k < a.dim(); ++k) {
        if (b[k] > a[k]) return 0.0;
        for (int j = 0; j < b[k]; ++j) v *= a[k] - j;
        v *= std::pow(y[static_cast<std::size_t>(k)], a[k] - b[k]);
    }
    return v;
}

// Weighted least-squares machinery for polynomials of degree <= `degree` on a
// fixed point set given in scaled coordinates y = (x - x0)/r.
class LocalBasis {
public:
    LocalBasis() = default;

    LocalBasis(int dim, int degree, const std::vector<std::array<double, 2>>& y, Weight weight)
        : basis_(multi_indices_upto(dim, degree)) {
        const auto nb = static_cast<Eigen::Index>(basis_.size());
        const auto np = static_cast<Eigen::Index>(y.size());
        if (np < 4 * nb) throw NumericalError("ball unresolved: too few points for the polynomial projection");
        Y_.resize(np, nb);
        w_.resize(np);
        for (Eigen::Index i = 0; i < np; ++i) {
            const auto& yi = y[static_cast<std::size_t>(i)];
            for (Eigen::Index a = 0; a < nb; ++a) Y_(i, a) = monomial(basis_[static_cast<std::size_t>(a)], yi);
            if (weight == Weight::flat) {
                w_(i) = 1.0;
            } else {
                const double r2 = yi[0] * yi[0] + yi[1] * yi[1];
                w_(i) = r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0;
            }
        }
        const double total = w_.sum();
        if (!(total > 0.0)) throw NumericalError("ball unresolved: weight vanishes on every grid point");
        w_ /= total;
        const Eigen::MatrixXd G = Y_.transpose() * w_.asDiagonal() * Y_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(condition_ <= kMaxGramCondition))
            throw NumericalError("ill-conditioned projection: Gram condition number " + std::to_string(condition_));
        solve_ = G.ldlt().solve(Y_.transpose() * w_.asDiagonal());
    }

    const std::vector<MultiIndex>& basis() const noexcept { return basis_; }
    std::size_t basis_size() const noexcept { return basis_.size(); }
    std::size_t point_count() const noexcept { return static_cast<std::size_t>(Y_.rows()); }
    double condition() const noexcept { return condition_; }
    const Eigen::MatrixXd& design() const noexcept { return Y_; }
    const Eigen::VectorXd& weights() const noexcept { return w_; }

    Eigen::VectorXcd coefficients(const Eigen::VectorXcd& values) const { return solve_.cast<cplx>() * values; }

    Eigen::VectorXcd evaluate(const Eigen::VectorXcd& coeffs) const { return Y_.cast<cplx>() * coeffs; }

private:
    std::vector<MultiIndex> basis_;
    Eigen::MatrixXd Y_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd solve_;
    double condition_ = 1.0;
};

// P(x) = sum_alpha c_alpha ((x - x0)/r)^alpha, one coefficient vector per component.
struct PolyProjection {
    Ball ball;
    int degree = 0;
    Weight weight = Weight::flat;
    std::vector<MultiIndex> basis;
    std::vector<std::vector<cplx>> coeffs;
    double gram_condition = 1.0;
    // sup_B |P| / mean_B |f|: the constant of the sup bound for this projection.
    double sup_ratio = 0.0;

    std::array<double, 2> scaled(const Grid& g, std::span<const double> x) const {
        std::array<double, 2> y{0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a)
            y[static_cast<std::size_t>(a)] =
                g.periodic_delta(x[static_cast<std::size_t>(a)], ball.center[static_cast<std::size_t>(a)]) / ball.radius;
        return y;
    }

    cplx eval_scaled(int comp, const std::array<double, 2>& y) const {
        cplx v{};
        const auto& c = coeffs[static_cast<std::size_t>(comp)];
        for (std::size_t a = 0; a < basis.size(); ++a) v += c[a] * monomial(basis[a], y);
        return v;
    }

    // d^beta/dx^beta P in scaled coordinates.
    cplx derivative_scaled(int comp, const MultiIndex& beta, const std::array<double, 2>& y) const {
        cplx v{};
        const auto& c = coeffs[static_cast<std::size_t>(comp)];
        for (std::size_t a = 0; a < basis.size(); ++a) v += c[a] * monomial_derivative(basis[a], beta, y);
        return v * std::pow(ball.radius, -beta.order());
    }
};

inline std::vector<std::array<double, 2>> scaled_points(const Grid& g, const Ball& ball,
                                                        const std::vector<std::size_t>& pts) {
    std::vector<std::array<double, 2>> y(pts.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int a = 0; a < g.dim(); ++a)
            y[i][static_cast<std::size_t>(a)] =
                g.periodic_delta(g.coordinate(pts[i], a), ball.center[static_cast<std::size_t>(a)]) / ball.radius;
    return y;
}

// Weighted L^2(B) projection of f onto polynomials of degree <= m - 1.
inline PolyProjection poly_project(const Field& f, const Ball& ball, int m, Weight weight = Weight::flat) {
    if (m < 1) throw ValidationError("poly_project requires m >= 1");
    const Grid& g = f.grid();
    const auto pts = ball_points(g, ball);
    const LocalBasis lb(g.dim(), m - 1, scaled_points(g, ball, pts), weight);
    PolyProjection P;
    P.ball = ball;
    P.degree = m - 1;
    P.weight = weight;
    P.basis = lb.basis();
    P.gram_condition = lb.condition();
    Eigen::VectorXcd vals(static_cast<Eigen::Index>(pts.size()));
    double sup_p = 0.0;
    Accumulator mean_abs;
    Eigen::VectorXd p_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pts.size()));
    Eigen::VectorXd f_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pts.size()));
    for (int c = 0; c < f.components(); ++c) {
        for (std::size_t i = 0; i < pts.size(); ++i) vals(static_cast<Eigen::Index>(i)) = f(c, pts[i]);
        const Eigen::VectorXcd coef = lb.coefficients(vals);
        P.coeffs.emplace_back(coef.data(), coef.data() + coef.size());
        const Eigen::VectorXcd pv = lb.evaluate(coef);
        p_sq += pv.cwiseAbs2();
        f_sq += vals.cwiseAbs2();
    }
    for (Eigen::Index i = 0; i < p_sq.size(); ++i) {
        sup_p = std::max(sup_p, std::sqrt(p_sq(i)));
        mean_abs.add(std::sqrt(f_sq(i)));
    }
    const double avg = mean_abs.value() / static_cast<double>(pts.size());
    P.sup_ratio = avg > 0.0 ? sup_p / avg : 0.0;
    return P;
}

// Projection residual for balls centred at grid points with a fixed radius;
// the scaled geometry is shared by every centre, so the least-squares
// operator is factored once.
class BallStencil {
public:
    BallStencil(const Grid& g, double radius, int degree, Weight weight = Weight::flat)
        : grid_(g), radius_(radius), offsets_(ball_offsets(g, radius)) {
        std::vector<std::array<double, 2>> y(offsets_.size());
        for (std::size_t i = 0; i < offsets_.size(); ++i)
            y[i] = {offsets_[i].d[0] * g.spacing() / radius, offsets_[i].d[1] * g.spacing() / radius};
        basis_ = LocalBasis(g.dim(), degree, y, weight);
    }

    double radius() const noexcept { return radius_; }
    const std::vector<Offset>& offsets() const noexcept { return offsets_; }

    // (mean over B of |f - P_B f|^2)^{1/2}.
    double residual_rms(const Field& f, std::size_t center) const {
        const auto np = static_cast<Eigen::Index>(offsets_.size());
        Eigen::VectorXcd vals(np);
        Accumulator acc;
        for (int c = 0; c < f.components(); ++c) {
            for (Eigen::Index i = 0; i < np; ++i)
                vals(i) = f(c, shifted_index(grid_, center, offsets_[static_cast<std::size_t>(i)]));
            const Eigen::VectorXcd res = vals - basis_.evaluate(basis_.coefficients(vals));
            for (Eigen::Index i = 0; i < np; ++i) acc.add(std::norm(res(i)));
        }
        return std::sqrt(acc.value() / static_cast<double>(np));
    }

private:
    Grid grid_;
    double radius_;
    std::vector<Offset> offsets_;
    LocalBasis basis_;
};

} // namespace tentlab
