#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tentlab/error.hpp"

namespace tentlab {

using cplx = std::complex<double>;

// Neumaier compensated sum. Used for every reduction over grid points so
// that norms are accurate to a few ulps regardless of grid size.
class Accumulator {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

struct MultiIndex {
    std::vector<int> entries;

    int order() const {
        int s = 0;
        for (int e : entries) s += e;
        return s;
    }
    int dim() const { return static_cast<int>(entries.size()); }
    int operator[](int i) const { return entries[static_cast<std::size_t>(i)]; }
    bool operator==(const MultiIndex&) const = default;

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(entries[i]);
        }
        return s + ")";
    }
};

// All multi-indices with |alpha| = order in the project-wide order:
// lexicographically descending, so (m,0) precedes (m-1,1) precedes ... (0,m).
// This order indexes grad_m output, div_m input and coefficient matrices.
inline std::vector<MultiIndex> multi_indices(int dim, int order) {
    std::vector<MultiIndex> out;
    if (dim == 1) {
        out.push_back({{order}});
        return out;
    }
    for (int first = order; first >= 0; --first) {
        for (auto& rest : multi_indices(dim - 1, order - first)) {
            MultiIndex a;
            a.entries.push_back(first);
            a.entries.insert(a.entries.end(), rest.entries.begin(), rest.entries.end());
            out.push_back(std::move(a));
        }
    }
    return out;
}

// Multi-indices with |alpha| <= max_order, grouped by ascending order.
inline std::vector<MultiIndex> multi_indices_upto(int dim, int max_order) {
    std::vector<MultiIndex> out;
    for (int k = 0; k <= max_order; ++k) {
        auto level = multi_indices(dim, k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

class Grid {
public:
    Grid() = default;

    int dim() const noexcept { return n_; }
    int points_per_axis() const noexcept { return points_; }
    double box_length() const noexcept { return length_; }
    double spacing() const noexcept { return length_ / points_; }
    double cell_volume() const noexcept { return std::pow(spacing(), n_); }
    std::size_t size() const noexcept {
        return n_ == 1 ? static_cast<std::size_t>(points_)
                       : static_cast<std::size_t>(points_) * static_cast<std::size_t>(points_);
    }

    // Axis index of a flat (row-major) point index.
    int axis_index(std::size_t flat, int axis) const noexcept {
        if (n_ == 1) return static_cast<int>(flat);
        return axis == 0 ? static_cast<int>(flat / static_cast<std::size_t>(points_))
                         : static_cast<int>(flat % static_cast<std::size_t>(points_));
    }

    std::size_t flat_index(int i0, int i1 = 0) const noexcept {
        const auto w = [this](int i) { return static_cast<std::size_t>(((i % points_) + points_) % points_); };
        return n_ == 1 ? w(i0) : w(i0) * static_cast<std::size_t>(points_) + w(i1);
    }

    // Grid points sit at x_i = (i - P/2) h, so the origin is the point P/2.
    double coordinate(std::size_t flat, int axis) const noexcept {
        return (axis_index(flat, axis) - points_ / 2) * spacing();
    }

    std::size_t origin_index() const noexcept { return flat_index(points_ / 2, points_ / 2); }

    // Angular wavenumber of FFT bin `bin` along one axis; the Nyquist bin maps to -pi/h.
    double wavenumber(int bin) const noexcept {
        const int k = bin < points_ / 2 ? bin : bin - points_;
        return 2.0 * std::numbers::pi * k / length_;
    }

    // Minimum-image displacement a - b on the periodic box.
    double periodic_delta(double a, double b) const noexcept {
        double d = std::remainder(a - b, length_);
        return d;
    }

    // Interior window: Euclidean distance to the box centre at most L/4.
    bool in_interior(std::size_t flat) const noexcept {
        double r2 = 0.0;
        for (int a = 0; a < n_; ++a) r2 += coordinate(flat, a) * coordinate(flat, a);
        return r2 <= 0.0625 * length_ * length_ * (1.0 + 1e-12);
    }

    std::size_t interior_count() const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < size(); ++i) c += in_interior(i) ? 1 : 0;
        return c;
    }

    bool operator==(const Grid&) const = default;

    friend Grid make_grid(int, int, double);

private:
    int n_ = 1;
    int points_ = 8;
    double length_ = 1.0;
};

inline Grid make_grid(int dimension, int points_per_axis, double box_length) {
    if (dimension != 1 && dimension != 2)
        throw ValidationError("grid dimension must be 1 or 2, got " + std::to_string(dimension));
    if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0)
        throw ValidationError("points_per_axis must be a power of two >= 8, got " +
                              std::to_string(points_per_axis));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw ValidationError("box_length must be positive and finite");
    Grid g;
    g.n_ = dimension;
    g.points_ = points_per_axis;
    g.length_ = box_length;
    return g;
}

// N-component complex field sampled on a grid, stored component-major.
class Field {
public:
    Field() = default;
    Field(const Grid& grid, int components)
        : grid_(grid), components_(components),
          values_(grid.size() * static_cast<std::size_t>(components), cplx{}) {
        if (components < 1) throw ValidationError("field needs at least one component");
    }
    Field(const Grid& grid, int components, std::vector<cplx> values)
        : grid_(grid), components_(components), values_(std::move(values)) {
        if (values_.size() != grid.size() * static_cast<std::size_t>(components))
            throw ValidationError("field value count does not match N * P^n");
    }

    // Sample fn(component, coordinates) at every grid point.
    static Field from_function(const Grid& grid, int components,
                               const std::function<cplx(int, std::span<const double>)>& fn) {
        Field f(grid, components);
        double x[2] = {0.0, 0.0};
        for (int c = 0; c < components; ++c) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(i, a);
                f(c, i) = fn(c, std::span<const double>(x, static_cast<std::size_t>(grid.dim())));
            }
        }
        return f;
    }

    static Field constant(const Grid& grid, int components, cplx value) {
        Field f(grid, components);
        std::fill(f.values_.begin(), f.values_.end(), value);
        return f;
    }

    const Grid& grid() const noexcept { return grid_; }
    int components() const noexcept { return components_; }
    std::size_t points() const noexcept { return grid_.size(); }

    std::span<cplx> values() noexcept { return values_; }
    std::span<const cplx> values() const noexcept { return values_; }

    std::span<cplx> component(int c) noexcept {
        return std::span<cplx>(values_).subspan(static_cast<std::size_t>(c) * points(), points());
    }
    std::span<const cplx> component(int c) const noexcept {
        return std::span<const cplx>(values_).subspan(static_cast<std::size_t>(c) * points(), points());
    }

    cplx& operator()(int c, std::size_t i) noexcept { return values_[static_cast<std::size_t>(c) * points() + i]; }
    cplx operator()(int c, std::size_t i) const noexcept {
        return values_[static_cast<std::size_t>(c) * points() + i];
    }

    // Squared pointwise modulus summed over components.
    double modulus_sq(std::size_t i) const noexcept {
        double s = 0.0;
        for (int c = 0; c < components_; ++c) s += std::norm((*this)(c, i));
        return s;
    }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(),
                           [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    }

    bool same_shape(const Field& o) const noexcept { return grid_ == o.grid_ && components_ == o.components_; }

    Field& operator+=(const Field& o) {
        check_shape(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_shape(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(cplx s) noexcept {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(cplx s, Field a) { return a *= s; }

    bool operator==(const Field& o) const = default;

private:
    void check_shape(const Field& o) const {
        if (!same_shape(o)) throw ValidationError("field shape mismatch");
    }

    Grid grid_;
    int components_ = 1;
    std::vector<cplx> values_;
};

// Trajectory {u(t_k)} on a strictly increasing time grid.
struct SpaceTimeField {
    std::vector<double> times;
    std::vector<Field> slices;

    std::size_t size() const noexcept { return times.size(); }
    const Grid& grid() const { return slices.front().grid(); }
    int components() const { return slices.front().components(); }

    void validate() const {
        if (times.empty() || times.size() != slices.size())
            throw ValidationError("trajectory needs matching, non-empty times and slices");
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(times[k] > times[k - 1])) throw ValidationError("trajectory times must be strictly increasing");
            if (!slices[k].same_shape(slices[0])) throw ValidationError("trajectory slices differ in grid or N");
        }
    }

    // Left-endpoint Riemann weights; the last slice closes the interval and gets 0.
    std::vector<double> left_weights() const {
        std::vector<double> w(times.size(), 0.0);
        for (std::size_t k = 0; k + 1 < times.size(); ++k) w[k] = times[k + 1] - times[k];
        return w;
    }
};

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
};

inline void check_ball(const Grid& grid, const Ball& ball) {
    if (static_cast<int>(ball.center.size()) != grid.dim())
        throw ValidationError("ball centre dimension does not match the grid");
    if (!(ball.radius > 0.0) || ball.radius > 0.25 * grid.box_length() * (1.0 + 1e-12))
        throw ValidationError("ball radius must lie in (0, box_length/4]");
}

// Grid points strictly inside the ball, in periodic distance.
inline std::vector<std::size_t> ball_points(const Grid& grid, const Ball& ball) {
    check_ball(grid, ball);
    std::vector<std::size_t> pts;
    const double r2 = ball.radius * ball.radius;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double d = grid.periodic_delta(grid.coordinate(i, a), ball.center[static_cast<std::size_t>(a)]);
            d2 += d * d;
        }
        if (d2 < r2) pts.push_back(i);
    }
    return pts;
}

// Integer offsets of the lattice points in B(0, r): used for balls centred at grid points.
struct Offset {
    int d[2] = {0, 0};
    double dist = 0.0;
};

inline std::vector<Offset> ball_offsets(const Grid& grid, double radius) {
    std::vector<Offset> out;
    const double h = grid.spacing();
    const int reach = static_cast<int>(std::ceil(radius / h));
    const double r2 = radius * radius;
    if (grid.dim() == 1) {
        for (int i = -reach; i <= reach; ++i) {
            const double d2 = (i * h) * (i * h);
            if (d2 < r2) out.push_back({{i, 0}, std::sqrt(d2)});
        }
    } else {
        for (int i = -reach; i <= reach; ++i)
            for (int j = -reach; j <= reach; ++j) {
                const double d2 = (i * h) * (i * h) + (j * h) * (j * h);
                if (d2 < r2) out.push_back({{i, j}, std::sqrt(d2)});
            }
    }
    return out;
}

inline std::size_t shifted_index(const Grid& grid, std::size_t flat, const Offset& off) {
    if (grid.dim() == 1) return grid.flat_index(static_cast<int>(flat) + off.d[0]);
    return grid.flat_index(grid.axis_index(flat, 0) + off.d[0], grid.axis_index(flat, 1) + off.d[1]);
}

// (mean over B of |f|^2)^{1/2}; plain average over grid points inside B.
inline double ball_mean_sq(const Field& f, const Ball& ball) {
    const Grid& g = f.grid();
    check_ball(g, ball);
    if (ball.radius < g.spacing()) throw NumericalError("ball unresolved: radius below grid spacing");
    const auto pts = ball_points(g, ball);
    if (pts.empty()) throw NumericalError("ball unresolved: no grid points inside");
    Accumulator acc;
    for (auto i : pts) acc.add(f.modulus_sq(i));
    return std::sqrt(acc.value() / static_cast<double>(pts.size()));
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Discrete L^p norm with volume weight h^n; p = infinity gives the max modulus.
inline double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw ValidationError("lp_norm requires p >= 1");
    const std::size_t n = f.points();
    if (std::isinf(p)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::sqrt(f.modulus_sq(i)));
        return mx;
    }
    Accumulator acc;
    if (p == 2.0) {
        for (std::size_t i = 0; i < n; ++i) acc.add(f.modulus_sq(i));
        return std::sqrt(acc.value() * f.grid().cell_volume());
    }
    for (std::size_t i = 0; i < n; ++i) acc.add(std::pow(std::sqrt(f.modulus_sq(i)), p));
    return std::pow(acc.value() * f.grid().cell_volume(), 1.0 / p);
}

// L^p norm of a scalar nonnegative density restricted to a point mask (empty mask = whole grid).
inline double lp_norm_of(std::span<const double> values, const Grid& grid, double p,
                         const std::vector<char>& mask = {}) {
    const bool all = mask.empty();
    if (std::isinf(p)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (all || mask[i]) mx = std::max(mx, std::abs(values[i]));
        return mx;
    }
    Accumulator acc;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (all || mask[i]) acc.add(std::pow(std::abs(values[i]), p));
    return std::pow(acc.value() * grid.cell_volume(), 1.0 / p);
}

// <f, g> = sum_x h^n f(x) conj(g(x)), summed over components.
inline cplx inner(const Field& f, const Field& g) {
    if (!f.same_shape(g)) throw ValidationError("inner product of fields with different shapes");
    Accumulator re, im;
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx v = a[i] * std::conj(b[i]);
        re.add(v.real());
        im.add(v.imag());
    }
    return cplx{re.value(), im.value()} * f.grid().cell_volume();
}

inline std::vector<char> interior_mask(const Grid& grid) {
    std::vector<char> m(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) m[i] = grid.in_interior(i) ? 1 : 0;
    return m;
}

// C^infinity periodic cutoff: 1 for |x| <= flat, 0 for |x| >= edge, smooth in between.
inline double smooth_cutoff(double r, double flat, double edge) {
    if (r <= flat) return 1.0;
    if (r >= edge) return 0.0;
    const double s = (r - flat) / (edge - flat);
    const auto bump = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
    const double a = bump(1.0 - s);
    const double b = bump(s);
    return a / (a + b);
}

} // namespace tentlab
