#pragma once

#include "soliton_forge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soliton_forge {

// ---------------------------------------------------------------------------
// Finite differences

namespace detail {

inline void check_axis(const GridSpec& g, int axis, int need)
{
    if (axis < 0 || axis >= g.ndim()) throw Error("axis out of range");
    if (g.dims[axis] < need) throw Error("grid too small for the requested stencil");
}

template <class T>
T combine(const std::vector<T>& v, std::size_t base, std::size_t stride, const double* w, int n, int off)
{
    T acc = v[base + stride * static_cast<std::size_t>(off)] * w[0];
    for (int k = 1; k < n; ++k) acc = acc + v[base + stride * static_cast<std::size_t>(off + k)] * w[k];
    return acc;
}

} // namespace detail

/// First derivative along one axis. Central stencils inside, one-sided stencils of the same order near the ends.
template <class T>
Field<T> partial_derivative(const Field<T>& f, int axis, int accuracy = 2)
{
    const GridSpec& g = f.grid;
    if (accuracy != 2 && accuracy != 4) throw Error("accuracy must be 2 or 4");
    detail::check_axis(g, axis, accuracy + 1);
    const int n = g.dims[axis];
    const std::size_t st = g.stride(axis);
    const double h = g.spacing[axis];

    static const double c2[3] = {-0.5, 0.0, 0.5};
    static const double l2[3] = {-1.5, 2.0, -0.5};
    static const double r2[3] = {0.5, -2.0, 1.5};
    static const double c4[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static const double l40[5] = {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12};
    static const double l41[5] = {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12};
    static const double r41[5] = {-1.0 / 12, 6.0 / 12, -18.0 / 12, 10.0 / 12, 3.0 / 12};
    static const double r40[5] = {3.0 / 12, -16.0 / 12, 36.0 / 12, -48.0 / 12, 25.0 / 12};

    std::vector<T> out(f.size());
    parallel_for(f.size(), [&](std::size_t k) {
        const int i = static_cast<int>((k / st) % static_cast<std::size_t>(n));
        const std::size_t base = k - st * static_cast<std::size_t>(i);
        T d;
        if (accuracy == 2) {
            if (i == 0) d = detail::combine(f.values, base, st, l2, 3, 0);
            else if (i == n - 1) d = detail::combine(f.values, base, st, r2, 3, n - 3);
            else d = detail::combine(f.values, base, st, c2, 3, i - 1);
        } else {
            if (i == 0) d = detail::combine(f.values, base, st, l40, 5, 0);
            else if (i == 1) d = detail::combine(f.values, base, st, l41, 5, 0);
            else if (i == n - 2) d = detail::combine(f.values, base, st, r41, 5, n - 5);
            else if (i == n - 1) d = detail::combine(f.values, base, st, r40, 5, n - 5);
            else d = detail::combine(f.values, base, st, c4, 5, i - 2);
        }
        out[k] = d * (1.0 / h);
    });
    return Field<T>(g, std::move(out));
}

/// Second derivative along one axis, same boundary policy as partial_derivative.
template <class T>
Field<T> second_derivative(const Field<T>& f, int axis, int accuracy = 2)
{
    const GridSpec& g = f.grid;
    if (accuracy != 2 && accuracy != 4) throw Error("accuracy must be 2 or 4");
    detail::check_axis(g, axis, accuracy + 2);
    const int n = g.dims[axis];
    const std::size_t st = g.stride(axis);
    const double h = g.spacing[axis];

    static const double c2[3] = {1.0, -2.0, 1.0};
    static const double l2[4] = {2.0, -5.0, 4.0, -1.0};
    static const double r2[4] = {-1.0, 4.0, -5.0, 2.0};
    static const double c4[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    static const double l40[6] = {45.0 / 12, -154.0 / 12, 214.0 / 12, -156.0 / 12, 61.0 / 12, -10.0 / 12};
    static const double l41[6] = {10.0 / 12, -15.0 / 12, -4.0 / 12, 14.0 / 12, -6.0 / 12, 1.0 / 12};
    static const double r41[6] = {1.0 / 12, -6.0 / 12, 14.0 / 12, -4.0 / 12, -15.0 / 12, 10.0 / 12};
    static const double r40[6] = {-10.0 / 12, 61.0 / 12, -156.0 / 12, 214.0 / 12, -154.0 / 12, 45.0 / 12};

    std::vector<T> out(f.size());
    parallel_for(f.size(), [&](std::size_t k) {
        const int i = static_cast<int>((k / st) % static_cast<std::size_t>(n));
        const std::size_t base = k - st * static_cast<std::size_t>(i);
        T d;
        if (accuracy == 2) {
            if (i == 0) d = detail::combine(f.values, base, st, l2, 4, 0);
            else if (i == n - 1) d = detail::combine(f.values, base, st, r2, 4, n - 4);
            else d = detail::combine(f.values, base, st, c2, 3, i - 1);
        } else {
            if (i == 0) d = detail::combine(f.values, base, st, l40, 6, 0);
            else if (i == 1) d = detail::combine(f.values, base, st, l41, 6, 0);
            else if (i == n - 2) d = detail::combine(f.values, base, st, r41, 6, n - 6);
            else if (i == n - 1) d = detail::combine(f.values, base, st, r40, 6, n - 6);
            else d = detail::combine(f.values, base, st, c4, 5, i - 2);
        }
        out[k] = d * (1.0 / (h * h));
    });
    return Field<T>(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Connections and curvature

/// theta = sum_i B_i dx_i, one complex matrix field per axis.
struct Connection {
    GridSpec grid;
    std::vector<MatrixField> coeffs;
    std::optional<cd> lambda;

    int dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].values[0].rows()); }
    void validate() const;
};

/// Builds a connection by evaluating coefficient matrices at every node.
Connection make_connection(const GridSpec& g, int axes,
                           const std::function<Mat(int axis, std::size_t node)>& coeff,
                           std::optional<cd> lambda = std::nullopt);

struct CurvatureResidual {
    std::vector<std::pair<int, int>> pairs;
    std::vector<MatrixField> fields;
    std::vector<double> max_norms;

    double max() const;
};

/// F_ij = d_i B_j - d_j B_i + [B_i, B_j] for every i < j.
CurvatureResidual curvature_residual(const Connection& theta, int accuracy = 2);

// ---------------------------------------------------------------------------
// Line-by-line integration

enum class PathPolicy { AxisOrdered, ReverseOrdered };
enum class Interp { Linear, Cubic };

struct LineIntegration {
    PathPolicy path = PathPolicy::AxisOrdered;
    Interp interp = Interp::Cubic;
    int substeps = 1;
};

/// A grid line along one axis, addressed by its first node and stride.
struct Line {
    int axis = 0;
    std::size_t start = 0;
    std::size_t stride = 1;
    int count = 0;
    double h = 1.0;
    Interp interp = Interp::Cubic;

    std::size_t node(int i) const { return start + stride * static_cast<std::size_t>(i); }

    /// Value of a nodal field at fractional index p along the line.
    template <class T>
    T at(const Field<T>& f, double p) const
    {
        const double pr = std::round(p);
        if (std::abs(p - pr) < 1e-12) return f.values[node(static_cast<int>(pr))];
        if (interp == Interp::Cubic && count >= 4) {
            int j = static_cast<int>(std::floor(p)) - 1;
            j = std::clamp(j, 0, count - 4);
            const double u = p - j;
            const double w0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
            const double w1 = u * (u - 2) * (u - 3) / 2.0;
            const double w2 = -u * (u - 1) * (u - 3) / 2.0;
            const double w3 = u * (u - 1) * (u - 2) / 6.0;
            return f.values[node(j)] * w0 + f.values[node(j + 1)] * w1 + f.values[node(j + 2)] * w2 +
                   f.values[node(j + 3)] * w3;
        }
        int j = std::clamp(static_cast<int>(std::floor(p)), 0, count - 2);
        const double u = p - j;
        return f.values[node(j)] * (1.0 - u) + f.values[node(j + 1)] * u;
    }
};

std::vector<int> axis_order(int ndim, PathPolicy path);

/// Integrates y' = rhs(line, p, y) (derivative with respect to the line coordinate) by classical RK4,
/// first along the line of the first axis through the basepoint, then along lines of each further axis
/// starting from the nodes already filled. Returns one state per node.
/// post(y) is applied to the state after every full step.
template <class State, class Rhs, class Post>
std::vector<State> sweep_rk4(const GridSpec& g, const std::vector<int>& basepoint, const State& init,
                             const LineIntegration& opts, Rhs&& rhs, Post&& post)
{
    g.validate();
    if (static_cast<int>(basepoint.size()) != g.ndim()) throw Error("basepoint has wrong dimension");
    for (int a = 0; a < g.ndim(); ++a)
        if (basepoint[a] < 0 || basepoint[a] >= g.dims[a]) throw Error("basepoint outside grid");
    if (opts.substeps < 1) throw Error("substeps must be positive");

    std::vector<State> out(g.size());
    out[g.flat(basepoint)] = init;
    const std::vector<int> order = axis_order(g.ndim(), opts.path);
    const int m = opts.substeps;

    auto run_line = [&](const Line& line, int i0) {
        for (int dir : {1, -1}) {
            State y = out[line.node(i0)];
            for (int i = i0; (dir > 0 ? i < line.count - 1 : i > 0); i += dir) {
                const double dp = static_cast<double>(dir) / m;
                const double dx = dp * line.h;
                for (int s = 0; s < m; ++s) {
                    const double p = i + s * dp;
                    const State k1 = rhs(line, p, y);
                    const State y2 = y + k1 * (0.5 * dx);
                    const State k2 = rhs(line, p + 0.5 * dp, y2);
                    const State y3 = y + k2 * (0.5 * dx);
                    const State k3 = rhs(line, p + 0.5 * dp, y3);
                    const State y4 = y + k3 * dx;
                    const State k4 = rhs(line, p + dp, y4);
                    y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dx / 6.0);
                    post(y);
                }
                out[line.node(i + dir)] = y;
            }
        }
    };

    for (std::size_t stage = 0; stage < order.size(); ++stage) {
        const int axis = order[stage];
        // Seeds: all combinations of the already-swept axes, other coordinates at the basepoint.
        std::vector<int> swept(order.begin(), order.begin() + static_cast<long>(stage));
        std::size_t nseeds = 1;
        for (int a : swept) nseeds *= static_cast<std::size_t>(g.dims[a]);
        parallel_for(nseeds, [&](std::size_t sidx) {
            std::vector<int> idx = basepoint;
            std::size_t r = sidx;
            for (auto it = swept.rbegin(); it != swept.rend(); ++it) {
                idx[*it] = static_cast<int>(r % static_cast<std::size_t>(g.dims[*it]));
                r /= static_cast<std::size_t>(g.dims[*it]);
            }
            Line line;
            line.axis = axis;
            line.stride = g.stride(axis);
            line.count = g.dims[axis];
            line.h = g.spacing[axis];
            line.interp = opts.interp;
            idx[axis] = 0;
            line.start = g.flat(idx);
            run_line(line, basepoint[axis]);
        });
    }
    return out;
}

template <class State, class Rhs>
std::vector<State> sweep_rk4(const GridSpec& g, const std::vector<int>& basepoint, const State& init,
                             const LineIntegration& opts, Rhs&& rhs)
{
    return sweep_rk4<State>(g, basepoint, init, opts, std::forward<Rhs>(rhs), [](State&) {});
}

/// Integrates the exact form dY = sum_i C_i dx_i with Y(basepoint) = zero.
template <class T>
Field<T> integrate_form(const std::vector<Field<T>>& coeffs, const std::vector<int>& basepoint, const T& zero,
                        const LineIntegration& opts = {})
{
    if (coeffs.empty()) throw Error("no coefficients");
    const GridSpec& g = coeffs[0].grid;
    auto vals = sweep_rk4<T>(g, basepoint, zero, opts,
                             [&](const Line& line, double p, const T&) { return line.at(coeffs[line.axis], p); });
    return Field<T>(g, std::move(vals));
}

// ---------------------------------------------------------------------------
// Frames

struct Frame {
    GridSpec grid;
    MatrixField values;
    std::vector<int> basepoint;
    Mat initial;
    double min_abs_det = 0.0;
    double curvature = 0.0;
    std::vector<std::string> warnings;
};

struct FrameOptions : LineIntegration {
    /// Curvature residual above this is reported as a warning; <= 0 skips the check.
    double flatness_tolerance = 1e-3;
};

/// Solves E^{-1} d_i E = B_i with E(basepoint) = initial.
Frame integrate_frame(const Connection& theta, const Mat& initial, const std::vector<int>& basepoint,
                      const FrameOptions& opts = {});

/// Max over nodes of ||E_a - E_b||.
double frame_distance(const Frame& a, const Frame& b);

using ConnectionFamily = std::function<Connection(cd)>;

/// (E(lambda0+dl) - E(lambda0-dl)) / (2 dl) * E(lambda0)^{-1}, normalized frames E(basepoint) = I.
MatrixField lambda_derivative_frame(const ConnectionFamily& family, cd lambda0, double dlambda,
                                    const std::vector<int>& basepoint, const FrameOptions& opts = {});

MatrixField lambda_derivative_frame(const Frame& plus, const Frame& minus, const Frame& center, double dlambda);

/// Continues a phase field defined modulo `period`: the basepoint value is reduced to
/// (-period/2, period/2] and every other node is shifted by multiples of the period to stay
/// closest to its predecessor, visiting lines in axis order.
ScalarField unwrap_phase(const ScalarField& raw, double period, const std::vector<int>& basepoint);

/// Node of the grid closest to the coordinate origin.
std::vector<int> origin_node(const GridSpec& g);

} // namespace soliton_forge
