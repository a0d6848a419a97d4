#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace soliton_forge {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform rectangular grid over R^n, row-major node ordering (last axis fastest).
struct GridSpec {
    std::vector<int> dims;
    std::vector<double> origin;
    std::vector<double> spacing;

    GridSpec() = default;
    GridSpec(std::vector<int> d, std::vector<double> o, std::vector<double> h);

    /// Grid covering [lo_k, hi_k] on each axis with the given spacing.
    static GridSpec box(const std::vector<double>& lo, const std::vector<double>& hi, double h);

    void validate() const;
    int ndim() const { return static_cast<int>(dims.size()); }
    std::size_t size() const;
    std::size_t stride(int axis) const;
    double coord(int axis, int i) const { return origin[axis] + spacing[axis] * i; }
    std::size_t flat(const std::vector<int>& idx) const;
    std::vector<int> unflat(std::size_t k) const;
    std::vector<double> point(std::size_t k) const;
    /// Node closest to the given point (clamped into the grid).
    std::vector<int> nearest(const std::vector<double>& x) const;
    bool same_as(const GridSpec& o) const;
};

template <class T>
struct Field {
    GridSpec grid;
    std::vector<T> values;

    Field() = default;
    Field(GridSpec g, std::vector<T> v) : grid(std::move(g)), values(std::move(v))
    {
        if (values.size() != grid.size()) throw Error("field value count does not match grid");
    }
    Field(const GridSpec& g, const T& fill) : grid(g), values(g.size(), fill) {}

    std::size_t size() const { return values.size(); }
    const T& operator[](std::size_t k) const { return values[k]; }
    T& operator[](std::size_t k) { return values[k]; }
};

using ScalarField = Field<double>;
using MatrixField = Field<Mat>;
using RealMatrixField = Field<RMat>;
using PointField = Field<Vec>;

/// Worker count, capped by SOLITON_FORGE_THREADS when set.
int thread_count();

/// Runs body(i) for i in [0, n) across worker threads. Each index is visited exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
auto map_field(const Field<T>& f, F fn)
{
    using R = std::decay_t<decltype(fn(f.values[0]))>;
    std::vector<R> out(f.size());
    parallel_for(f.size(), [&](std::size_t k) { out[k] = fn(f.values[k]); });
    return Field<R>(f.grid, std::move(out));
}

template <class F>
ScalarField sample(const GridSpec& g, F fn)
{
    std::vector<double> out(g.size());
    parallel_for(g.size(), [&](std::size_t k) { out[k] = fn(g.point(k)); });
    return ScalarField(g, std::move(out));
}

/// Max |value|; infinity if any value is not finite.
inline double max_abs(const ScalarField& f)
{
    double m = 0.0;
    for (double v : f.values) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

/// Largest singular value.
double op_norm(const Mat& m);
double op_norm(const RMat& m);

} // namespace soliton_forge
