#include "soliton_forge/zero_curvature.hpp"

#include <limits>

namespace soliton_forge {

void Connection::validate() const
{
    grid.validate();
    if (static_cast<int>(coeffs.size()) != grid.ndim()) throw Error("connection needs one coefficient per axis");
    const Eigen::Index m = coeffs[0].values.empty() ? 0 : coeffs[0].values[0].rows();
    for (const auto& c : coeffs) {
        if (!c.grid.same_as(grid)) throw Error("connection coefficients live on mismatched grids");
        if (c.values.size() != grid.size()) throw Error("connection coefficient has wrong node count");
        for (const auto& v : c.values)
            if (v.rows() != m || v.cols() != m) throw Error("connection coefficients must be square of one size");
    }
}

Connection make_connection(const GridSpec& g, int axes, const std::function<Mat(int, std::size_t)>& coeff,
                           std::optional<cd> lambda)
{
    Connection c;
    c.grid = g;
    c.lambda = lambda;
    for (int a = 0; a < axes; ++a) {
        std::vector<Mat> vals(g.size());
        parallel_for(g.size(), [&](std::size_t k) { vals[k] = coeff(a, k); });
        c.coeffs.emplace_back(g, std::move(vals));
    }
    return c;
}

double CurvatureResidual::max() const
{
    double m = 0.0;
    for (double v : max_norms) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, v);
    }
    return m;
}

CurvatureResidual curvature_residual(const Connection& theta, int accuracy)
{
    theta.validate();
    const int n = theta.grid.ndim();
    std::vector<std::vector<MatrixField>> d(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d[i].push_back(i == j ? MatrixField() : partial_derivative(theta.coeffs[j], i, accuracy));

    CurvatureResidual r;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& Bi = theta.coeffs[i].values;
            const auto& Bj = theta.coeffs[j].values;
            std::vector<Mat> out(theta.grid.size());
            std::vector<double> norms(out.size());
            parallel_for(out.size(), [&](std::size_t k) {
                out[k] = d[i][j].values[k] - d[j][i].values[k] + Bi[k] * Bj[k] - Bj[k] * Bi[k];
                norms[k] = out[k].allFinite() ? op_norm(out[k]) : std::numeric_limits<double>::infinity();
            });
            double m = 0.0;
            for (double v : norms) m = std::max(m, v);
            r.pairs.emplace_back(i, j);
            r.fields.emplace_back(theta.grid, std::move(out));
            r.max_norms.push_back(m);
        }
    }
    return r;
}

std::vector<int> axis_order(int ndim, PathPolicy path)
{
    std::vector<int> order(ndim);
    for (int a = 0; a < ndim; ++a) order[a] = (path == PathPolicy::AxisOrdered) ? a : ndim - 1 - a;
    return order;
}

Frame integrate_frame(const Connection& theta, const Mat& initial, const std::vector<int>& basepoint,
                      const FrameOptions& opts)
{
    theta.validate();
    const int m = theta.dim();
    if (initial.rows() != m || initial.cols() != m) throw Error("initial value has wrong size");
    const cd det0 = initial.determinant();
    if (!(std::abs(det0) > 1e-12 * std::pow(std::max(1.0, initial.norm()), m)))
        throw Error("initial frame value is singular");

    Frame f;
    f.grid = theta.grid;
    f.basepoint = basepoint;
    f.initial = initial;
    auto vals = sweep_rk4<Mat>(theta.grid, basepoint, initial, opts, [&](const Line& line, double p, const Mat& y) {
        return Mat(y * line.at(theta.coeffs[line.axis], p));
    });
    f.values = MatrixField(theta.grid, std::move(vals));

    double mindet = std::numeric_limits<double>::infinity();
    for (const auto& e : f.values.values) mindet = std::min(mindet, std::abs(e.determinant()));
    f.min_abs_det = mindet;
    if (!(mindet > 1e-10)) f.warnings.push_back("frame determinant close to zero");

    if (opts.flatness_tolerance > 0 && theta.grid.ndim() > 1) {
        f.curvature = curvature_residual(theta).max();
        if (!(f.curvature <= opts.flatness_tolerance)) f.warnings.push_back("connection is not flat within tolerance");
    }
    return f;
}

double frame_distance(const Frame& a, const Frame& b)
{
    if (!a.grid.same_as(b.grid)) throw Error("frames live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, op_norm(Mat(a.values[k] - b.values[k])));
    return m;
}

MatrixField lambda_derivative_frame(const Frame& plus, const Frame& minus, const Frame& center, double dlambda)
{
    if (dlambda == 0.0) throw Error("dlambda must be nonzero");
    if (!plus.grid.same_as(minus.grid) || !plus.grid.same_as(center.grid)) throw Error("frames live on different grids");
    std::vector<Mat> out(center.values.size());
    parallel_for(out.size(), [&](std::size_t k) {
        out[k] = (plus.values[k] - minus.values[k]) / (2.0 * dlambda) * center.values[k].inverse();
    });
    return MatrixField(center.grid, std::move(out));
}

MatrixField lambda_derivative_frame(const ConnectionFamily& family, cd lambda0, double dlambda,
                                    const std::vector<int>& basepoint, const FrameOptions& opts)
{
    if (dlambda == 0.0) throw Error("dlambda must be nonzero");
    FrameOptions o = opts;
    o.flatness_tolerance = 0.0;
    const Connection c0 = family(lambda0);
    const Mat I = Mat::Identity(c0.dim(), c0.dim());
    Frame center = integrate_frame(c0, I, basepoint, o);
    Frame plus = integrate_frame(family(lambda0 + dlambda), I, basepoint, o);
    Frame minus = integrate_frame(family(lambda0 - dlambda), I, basepoint, o);
    return lambda_derivative_frame(plus, minus, center, dlambda);
}

ScalarField unwrap_phase(const ScalarField& raw, double period, const std::vector<int>& basepoint)
{
    const GridSpec& g = raw.grid;
    std::vector<double> phase(g.size());
    phase[g.flat(basepoint)] = std::remainder(raw[g.flat(basepoint)], period);
    auto follow = [&](std::size_t from, std::size_t to) {
        phase[to] = raw[to] + period * std::round((phase[from] - raw[to]) / period);
    };
    const std::vector<int> order = axis_order(g.ndim(), PathPolicy::AxisOrdered);
    for (std::size_t stage = 0; stage < order.size(); ++stage) {
        const int axis = order[stage];
        std::vector<int> swept(order.begin(), order.begin() + static_cast<long>(stage));
        std::size_t nseeds = 1;
        for (int a : swept) nseeds *= static_cast<std::size_t>(g.dims[a]);
        const std::size_t st = g.stride(axis);
        for (std::size_t sidx = 0; sidx < nseeds; ++sidx) {
            std::vector<int> idx = basepoint;
            std::size_t r = sidx;
            for (auto it = swept.rbegin(); it != swept.rend(); ++it) {
                idx[*it] = static_cast<int>(r % static_cast<std::size_t>(g.dims[*it]));
                r /= static_cast<std::size_t>(g.dims[*it]);
            }
            const std::size_t seed = g.flat(idx);
            const int b = basepoint[axis];
            for (int i = b; i + 1 < g.dims[axis]; ++i) follow(seed + (i - b) * st, seed + (i + 1 - b) * st);
            for (int i = b; i > 0; --i) follow(seed - (b - i) * st, seed - (b - i + 1) * st);
        }
    }
    return ScalarField(g, std::move(phase));
}

std::vector<int> origin_node(const GridSpec& g)
{
    return g.nearest(std::vector<double>(g.dims.size(), 0.0));
}

} // namespace soliton_forge
