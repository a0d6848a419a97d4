#include "soliton_forge/isothermic.hpp"

#include <cmath>
#include <numbers>

namespace soliton_forge::isothermic {

namespace {

void check_data_grid(const ScalarField& q, const ScalarField& r1, const ScalarField& r2)
{
    q.grid.validate();
    if (q.grid.ndim() != 2) throw Error("isothermic data lives on a 2-D grid");
    if (!q.grid.same_as(r1.grid) || !q.grid.same_as(r2.grid)) throw Error("q, r1, r2 live on different grids");
}

Mat w_block(double q1, double q2, double r1, double r2, int axis)
{
    Mat w = Mat::Zero(3, 3);
    if (axis == 0) {
        w(0, 1) = q2;
        w(0, 2) = r1;
    } else {
        w(0, 1) = -q1;
        w(1, 2) = r2;
    }
    return Mat(w - w.transpose());
}

Mat d_block(int axis)
{
    Mat D = Mat::Zero(3, 2);
    D(axis, axis) = 1.0;
    return D;
}

Mat J2()
{
    Mat J = Mat::Identity(2, 2);
    J(1, 1) = -1.0;
    return J;
}

// [[0, X], [-J X^T, 0]] for a 3 x 2 block X.
Mat p_element(const Mat& X)
{
    Mat m = Mat::Zero(5, 5);
    m.topRightCorner(3, 2) = X;
    m.bottomLeftCorner(2, 3) = -J2() * X.transpose();
    return m;
}

RMat hyperbolic(double u)
{
    RMat h(2, 2);
    h << std::cosh(u), std::sinh(u), std::sinh(u), std::cosh(u);
    return h;
}

ChristoffelPair pair_from(const Field<RMat>& Y, const char* provenance)
{
    std::vector<Vec> f(Y.size()), fd(Y.size());
    for (std::size_t k = 0; k < Y.size(); ++k) {
        f[k] = Y[k].col(0) + Y[k].col(1);
        fd[k] = Y[k].col(0) - Y[k].col(1);
    }
    ChristoffelPair p;
    p.f = surfaces::ImmersionField{PointField(Y.grid, std::move(f)), provenance, {}, {}};
    p.f_dual = surfaces::ImmersionField{PointField(Y.grid, std::move(fd)), provenance, {}, {}};
    return p;
}

void check_verified(const IsothermicData& d, const PairOptions& opts)
{
    if (!opts.check_data) return;
    const double r = d.residual.max();
    if (!(r <= d.tolerance)) throw Error("isothermic data not verified: residual " + std::to_string(r));
}

} // namespace

double IsoResidual::max() const
{
    return std::max({max_abs(gauss), max_abs(codazzi1), max_abs(codazzi2)});
}

IsoResidual iso_residual(const ScalarField& q, const ScalarField& r1, const ScalarField& r2, int accuracy)
{
    check_data_grid(q, r1, r2);
    const ScalarField q1 = partial_derivative(q, 0, accuracy), q2 = partial_derivative(q, 1, accuracy);
    const ScalarField q11 = second_derivative(q, 0, accuracy), q22 = second_derivative(q, 1, accuracy);
    const ScalarField r12 = partial_derivative(r1, 1, accuracy), r21 = partial_derivative(r2, 0, accuracy);
    const std::size_t n = q.size();
    std::vector<double> g(n), c1(n), c2(n);
    for (std::size_t k = 0; k < n; ++k) {
        g[k] = q11[k] + q22[k] + r1[k] * r2[k];
        c1[k] = r12[k] - q2[k] * r2[k];
        c2[k] = r21[k] - q1[k] * r1[k];
    }
    return {ScalarField(q.grid, std::move(g)), ScalarField(q.grid, std::move(c1)), ScalarField(q.grid, std::move(c2))};
}

IsothermicData make_data(ScalarField q, ScalarField r1, ScalarField r2, double tolerance)
{
    check_data_grid(q, r1, r2);
    for (double v : q.values)
        if (!(std::abs(v) <= 20.0)) throw Error("|q| must stay below 20");
    IsothermicData d;
    d.residual = iso_residual(q, r1, r2);
    d.q = std::move(q);
    d.r1 = std::move(r1);
    d.r2 = std::move(r2);
    d.tolerance = tolerance;
    d.verified = d.residual.max() <= tolerance;
    return d;
}

IsothermicData christoffel_dual_data(const IsothermicData& d)
{
    auto neg = [](const ScalarField& f) { return map_field(f, [](double v) { return -v; }); };
    return make_data(neg(d.q), d.r1, neg(d.r2), d.tolerance);
}

IsothermicData plane(const GridSpec& g)
{
    return make_data(ScalarField(g, 0.0), ScalarField(g, 0.0), ScalarField(g, 0.0));
}

IsothermicData cylinder(const GridSpec& g)
{
    return make_data(ScalarField(g, 0.0), ScalarField(g, 1.0), ScalarField(g, 0.0));
}

IsothermicData sphere(const GridSpec& g)
{
    auto q = sample(g, [](const std::vector<double>& x) {
        const double a = std::abs(x[0]);
        return std::max(-20.0, -(a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2));
    });
    auto r = sample(g, [](const std::vector<double>& x) { return 1.0 / std::cosh(x[0]); });
    return make_data(std::move(q), r, r);
}

Connection iso_lax(const IsothermicData& d, cd lambda)
{
    const ScalarField q1 = partial_derivative(d.q, 0, 4), q2 = partial_derivative(d.q, 1, 4);
    const Mat J = J2();
    return make_connection(
        d.grid(), 2,
        [&](int axis, std::size_t k) {
            Mat m = Mat::Zero(5, 5);
            m.topLeftCorner(3, 3) = w_block(q1[k], q2[k], d.r1[k], d.r2[k], axis);
            const Mat D = d_block(axis);
            m.topRightCorner(3, 2) = lambda * D;
            m.bottomLeftCorner(2, 3) = -lambda * J * D.transpose();
            const double dq = axis == 0 ? q1[k] : q2[k];
            m(3, 4) = m(4, 3) = -dq;
            return m;
        },
        lambda);
}

Connection iso_lax_bracket(const IsothermicData& d, cd lambda)
{
    const ScalarField q1 = partial_derivative(d.q, 0, 4), q2 = partial_derivative(d.q, 1, 4);
    return make_connection(
        d.grid(), 2,
        [&](int axis, std::size_t k) {
            Mat eta(3, 2);
            eta << 0.0, q1[k], -q2[k], 0.0, -d.r1[k], d.r2[k];
            const Mat a = p_element(d_block(axis));
            const Mat v = p_element(eta);
            return Mat(a * lambda + a * v - v * a);
        },
        lambda);
}

double iso_reality_defect(const IsothermicData& d, cd lambda)
{
    const Connection t = iso_lax(d, lambda);
    const Connection tc = iso_lax(d, std::conj(lambda));
    const Connection tm = iso_lax(d, -lambda);
    Mat S = Mat::Identity(5, 5);
    S(3, 3) = S(4, 4) = -1.0;
    double m = 0.0;
    for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < d.grid().size(); ++k) {
            m = std::max(m, (tc.coeffs[a][k].conjugate() - t.coeffs[a][k]).cwiseAbs().maxCoeff());
            m = std::max(m, (S * t.coeffs[a][k] * S - tm.coeffs[a][k]).cwiseAbs().maxCoeff());
        }
    return m;
}

ChristoffelPair christoffel_pair_method1(const IsothermicData& d, const PairOptions& opts)
{
    check_verified(d, opts);
    const GridSpec& g = d.grid();
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(g) : opts.basepoint;
    const Connection full = iso_lax(d, 0.0);
    Connection c1;
    c1.grid = g;
    for (int a = 0; a < 2; ++a)
        c1.coeffs.push_back(map_field(full.coeffs[a], [](const Mat& m) { return Mat(m.topLeftCorner(3, 3)); }));
    FrameOptions fo = opts.frame;
    fo.flatness_tolerance = 0.0;
    const Frame g1 = integrate_frame(c1, Mat::Identity(3, 3), base, fo);

    // tau = -dq [[0,1],[1,0]]; g2 is the hyperbolic rotation by -q, so I = e^{2q}(dx1^2 + dx2^2) holds exactly.
    std::vector<Field<RMat>> zeta;
    for (int a = 0; a < 2; ++a) {
        std::vector<RMat> z(g.size());
        const RMat D = d_block(a).real();
        for (std::size_t k = 0; k < g.size(); ++k) {
            z[k] = g1.values[k].real() * D * hyperbolic(d.q[k]);
        }
        zeta.emplace_back(g, std::move(z));
    }
    const Field<RMat> dz = partial_derivative(zeta[1], 0, 2);
    const Field<RMat> dz2 = partial_derivative(zeta[0], 1, 2);
    double closure = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) closure = std::max(closure, (dz[k] - dz2[k]).cwiseAbs().maxCoeff());
    if (!(closure <= opts.closure_tolerance))
        throw Error("d zeta does not vanish: " + std::to_string(closure));

    ChristoffelPair p = pair_from(integrate_form<RMat>(zeta, base, RMat::Zero(3, 2), fo), "christoffel");
    p.diagnostics["d_zeta"] = closure;
    p.diagnostics["frame_imag"] = 0.0;
    for (const auto& e : g1.values.values) p.diagnostics["frame_imag"] = std::max(p.diagnostics["frame_imag"], e.imag().cwiseAbs().maxCoeff());
    return p;
}

ChristoffelPair christoffel_pair_method2(const IsothermicData& d, const PairOptions& opts)
{
    check_verified(d, opts);
    const GridSpec& g = d.grid();
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(g) : opts.basepoint;
    const MatrixField Z = lambda_derivative_frame([&](cd l) { return iso_lax(d, l); }, 0.0, opts.dlambda, base, opts.frame);
    std::vector<RMat> y(g.size());
    const RMat h0 = hyperbolic(d.q[g.flat(base)]);
    double off = 0.0, imag = 0.0;
    const Mat J = J2();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mat& m = Z[k];
        const Mat X = m.topRightCorner(3, 2);
        off = std::max({off, m.topLeftCorner(3, 3).cwiseAbs().maxCoeff(), m.bottomRightCorner(2, 2).cwiseAbs().maxCoeff(),
                        (m.bottomLeftCorner(2, 3) + J * X.transpose()).cwiseAbs().maxCoeff()});
        imag = std::max(imag, m.imag().cwiseAbs().maxCoeff());
        y[k] = X.real() * h0;
    }
    ChristoffelPair p = pair_from(Field<RMat>(g, std::move(y)), "christoffel");
    p.diagnostics["p_block_defect"] = off;
    p.diagnostics["imag"] = imag;
    return p;
}

PairReport verify_pair(const ChristoffelPair& p, const IsothermicData& d, double tolerance)
{
    const GridSpec& g = d.grid();
    const surfaces::SurfaceReport rf = surfaces::fundamental_forms(p.f);
    surfaces::ImmersionField dual = p.f_dual;
    dual.reference_normal = rf.normal;
    const surfaces::SurfaceReport rd = surfaces::fundamental_forms(dual);
    const PointField f1 = partial_derivative(p.f.points, 0, 4), f2 = partial_derivative(p.f.points, 1, 4);
    const PointField d1 = partial_derivative(p.f_dual.points, 0, 4), d2 = partial_derivative(p.f_dual.points, 1, 4);

    PairReport r;
    double sf[2] = {0.0, 0.0}, sd[2] = {0.0, 0.0};
    bool reversing = true;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double eq = std::exp(d.q[k]), em = 1.0 / eq;
        r.first_form_f = std::max({r.first_form_f, std::abs(rf.E[k] - eq * eq), std::abs(rf.F[k]), std::abs(rf.G[k] - eq * eq)});
        r.first_form_dual =
            std::max({r.first_form_dual, std::abs(rd.E[k] - em * em), std::abs(rd.F[k]), std::abs(rd.G[k] - em * em)});
        r.conformality = std::max({r.conformality, std::abs(rf.F[k]) / (0.5 * (rf.E[k] + rf.G[k])),
                                   std::abs(rd.F[k]) / (0.5 * (rd.E[k] + rd.G[k]))});
        if (rf.degenerate[k] || rd.degenerate[k]) continue;
        for (int s = 0; s < 2; ++s) {
            const double sg = s == 0 ? 1.0 : -1.0;
            const double ef = std::max({std::abs(sg * rf.L[k] - eq * d.r1[k]), std::abs(rf.M[k]),
                                        std::abs(sg * rf.N[k] - eq * d.r2[k])});
            const double ed = std::max({std::abs(sg * rd.L[k] - em * d.r1[k]), std::abs(rd.M[k]),
                                        std::abs(sg * rd.N[k] + em * d.r2[k])});
            sf[s] = std::max(sf[s], ef);
            sd[s] = std::max(sd[s], ed);
        }
        const double dot = Eigen::Vector3d(rf.normal[k]).dot(Eigen::Vector3d(rd.normal[k]));
        r.normal_alignment = std::max(r.normal_alignment, 1.0 - std::abs(dot));
        const double a = f1[k].dot(d1[k]), b = f2[k].dot(d2[k]);
        if (!(a * b < 0)) reversing = false;
        const double diff = rf.L[k] - rf.N[k];
        if (std::abs(diff) > 1e-3 * (std::abs(rf.L[k]) + std::abs(rf.N[k]) + 1e-12)) {
            const double th = 0.5 * std::atan2(2.0 * rf.M[k], diff);
            r.principal_alignment =
                std::max(r.principal_alignment, std::min(std::abs(th), std::abs(std::numbers::pi / 2 - std::abs(th))));
        }
    }
    const int s = std::max(sf[0], sd[0]) <= std::max(sf[1], sd[1]) ? 0 : 1;
    r.second_form_f = sf[s];
    r.second_form_dual = sd[s];
    const double best = std::max(sf[s], sd[s]);
    r.orientation_reversing = reversing;
    r.passed = r.first_form_f <= tolerance && r.first_form_dual <= tolerance && best <= tolerance &&
               r.conformality <= tolerance && r.normal_alignment <= tolerance && r.principal_alignment <= 1e-2 &&
               reversing;
    return r;
}

double translation_distance(const PointField& a, const PointField& b)
{
    if (!a.grid.same_as(b.grid)) throw Error("fields live on different grids");
    Vec mean = Vec::Zero(a[0].size());
    for (std::size_t k = 0; k < a.size(); ++k) mean += a[k] - b[k];
    mean /= static_cast<double>(a.size());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k] - mean).norm());
    return m;
}

} // namespace soliton_forge::isothermic
