#include "soliton_forge/gsge.hpp"

#include <doctest.h>

#include <numbers>

using namespace soliton_forge;
using namespace soliton_forge::gsge;

namespace {

RMat cayley(double a, double b, double c)
{
    RMat S(3, 3);
    S << 0, a, b, -a, 0, c, -b, -c, 0;
    const RMat I = RMat::Identity(3, 3);
    return (I - S).inverse() * (I + S);
}

RMat y0_of(const RMat& X)
{
    const auto n = X.rows();
    RMat y(n, 2 * n);
    y << X, -RMat::Identity(n, n);
    return y;
}

double sup_diff(const RealMatrixField& a, const RealMatrixField& b)
{
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k]).cwiseAbs().maxCoeff());
    return m;
}

const GridSpec& cube()
{
    static const GridSpec g = GridSpec::box({-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}, 0.01);
    return g;
}

// A smooth O(3) field that is not a solution.
RealMatrixField twisted(const GridSpec& g)
{
    std::vector<RMat> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto x = g.point(k);
        v[k] = cayley(0.3 + x[0], 0.5 + x[1] * x[2], 0.2 - x[1]);
    }
    return RealMatrixField(g, std::move(v));
}

double kink(double mu, double s, double t)
{
    return 2 * std::atan(std::exp(mu * s + t / mu));
}

} // namespace

TEST_CASE("spectral parameters")
{
    const double th = 0.7;
    const double l = lambda_from_theta(th);
    CHECK(l == doctest::Approx(1 / std::sin(th) + 1 / std::tan(th)).epsilon(1e-15));
    const RMat D = D_lambda(3, l);
    CHECK(D(0, 0) == doctest::Approx(1 / std::sin(th)).epsilon(1e-13));
    CHECK(D(1, 1) == doctest::Approx(1 / std::tan(th)).epsilon(1e-13));
    CHECK(D(2, 2) == doctest::Approx(1 / std::tan(th)).epsilon(1e-13));
    CHECK(J_matrix(3).diagonal() == Eigen::Vector3d(1, -1, -1));
}

TEST_CASE("vacuum")
{
    const auto g = GridSpec::box({-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}, 0.05);
    const auto v = vacuum(g, 3);
    for (const RMat& f : v.F.values) CHECK(f.norm() == 0.0);
    CHECK(v.residual.max() == 0.0);
    CHECK(v.verified);
    const auto th = gsge_lax(v.A, v.F, cd(0.4, 0.9));
    CHECK(curvature_residual(th).max() <= 1e-12);
    CHECK(onn_defect(th) < 1e-15);
}

TEST_CASE("F from a rotation field")
{
    const auto xg = GridSpec::box({-1, -1}, {1, 1}, 0.01);
    const double mu = 2.0;
    const auto q = sge_on_x_grid(xg, [&](double s, double t) { return kink(mu, s, t); });
    const auto r = f_from_a(from_sge(q).A);
    double e12 = 0, e21 = 0;
    for (std::size_t k = 0; k < xg.size(); ++k) {
        const auto x = xg.point(k);
        const double s = (x[0] + x[1]) / 2, t = (x[0] - x[1]) / 2;
        const double sech = 1 / std::cosh(mu * s + t / mu);
        const double qs = mu * sech, qt = sech / mu;
        e12 = std::max(e12, std::abs(r.F[k](0, 1) + (qs - qt) / 2));
        e21 = std::max(e21, std::abs(r.F[k](1, 0) - (qs + qt) / 2));
    }
    CHECK(e12 <= 1e-3);
    CHECK(e21 <= 1e-3);
    CHECK(r.frame_residual <= 1e-3);
}

TEST_CASE("n=2 embedding of a SGE solution")
{
    const auto xg = GridSpec::box({-1, -1}, {1, 1}, 0.01);
    const auto q = sge_on_x_grid(xg, [](double s, double t) { return kink(1.0, s, t); });
    const auto st = from_sge(q);
    CHECK(st.residual.max() <= 1e-3);
    CHECK(st.verified);
    CHECK(curvature_residual(gsge_lax(st.A, st.F, std::polar(1.0, 0.3))).max() <= 1e-3);
    const auto back = to_sge(st);
    double e = 0;
    for (std::size_t k = 0; k < xg.size(); ++k) e = std::max(e, std::abs(back[k] - q[k]));
    CHECK(e < 1e-12);
}

TEST_CASE("non-solutions are detected")
{
    const auto g = GridSpec::box({-0.2, -0.2, -0.2}, {0.2, 0.2, 0.2}, 0.02);
    const auto s = make_state(twisted(g));
    CHECK(s.residual.max() > 0.1);
    CHECK_FALSE(s.verified);
    CHECK(curvature_residual(gsge_lax(s.A, s.F, std::polar(1.0, 0.3))).max() > 1e-2);
}

TEST_CASE("n=3 transforms from the vacuum")
{
    const auto& g = cube();
    const auto vac = vacuum(g, 3);
    const RMat X0 = cayley(0.3, 0.5, 0.7);
    const double l = std::tan(0.6);
    BacklundOptions o;
    o.substeps = 2;

    const auto lin = linear_backlund(vac, l, y0_of(X0), o);
    CHECK(lin.orthogonality <= 1e-8);
    CHECK(lin.residual.max() <= 1e-3);
    CHECK(lin.diagnostics.at("bt_residual") <= 1e-3);
    CHECK(lin.diagnostics.at("path_defect") <= 1e-6);
    CHECK((lin.A[g.flat(origin_node(g))] - X0).norm() < 1e-12);

    const auto ric = backlund(vac, l, X0, o);
    CHECK(ric.orthogonality <= 1e-8);
    CHECK(sup_diff(ric.A, lin.A) <= 1e-5);

    // Other lambda and initial value: a genuinely different solution.
    const auto other = linear_backlund(vac, lambda_from_theta(1.1), y0_of(X0.transpose()), o);
    CHECK(other.residual.max() <= 1e-3);
    CHECK(sup_diff(other.A, lin.A) > 1e-2);

    const auto top = permutability(vac, lin, other, l, lambda_from_theta(1.1));
    CHECK(top.residual.max() <= 1e-3);
    CHECK(top.orthogonality <= 1e-8);
    CHECK(bt_residual(lin, top.A, lambda_from_theta(1.1)) <= 1e-3);
    CHECK(bt_residual(other, top.A, l) <= 1e-3);
    CHECK_THROWS_AS(permutability(vac, lin, lin, l, l), Error);

    const auto f = immersion(lin);
    CHECK(f.points[g.flat(origin_node(g))].norm() < 1e-14);
    double e = 0;
    for (int i = 0; i < 3; ++i) {
        const auto d = partial_derivative(f.points, i, 4);
        for (std::size_t k = 0; k < g.size(); ++k) e = std::max(e, std::abs(d[k].norm() - std::abs(lin.A[k](0, i))));
    }
    CHECK(e <= 1e-3);
    CHECK(f.diagnostics.at("frame_imag_defect") < 1e-10);
}

TEST_CASE("linear transform of a non-solution is path dependent")
{
    const auto g = GridSpec::box({-0.2, -0.2, -0.2}, {0.2, 0.2, 0.2}, 0.02);
    auto s = make_state(twisted(g));
    BacklundOptions o;
    o.check_seed = false;
    const auto out = linear_backlund(s, 1.5, y0_of(cayley(0.1, 0.2, 0.3)), o);
    CHECK(out.diagnostics.at("path_defect") > 1e-4);
    o.check_seed = true;
    CHECK_THROWS_AS(linear_backlund(s, 1.5, y0_of(cayley(0.1, 0.2, 0.3)), o), Error);
}

TEST_CASE("n=2 reduction")
{
    const auto xg = GridSpec::box({-1, -1}, {1, 1}, 0.01);
    const auto v2 = vacuum(xg, 2);
    BacklundOptions o;
    o.substeps = 4;
    const auto B = backlund(v2, 1.0, rotation(std::numbers::pi / 2), o);
    const auto q1 = sge_on_x_grid(xg, [](double s, double t) { return kink(1.0, s, t); });
    double e = 0;
    for (std::size_t k = 0; k < xg.size(); ++k) e = std::max(e, (B.A[k] - rotation(q1[k])).cwiseAbs().maxCoeff());
    CHECK(e <= 1e-5);

    const auto q2 = sge_on_x_grid(xg, [](double s, double t) { return kink(2.0, s, t); });
    const auto P = permutability(v2, from_sge(q1), from_sge(q2), 1.0, 2.0);
    const auto sq = sge::permutability(sge::make_solution(ScalarField(xg, 0.0)), sge::make_solution(q1),
                                       sge::make_solution(q2), 1.0, 2.0);
    double ep = 0;
    for (std::size_t k = 0; k < xg.size(); ++k) ep = std::max(ep, (P.A[k] - rotation(sq.q[k])).cwiseAbs().maxCoeff());
    CHECK(ep <= 1e-9);

    const auto rep = surfaces::fundamental_forms(immersion(from_sge(q1)));
    double ke = 0;
    for (std::size_t k = 0; k < xg.size(); ++k)
        if (std::abs(std::sin(2 * q1[k])) > 0.1) ke = std::max(ke, std::abs(rep.K[k] + 1));
    CHECK(ke <= 1e-2);
}
