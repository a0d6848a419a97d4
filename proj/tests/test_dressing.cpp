#include "soliton_forge/dressing.hpp"

#include <doctest.h>

using namespace soliton_forge;
using namespace soliton_forge::dressing;

namespace {

Mat rank1(Eigen::VectorXcd w)
{
    w.normalize();
    return w * w.adjoint();
}

Eigen::VectorXcd vec(std::initializer_list<cd> c)
{
    Eigen::VectorXcd w(static_cast<Eigen::Index>(c.size()));
    Eigen::Index i = 0;
    for (cd x : c) w(i++) = x;
    return w;
}

GridSpec grid_for(int n)
{
    if (n == 2) return GridSpec::box({-1, -1}, {1, 1}, 0.01);
    return GridSpec::box({-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}, 0.025);
}

Eigen::VectorXcd first(int n)
{
    return n == 2 ? vec({cd(1, 0.3), cd(0.5, -1)}) : vec({cd(1, 0.3), cd(0.5, -1), cd(-0.2, 0.7)});
}

Eigen::VectorXcd second(int n)
{
    return n == 2 ? vec({cd(0.2, 1), cd(1, 0.1)}) : vec({cd(0.2, 1), cd(1, 0.1), cd(0.3, 0.3)});
}

} // namespace

TEST_CASE("simple elements")
{
    const Mat pi = rank1(vec({cd(1, 0.3), cd(0.5, -1)}));
    CHECK(projection_defect(pi) < 1e-15);
    const auto g = make_simple(cd(0.4, 0.9), pi);
    const cd l(0.3, -0.2);
    CHECK((eval_simple(g, l) * eval_simple(inverse(g), l) - Mat::Identity(2, 2)).norm() < 1e-14);
    // Unitary on the real line.
    const Mat u = eval_simple(g, cd(1.7));
    CHECK((u.adjoint() * u - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK(unitary_reality_defect(RationalLoop{{g}}, lambda_samples(RationalLoop{{g}})) < 1e-14);

    Mat w(3, 2);
    w << 1, 0, cd(0, 1), 1, 0, 2;
    const Mat p = projection_onto(w);
    CHECK(projection_defect(p) < 1e-14);
    CHECK((p * w - w).norm() < 1e-14);
    CHECK(image_basis(p).cols() == 2);

    CHECK_THROWS_AS(make_simple(cd(1.0), pi), Error);
    CHECK_THROWS_AS(make_simple(cd(0, 1), Mat::Identity(2, 2) * 0.5), Error);
    Mat bad(3, 2);
    bad << 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS(projection_onto(bad), Error);
}

TEST_CASE("vacuum and Lax pair")
{
    const auto g = GridSpec::box({-1, -1}, {1, 1}, 0.05);
    const auto v = vacuum(g, 2);
    CHECK(v.verified);
    CHECK(un_residual(v.v) == 0.0);
    CHECK(curvature_residual(un_lax(v.v, cd(0.4, 0.9))).max() < 1e-12);
    const auto E = vacuum_frame(g);
    const auto Ei = integrated_frame(v);
    CHECK(max_difference(E.eval(cd(0.4, 0.9)), Ei.eval(cd(0.4, 0.9))) <= 1e-6);
}

TEST_CASE("dressing the vacuum and a dressed seed")
{
    for (int n : {2, 3}) {
        CAPTURE(n);
        const auto g = grid_for(n);
        const auto vac = vacuum(g, n);
        const auto E = vacuum_frame(g);
        const auto g1 = make_simple(cd(0.4, 0.9), rank1(first(n)));
        OdeOptions oo;
        oo.substeps = 2;

        const auto alg = dress_algebraic(vac, E, g1);
        CHECK(alg.residue_defect <= 1e-10);
        CHECK(alg.solution.residual <= 1e-3);
        CHECK(structure_defect(alg.solution.v, false) <= 1e-8);
        const auto ode = dress_ode(vac, g1, g1.pi, oo);
        const auto lin = dress_linear(vac, g1, Mat(), oo);
        CHECK(max_difference(ode.pi_tilde, alg.pi_tilde) <= 1e-6);
        CHECK(max_difference(lin.pi_tilde, alg.pi_tilde) <= 1e-6);
        CHECK(ode.projection_drift <= 1e-6);
        CHECK(max_difference(ode.solution.v, alg.solution.v) <= 1e-6);

        const auto g2 = make_simple(cd(-0.3, 0.7), rank1(second(n)));
        const auto two = dress_algebraic(alg.solution, alg.frame, g2);
        CHECK(un_residual(two.solution.v, 4) <= 1e-3);
        CHECK(two.residue_defect <= 1e-10);
        CHECK(max_difference(dress_ode(alg.solution, g2, g2.pi, oo).pi_tilde, two.pi_tilde) <= 1e-6);
        CHECK(max_difference(dress_linear(alg.solution, g2, Mat(), oo).pi_tilde, two.pi_tilde) <= 1e-6);
        CHECK(curvature_residual(un_lax(two.solution.v, cd(2.0)), 4).max() <= 1e-3);

        const auto [t1, t2] = loop_permutability(g1, g2);
        const RationalLoop a{{t2, g1}}, b{{t1, g2}};
        double id = 0;
        for (cd l : lambda_samples(a)) id = std::max(id, (a.eval(l) - b.eval(l)).norm());
        CHECK(id <= 1e-10);
        const auto via1 = dress_algebraic(alg.solution, alg.frame, t2);
        const auto r2 = dress_algebraic(vac, E, g2);
        const auto via2 = dress_algebraic(r2.solution, r2.frame, t1);
        CHECK(max_difference(via1.solution.v, via2.solution.v) <= 1e-6);
    }
}

TEST_CASE("loop permutability rejects coincident poles")
{
    const Mat p = rank1(vec({cd(1, 0.3), cd(0.5, -1)}));
    const auto g1 = make_simple(cd(0.4, 0.9), p);
    CHECK_THROWS_AS(loop_permutability(g1, g1), Error);
    CHECK_THROWS_AS(loop_permutability(g1, make_simple(cd(0.4, -0.9), p)), Error);
}

TEST_CASE("real form")
{
    for (int n : {2, 3}) {
        CAPTURE(n);
        const auto g = grid_for(n);
        const auto vr = vacuum(g, n, true);
        const auto E = vacuum_frame(g);
        Eigen::VectorXd wr(n);
        if (n == 2)
            wr << 1, 0.6;
        else
            wr << 1, 0.6, -0.4;
        const auto gr = make_simple(cd(0, 0.8), rank1(wr.cast<cd>()));
        CHECK(real_form_reality_defect(RationalLoop{{gr}}, lambda_samples(RationalLoop{{gr}})) <= 1e-12);
        const auto rr = dress_algebraic(vr, E, gr);
        CHECK(rr.solution.real_form);
        CHECK(rr.solution.residual <= 1e-3);
        CHECK(structure_defect(rr.solution.v, true) <= 1e-8);

        double u = 0, sy = 0;
        for (const Mat& y : curved_flat(rr.frame).values) {
            u = std::max(u, (y * y.adjoint() - Mat::Identity(n, n)).norm());
            sy = std::max(sy, (y - y.transpose()).norm());
        }
        CHECK(u <= 1e-8);
        CHECK(sy <= 1e-8);

        const auto f = compose_f_element(cd(0.5, 0.7), rank1(first(n)));
        const auto samples = lambda_samples(f);
        CHECK(samples.size() == 20);
        CHECK(unitary_reality_defect(f, samples) <= 1e-10);
        CHECK(real_form_reality_defect(f, samples) <= 1e-10);
        const auto rf = dress_loop(rr.solution, rr.frame, f);
        CHECK(rf.solution.real_form);
        CHECK(structure_defect(rf.solution.v, true) <= 1e-8);
        CHECK(rf.solution.residual <= 1e-3);
    }
}
