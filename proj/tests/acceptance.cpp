// Acceptance run: one PASS/FAIL line per criterion with the measured values, tolerances and wall time.

#include "soliton_forge/dressing.hpp"
#include "soliton_forge/gsge.hpp"
#include "soliton_forge/isothermic.hpp"
#include "soliton_forge/sge.hpp"
#include "soliton_forge/surfaces.hpp"
#include "soliton_forge/zero_curvature.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace soliton_forge;
namespace fs = std::filesystem;

namespace {

struct Measure {
    std::string name;
    double value;
    double tol;
    bool at_least = false;  // value >= tol instead of value <= tol
    bool ok() const { return at_least ? value >= tol : value <= tol; }
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;
    std::function<std::vector<Measure>()> run;
};

double sup(const ScalarField& a, const ScalarField& b)
{
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double sup(const RealMatrixField& a, const RealMatrixField& b)
{
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k]).cwiseAbs().maxCoeff());
    return m;
}

double finite_max(const ScalarField& f)
{
    double m = 0;
    for (double v : f.values)
        if (std::isfinite(v)) m = std::max(m, v);
    return m;
}

double kink(double mu, double s, double t)
{
    return 2 * std::atan(std::exp(mu * s + t / mu));
}

RMat cayley(double a, double b, double c)
{
    RMat S(3, 3);
    S << 0, a, b, -a, 0, c, -b, -c, 0;
    const RMat I = RMat::Identity(3, 3);
    return (I - S).inverse() * (I + S);
}

Mat rank1(Eigen::VectorXcd w)
{
    w.normalize();
    return w * w.adjoint();
}

std::vector<Measure> one_soliton()
{
    const auto q = sge::one_soliton(GridSpec::box({-5, -5}, {5, 5}, 0.01), 1.0);
    return {{"residual", max_abs(sge::sge_residual(q.q)), 1e-3}};
}

std::vector<Measure> backlund_vacuum()
{
    const auto g = GridSpec::box({-2, -2}, {2, 2}, 0.01);
    sge::BacklundOptions o;
    o.substeps = 10;
    const auto q = sge::backlund(sge::vacuum(g), 1.0, std::numbers::pi / 2, o);
    const auto ref = sample(g, [](const std::vector<double>& x) { return kink(1.0, x[0], x[1]); });
    return {{"max|q-closed|", sup(q.q, ref), 1e-6}};
}

std::vector<Measure> two_soliton()
{
    const auto g = GridSpec::box({-3, -3}, {3, 3}, 0.01);
    const auto q0 = sge::vacuum(g);
    const auto q1 = sge::one_soliton(g, 1.0), q2 = sge::one_soliton(g, 2.0);
    const auto q12 = sge::permutability(q0, q1, q2, 1.0, 2.0);
    const auto q21 = sge::permutability(q0, q2, q1, 2.0, 1.0);
    return {{"residual", max_abs(sge::sge_residual(q12.q)), 1e-3},
            {"BT(q1,mu2)", sge::bt_residual(q1.q, q12.q, 2.0).max(), 1e-3},
            {"symmetry", sup(q12.q, q21.q), 1e-9}};
}

std::vector<Measure> sym_surface()
{
    const auto g = GridSpec::box({-2, -2}, {2, 2}, 0.01);
    const auto q = sge::one_soliton(g, 1.0);
    surfaces::SymOptions o;
    o.dlambda = 1e-4;
    const auto rep = surfaces::fundamental_forms(surfaces::sym_immersion(q, 0.5, o));
    double ke = 0, ie = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::abs(std::sin(2 * q.q[k])) > 0.1) ke = std::max(ke, std::abs(rep.K[k] + 1));
        ie = std::max({ie, std::abs(rep.E[k] - 1), std::abs(rep.F[k] - std::cos(2 * q.q[k])), std::abs(rep.G[k] - 1)});
    }
    return {{"|K+1|", ke, 1e-2}, {"|I-(1,cos2q,1)|", ie, 1e-3}};
}

std::vector<Measure> dressing_surface()
{
    const auto g = GridSpec::box({-2, -2}, {2, 2}, 0.01);
    const auto q = sge::one_soliton(g, 1.0);
    std::vector<Measure> out;
    for (double s : {0.3, 0.8}) {
        const auto d = surfaces::dressing_bt_surface(q, s, Eigen::Vector2d(1.0, 1.0));
        const double expected = s / (0.25 + s * s);
        double de = 0;
        for (std::size_t k = 0; k < g.size(); ++k) de = std::max(de, std::abs(d.distance[k] - expected));
        char buf[32];
        std::snprintf(buf, sizeof buf, "s=%.1f", s);
        out.push_back({std::string(buf) + " |dist-s/(1/4+s^2)|", de, 1e-4});
        out.push_back({std::string(buf) + " tangency", finite_max(d.normal_component), 1e-3});
    }
    return out;
}

std::vector<Measure> gsge_n3()
{
    const auto g = GridSpec::box({-0.25, -0.25, -0.25}, {0.25, 0.25, 0.25}, 0.01);
    const auto vac = gsge::vacuum(g, 3);
    const double l1 = gsge::lambda_from_theta(0.6), l2 = gsge::lambda_from_theta(1.1);
    const RMat X1 = cayley(0.3, 0.5, 0.7), X2 = X1.transpose();
    gsge::BacklundOptions o;
    o.substeps = 2;
    auto y0 = [](const RMat& X) {
        RMat y(3, 6);
        y << X, -RMat::Identity(3, 3);
        return y;
    };
    const auto lin = gsge::linear_backlund(vac, l1, y0(X1), o);
    const auto ric = gsge::backlund(vac, l1, X1, o);
    const auto other = gsge::linear_backlund(vac, l2, y0(X2), o);
    const auto top = gsge::permutability(vac, lin, other, l1, l2);

    const auto xg = GridSpec::box({-1, -1}, {1, 1}, 0.01);
    const auto p1 = gsge::sge_on_x_grid(xg, [](double s, double t) { return kink(1.0, s, t); });
    const auto p2 = gsge::sge_on_x_grid(xg, [](double s, double t) { return kink(2.0, s, t); });
    const auto P = gsge::permutability(gsge::vacuum(xg, 2), gsge::from_sge(p1), gsge::from_sge(p2), 1.0, 2.0);
    const auto S = sge::permutability(sge::make_solution(ScalarField(xg, 0.0)), sge::make_solution(p1),
                                      sge::make_solution(p2), 1.0, 2.0);
    double red = 0;
    for (std::size_t k = 0; k < xg.size(); ++k) red = std::max(red, (P.A[k] - gsge::rotation(S.q[k])).cwiseAbs().maxCoeff());

    return {{"linear orthogonality", lin.orthogonality, 1e-8},
            {"linear residual", lin.residual.max(), 1e-3},
            {"|riccati-linear|", sup(ric.A, lin.A), 1e-5},
            {"perm BT(A1,l2)", gsge::bt_residual(lin, top.A, l2), 1e-3},
            {"perm BT(A2,l1)", gsge::bt_residual(other, top.A, l1), 1e-3},
            {"n=2 vs scalar", red, 1e-9}};
}

std::vector<Measure> un_dressing()
{
    using namespace dressing;
    std::vector<Measure> out;
    for (int n : {2, 3}) {
        const auto g = n == 2 ? GridSpec::box({-1, -1}, {1, 1}, 0.01)
                              : GridSpec::box({-0.3, -0.3, -0.3}, {0.3, 0.3, 0.3}, 0.0125);
        Eigen::VectorXcd w1(n), w2(n);
        Eigen::VectorXd wr(n);
        if (n == 2) {
            w1 << cd(1, 0.3), cd(0.5, -1);
            w2 << cd(0.2, 1), cd(1, 0.1);
            wr << 1, 0.6;
        } else {
            w1 << cd(1, 0.3), cd(0.5, -1), cd(-0.2, 0.7);
            w2 << cd(0.2, 1), cd(1, 0.1), cd(0.3, 0.3);
            wr << 1, 0.6, -0.4;
        }
        const auto vac = vacuum(g, n);
        const auto E = vacuum_frame(g);
        const auto g1 = make_simple(cd(0.4, 0.9), rank1(w1));
        const auto g2 = make_simple(cd(-0.3, 0.7), rank1(w2));
        OdeOptions oo;
        oo.substeps = 2;

        const auto a1 = dress_algebraic(vac, E, g1);
        double agree = std::max(max_difference(dress_ode(vac, g1, g1.pi, oo).pi_tilde, a1.pi_tilde),
                                max_difference(dress_linear(vac, g1, Mat(), oo).pi_tilde, a1.pi_tilde));
        const auto a2 = dress_algebraic(a1.solution, a1.frame, g2);
        agree = std::max({agree, max_difference(dress_ode(a1.solution, g2, g2.pi, oo).pi_tilde, a2.pi_tilde),
                          max_difference(dress_linear(a1.solution, g2, Mat(), oo).pi_tilde, a2.pi_tilde)});

        const auto [t1, t2] = loop_permutability(g1, g2);
        const RationalLoop lhs{{t2, g1}}, rhs{{t1, g2}};
        double loop = 0;
        const auto samples = lambda_samples(lhs, 20);
        for (cd l : samples) loop = std::max(loop, (lhs.eval(l) - rhs.eval(l)).norm());
        const auto via1 = dress_algebraic(a1.solution, a1.frame, t2);
        const auto b1 = dress_algebraic(vac, E, g2);
        const auto via2 = dress_algebraic(b1.solution, b1.frame, t1);

        const auto rr = dress_algebraic(vacuum(g, n, true), E, make_simple(cd(0, 0.8), rank1(wr.cast<cd>())));
        double unit = 0, symm = 0;
        for (const Mat& y : curved_flat(rr.frame).values) {
            unit = std::max(unit, (y * y.adjoint() - Mat::Identity(n, n)).norm());
            symm = std::max(symm, (y - y.transpose()).norm());
        }

        const std::string p = "n=" + std::to_string(n) + " ";
        out.push_back({p + "methods agree", agree, 1e-6});
        out.push_back({p + "dressed residual", std::max(a1.solution.residual, a2.solution.residual), 1e-3});
        out.push_back({p + "loop identity (" + std::to_string(samples.size()) + " lambda)", loop, 1e-10});
        out.push_back({p + "two-route", max_difference(via1.solution.v, via2.solution.v), 1e-6});
        out.push_back({p + "Y unitary", unit, 1e-8});
        out.push_back({p + "Y symmetric", symm, 1e-8});
    }
    return out;
}

std::vector<Measure> isothermic_pair()
{
    using namespace isothermic;
    const auto g = GridSpec::box({-1, -1}, {1, 1}, 0.01);
    std::vector<Measure> out;
    const auto cyl = cylinder(g);
    out.push_back({"cylinder data residual", cyl.residual.max(), 1e-3});
    for (const auto& [name, d] : {std::pair{"cylinder", cyl}, std::pair{"sphere", sphere(g)}}) {
        const auto m1 = christoffel_pair_method1(d), m2 = christoffel_pair_method2(d);
        const auto v = verify_pair(m1, d);
        const std::string p = std::string(name) + " ";
        out.push_back({p + "methods (f)", translation_distance(m1.f.points, m2.f.points), 1e-6});
        out.push_back({p + "methods (dual)", translation_distance(m1.f_dual.points, m2.f_dual.points), 1e-6});
        out.push_back({p + "first forms", std::max(v.first_form_f, v.first_form_dual), 1e-3});
        out.push_back({p + "second forms", std::max(v.second_form_f, v.second_form_dual), 1e-3});
        out.push_back({p + "d zeta", m1.diagnostics.at("d_zeta"), 1e-3});
    }
    return out;
}

std::vector<Measure> pure_gauge()
{
    Mat X(2, 2), Y(2, 2);
    X << cd(0, 0.7), cd(0.4, 0.2), cd(-0.4, 0.2), cd(0, -0.7);
    Y << cd(0, -0.3), cd(0.9, 0), cd(-0.9, 0), cd(0, 0.3);
    // theta = g^{-1} dg for g = exp(x1 X) exp(x2 Y).
    auto theta = [&](const GridSpec& g) {
        return make_connection(g, 2, [&](int axis, std::size_t k) -> Mat {
            if (axis == 1) return Y;
            const double x2 = g.point(k)[1];
            return Mat((-x2 * Y).exp() * X * (x2 * Y).exp());
        });
    };
    std::vector<double> r;
    for (double h : {0.04, 0.02, 0.01}) r.push_back(curvature_residual(theta(GridSpec::box({-1, -1}, {1, 1}, h))).max());
    const double order = std::min(std::log2(r[0] / r[1]), std::log2(r[1] / r[2]));

    const auto g = GridSpec::box({0, 0}, {1, 1}, 0.01);
    const auto th = theta(g);
    FrameOptions a, b;
    b.path = PathPolicy::ReverseOrdered;
    const auto base = origin_node(g);
    const double path = frame_distance(integrate_frame(th, Mat::Identity(2, 2), base, a),
                                       integrate_frame(th, Mat::Identity(2, 2), base, b));
    return {{"observed order", order, 1.8, true}, {"path independence", path, 1e-6}};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<Measure> cli_determinism()
{
    const auto root = fs::temp_directory_path() / ("soliton_forge_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const std::vector<std::string> cmds = {
        "sge --grid 101x101 --lo -2 --hi 2 --mu 1 --mu 2 --permute",
        "gsge --n 2 --grid 81x81 --lo -0.5 --hi 0.5 --theta 0.6",
        "dress --n 2 --grid 81x81 --method all",
        "isothermic --grid 81x81 --seed sphere",
        "surface --grid 101x101 --lo -1 --hi 1 --dress 0.8",
    };
    double mismatches = 0;
    for (std::size_t c = 0; c < cmds.size(); ++c) {
        std::vector<fs::path> dirs;
        for (int rep = 0; rep < 2; ++rep) {
            const auto d = root / (std::to_string(c) + "_" + std::to_string(rep));
            const std::string cmd = std::string("\"") + SOLITON_FORGE_CLI + "\" " + cmds[c] + " --out \"" + d.string() +
                                    "\" > \"" + d.string() + ".stdout\" 2>/dev/null";
            const int st = std::system(cmd.c_str());
            if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) ++mismatches;
            dirs.push_back(d);
        }
        if (slurp(dirs[0].string() + ".stdout") != slurp(dirs[1].string() + ".stdout")) ++mismatches;
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
        if (names.empty()) ++mismatches;
        for (const auto& n : names)
            if (!fs::exists(dirs[1] / n) || slurp(dirs[0] / n) != slurp(dirs[1] / n)) ++mismatches;
        std::size_t n1 = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dirs[1])) ++n1;
        if (n1 != names.size()) ++mismatches;
    }
    fs::remove_all(root);
    return {{"differing runs/files", mismatches, 0.0}};
}

} // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<Criterion> all = {
        {1, "SGE 1-soliton residual on [-5,5]^2, h=0.01", 5, one_soliton},
        {2, "Backlund of the vacuum vs closed form, mu=1, q*(0)=pi/2", 10, backlund_vacuum},
        {3, "2-soliton by permutability (mu=1,2)", 10, two_soliton},
        {4, "Sym surface of the kink at r=1/2", 60, sym_surface},
        {5, "Dressing transform of surfaces, s in {0.3, 0.8}", 60, dressing_surface},
        {6, "GSGE n=3 transforms from A=I and permutability", 120, gsge_n3},
        {7, "U(n) dressing, n=2,3", 60, un_dressing},
        {8, "Isothermic Christoffel pairs", 30, isothermic_pair},
        {9, "Curvature residual order and path independence", 30, pure_gauge},
        {10, "CLI determinism", 0, cli_determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<Measure> m;
        std::string error;
        try {
            m = c.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = error.empty() && (c.time_limit <= 0 || secs < c.time_limit);
        std::string detail;
        for (const auto& x : m) {
            ok = ok && x.ok();
            char buf[160];
            std::snprintf(buf, sizeof buf, "; %s=%.3e (%s %g)", x.name.c_str(), x.value, x.at_least ? ">=" : "<=", x.tol);
            detail += buf;
        }
        if (!error.empty()) detail += "; error: " + error;
        char limit[32] = "no limit";
        if (c.time_limit > 0) std::snprintf(limit, sizeof limit, "< %.0fs", c.time_limit);
        std::printf("%s [%d] %s: time=%.2fs (%s)%s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), secs, limit,
                    detail.c_str());
        failed += !ok;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
