#include "soliton_forge/surfaces.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace soliton_forge::surfaces {

namespace {

const cd I1(0.0, 1.0);

Mat basis(int k)
{
    Mat u = Mat::Zero(2, 2);
    if (k == 0) u << I1, 0.0, 0.0, -I1;
    else if (k == 1) u << 0.0, 1.0, -1.0, 0.0;
    else u << 0.0, I1, I1, 0.0;
    return u;
}

ImmersionField to_r3(const MatrixField& m, const char* provenance)
{
    std::vector<Vec> pts(m.size());
    double imag = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        Eigen::Vector3d v = su2_to_r3(m[k]);
        pts[k] = v;
        // Component of m outside su(2): anti-Hermitian and trace-free parts.
        imag = std::max(imag, (m[k] + m[k].adjoint()).norm() + std::abs(m[k].trace()));
    }
    ImmersionField f{PointField(m.grid, std::move(pts)), provenance, {}, {}};
    f.diagnostics["su2_defect"] = imag;
    return f;
}

Frame lax_frame(const sge::SgeSolution& q, cd lambda, const std::vector<int>& base, const FrameOptions& fo)
{
    const Connection c = sge::sge_lax(q.q, lambda);
    return integrate_frame(c, Mat::Identity(2, 2), base, fo);
}

PointField frame_normal(const Frame& E)
{
    std::vector<Vec> nrm(E.values.size());
    for (std::size_t k = 0; k < nrm.size(); ++k) {
        const Mat& e = E.values[k];
        nrm[k] = su2_to_r3(e * basis(1) * e.inverse()).normalized();
    }
    return PointField(E.grid, std::move(nrm));
}

} // namespace

Eigen::Vector3d su2_to_r3(const Mat& x)
{
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) v(k) = (-(x * basis(k)).trace() / 2.0).real();
    return v;
}

Mat r3_to_su2(const Eigen::Vector3d& v)
{
    return basis(0) * v(0) + basis(1) * v(1) + basis(2) * v(2);
}

double expected_curvature(double r)
{
    return -4.0 * r * r;
}

ImmersionField sym_immersion(const sge::SgeSolution& q, double r, const SymOptions& opts)
{
    if (r == 0.0 || !std::isfinite(r)) throw Error("Sym parameter r must be a nonzero real");
    if (!(opts.dlambda > 0)) throw Error("dlambda must be positive");
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(q.q.grid) : opts.basepoint;
    FrameOptions fo = opts.frame;
    fo.flatness_tolerance = 0.0;

    const Frame c = lax_frame(q, r, base, fo);
    auto derivative = [&](double dl) {
        const Frame p = lax_frame(q, r + dl, base, fo);
        const Frame m = lax_frame(q, r - dl, base, fo);
        return lambda_derivative_frame(p, m, c, dl);
    };
    const MatrixField d = derivative(opts.dlambda);
    ImmersionField f = to_r3(d, "sym");
    f.reference_normal = frame_normal(c);
    f.diagnostics["sym_r"] = r;
    if (opts.richardson) {
        const ImmersionField f2 = to_r3(derivative(0.5 * opts.dlambda), "sym");
        double delta = 0.0;
        for (std::size_t k = 0; k < f.points.size(); ++k)
            delta = std::max(delta, (f.points[k] - f2.points[k]).norm());
        f.diagnostics["richardson_delta"] = delta;
    }
    return f;
}

SurfaceReport fundamental_forms(const ImmersionField& f, int accuracy, double degenerate_threshold)
{
    const GridSpec& g = f.points.grid;
    if (g.ndim() != 2) throw Error("fundamental forms need a 2-D parameter grid");
    for (const auto& p : f.points.values)
        if (p.size() != 3) throw Error("fundamental forms need points in R^3");

    const PointField fu = partial_derivative(f.points, 0, accuracy);
    const PointField fv = partial_derivative(f.points, 1, accuracy);
    const PointField fuu = second_derivative(f.points, 0, accuracy);
    const PointField fvv = second_derivative(f.points, 1, accuracy);
    const PointField fuv = partial_derivative(fu, 1, accuracy);

    const std::size_t n = g.size();
    const bool has_ref = f.reference_normal.size() == n;
    SurfaceReport r;
    r.grid = g;
    std::vector<double> E(n), F(n), G(n), L(n), M(n), N(n), K(n);
    std::vector<Vec> nrm(n);
    r.degenerate.assign(n, 0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < n; ++k) {
        const Eigen::Vector3d a = fu[k], b = fv[k];
        E[k] = a.dot(a);
        F[k] = a.dot(b);
        G[k] = b.dot(b);
        const double det = E[k] * G[k] - F[k] * F[k];
        Eigen::Vector3d c = a.cross(b);
        const double cn = c.norm();
        if (!(det > degenerate_threshold) || !(cn > 0)) {
            r.degenerate[k] = 1;
            nrm[k] = Eigen::Vector3d::Zero();
            L[k] = M[k] = N[k] = K[k] = nan;
            continue;
        }
        c /= cn;
        if (has_ref && Eigen::Vector3d(f.reference_normal[k]).dot(c) < 0) c = -c;
        nrm[k] = c;
        L[k] = Eigen::Vector3d(fuu[k]).dot(c);
        M[k] = Eigen::Vector3d(fuv[k]).dot(c);
        N[k] = Eigen::Vector3d(fvv[k]).dot(c);
        K[k] = (L[k] * N[k] - M[k] * M[k]) / det;
    }
    r.E = ScalarField(g, E);
    r.F = ScalarField(g, F);
    r.G = ScalarField(g, G);
    r.L = ScalarField(g, L);
    r.M = ScalarField(g, M);
    r.N = ScalarField(g, N);
    r.K = ScalarField(g, K);
    r.normal = PointField(g, nrm);
    return r;
}

std::vector<int> differential_rank(const ImmersionField& f, double tol)
{
    const GridSpec& g = f.points.grid;
    std::vector<PointField> d;
    for (int a = 0; a < g.ndim(); ++a) d.push_back(partial_derivative(f.points, a, 2));
    std::vector<int> rank(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        RMat J(f.points[k].size(), g.ndim());
        for (int a = 0; a < g.ndim(); ++a) J.col(a) = d[a][k];
        Eigen::JacobiSVD<RMat> svd(J);
        const auto sv = svd.singularValues();
        int rk = 0;
        const double top = sv.size() ? sv(0) : 0.0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > tol * std::max(top, 1e-300) && sv(i) > 1e-300) ++rk;
        rank[k] = rk;
    }
    return rank;
}

DressingBtResult dressing_bt_surface(const sge::SgeSolution& q, double s, const Eigen::Vector2d& direction,
                                     const DressingOptions& opts)
{
    if (s == 0.0 || !std::isfinite(s)) throw Error("dressing parameter s must be a nonzero real");
    if (!(direction.norm() > 0)) throw Error("projection direction must be nonzero");
    if (!(opts.dlambda > 0)) throw Error("dlambda must be positive");
    const GridSpec& g = q.q.grid;
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(g) : opts.basepoint;
    FrameOptions fo = opts.frame;
    fo.flatness_tolerance = 0.0;

    const double r = 0.5, dl = opts.dlambda;
    const Frame Ec = lax_frame(q, r, base, fo);
    const Frame Ep = lax_frame(q, r + dl, base, fo);
    const Frame Em = lax_frame(q, r - dl, base, fo);
    const Frame Es = lax_frame(q, cd(0.0, s), base, fo);

    const Eigen::Vector2d p = direction.normalized();
    const std::size_t n = g.size();
    std::vector<RMat> pit(n);
    double real_defect = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        real_defect = std::max(real_defect, Es.values[k].imag().cwiseAbs().maxCoeff());
        const RMat Er = Es.values[k].real();
        Eigen::Vector2d v = Er.fullPivLu().solve(p);
        const double vn = v.norm();
        if (!(vn > 1e-300) || !std::isfinite(vn)) throw Error("frame at lambda = i s is singular");
        v /= vn;
        pit[k] = v * v.transpose();
    }

    auto phi = [&](double lam) { return std::sqrt((cd(lam, 0.0) + I1 * s) / (cd(lam, 0.0) - I1 * s)); };
    auto dressed = [&](const Frame& E, double lam) {
        const cd ph = phi(lam);
        std::vector<Mat> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            const Mat P = pit[k].cast<cd>();
            const Mat Pp = Mat::Identity(2, 2) - P;
            out[k] = E.values[k] * (ph * P + Pp / ph);
        }
        Frame F = E;
        F.values = MatrixField(g, std::move(out));
        return F;
    };
    const Frame Hc = dressed(Ec, r), Hp = dressed(Ep, r + dl), Hm = dressed(Em, r - dl);

    DressingBtResult res;
    res.f = to_r3(lambda_derivative_frame(Ep, Em, Ec, dl), "sym");
    res.f.reference_normal = frame_normal(Ec);
    res.fhat = to_r3(lambda_derivative_frame(Hp, Hm, Hc, dl), "dressing");
    res.expected_distance = std::abs(s) / (0.25 + s * s);
    res.real_defect = real_defect;

    const SurfaceReport rep = fundamental_forms(res.f, 4);
    std::vector<double> dist(n), ncomp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec d = res.fhat.points[k] - res.f.points[k];
        dist[k] = d.norm();
        const double area = std::sqrt(std::max(0.0, rep.E[k] * rep.G[k] - rep.F[k] * rep.F[k]));
        const bool cusp = rep.degenerate[k] || !(area >= 0.1 * (rep.E[k] + rep.G[k]) / 2);
        ncomp[k] = cusp ? std::numeric_limits<double>::quiet_NaN() : std::abs(d.dot(rep.normal[k]));
    }
    res.distance = ScalarField(g, dist);
    res.normal_component = ScalarField(g, ncomp);

    // The lambda^{-1} coefficient transforms by h0 = g~(0) = 2 pi~ - I.
    std::vector<double> raw(n);
    for (std::size_t k = 0; k < n; ++k) {
        const RMat h0 = 2.0 * pit[k] - RMat::Identity(2, 2);
        const double c = std::cos(2 * q.q[k]), sn = std::sin(2 * q.q[k]);
        RMat Mq(2, 2);
        Mq << c, -sn, -sn, -c;
        const RMat Mh = h0 * Mq * h0;
        raw[k] = std::atan2(-Mh(0, 1), Mh(0, 0));
    }
    const ScalarField twice = unwrap_phase(ScalarField(g, raw), 2.0 * std::numbers::pi, base);
    std::vector<double> qh(n);
    for (std::size_t k = 0; k < n; ++k) qh[k] = 0.5 * twice[k];
    std::vector<double> hist = q.mu_history;
    hist.push_back(s);
    res.qhat = sge::make_solution(ScalarField(g, std::move(qh)), hist, q.tolerance);
    return res;
}

std::string obj_text(const ImmersionField& f)
{
    const GridSpec& g = f.points.grid;
    if (g.ndim() != 2) throw Error("OBJ export needs a 2-D parameter grid");
    std::ostringstream os;
    char buf[128];
    for (const auto& p : f.points.values) {
        if (p.size() != 3) throw Error("OBJ export needs points in R^3");
        std::snprintf(buf, sizeof buf, "v %.6f %.6f %.6f\n", p(0), p(1), p(2));
        os << buf;
    }
    const int nu = g.dims[0], nv = g.dims[1];
    for (int i = 0; i + 1 < nu; ++i) {
        for (int j = 0; j + 1 < nv; ++j) {
            const std::size_t a = static_cast<std::size_t>(i) * nv + j + 1;
            const std::size_t b = a + 1, c = a + nv, d = a + nv + 1;
            os << "f " << a << ' ' << c << ' ' << d << '\n';
            os << "f " << a << ' ' << d << ' ' << b << '\n';
        }
    }
    return os.str();
}

void export_obj(const ImmersionField& f, const std::string& path)
{
    const std::string text = obj_text(f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path);
}

std::vector<Eigen::Vector3d> read_obj_vertices(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Eigen::Vector3d> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.size() < 2 || line[0] != 'v' || line[1] != ' ') continue;
        std::istringstream ls(line.substr(2));
        Eigen::Vector3d v;
        ls >> v(0) >> v(1) >> v(2);
        out.push_back(v);
    }
    return out;
}

} // namespace soliton_forge::surfaces
