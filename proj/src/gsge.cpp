#include "soliton_forge/gsge.hpp"

#include <cmath>
#include <numbers>

namespace soliton_forge::gsge {

namespace {

void check_state_grid(const RealMatrixField& A)
{
    A.grid.validate();
    if (A.values.empty()) throw Error("empty GSGE field");
    const Eigen::Index n = A.values[0].rows();
    if (n < 2) throw Error("GSGE needs n >= 2");
    if (A.grid.ndim() != n) throw Error("GSGE grid dimension must equal the matrix size n");
    for (const auto& a : A.values)
        if (a.rows() != n || a.cols() != n) throw Error("GSGE matrices must all be n x n");
}

std::vector<RealMatrixField> all_partials(const RealMatrixField& A, int accuracy)
{
    std::vector<RealMatrixField> d;
    for (int k = 0; k < A.grid.ndim(); ++k) d.push_back(partial_derivative(A, k, accuracy));
    return d;
}

double orthogonality(const RealMatrixField& A)
{
    double m = 0.0;
    for (const auto& a : A.values) {
        const double e = (a.transpose() * a - RMat::Identity(a.rows(), a.cols())).norm();
        if (!std::isfinite(e)) return INFINITY;
        m = std::max(m, e);
    }
    return m;
}

RMat omega(const RMat& F, int k)
{
    const Eigen::Index n = F.rows();
    RMat w = RMat::Zero(n, n);
    w.row(k) = F.row(k);
    w.col(k) -= F.row(k).transpose();
    return w;
}

RMat polar(const RMat& X)
{
    Eigen::JacobiSVD<RMat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

// F_ji = (X^T d_i X)_ij with d_i X given exactly by the Riccati system.
RealMatrixField f_from_riccati(const GsgeState& seed, const RealMatrixField& X, double lambda)
{
    const int n = seed.n();
    const RMat D = D_lambda(n, lambda);
    std::vector<RMat> F(X.size());
    parallel_for(X.size(), [&](std::size_t node) {
        RMat f = RMat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const RMat g = X[node].transpose() * riccati_rhs(X[node], seed.A[node], seed.F[node], D, i);
            for (int j = 0; j < n; ++j)
                if (j != i) f(j, i) = g(i, j);
        }
        F[node] = f;
    });
    return RealMatrixField(X.grid, std::move(F));
}

double max_difference(const RealMatrixField& a, const RealMatrixField& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double e = (a[k] - b[k]).cwiseAbs().maxCoeff();
        if (!std::isfinite(e)) return INFINITY;
        m = std::max(m, e);
    }
    return m;
}

void check_seed(const GsgeState& seed, const BacklundOptions& opts)
{
    check_state_grid(seed.A);
    if (!seed.F.grid.same_as(seed.A.grid)) throw Error("A and F live on different grids");
    if (!opts.check_seed) return;
    const double r = gsge_residual(seed.A, seed.F).max();
    if (!(r <= opts.tolerance))
        throw Error("seed is not a GSGE solution: compatibility defect " + std::to_string(r));
}

void check_lambda(double lambda)
{
    if (lambda == 0.0 || !std::isfinite(lambda)) throw Error("lambda must be a nonzero real");
}

GsgeState finish(RealMatrixField X, RealMatrixField F, double tolerance)
{
    return make_state(std::move(X), std::move(F), tolerance);
}

} // namespace

double GsgeResidual::max() const
{
    for (double v : {max_curvature, max_torsion, max_structure})
        if (!std::isfinite(v)) return INFINITY;
    return std::max({max_curvature, max_torsion, max_structure});
}

RMat J_matrix(int n)
{
    RMat J = -RMat::Identity(n, n);
    J(0, 0) = 1.0;
    return J;
}

RMat D_lambda(int n, double lambda)
{
    check_lambda(lambda);
    return (lambda * RMat::Identity(n, n) + J_matrix(n) / lambda) / 2.0;
}

Mat D_lambda(int n, cd lambda)
{
    if (lambda == cd(0.0)) throw Error("lambda must be nonzero");
    return (lambda * Mat::Identity(n, n) + J_matrix(n).cast<cd>() / lambda) / cd(2.0);
}

double lambda_from_theta(double theta)
{
    const double s = std::sin(theta);
    if (!(std::abs(s) > 1e-14)) throw Error("theta must not be a multiple of pi");
    return 1.0 / s + std::cos(theta) / s;
}

FResult f_from_a(const RealMatrixField& A, const FOptions& opts)
{
    check_state_grid(A);
    const int n = A.grid.ndim();
    const auto dA = all_partials(A, opts.accuracy);
    FResult r;
    std::vector<RMat> F(A.size());
    r.flagged.assign(A.size(), 0);
    parallel_for(A.size(), [&](std::size_t node) {
        const RMat& a = A[node];
        bool flag = false;
        for (int j = 0; j < n; ++j) flag = flag || !(std::abs(a(0, j)) >= opts.threshold);
        RMat f = RMat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            const RMat g = flag ? RMat(a.transpose() * dA[j][node]) : RMat();
            for (int i = 0; i < n; ++i) {
                if (i == j) continue;
                f(i, j) = flag ? g(j, i) : dA[j][node](0, i) / a(0, j);
            }
        }
        F[node] = f;
        r.flagged[node] = flag;
    });
    std::size_t nflag = 0;
    for (auto v : r.flagged) nflag += v;
    if (static_cast<double>(nflag) > opts.max_flagged_fraction * static_cast<double>(A.size()))
        throw Error("a_1j vanishes on too many nodes");
    r.F = RealMatrixField(A.grid, std::move(F));
    r.frame_residual = frame_residual(A, r.F, 2);
    return r;
}

double frame_residual(const RealMatrixField& A, const RealMatrixField& F, int accuracy)
{
    check_state_grid(A);
    const int n = A.grid.ndim();
    const auto dA = all_partials(A, accuracy);
    double m = 0.0;
    for (std::size_t node = 0; node < A.size(); ++node) {
        for (int k = 0; k < n; ++k) {
            RMat w = RMat::Zero(n, n);
            w.row(k) = F[node].col(k).transpose();
            w.col(k) -= F[node].col(k);
            const double e = (dA[k][node] - A[node] * w).cwiseAbs().maxCoeff();
            if (!std::isfinite(e)) return INFINITY;
            m = std::max(m, e);
        }
    }
    return m;
}

GsgeResidual gsge_residual(const RealMatrixField& A, const RealMatrixField& F, int accuracy)
{
    check_state_grid(A);
    if (!F.grid.same_as(A.grid) || F.size() != A.size()) throw Error("A and F live on different grids");
    const int n = A.grid.ndim();
    const auto dA = all_partials(A, accuracy);
    const auto dF = all_partials(F, accuracy);
    std::vector<double> c(A.size()), t(A.size()), s(A.size());
    parallel_for(A.size(), [&](std::size_t node) {
        const RMat& a = A[node];
        const RMat& f = F[node];
        double ec = 0.0, et = 0.0, es = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (i < j) {
                    double v = dF[j][node](i, j) + dF[i][node](j, i) - a(0, i) * a(0, j);
                    for (int k = 0; k < n; ++k) v += f(i, k) * f(j, k);
                    ec = std::max(ec, std::abs(v));
                }
                for (int k = 0; k < n; ++k) {
                    if (k != i && k != j) et = std::max(et, std::abs(dF[k][node](i, j) - f(i, k) * f(k, j)));
                    es = std::max(es, std::abs(dA[j][node](k, i) - a(k, j) * f(i, j)));
                }
            }
        }
        c[node] = ec;
        t[node] = et;
        s[node] = es;
    });
    GsgeResidual r;
    r.curvature = ScalarField(A.grid, std::move(c));
    r.torsion = ScalarField(A.grid, std::move(t));
    r.structure = ScalarField(A.grid, std::move(s));
    r.max_curvature = max_abs(r.curvature);
    r.max_torsion = max_abs(r.torsion);
    r.max_structure = max_abs(r.structure);
    return r;
}

GsgeState make_state(RealMatrixField A, double tolerance)
{
    FResult fr = f_from_a(A);
    GsgeState s = make_state(std::move(A), std::move(fr.F), tolerance);
    s.flagged = std::move(fr.flagged);
    s.diagnostics["frame_residual"] = fr.frame_residual;
    return s;
}

GsgeState make_state(RealMatrixField A, RealMatrixField F, double tolerance)
{
    check_state_grid(A);
    for (auto& f : F.values) f.diagonal().setZero();
    GsgeState s;
    s.grid = A.grid;
    s.residual = gsge_residual(A, F);
    s.orthogonality = orthogonality(A);
    s.A = std::move(A);
    s.F = std::move(F);
    s.flagged.assign(s.A.size(), 0);
    s.tolerance = tolerance;
    s.verified = s.residual.max() <= tolerance;
    return s;
}

GsgeState vacuum(const GridSpec& g, int n)
{
    if (g.ndim() != n) throw Error("GSGE grid dimension must equal n");
    return make_state(RealMatrixField(g, RMat::Identity(n, n)), RealMatrixField(g, RMat::Zero(n, n)));
}

Connection gsge_lax(const RealMatrixField& A, const RealMatrixField& F, cd lambda)
{
    check_state_grid(A);
    const int n = A.grid.ndim();
    const Mat D = D_lambda(n, lambda);
    return make_connection(
        A.grid, n,
        [&](int k, std::size_t node) {
            const Mat a = A[node].cast<cd>();
            Mat B = Mat::Zero(2 * n, 2 * n);
            B.topLeftCorner(n, n) = omega(F[node], k).cast<cd>();
            B.block(k, n, 1, n) = (a.transpose() * D).row(k);
            B.block(n, k, n, 1) = (D * a).col(k);
            return B;
        },
        lambda);
}

double onn_defect(const Connection& theta)
{
    theta.validate();
    const int m = theta.dim();
    if (m % 2) throw Error("o(n,n) needs an even size");
    Mat I = Mat::Identity(m, m);
    I.bottomRightCorner(m / 2, m / 2) *= -1.0;
    double d = 0.0;
    for (const auto& c : theta.coeffs)
        for (const auto& B : c.values) d = std::max(d, (B.transpose() * I + I * B).cwiseAbs().maxCoeff());
    return d;
}

RMat riccati_rhs(const RMat& X, const RMat& A, const RMat& F, const RMat& D, int k)
{
    const Eigen::Index n = X.rows();
    RMat out = X.col(k) * (A.transpose() * D).row(k) * X + X * omega(F, k);
    out.col(k) -= (D * A).col(k);
    (void)n;
    return out;
}

GsgeState backlund(const GsgeState& seed, double lambda, const RMat& X0, const BacklundOptions& opts)
{
    check_lambda(lambda);
    check_seed(seed, opts);
    const int n = seed.n();
    if (X0.rows() != n || X0.cols() != n) throw Error("X0 has wrong size");
    if (!((X0.transpose() * X0 - RMat::Identity(n, n)).norm() <= 1e-8)) throw Error("X0 must be orthogonal");
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(seed.grid) : opts.basepoint;
    const RMat D = D_lambda(n, lambda);

    auto run = [&](PathPolicy path) {
        LineIntegration li;
        li.substeps = opts.substeps;
        li.interp = opts.interp;
        li.path = path;
        auto vals = sweep_rk4<RMat>(
            seed.grid, base, X0, li,
            [&](const Line& line, double p, const RMat& X) {
                return riccati_rhs(X, line.at(seed.A, p), line.at(seed.F, p), D, line.axis);
            },
            [&](RMat& X) {
                if (opts.reproject) X = polar(X);
            });
        return RealMatrixField(seed.grid, std::move(vals));
    };
    RealMatrixField X = run(PathPolicy::AxisOrdered);
    RealMatrixField F = f_from_riccati(seed, X, lambda);
    GsgeState out = finish(X, F, opts.tolerance);
    out.diagnostics["lambda"] = lambda;
    out.diagnostics["seed_residual"] = seed.residual.max();
    out.diagnostics["bt_residual"] = bt_residual(seed, out.A, lambda);
    if (opts.path_diagnostic) {
        const double d = max_difference(out.A, run(PathPolicy::ReverseOrdered));
        out.diagnostics["path_defect"] = d;
        if (!(d <= opts.tolerance)) out.verified = false;
    }
    return out;
}

GsgeState linear_backlund(const GsgeState& seed, double s, const RMat& y0, const BacklundOptions& opts)
{
    check_lambda(s);
    check_seed(seed, opts);
    const int n = seed.n();
    if (y0.rows() != n || y0.cols() != 2 * n) throw Error("initial rows must form an n x 2n matrix");
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(seed.grid) : opts.basepoint;
    const RMat D = D_lambda(n, s);
    {
        const RMat Q = y0.rightCols(n);
        if (!(std::abs(Q.determinant()) > 1e-12 * std::pow(std::max(1.0, Q.norm()), n)))
            throw Error("Q is singular at the basepoint");
    }

    auto theta = [&](const RMat& A, const RMat& F, int k) {
        RMat B = RMat::Zero(2 * n, 2 * n);
        B.topLeftCorner(n, n) = omega(F, k);
        B.block(k, n, 1, n) = (A.transpose() * D).row(k);
        B.block(n, k, n, 1) = (D * A).col(k);
        return B;
    };
    auto run = [&](PathPolicy path) {
        LineIntegration li;
        li.substeps = opts.substeps;
        li.interp = opts.interp;
        li.path = path;
        auto vals = sweep_rk4<RMat>(seed.grid, base, y0, li, [&](const Line& line, double p, const RMat& y) {
            return RMat(y * theta(line.at(seed.A, p), line.at(seed.F, p), line.axis));
        });
        return RealMatrixField(seed.grid, std::move(vals));
    };
    auto to_x = [&](const RealMatrixField& y, std::vector<std::uint8_t>* flags) {
        std::vector<RMat> X(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
            const RMat Q = y[k].rightCols(n);
            Eigen::FullPivLU<RMat> lu(Q);
            const bool bad = !(std::abs(Q.determinant()) > 1e-12 * std::pow(std::max(1.0, Q.norm()), n));
            if (flags) (*flags)[k] = bad;
            X[k] = bad ? RMat::Constant(n, n, NAN) : RMat(-lu.solve(y[k].leftCols(n)));
        }
        return RealMatrixField(y.grid, std::move(X));
    };

    std::vector<std::uint8_t> flags(seed.grid.size(), 0);
    RealMatrixField X = to_x(run(PathPolicy::AxisOrdered), &flags);
    std::size_t nbad = 0;
    for (auto f : flags) nbad += f;
    if (static_cast<double>(nbad) > opts.max_singular_fraction * static_cast<double>(flags.size()))
        throw Error("Q is singular on " + std::to_string(nbad) + " nodes");

    RealMatrixField F = f_from_riccati(seed, X, s);
    GsgeState out = finish(X, F, opts.tolerance);
    out.flagged = flags;
    out.diagnostics["lambda"] = s;
    out.diagnostics["seed_residual"] = seed.residual.max();
    out.diagnostics["bt_residual"] = bt_residual(seed, out.A, s);
    if (opts.path_diagnostic) {
        const double d = max_difference(out.A, to_x(run(PathPolicy::ReverseOrdered), nullptr));
        out.diagnostics["path_defect"] = d;
        if (!(d <= opts.tolerance)) out.verified = false;
    }
    return out;
}

double bt_residual(const GsgeState& seed, const RealMatrixField& X, double lambda, int accuracy)
{
    check_lambda(lambda);
    if (!X.grid.same_as(seed.grid)) throw Error("fields live on different grids");
    const int n = seed.n();
    const RMat D = D_lambda(n, lambda);
    const auto dX = all_partials(X, accuracy);
    double m = 0.0;
    for (std::size_t node = 0; node < X.size(); ++node) {
        for (int k = 0; k < n; ++k) {
            const double e =
                (dX[k][node] - riccati_rhs(X[node], seed.A[node], seed.F[node], D, k)).cwiseAbs().maxCoeff();
            if (!std::isfinite(e)) return INFINITY;
            m = std::max(m, e);
        }
    }
    return m;
}

GsgeState permutability(const GsgeState& A0, const GsgeState& A1, const GsgeState& A2, double lambda1,
                        double lambda2)
{
    check_lambda(lambda1);
    check_lambda(lambda2);
    const double c1 = std::abs(lambda1 + 1.0 / lambda1), c2 = std::abs(lambda2 + 1.0 / lambda2);
    if (std::abs(c1 - c2) <= 1e-14 * std::max(c1, c2)) throw Error("permutability needs sin^2 theta1 != sin^2 theta2");
    const GridSpec& g = A0.grid;
    if (!g.same_as(A1.grid) || !g.same_as(A2.grid)) throw Error("states live on different grids");
    const int n = A0.n();
    if (A1.n() != n || A2.n() != n) throw Error("states have different n");
    const RMat D1 = D_lambda(n, lambda1), D2 = D_lambda(n, lambda2);

    std::vector<RMat> A3(g.size());
    std::vector<std::uint8_t> flags(g.size(), 0);
    parallel_for(g.size(), [&](std::size_t k) {
        const RMat R = A2.A[k] * A1.A[k].transpose();
        const RMat den = D1 - D2 * R;
        Eigen::FullPivLU<RMat> lu(den);
        if (lu.rank() < n || std::abs(lu.determinant()) < 1e-12) {
            flags[k] = 1;
            A3[k] = RMat::Constant(n, n, NAN);
            return;
        }
        A3[k] = (-D2 + D1 * R) * lu.inverse() * A0.A[k];
    });
    std::size_t nbad = 0;
    for (auto f : flags) nbad += f;
    GsgeState out;
    if (nbad == 0) {
        out = make_state(RealMatrixField(g, std::move(A3)), A0.tolerance);
    } else {
        RealMatrixField a(g, std::move(A3));
        out = make_state(a, RealMatrixField(g, RMat::Zero(n, n)), A0.tolerance);
        out.verified = false;
    }
    out.flagged = flags;
    out.diagnostics["singular_nodes"] = static_cast<double>(nbad);
    return out;
}

GsgeState permutability_theta(const GsgeState& A0, const GsgeState& A1, const GsgeState& A2, double theta1,
                              double theta2)
{
    const double s1 = std::sin(theta1), s2 = std::sin(theta2);
    if (std::abs(s1 * s1 - s2 * s2) <= 1e-14) throw Error("permutability needs sin^2 theta1 != sin^2 theta2");
    return permutability(A0, A1, A2, lambda_from_theta(theta1), lambda_from_theta(theta2));
}

surfaces::ImmersionField immersion(const GsgeState& s, const ImmersionOptions& opts)
{
    check_state_grid(s.A);
    const int n = s.n();
    const GridSpec& g = s.grid;
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(g) : opts.basepoint;
    FrameOptions fo = opts.frame;
    fo.flatness_tolerance = 0.0;
    const cd I(0.0, 1.0);
    const Frame E = integrate_frame(gsge_lax(s.A, s.F, I), Mat::Identity(2 * n, 2 * n), base, fo);
    if (!(E.min_abs_det > 1e-10)) throw Error("GSGE frame failed at lambda = i");

    Mat P = Mat::Identity(2 * n, 2 * n), Pi = Mat::Identity(2 * n, 2 * n);
    P.bottomRightCorner(n, n) *= I;
    Pi.bottomRightCorner(n, n) *= -I;
    std::vector<int> keep;
    for (int i = 0; i < 2 * n; ++i)
        if (i != n) keep.push_back(i);

    const int m = 2 * n - 1;
    std::vector<PointField> coeffs;
    std::vector<std::vector<Vec>> cols(n, std::vector<Vec>(g.size()));
    std::vector<Vec> normal(g.size());
    double imag = 0.0, orth = 0.0, leak = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mat gk = P * E.values[k] * Pi;
        imag = std::max(imag, gk.imag().cwiseAbs().maxCoeff());
        const RMat gr = gk.real();
        RMat h(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) h(a, b) = gr(keep[a], keep[b]);
        for (int a = 0; a < m; ++a) leak = std::max({leak, std::abs(gr(n, keep[a])), std::abs(gr(keep[a], n))});
        orth = std::max(orth, (h.transpose() * h - RMat::Identity(m, m)).norm());
        for (int i = 0; i < n; ++i) cols[i][k] = h.col(i) * s.A[k](0, i);
        if (n == 2) normal[k] = h.col(2);
    }
    for (int i = 0; i < n; ++i) coeffs.emplace_back(g, std::move(cols[i]));
    LineIntegration li = fo;
    surfaces::ImmersionField f{integrate_form<Vec>(coeffs, base, Vec::Zero(m), li), "gsge", {}, {}};
    if (n == 2) f.reference_normal = PointField(g, std::move(normal));
    f.diagnostics["frame_imag_defect"] = imag;
    f.diagnostics["frame_orthogonality"] = orth;
    f.diagnostics["frame_block_leak"] = leak;
    return f;
}

RMat rotation(double q)
{
    RMat r(2, 2);
    r << std::cos(q), std::sin(q), -std::sin(q), std::cos(q);
    return r;
}

ScalarField sge_on_x_grid(const GridSpec& xg, const std::function<double(double, double)>& q)
{
    if (xg.ndim() != 2) throw Error("the n = 2 dictionary needs a 2-D grid");
    return sample(xg, [&](const std::vector<double>& x) { return q(0.5 * (x[0] + x[1]), 0.5 * (x[0] - x[1])); });
}

GsgeState from_sge(const ScalarField& q_on_x)
{
    if (q_on_x.grid.ndim() != 2) throw Error("the n = 2 dictionary needs a 2-D grid");
    return make_state(map_field(q_on_x, [](double q) { return rotation(q); }));
}

ScalarField to_sge(const GsgeState& s, std::vector<int> basepoint)
{
    if (s.n() != 2) throw Error("the n = 2 dictionary needs n = 2");
    if (basepoint.empty()) basepoint = origin_node(s.grid);
    const ScalarField raw = map_field(s.A, [](const RMat& a) { return std::atan2(a(0, 1), a(0, 0)); });
    return unwrap_phase(raw, 2.0 * std::numbers::pi, basepoint);
}

} // namespace soliton_forge::gsge
