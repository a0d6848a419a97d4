#include "soliton_forge/dressing.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace soliton_forge::dressing {

namespace {

const cd I1(0.0, 1.0);

Mat comm(const Mat& a, const Mat& b)
{
    return a * b - b * a;
}

Mat offdiag(const Mat& m)
{
    Mat o = m;
    o.diagonal().setZero();
    return o;
}

void check_grid(const MatrixField& v)
{
    v.grid.validate();
    if (v.values.empty()) throw Error("empty U(n) field");
    const Eigen::Index n = v.values[0].rows();
    if (n < 2) throw Error("U(n)-system needs n >= 2");
    if (v.grid.ndim() != n) throw Error("U(n)-system grid dimension must equal n");
    for (const auto& m : v.values)
        if (m.rows() != n || m.cols() != n) throw Error("v must be n x n at every node");
}

double real_part_max(const MatrixField& v)
{
    double m = 0.0;
    for (const auto& x : v.values) m = std::max(m, x.real().cwiseAbs().maxCoeff());
    return m;
}

void check_seed(const UnSolution& s, bool enabled)
{
    check_grid(s.v);
    if (!enabled) return;
    const double r = un_residual(s.v);
    if (!(r <= s.tolerance)) throw Error("seed is not a U(n)-system solution: compatibility defect " + std::to_string(r));
}

UnSolution dressed_solution(const UnSolution& s, const SimpleElement& g, const MatrixField& pit)
{
    const cd c = g.alpha - std::conj(g.alpha);
    std::vector<Mat> v(pit.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = s.v[k] + c * offdiag(pit[k]);
    MatrixField vf(s.v.grid, std::move(v));
    const double re = real_part_max(vf);
    UnSolution out = make_solution(std::move(vf), s.real_form && re <= 1e-10, s.tolerance);
    out.diagnostics["real_part"] = re;
    return out;
}

// Dressed frame g(l) E(l) g_{conj alpha, pi~(x)}(l).
FrameFamily dressed_family(const FrameFamily& E, const SimpleElement& g, const MatrixField& pit)
{
    auto base = std::make_shared<FrameFamily>(E);
    auto pis = std::make_shared<MatrixField>(pit);
    FrameFamily out;
    out.grid = E.grid;
    out.basepoint = E.basepoint;
    out.eval = [base, pis, g](cd lambda) {
        const MatrixField e = base->eval(lambda);
        const Mat gl = eval_simple(g, lambda);
        std::vector<Mat> vals(e.size());
        parallel_for(vals.size(), [&](std::size_t k) {
            vals[k] = gl * e[k] * eval_simple(SimpleElement{std::conj(g.alpha), (*pis)[k]}, lambda);
        });
        return MatrixField(e.grid, std::move(vals));
    };
    return out;
}

DressingResult finish(const UnSolution& s, const SimpleElement& g, MatrixField pit, const FrameFamily* E)
{
    DressingResult r;
    for (const auto& p : pit.values) r.projection_drift = std::max(r.projection_drift, projection_defect(p));
    r.solution = dressed_solution(s, g, pit);
    if (E) r.frame = dressed_family(*E, g, pit);
    r.pi_tilde = std::move(pit);
    return r;
}

Mat theta_alpha(const Mat& v, cd alpha, int j)
{
    const Mat a = a_matrix(static_cast<int>(v.rows()), j);
    return alpha * a + comm(a, v);
}

} // namespace

Mat RationalLoop::eval(cd lambda) const
{
    if (factors.empty()) throw Error("empty rational loop");
    const Eigen::Index n = factors[0].pi.rows();
    Mat m = Mat::Identity(n, n);
    for (const auto& g : factors) m = m * eval_simple(g, lambda);
    return m;
}

Mat a_matrix(int n, int i)
{
    Mat a = Mat::Zero(n, n);
    a(i, i) = I1;
    return a;
}

double un_residual(const MatrixField& v, int accuracy)
{
    check_grid(v);
    const int n = v.grid.ndim();
    std::vector<MatrixField> dv;
    for (int i = 0; i < n; ++i) dv.push_back(partial_derivative(v, i, accuracy));
    std::vector<double> worst(v.size(), 0.0);
    parallel_for(v.size(), [&](std::size_t k) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            const Mat ai = a_matrix(n, i);
            for (int j = i + 1; j < n; ++j) {
                const Mat aj = a_matrix(n, j);
                const Mat r = comm(ai, dv[j][k]) - comm(aj, dv[i][k]) - comm(comm(ai, v[k]), comm(aj, v[k]));
                m = std::max(m, r.allFinite() ? op_norm(r) : INFINITY);
            }
        }
        worst[k] = m;
    });
    return max_abs(ScalarField(v.grid, std::move(worst)));
}

double structure_defect(const MatrixField& v, bool real_form)
{
    double m = 0.0;
    for (const auto& x : v.values) {
        m = std::max({m, (x + x.adjoint()).cwiseAbs().maxCoeff(), x.diagonal().cwiseAbs().maxCoeff()});
        if (real_form) m = std::max(m, x.real().cwiseAbs().maxCoeff());
    }
    return m;
}

UnSolution make_solution(MatrixField v, bool real_form, double tolerance)
{
    check_grid(v);
    UnSolution s;
    s.residual = un_residual(v);
    s.diagnostics["structure_defect"] = structure_defect(v, real_form);
    s.v = std::move(v);
    s.real_form = real_form;
    s.tolerance = tolerance;
    s.verified = s.residual <= tolerance && s.diagnostics["structure_defect"] <= 1e-8;
    return s;
}

UnSolution vacuum(const GridSpec& g, int n, bool real_form)
{
    if (g.ndim() != n) throw Error("U(n)-system grid dimension must equal n");
    return make_solution(MatrixField(g, Mat::Zero(n, n)), real_form);
}

Connection un_lax(const MatrixField& v, cd lambda)
{
    check_grid(v);
    const int n = v.grid.ndim();
    return make_connection(
        v.grid, n, [&](int i, std::size_t k) { return Mat(theta_alpha(v[k], lambda, i)); }, lambda);
}

double projection_defect(const Mat& pi)
{
    return std::max((pi * pi - pi).norm(), (pi.adjoint() - pi).norm());
}

Mat projection_onto(const Mat& w, double tol)
{
    if (w.cols() == 0) throw Error("empty span");
    Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > tol * std::max(sv(0), 1e-300)) || !w.allFinite())
        throw Error("transported image is degenerate (outside the big cell)");
    const Mat U = svd.matrixU();
    return U * U.adjoint();
}

Mat image_basis(const Mat& pi)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat((pi + pi.adjoint()) / 2.0));
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < pi.rows(); ++i)
        if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
    Mat b(pi.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
    return b;
}

SimpleElement make_simple(cd alpha, const Mat& pi)
{
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw Error("alpha must be finite");
    if (!(std::abs(alpha.imag()) > 1e-14)) throw Error("alpha must have nonzero imaginary part");
    if (pi.rows() != pi.cols() || pi.rows() < 1) throw Error("pi must be square");
    if (!(projection_defect(pi) <= 1e-12)) throw Error("pi must be a Hermitian projection");
    return SimpleElement{alpha, pi};
}

Mat eval_simple(const SimpleElement& g, cd lambda)
{
    const cd d = lambda - g.alpha;
    if (std::abs(d) <= 1e-300) throw Error("lambda is a pole of the simple element");
    const Eigen::Index n = g.pi.rows();
    if (!std::isfinite(std::abs(lambda))) return Mat::Identity(n, n);
    const cd f = (lambda - std::conj(g.alpha)) / d;
    return g.pi + f * (Mat::Identity(n, n) - g.pi);
}

SimpleElement inverse(const SimpleElement& g)
{
    return SimpleElement{std::conj(g.alpha), g.pi};
}

double unitary_reality_defect(const RationalLoop& f, const std::vector<cd>& samples)
{
    double m = 0.0;
    for (cd l : samples) {
        const Mat a = f.eval(l);
        const Mat b = f.eval(std::conj(l));
        m = std::max(m, op_norm(Mat(b.adjoint() * a - Mat::Identity(a.rows(), a.cols()))));
    }
    return m;
}

double real_form_reality_defect(const RationalLoop& f, const std::vector<cd>& samples)
{
    double m = 0.0;
    for (cd l : samples) m = std::max(m, op_norm(Mat(f.eval(l) - f.eval(-std::conj(l)).conjugate())));
    return m;
}

std::vector<cd> lambda_samples(const RationalLoop& f, int count, double radius, double min_gap)
{
    std::vector<cd> poles;
    for (const auto& g : f.factors) {
        poles.push_back(g.alpha);
        poles.push_back(std::conj(g.alpha));
    }
    std::vector<cd> out;
    for (int k = 0; k < count; ++k) {
        for (int j = 0; j < 200; ++j) {
            const cd l = std::polar(radius, 2.0 * std::numbers::pi * (k + 0.37) / count + 0.013 * j);
            bool ok = true;
            for (cd p : poles) ok = ok && std::abs(l - p) >= min_gap;
            if (ok) {
                out.push_back(l);
                break;
            }
        }
    }
    if (static_cast<int>(out.size()) < count) throw Error("could not place lambda samples away from the poles");
    return out;
}

FrameFamily vacuum_frame(const GridSpec& g, std::vector<int> basepoint)
{
    g.validate();
    if (basepoint.empty()) basepoint = origin_node(g);
    const std::vector<double> x0 = g.point(g.flat(basepoint));
    FrameFamily f;
    f.grid = g;
    f.basepoint = basepoint;
    f.eval = [g, x0](cd lambda) {
        const int n = g.ndim();
        std::vector<Mat> vals(g.size());
        parallel_for(vals.size(), [&](std::size_t k) {
            const auto x = g.point(k);
            Mat e = Mat::Zero(n, n);
            for (int j = 0; j < n; ++j) e(j, j) = std::exp(I1 * lambda * (x[j] - x0[j]));
            vals[k] = e;
        });
        return MatrixField(g, std::move(vals));
    };
    return f;
}

FrameFamily integrated_frame(const UnSolution& s, std::vector<int> basepoint, const FrameOptions& opts)
{
    check_grid(s.v);
    if (basepoint.empty()) basepoint = origin_node(s.v.grid);
    auto v = std::make_shared<MatrixField>(s.v);
    FrameFamily f;
    f.grid = s.v.grid;
    f.basepoint = basepoint;
    f.eval = [v, basepoint, opts](cd lambda) {
        FrameOptions o = opts;
        o.flatness_tolerance = 0.0;
        const int n = v->grid.ndim();
        return integrate_frame(un_lax(*v, lambda), Mat::Identity(n, n), basepoint, o).values;
    };
    return f;
}

DressingResult dress_algebraic(const UnSolution& s, const FrameFamily& E, const SimpleElement& g)
{
    check_grid(s.v);
    if (!E.grid.same_as(s.v.grid)) throw Error("frame and solution live on different grids");
    const int n = s.n();
    if (g.pi.rows() != n) throw Error("projection has wrong size");
    const Mat B = image_basis(g.pi);
    if (B.cols() == 0) throw Error("projection has rank zero");
    const MatrixField Ea = E.eval(g.alpha);
    std::vector<Mat> pit(Ea.size());
    std::vector<double> residue(Ea.size());
    const Mat perp = Mat::Identity(n, n) - g.pi;
    parallel_for(pit.size(), [&](std::size_t k) {
        pit[k] = projection_onto(Ea[k].partialPivLu().solve(B));
        residue[k] = op_norm(Mat(perp * Ea[k] * pit[k]));
    });
    DressingResult r = finish(s, g, MatrixField(s.v.grid, std::move(pit)), &E);
    r.residue_defect = max_abs(ScalarField(s.v.grid, std::move(residue)));
    return r;
}

DressingResult dress_ode(const UnSolution& s, const SimpleElement& g, const Mat& pi0, const OdeOptions& opts)
{
    check_seed(s, opts.check_seed);
    const int n = s.n();
    if (pi0.rows() != n || pi0.cols() != n) throw Error("initial projection has wrong size");
    if (!(projection_defect(pi0) <= 1e-10)) throw Error("initial value must be a Hermitian projection");
    if (!((pi0 - g.pi).norm() <= 1e-8)) throw Error("initial projection must equal pi at the normalized basepoint");
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(s.v.grid) : opts.basepoint;
    const cd c = g.alpha - std::conj(g.alpha);
    LineIntegration li;
    li.substeps = opts.substeps;
    li.interp = opts.interp;
    auto vals = sweep_rk4<Mat>(s.v.grid, base, pi0, li, [&](const Line& line, double p, const Mat& P) {
        const Mat v = line.at(s.v, p);
        const Mat a = a_matrix(n, line.axis);
        const Mat th = g.alpha * a + comm(a, v);
        return Mat(-comm(th, P) + c * comm(a, P) * (Mat::Identity(n, n) - P));
    });
    return finish(s, g, MatrixField(s.v.grid, std::move(vals)), nullptr);
}

DressingResult dress_linear(const UnSolution& s, const SimpleElement& g, const Mat& y0, const OdeOptions& opts)
{
    check_seed(s, opts.check_seed);
    const int n = s.n();
    const Mat Y0 = y0.size() ? y0 : image_basis(g.pi);
    if (Y0.rows() != n || Y0.cols() < 1) throw Error("initial vectors have wrong size");
    const std::vector<int> base = opts.basepoint.empty() ? origin_node(s.v.grid) : opts.basepoint;
    LineIntegration li;
    li.substeps = opts.substeps;
    li.interp = opts.interp;
    auto ys = sweep_rk4<Mat>(s.v.grid, base, Y0, li, [&](const Line& line, double p, const Mat& y) {
        return Mat(-theta_alpha(line.at(s.v, p), g.alpha, line.axis) * y);
    });
    std::vector<Mat> pit(ys.size());
    double gram = INFINITY;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        Mat y = ys[k];
        for (Eigen::Index c = 0; c < y.cols(); ++c) y.col(c).normalize();
        gram = std::min(gram, std::abs((y.adjoint() * y).determinant()));
    }
    if (!(gram >= 1e-10)) throw Error("linear solutions became linearly dependent");
    for (std::size_t k = 0; k < ys.size(); ++k) pit[k] = projection_onto(ys[k]);
    DressingResult r = finish(s, g, MatrixField(s.v.grid, std::move(pit)), nullptr);
    r.solution.diagnostics["min_gram"] = gram;
    return r;
}

std::pair<SimpleElement, SimpleElement> loop_permutability(const SimpleElement& g1, const SimpleElement& g2)
{
    const double tol = 1e-12 * std::max(1.0, std::abs(g1.alpha));
    if (std::abs(g1.alpha - g2.alpha) <= tol || std::abs(g1.alpha - std::conj(g2.alpha)) <= tol ||
        std::abs(g1.alpha + std::conj(g2.alpha)) <= tol)
        throw Error("loop permutability needs alpha1 not in {alpha2, +-conj(alpha2)}");
    if (g1.pi.rows() != g2.pi.rows()) throw Error("projections have different sizes");
    const Mat t1 = projection_onto(eval_simple(g2, g1.alpha) * image_basis(g1.pi));
    const Mat t2 = projection_onto(eval_simple(g1, g2.alpha) * image_basis(g2.pi));
    return {SimpleElement{g1.alpha, t1}, SimpleElement{g2.alpha, t2}};
}

RationalLoop compose_f_element(cd alpha, const Mat& pi)
{
    if (!(std::abs(alpha.real()) > 1e-14)) throw Error("alpha lies on the imaginary axis; use g_{is,pi} directly");
    const SimpleElement g = make_simple(alpha, pi);
    const cd beta = -std::conj(alpha);
    const Mat rho = projection_onto(eval_simple(g, beta) * image_basis(Mat(pi.conjugate())));
    return RationalLoop{{SimpleElement{beta, rho}, g}};
}

DressingResult dress_loop(const UnSolution& s, const FrameFamily& E, const RationalLoop& f)
{
    if (f.factors.empty()) throw Error("empty rational loop");
    UnSolution cur = s;
    cur.real_form = false;
    FrameFamily fam = E;
    DressingResult r;
    for (auto it = f.factors.rbegin(); it != f.factors.rend(); ++it) {
        r = dress_algebraic(cur, fam, *it);
        cur = r.solution;
        fam = r.frame;
    }
    const double re = real_part_max(r.solution.v);
    r.solution.real_form = s.real_form && re <= 1e-10;
    r.solution.diagnostics["real_part"] = re;
    return r;
}

MatrixField curved_flat(const FrameFamily& E)
{
    const MatrixField p = E.eval(cd(1.0));
    const MatrixField m = E.eval(cd(-1.0));
    std::vector<Mat> y(p.size());
    parallel_for(y.size(), [&](std::size_t k) { y[k] = p[k] * m[k].inverse(); });
    return MatrixField(p.grid, std::move(y));
}

double max_difference(const MatrixField& a, const MatrixField& b)
{
    if (!a.grid.same_as(b.grid)) throw Error("fields live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double e = (a[k] - b[k]).cwiseAbs().maxCoeff();
        if (!std::isfinite(e)) return INFINITY;
        m = std::max(m, e);
    }
    return m;
}

} // namespace soliton_forge::dressing
