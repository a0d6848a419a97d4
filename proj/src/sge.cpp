#include "soliton_forge/sge.hpp"

#include <cmath>
#include <numbers>

namespace soliton_forge::sge {

namespace {

void check_grid2(const GridSpec& g)
{
    g.validate();
    if (g.ndim() != 2) throw Error("SGE solutions live on a 2-D (s,t) grid");
}

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

void check_mu(double mu)
{
    if (mu == 0.0 || !std::isfinite(mu)) throw Error("mu must be a nonzero real");
}

ScalarField sge_residual(const ScalarField& q, int accuracy)
{
    check_grid2(q.grid);
    const ScalarField qst = partial_derivative(partial_derivative(q, 0, accuracy), 1, accuracy);
    std::vector<double> r(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) r[k] = qst[k] - std::sin(q[k]) * std::cos(q[k]);
    return ScalarField(q.grid, std::move(r));
}

SgeSolution make_solution(ScalarField q, std::vector<double> mu_history, double tolerance)
{
    SgeSolution s;
    s.residual = max_abs(sge_residual(q));
    s.q = std::move(q);
    s.mu_history = std::move(mu_history);
    s.tolerance = tolerance;
    s.verified = s.residual <= tolerance;
    return s;
}

SgeSolution vacuum(const GridSpec& g)
{
    check_grid2(g);
    return make_solution(ScalarField(g, 0.0));
}

double one_soliton_value(double mu, double s, double t)
{
    const double e = mu * s + t / mu;
    if (e > 700.0) return std::numbers::pi;
    if (e < -700.0) return 0.0;
    return 2.0 * std::atan(std::exp(e));
}

SgeSolution one_soliton(const GridSpec& g, double mu)
{
    check_grid2(g);
    check_mu(mu);
    auto q = sample(g, [mu](const std::vector<double>& x) { return one_soliton_value(mu, x[0], x[1]); });
    return make_solution(std::move(q), {mu});
}

namespace {

ScalarField integrate_bt(const ScalarField& q, const ScalarField& qs, const ScalarField& qt, double mu, double qstar0,
                         const std::vector<int>& base, const LineIntegration& li)
{
    auto vals = sweep_rk4<double>(q.grid, base, qstar0, li, [&](const Line& line, double p, double w) {
        const double qq = line.at(q, p);
        if (line.axis == 0) return -line.at(qs, p) + mu * std::sin(w - qq);
        return line.at(qt, p) + std::sin(w + qq) / mu;
    });
    return ScalarField(q.grid, std::move(vals));
}

} // namespace

SgeSolution backlund(const SgeSolution& seed, double mu, double qstar0, const BacklundOptions& opts)
{
    check_grid2(seed.q.grid);
    check_mu(mu);
    const double seed_res = max_abs(sge_residual(seed.q));
    if (opts.check_seed && !(seed_res <= opts.tolerance))
        throw Error("seed is not an SGE solution: compatibility defect " + std::to_string(seed_res));

    const std::vector<int> base = opts.basepoint.empty() ? origin_node(seed.q.grid) : opts.basepoint;
    const ScalarField qs = partial_derivative(seed.q, 0, 4);
    const ScalarField qt = partial_derivative(seed.q, 1, 4);

    LineIntegration li;
    li.substeps = opts.substeps;
    li.interp = opts.interp;
    ScalarField out = integrate_bt(seed.q, qs, qt, mu, qstar0, base, li);

    std::vector<double> hist = seed.mu_history;
    hist.push_back(mu);
    SgeSolution res = make_solution(out, hist, opts.tolerance);
    res.diagnostics["seed_residual"] = seed_res;
    res.diagnostics["bt_residual"] = bt_residual(seed.q, out, mu).max();
    if (opts.path_diagnostic) {
        li.path = PathPolicy::ReverseOrdered;
        ScalarField rev = integrate_bt(seed.q, qs, qt, mu, qstar0, base, li);
        double d = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) d = std::max(d, std::abs(out[k] - rev[k]));
        res.diagnostics["path_defect"] = d;
    }
    return res;
}

BtResidual bt_residual(const ScalarField& q, const ScalarField& qstar, double mu, int accuracy)
{
    check_mu(mu);
    if (!q.grid.same_as(qstar.grid)) throw Error("fields live on different grids");
    std::vector<double> sum(q.size()), diff(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        sum[k] = qstar[k] + q[k];
        diff[k] = qstar[k] - q[k];
    }
    const ScalarField ds = partial_derivative(ScalarField(q.grid, sum), 0, accuracy);
    const ScalarField dt = partial_derivative(ScalarField(q.grid, diff), 1, accuracy);
    BtResidual r;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double e1 = std::abs(ds[k] - mu * std::sin(diff[k]));
        const double e2 = std::abs(dt[k] - std::sin(sum[k]) / mu);
        if (!std::isfinite(e1) || !std::isfinite(e2)) return {INFINITY, INFINITY};
        r.s_equation = std::max(r.s_equation, e1);
        r.t_equation = std::max(r.t_equation, e2);
    }
    return r;
}

SgeSolution permutability(const SgeSolution& q0, const SgeSolution& q1, const SgeSolution& q2, double mu1,
                          double mu2, std::vector<int> basepoint)
{
    check_mu(mu1);
    check_mu(mu2);
    if (std::abs(std::abs(mu1) - std::abs(mu2)) <= 1e-14 * std::max(std::abs(mu1), std::abs(mu2)))
        throw Error("permutability needs mu1 != +-mu2");
    const GridSpec& g = q0.q.grid;
    if (!g.same_as(q1.q.grid) || !g.same_as(q2.q.grid)) throw Error("solutions live on different grids");
    if (basepoint.empty()) basepoint = origin_node(g);

    const double K = (mu1 + mu2) / (mu1 - mu2);
    std::vector<double> raw(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double half = 0.5 * (q2.q[k] - q1.q[k]);
        raw[k] = 2.0 * std::atan2(K * std::sin(half), std::cos(half));
    }

    const ScalarField phase = unwrap_phase(ScalarField(g, std::move(raw)), two_pi, basepoint);
    std::vector<double> q3(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) q3[k] = q0.q[k] + phase[k];
    std::vector<double> hist = q1.mu_history;
    hist.push_back(mu2);
    return make_solution(ScalarField(g, std::move(q3)), hist, q0.tolerance);
}

SgeSolution lie_transform(const SgeSolution& q, double r, const GridSpec* target)
{
    if (r == 0.0 || !std::isfinite(r)) throw Error("Lie transform parameter must be a nonzero real");
    const GridSpec& src = q.q.grid;
    check_grid2(src);
    const GridSpec& out = target ? *target : src;
    check_grid2(out);

    const double tol = 1e-9;
    std::vector<double> vals(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto x = out.point(k);
        const double u[2] = {(r * x[0] - src.origin[0]) / src.spacing[0], (x[1] / r - src.origin[1]) / src.spacing[1]};
        int i[2];
        double f[2];
        for (int a = 0; a < 2; ++a) {
            if (u[a] < -tol || u[a] > src.dims[a] - 1 + tol) throw Error("Lie transform samples outside the source grid");
            i[a] = std::clamp(static_cast<int>(std::floor(u[a])), 0, src.dims[a] - 2);
            f[a] = std::clamp(u[a] - i[a], 0.0, 1.0);
        }
        auto at = [&](int a, int b) { return q.q[src.flat({i[0] + a, i[1] + b})]; };
        vals[k] = (1 - f[0]) * (1 - f[1]) * at(0, 0) + f[0] * (1 - f[1]) * at(1, 0) + (1 - f[0]) * f[1] * at(0, 1) +
                  f[0] * f[1] * at(1, 1);
    }
    std::vector<double> hist;
    for (double mu : q.mu_history) hist.push_back(mu * r);
    return make_solution(ScalarField(out, std::move(vals)), hist, q.tolerance);
}

std::map<unsigned, SgeSolution> multi_soliton_lattice(const GridSpec& g, const std::vector<double>& mus)
{
    if (mus.empty()) throw Error("need at least one mu");
    if (mus.size() > 16) throw Error("too many solitons");
    for (std::size_t i = 0; i < mus.size(); ++i) {
        check_mu(mus[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(std::abs(mus[i]) - std::abs(mus[j])) <= 1e-14 * std::abs(mus[i]))
                throw Error("multi-soliton parameters must have distinct absolute values");
    }
    std::map<unsigned, SgeSolution> lat;
    lat.emplace(0u, vacuum(g));
    for (std::size_t i = 0; i < mus.size(); ++i) lat.emplace(1u << i, one_soliton(g, mus[i]));
    const unsigned full = (1u << mus.size()) - 1;
    for (unsigned level = 2; level <= mus.size(); ++level) {
        for (unsigned S = 1; S <= full; ++S) {
            if (static_cast<unsigned>(__builtin_popcount(S)) != level) continue;
            // Two highest members a < b; q0 = q_{S-a-b}, q1 = q_{S-b}, q2 = q_{S-a}.
            int b = 31 - __builtin_clz(S);
            unsigned rest = S & ~(1u << b);
            int a = 31 - __builtin_clz(rest);
            unsigned base = rest & ~(1u << a);
            lat.emplace(S, permutability(lat.at(base), lat.at(S & ~(1u << b)), lat.at(S & ~(1u << a)), mus[a], mus[b]));
        }
    }
    return lat;
}

SgeSolution multi_soliton(const GridSpec& g, const std::vector<double>& mus)
{
    auto lat = multi_soliton_lattice(g, mus);
    SgeSolution top = lat.at((1u << mus.size()) - 1);
    double worst = 0.0;
    for (const auto& [k, s] : lat) worst = std::max(worst, s.residual);
    top.diagnostics["lattice_max_residual"] = worst;
    top.mu_history = mus;
    return top;
}

Connection sge_lax(const ScalarField& q, cd lambda)
{
    check_grid2(q.grid);
    if (lambda == cd(0.0)) throw Error("lambda must be nonzero");
    const ScalarField qs = partial_derivative(q, 0, 4);
    const cd I(0.0, 1.0);
    return make_connection(
        q.grid, 2,
        [&](int axis, std::size_t k) {
            Mat m(2, 2);
            if (axis == 0) {
                m << -I * lambda, -qs[k], qs[k], I * lambda;
            } else {
                const double c = std::cos(2 * q[k]), s = std::sin(2 * q[k]);
                const cd f = I / (4.0 * lambda);
                m << f * c, -f * s, -f * s, -f * c;
            }
            return m;
        },
        lambda);
}

} // namespace soliton_forge::sge
