#pragma once

#include "soliton_forge/zero_curvature.hpp"

#include <map>
#include <string>
#include <vector>

namespace soliton_forge::sge {

/// Scalar q(s,t) on a 2-D grid (axis 0 = s, axis 1 = t) for q_st = sin q cos q.
struct SgeSolution {
    ScalarField q;
    std::vector<double> mu_history;
    double residual = 0.0;
    double tolerance = 1e-3;
    bool verified = false;
    std::map<std::string, double> diagnostics;
};

inline constexpr const char* convention = "q_st=sin q cos q";

void check_mu(double mu);

/// q_st - sin q cos q with the mixed partial taken as a composition of first differences.
ScalarField sge_residual(const ScalarField& q, int accuracy = 2);

/// Wraps a field and records its residual and verified flag.
SgeSolution make_solution(ScalarField q, std::vector<double> mu_history = {}, double tolerance = 1e-3);

SgeSolution vacuum(const GridSpec& g);

/// 2 arctan(exp(mu s + t / mu)) at one point, exponent clamped to +-700.
double one_soliton_value(double mu, double s, double t);

SgeSolution one_soliton(const GridSpec& g, double mu);

struct BacklundOptions {
    int substeps = 1;
    Interp interp = Interp::Cubic;
    /// Empty means the node closest to (0,0).
    std::vector<int> basepoint;
    double tolerance = 1e-3;
    /// Reject seeds whose SGE residual exceeds the tolerance.
    bool check_seed = true;
    /// Integrate the reverse axis order too and record the discrepancy as "path_defect".
    bool path_diagnostic = true;
};

/// Solves (q*+q)_s = mu sin(q*-q), (q*-q)_t = (1/mu) sin(q*+q), q*(basepoint) = qstar0.
SgeSolution backlund(const SgeSolution& q, double mu, double qstar0, const BacklundOptions& opts = {});

/// Max-norm residuals of the two equations of BT_{q,mu} for the pair (q, qstar).
struct BtResidual {
    double s_equation = 0.0;
    double t_equation = 0.0;
    double max() const { return std::max(s_equation, t_equation); }
};
BtResidual bt_residual(const ScalarField& q, const ScalarField& qstar, double mu, int accuracy = 2);

/// q3 = q0 + 2 arctan(((mu1+mu2)/(mu1-mu2)) tan((q2-q1)/2)), where q_i = BT(q0, mu_i).
/// The branch is principal at the basepoint and continued along grid lines by multiples of 2 pi.
SgeSolution permutability(const SgeSolution& q0, const SgeSolution& q1, const SgeSolution& q2, double mu1,
                          double mu2, std::vector<int> basepoint = {});

/// q~(s,t) = q(r s, t / r), bilinear resampling onto target (defaults to q's grid).
SgeSolution lie_transform(const SgeSolution& q, double r, const GridSpec* target = nullptr);

/// Bianchi lattice from the vacuum. Keys are bitmasks over the mu list.
std::map<unsigned, SgeSolution> multi_soliton_lattice(const GridSpec& g, const std::vector<double>& mus);
SgeSolution multi_soliton(const GridSpec& g, const std::vector<double>& mus);

/// theta = ([[-i l, -q_s],[q_s, i l]]) ds + (i/(4 l)) [[cos 2q, -sin 2q],[-sin 2q, -cos 2q]] dt.
Connection sge_lax(const ScalarField& q, cd lambda);

} // namespace soliton_forge::sge
