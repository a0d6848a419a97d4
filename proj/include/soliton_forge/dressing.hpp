#pragma once

#include "soliton_forge/zero_curvature.hpp"

#include <map>
#include <string>
#include <vector>

namespace soliton_forge::dressing {

/// v on a grid over R^n with a_i = i e_ii. In the U(n)/O(n) case v is purely imaginary and symmetric,
/// so [a_i, v] is real and skew.
struct UnSolution {
    MatrixField v;
    bool real_form = false;
    double residual = 0.0;
    double tolerance = 1e-3;
    bool verified = false;
    std::map<std::string, double> diagnostics;
    int n() const { return v.values.empty() ? 0 : static_cast<int>(v.values[0].rows()); }
};

/// g(lambda) = pi + ((lambda - conj(alpha)) / (lambda - alpha)) pi^perp.
struct SimpleElement {
    cd alpha;
    Mat pi;
};

/// Ordered product factors[0] * factors[1] * ...
struct RationalLoop {
    std::vector<SimpleElement> factors;
    Mat eval(cd lambda) const;
};

/// lambda -> frame field, normalized to I at the basepoint.
struct FrameFamily {
    GridSpec grid;
    std::vector<int> basepoint;
    std::function<MatrixField(cd)> eval;
};

Mat a_matrix(int n, int i);

/// Max over nodes and pairs i < j of ||[a_i, v_j] - [a_j, v_i] - [[a_i, v], [a_j, v]]||.
double un_residual(const MatrixField& v, int accuracy = 2);
/// Max |v + v^*| and max |diag v|; with real_form also max |Re v|.
double structure_defect(const MatrixField& v, bool real_form);

UnSolution make_solution(MatrixField v, bool real_form = false, double tolerance = 1e-3);
UnSolution vacuum(const GridSpec& g, int n, bool real_form = false);

/// theta_lambda = sum_i (a_i lambda + [a_i, v]) dx_i.
Connection un_lax(const MatrixField& v, cd lambda);

/// Projection checks: max of ||pi^2 - pi|| and ||pi^* - pi||.
double projection_defect(const Mat& pi);
/// Orthogonal projection onto the column span of w; throws when w is rank deficient below tol.
Mat projection_onto(const Mat& w, double tol = 1e-10);
/// Orthonormal basis of Im pi.
Mat image_basis(const Mat& pi);

SimpleElement make_simple(cd alpha, const Mat& pi);
Mat eval_simple(const SimpleElement& g, cd lambda);
/// g_{conj(alpha), pi}.
SimpleElement inverse(const SimpleElement& g);

/// Max over samples of ||g(conj l)^* g(l) - I||.
double unitary_reality_defect(const RationalLoop& f, const std::vector<cd>& samples);
/// Max over samples of ||f(l) - conj(f(-conj l))||.
double real_form_reality_defect(const RationalLoop& f, const std::vector<cd>& samples);
/// Points on a circle around the origin, each at least min_gap from every pole.
std::vector<cd> lambda_samples(const RationalLoop& f, int count = 20, double radius = 2.0, double min_gap = 0.1);

/// Closed-form vacuum frame diag(exp(i lambda x_j)) divided by its basepoint value.
FrameFamily vacuum_frame(const GridSpec& g, std::vector<int> basepoint = {});
/// Integrates un_lax at every requested lambda.
FrameFamily integrated_frame(const UnSolution& s, std::vector<int> basepoint = {}, const FrameOptions& opts = {});

struct DressingResult {
    UnSolution solution;
    FrameFamily frame;
    MatrixField pi_tilde;
    double residue_defect = 0.0;   // max ||pi^perp E(x, alpha) pi~(x)||
    double projection_drift = 0.0; // max projection_defect(pi~)
};

/// v~ = v + (alpha - conj alpha) offdiag(pi~), pi~ the projection onto E(x, alpha)^{-1} Im pi.
DressingResult dress_algebraic(const UnSolution& s, const FrameFamily& E, const SimpleElement& g);

struct OdeOptions {
    int substeps = 1;
    Interp interp = Interp::Cubic;
    std::vector<int> basepoint;
    bool check_seed = true;
};

/// Integrates d_j pi~ = -[alpha a_j + [a_j, v], pi~] + (alpha - conj alpha)[a_j, pi~] pi~^perp.
DressingResult dress_ode(const UnSolution& s, const SimpleElement& g, const Mat& pi0, const OdeOptions& opts = {});

/// Integrates dy = -theta_alpha y for the columns of y0 and projects onto their span.
DressingResult dress_linear(const UnSolution& s, const SimpleElement& g, const Mat& y0, const OdeOptions& opts = {});

/// tau_1, tau_2 with g_{a2,tau2} g_{a1,pi1} = g_{a1,tau1} g_{a2,pi2}.
std::pair<SimpleElement, SimpleElement> loop_permutability(const SimpleElement& g1, const SimpleElement& g2);

/// f = g_{-conj a, rho} g_{a, pi} with Im rho = g_{a,pi}(-conj a)(Im conj pi).
RationalLoop compose_f_element(cd alpha, const Mat& pi);

/// Applies the factors right to left by repeated algebraic dressing.
DressingResult dress_loop(const UnSolution& s, const FrameFamily& E, const RationalLoop& f);

/// Y = E(x, 1) E(x, -1)^{-1}.
MatrixField curved_flat(const FrameFamily& E);

double max_difference(const MatrixField& a, const MatrixField& b);

} // namespace soliton_forge::dressing
