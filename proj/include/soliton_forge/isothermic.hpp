#pragma once

#include "soliton_forge/surfaces.hpp"

#include <map>
#include <string>

namespace soliton_forge::isothermic {

struct IsoResidual {
    ScalarField gauss;     // q_11 + q_22 + r1 r2
    ScalarField codazzi1;  // (r1)_2 - q_2 r2
    ScalarField codazzi2;  // (r2)_1 - q_1 r1
    double max() const;
};

/// Data (q, r1, r2) on a 2-D grid over (x1, x2).
struct IsothermicData {
    ScalarField q, r1, r2;
    IsoResidual residual;
    double tolerance = 1e-3;
    bool verified = false;
    const GridSpec& grid() const { return q.grid; }
};

IsoResidual iso_residual(const ScalarField& q, const ScalarField& r1, const ScalarField& r2, int accuracy = 2);
IsothermicData make_data(ScalarField q, ScalarField r1, ScalarField r2, double tolerance = 1e-3);

/// (q, r1, r2) -> (-q, r1, -r2).
IsothermicData christoffel_dual_data(const IsothermicData& d);

IsothermicData plane(const GridSpec& g);
IsothermicData cylinder(const GridSpec& g);
/// q = -log cosh x1 (clamped to |q| <= 20), r1 = r2 = sech x1.
IsothermicData sphere(const GridSpec& g);

/// 5x5 connection [[w, lambda D], [-lambda J D^T, tau]], J = diag(1, -1).
Connection iso_lax(const IsothermicData& d, cd lambda);
/// Same connection assembled as sum_i (a_i lambda + [a_i, v]) dx_i.
Connection iso_lax_bracket(const IsothermicData& d, cd lambda);
/// Max of |conj(theta_{conj l}) - theta_l| and |I_{3,2} theta_l I_{3,2} - theta_{-l}|.
double iso_reality_defect(const IsothermicData& d, cd lambda);

struct ChristoffelPair {
    surfaces::ImmersionField f;
    surfaces::ImmersionField f_dual;
    std::map<std::string, double> diagnostics;
};

struct PairOptions {
    FrameOptions frame;
    std::vector<int> basepoint;
    double dlambda = 1e-4;
    bool check_data = true;
    /// Max allowed |d zeta| in method 1.
    double closure_tolerance = 1e-3;
};

/// Frame at lambda = 0 split as diag(g1, g2), zeta = g1 (delta; 0) g2^{-1}, dY = zeta, pair = Y [[1,1],[1,-1]].
/// g2 carries the basepoint value of q, so the frame is E(x0) = diag(I, g2(x0)) in both methods.
ChristoffelPair christoffel_pair_method1(const IsothermicData& d, const PairOptions& opts = {});
/// Z = upper-right block of dE/dlambda E^{-1} at 0 (times g2(x0)^{-1}), pair = Z [[1,1],[1,-1]].
ChristoffelPair christoffel_pair_method2(const IsothermicData& d, const PairOptions& opts = {});

struct PairReport {
    double first_form_f = 0.0;     // max |I - e^{2q} (dx1^2 + dx2^2)| coefficientwise
    double first_form_dual = 0.0;  // same with e^{-2q}
    double second_form_f = 0.0;    // best global sign against e^q (r1, 0, r2)
    double second_form_dual = 0.0; // against e^{-q} (r1, 0, -r2)
    double conformality = 0.0;     // max |F| / ((E + G) / 2) over both surfaces
    double normal_alignment = 0.0; // max 1 - |n_f . n_dual|
    double principal_alignment = 0.0;
    bool orientation_reversing = false;
    bool passed = false;
};

PairReport verify_pair(const ChristoffelPair& p, const IsothermicData& d, double tolerance = 1e-3);

/// Max pointwise distance after removing the mean offset.
double translation_distance(const PointField& a, const PointField& b);

} // namespace soliton_forge::isothermic
