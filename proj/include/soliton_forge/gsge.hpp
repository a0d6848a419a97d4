#pragma once

#include "soliton_forge/surfaces.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace soliton_forge::gsge {

inline constexpr const char* convention = "J=I_{1,n-1}";

/// Max-norm residuals of the three equation groups, per node and overall.
struct GsgeResidual {
    ScalarField curvature;   // (f_ij)_j + (f_ji)_i + sum_k f_ik f_jk - a_1i a_1j
    ScalarField torsion;     // (f_ij)_k - f_ik f_kj, i,j,k distinct
    ScalarField structure;   // (a_ki)_j - a_kj f_ij
    double max_curvature = 0.0;
    double max_torsion = 0.0;
    double max_structure = 0.0;
    double max() const;
};

struct GsgeState {
    GridSpec grid;
    RealMatrixField A;
    RealMatrixField F;
    std::vector<std::uint8_t> flagged;
    GsgeResidual residual;
    double orthogonality = 0.0;  // max ||A^T A - I||
    double tolerance = 1e-3;
    bool verified = false;
    std::map<std::string, double> diagnostics;
    int n() const { return A.values.empty() ? 0 : static_cast<int>(A.values[0].rows()); }
};

RMat J_matrix(int n);
/// (lambda I + lambda^{-1} J) / 2.
RMat D_lambda(int n, double lambda);
Mat D_lambda(int n, cd lambda);
/// csc(theta) + cot(theta); D_lambda then equals diag(csc theta, cot theta, ..., cot theta).
double lambda_from_theta(double theta);

struct FOptions {
    int accuracy = 4;
    /// Nodes with some |a_1j| below this use the division-free form F_ji = (A^T d_i A)_ij.
    double threshold = 5e-2;
    /// More flagged nodes than this fraction is an error.
    double max_flagged_fraction = 1.0;
};

struct FResult {
    RealMatrixField F;
    std::vector<std::uint8_t> flagged;
    double frame_residual = 0.0;  // max ||dA - A(delta F^T - F delta)||
};

/// f_ij = (a_1i)_{x_j} / a_1j for i != j, zero diagonal.
FResult f_from_a(const RealMatrixField& A, const FOptions& opts = {});

/// Max over nodes and axes of ||d_k A - A(e_kk F^T - F e_kk)||.
double frame_residual(const RealMatrixField& A, const RealMatrixField& F, int accuracy = 2);

GsgeResidual gsge_residual(const RealMatrixField& A, const RealMatrixField& F, int accuracy = 2);

/// Builds a state from A (F derived) and records residuals.
GsgeState make_state(RealMatrixField A, double tolerance = 1e-3);
GsgeState make_state(RealMatrixField A, RealMatrixField F, double tolerance = 1e-3);

/// A = I on every node.
GsgeState vacuum(const GridSpec& g, int n);

/// theta_k = [[omega_k, e_kk A^T D], [D A e_kk, 0]] with omega_k = e_kk F - F^T e_kk.
Connection gsge_lax(const RealMatrixField& A, const RealMatrixField& F, cd lambda);

/// Max over nodes of |B^T I_{n,n} + I_{n,n} B|.
double onn_defect(const Connection& theta);

/// d_k X = X e_kk A^T D X + X omega_k - D A e_kk at one node.
RMat riccati_rhs(const RMat& X, const RMat& A, const RMat& F, const RMat& D, int k);

struct BacklundOptions {
    int substeps = 1;
    Interp interp = Interp::Cubic;
    std::vector<int> basepoint;
    double tolerance = 1e-3;
    bool check_seed = true;
    bool path_diagnostic = true;
    /// Replace X by its polar factor after every line step.
    bool reproject = false;
    /// Max fraction of nodes where Q may be singular (linear transform only).
    double max_singular_fraction = 0.0;
};

/// Riccati transform with X(basepoint) = X0.
GsgeState backlund(const GsgeState& seed, double lambda, const RMat& X0, const BacklundOptions& opts = {});

/// Integrates dy = y theta_s for the n x 2n matrix y = (P, Q) and returns X = -Q^{-1} P.
GsgeState linear_backlund(const GsgeState& seed, double s, const RMat& y0, const BacklundOptions& opts = {});

/// Max over nodes and axes of |d_k X - riccati_rhs| with d_k X from finite differences.
double bt_residual(const GsgeState& seed, const RealMatrixField& X, double lambda, int accuracy = 2);

/// A3 = (-D2 + D1 A2 A1^T)(D1 - D2 A2 A1^T)^{-1} A0.
GsgeState permutability(const GsgeState& A0, const GsgeState& A1, const GsgeState& A2, double lambda1,
                        double lambda2);
GsgeState permutability_theta(const GsgeState& A0, const GsgeState& A1, const GsgeState& A2, double theta1,
                              double theta2);

struct ImmersionOptions {
    FrameOptions frame;
    std::vector<int> basepoint;
};

/// Frame at lambda = i conjugated into O(2n-1), then df = sum a_1i e_i dx_i.
surfaces::ImmersionField immersion(const GsgeState& s, const ImmersionOptions& opts = {});

// n = 2 dictionary: x1 = s + t, x2 = s - t, lambda = mu.

RMat rotation(double q);
/// Samples q(s, t) at the nodes of an x-grid.
ScalarField sge_on_x_grid(const GridSpec& xg, const std::function<double(double s, double t)>& q);
GsgeState from_sge(const ScalarField& q_on_x);
/// atan2(a_12, a_11), continued from the basepoint.
ScalarField to_sge(const GsgeState& s, std::vector<int> basepoint = {});

} // namespace soliton_forge::gsge
