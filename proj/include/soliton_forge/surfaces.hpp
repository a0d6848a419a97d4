#pragma once

#include "soliton_forge/sge.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace soliton_forge::surfaces {

/// Points of an immersed 2-D parameter grid (or n-D for gsge) in Euclidean space.
struct ImmersionField {
    PointField points;
    std::string provenance;  // sym | christoffel | gsge | dressing
    std::map<std::string, double> diagnostics;
    /// Optional smooth unit normal (e.g. from a frame); orients the cross-product normal.
    PointField reference_normal;
};

/// su(2) -> R^3 in the orthonormal basis u1 = diag(i,-i), u2 = [[0,1],[-1,0]], u3 = [[0,i],[i,0]],
/// <X,Y> = -tr(XY)/2.
Eigen::Vector3d su2_to_r3(const Mat& x);
Mat r3_to_su2(const Eigen::Vector3d& v);

/// Gaussian curvature of the Sym surface at spectral value r (metric scales with 1/r).
double expected_curvature(double r);

struct SymOptions {
    double dlambda = 1e-4;
    FrameOptions frame;
    std::vector<int> basepoint;
    /// Also evaluates with dlambda/2 and records the largest change as "richardson_delta".
    bool richardson = false;
};

/// f = dE/dlambda E^{-1} at lambda = r for the SGE Lax pair, mapped into R^3.
ImmersionField sym_immersion(const sge::SgeSolution& q, double r, const SymOptions& opts = {});

struct SurfaceReport {
    GridSpec grid;
    ScalarField E, F, G, L, M, N, K;
    PointField normal;
    std::vector<std::uint8_t> degenerate;
};

/// First and second fundamental forms and K = (LN - M^2)/(EG - F^2) from finite differences.
/// The normal is the normalized cross product, flipped to agree with f.reference_normal when present.
/// Nodes with EG - F^2 below the threshold are marked degenerate and get K = NaN.
SurfaceReport fundamental_forms(const ImmersionField& f, int accuracy = 4, double degenerate_threshold = 1e-12);

/// Rank of df at every node (singular values above tol times the largest one).
std::vector<int> differential_rank(const ImmersionField& f, double tol = 1e-6);

struct DressingOptions {
    double dlambda = 1e-4;
    FrameOptions frame;
    std::vector<int> basepoint;
};

struct DressingBtResult {
    sge::SgeSolution qhat;
    ImmersionField f;
    ImmersionField fhat;
    ScalarField distance;          // |fhat - f|
    ScalarField normal_component;  // |<fhat - f, n_f>|, NaN where sqrt(EG - F^2) < 0.1 (E + G) / 2
    double expected_distance = 0;  // s / (1/4 + s^2)
    double real_defect = 0;        // max |Im E(x, is)|
};

/// Dressing of q by g_{is,pi} for a real rank-one pi spanned by `direction`, and the induced surface transform.
DressingBtResult dressing_bt_surface(const sge::SgeSolution& q, double s, const Eigen::Vector2d& direction,
                                     const DressingOptions& opts = {});

/// Wavefront OBJ, one vertex per node (row-major), two triangles per grid cell, 6 decimals.
void export_obj(const ImmersionField& f, const std::string& path);
std::string obj_text(const ImmersionField& f);

/// Reads back the vertex list of an OBJ file.
std::vector<Eigen::Vector3d> read_obj_vertices(const std::string& path);

} // namespace soliton_forge::surfaces
