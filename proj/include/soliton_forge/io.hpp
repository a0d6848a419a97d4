#pragma once

#include "soliton_forge/dressing.hpp"
#include "soliton_forge/gsge.hpp"
#include "soliton_forge/isothermic.hpp"
#include "soliton_forge/sge.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace soliton_forge::io {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = SOLITON_FORGE_VERSION;

/// 17 significant digits, "%.17g".
std::string fmt(double v);

json grid_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

/// A table of named real columns over the nodes of a grid. Written as
///   # {"grid": {...}, "columns": [...]}
///   x0,x1,...,col1,col2,...
///   one row per node (row-major order)
struct Table {
    GridSpec grid;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    const std::vector<double>& column(const std::string& name) const;
};

std::string table_text(const Table& t);
void write_table(const std::string& path, const Table& t);
Table read_table(const std::string& path);

Table scalar_table(const ScalarField& f, const std::string& name);
/// Columns <prefix>ij in row-major entry order.
Table real_matrix_table(const RealMatrixField& f, const std::string& prefix);
/// Columns <prefix>ij_re and <prefix>ij_im.
Table complex_matrix_table(const MatrixField& f, const std::string& prefix);
Table points_table(const PointField& f, const std::string& prefix);

ScalarField scalar_from(const Table& t, const std::string& name);
RealMatrixField real_matrix_from(const Table& t, const std::string& prefix, int n);
MatrixField complex_matrix_from(const Table& t, const std::string& prefix, int n);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);
/// Pretty-printed with a trailing newline.
std::string json_text(const json& j);

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const json& config);

// Sidecars and per-type files.

json sge_sidecar(const sge::SgeSolution& s);
void write_sge(const std::string& dir, const std::string& stem, const sge::SgeSolution& s);
sge::SgeSolution read_sge(const std::string& dir, const std::string& stem);

json gsge_sidecar(const gsge::GsgeState& s);
/// <dir>/A.csv, <dir>/F.csv, <dir>/gsge.json
void write_gsge(const std::string& dir, const gsge::GsgeState& s);
gsge::GsgeState read_gsge(const std::string& dir);

json simple_element_json(const dressing::SimpleElement& g);
dressing::SimpleElement simple_element_from(const json& j);
json un_sidecar(const dressing::UnSolution& s);
/// <dir>/v.csv, <dir>/un.json
void write_un(const std::string& dir, const dressing::UnSolution& s);
dressing::UnSolution read_un(const std::string& dir);

/// <dir>/data.csv (q, r1, r2), <dir>/isothermic.json
void write_isothermic(const std::string& dir, const isothermic::IsothermicData& d);
isothermic::IsothermicData read_isothermic(const std::string& dir);

Table surface_report_table(const surfaces::SurfaceReport& r);

} // namespace soliton_forge::io
