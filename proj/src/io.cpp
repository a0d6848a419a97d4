#include "soliton_forge/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace soliton_forge::io {

namespace {

std::string entry(const std::string& prefix, int i, int j)
{
    return prefix + std::to_string(i) + std::to_string(j);
}

std::string file(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

} // namespace

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json grid_json(const GridSpec& g)
{
    return json{{"dims", g.dims}, {"origin", g.origin}, {"spacing", g.spacing}};
}

GridSpec grid_from_json(const json& j)
{
    try {
        return GridSpec(j.at("dims").get<std::vector<int>>(), j.at("origin").get<std::vector<double>>(),
                        j.at("spacing").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw Error(std::string("bad grid header: ") + e.what());
    }
}

const std::vector<double>& Table::column(const std::string& name) const
{
    for (std::size_t c = 0; c < names.size(); ++c)
        if (names[c] == name) return columns[c];
    throw Error("missing column " + name);
}

std::string table_text(const Table& t)
{
    std::ostringstream os;
    json head{{"grid", grid_json(t.grid)}, {"columns", t.names}};
    os << "# " << head.dump() << "\n";
    const int d = t.grid.ndim();
    for (int a = 0; a < d; ++a) os << (a ? "," : "") << "x" << a;
    for (const auto& n : t.names) os << "," << n;
    os << "\n";
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
        const auto x = t.grid.point(k);
        for (int a = 0; a < d; ++a) os << (a ? "," : "") << fmt(x[a]);
        for (const auto& c : t.columns) os << "," << fmt(c[k]);
        os << "\n";
    }
    return os.str();
}

void write_table(const std::string& path, const Table& t)
{
    write_text(path, table_text(t));
}

Table read_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw Error(path + ": missing grid header");
    json head;
    try {
        head = json::parse(line.substr(2));
    } catch (const json::exception& e) {
        throw Error(path + ": bad header: " + e.what());
    }
    Table t;
    t.grid = grid_from_json(head.at("grid"));
    t.names = head.at("columns").get<std::vector<std::string>>();
    const std::size_t d = static_cast<std::size_t>(t.grid.ndim());
    const std::size_t width = d + t.names.size();
    t.columns.assign(t.names.size(), std::vector<double>(t.grid.size()));
    if (!std::getline(in, line)) throw Error(path + ": missing column names");
    std::size_t k = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (k >= t.grid.size()) throw Error(path + ": more rows than grid nodes");
        const char* p = line.c_str();
        for (std::size_t c = 0; c < width; ++c) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p) throw Error(path + ": bad number in row " + std::to_string(k));
            if (c >= d) t.columns[c - d][k] = v;
            p = end;
            if (c + 1 < width) {
                if (*p != ',') throw Error(path + ": short row " + std::to_string(k));
                ++p;
            }
        }
        ++k;
    }
    if (k != t.grid.size()) throw Error(path + ": row count does not match grid");
    return t;
}

Table scalar_table(const ScalarField& f, const std::string& name)
{
    return Table{f.grid, {name}, {f.values}};
}

Table real_matrix_table(const RealMatrixField& f, const std::string& prefix)
{
    Table t{f.grid, {}, {}};
    const int r = static_cast<int>(f[0].rows()), c = static_cast<int>(f[0].cols());
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            t.names.push_back(entry(prefix, i, j));
            std::vector<double> col(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) col[k] = f[k](i, j);
            t.columns.push_back(std::move(col));
        }
    return t;
}

Table complex_matrix_table(const MatrixField& f, const std::string& prefix)
{
    Table t{f.grid, {}, {}};
    const int r = static_cast<int>(f[0].rows()), c = static_cast<int>(f[0].cols());
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            std::vector<double> re(f.size()), im(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) {
                re[k] = f[k](i, j).real();
                im[k] = f[k](i, j).imag();
            }
            t.names.push_back(entry(prefix, i, j) + "_re");
            t.columns.push_back(std::move(re));
            t.names.push_back(entry(prefix, i, j) + "_im");
            t.columns.push_back(std::move(im));
        }
    return t;
}

Table points_table(const PointField& f, const std::string& prefix)
{
    Table t{f.grid, {}, {}};
    for (Eigen::Index i = 0; i < f[0].size(); ++i) {
        t.names.push_back(prefix + std::to_string(i));
        std::vector<double> col(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) col[k] = f[k](i);
        t.columns.push_back(std::move(col));
    }
    return t;
}

ScalarField scalar_from(const Table& t, const std::string& name)
{
    return ScalarField(t.grid, t.column(name));
}

RealMatrixField real_matrix_from(const Table& t, const std::string& prefix, int n)
{
    std::vector<RMat> v(t.grid.size(), RMat(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& c = t.column(entry(prefix, i, j));
            for (std::size_t k = 0; k < v.size(); ++k) v[k](i, j) = c[k];
        }
    return RealMatrixField(t.grid, std::move(v));
}

MatrixField complex_matrix_from(const Table& t, const std::string& prefix, int n)
{
    std::vector<Mat> v(t.grid.size(), Mat(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& re = t.column(entry(prefix, i, j) + "_re");
            const auto& im = t.column(entry(prefix, i, j) + "_im");
            for (std::size_t k = 0; k < v.size(); ++k) v[k](i, j) = cd(re[k], im[k]);
        }
    return MatrixField(t.grid, std::move(v));
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string json_text(const json& j)
{
    return j.dump(2) + "\n";
}

void write_json(const std::string& path, const json& j)
{
    write_text(path, json_text(j));
}

json read_json(const std::string& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string config_hash(const json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json sge_sidecar(const sge::SgeSolution& s)
{
    return json{{"convention", sge::convention}, {"mu_history", s.mu_history}, {"tolerance", s.tolerance}};
}

void write_sge(const std::string& dir, const std::string& stem, const sge::SgeSolution& s)
{
    write_table(file(dir, stem + ".csv"), scalar_table(s.q, "q"));
    write_json(file(dir, stem + ".json"), sge_sidecar(s));
}

sge::SgeSolution read_sge(const std::string& dir, const std::string& stem)
{
    const json side = read_json(file(dir, stem + ".json"));
    if (side.value("convention", std::string()) != sge::convention) throw Error("unknown SGE convention");
    ScalarField q = scalar_from(read_table(file(dir, stem + ".csv")), "q");
    return sge::make_solution(std::move(q), side.at("mu_history").get<std::vector<double>>(),
                              side.value("tolerance", 1e-3));
}

json gsge_sidecar(const gsge::GsgeState& s)
{
    return json{{"n", s.n()}, {"convention", gsge::convention}, {"tolerance", s.tolerance}};
}

void write_gsge(const std::string& dir, const gsge::GsgeState& s)
{
    write_table(file(dir, "A.csv"), real_matrix_table(s.A, "a"));
    write_table(file(dir, "F.csv"), real_matrix_table(s.F, "f"));
    write_json(file(dir, "gsge.json"), gsge_sidecar(s));
}

gsge::GsgeState read_gsge(const std::string& dir)
{
    const json side = read_json(file(dir, "gsge.json"));
    if (side.value("convention", std::string()) != gsge::convention) throw Error("unknown GSGE convention");
    const int n = side.at("n").get<int>();
    RealMatrixField A = real_matrix_from(read_table(file(dir, "A.csv")), "a", n);
    RealMatrixField F = real_matrix_from(read_table(file(dir, "F.csv")), "f", n);
    if (!A.grid.same_as(F.grid)) throw Error("A and F grids differ");
    return gsge::make_state(std::move(A), std::move(F), side.value("tolerance", 1e-3));
}

json simple_element_json(const dressing::SimpleElement& g)
{
    json pi = json::array();
    for (Eigen::Index i = 0; i < g.pi.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < g.pi.cols(); ++j) row.push_back({g.pi(i, j).real(), g.pi(i, j).imag()});
        pi.push_back(row);
    }
    return json{{"alpha", {g.alpha.real(), g.alpha.imag()}}, {"pi", pi}};
}

dressing::SimpleElement simple_element_from(const json& j)
{
    try {
        const auto a = j.at("alpha").get<std::vector<double>>();
        if (a.size() != 2) throw Error("alpha must be [re, im]");
        const json& rows = j.at("pi");
        const auto n = static_cast<Eigen::Index>(rows.size());
        Mat pi(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != n) throw Error("pi must be square");
            for (Eigen::Index j2 = 0; j2 < n; ++j2) {
                const auto e = rows[i][j2].get<std::vector<double>>();
                if (e.size() != 2) throw Error("pi entries must be [re, im]");
                pi(i, j2) = cd(e[0], e[1]);
            }
        }
        return dressing::make_simple(cd(a[0], a[1]), pi);
    } catch (const json::exception& e) {
        throw Error(std::string("bad simple element: ") + e.what());
    }
}

json un_sidecar(const dressing::UnSolution& s)
{
    return json{{"n", s.n()}, {"real_form", s.real_form}, {"tolerance", s.tolerance}};
}

void write_un(const std::string& dir, const dressing::UnSolution& s)
{
    write_table(file(dir, "v.csv"), complex_matrix_table(s.v, "v"));
    write_json(file(dir, "un.json"), un_sidecar(s));
}

dressing::UnSolution read_un(const std::string& dir)
{
    const json side = read_json(file(dir, "un.json"));
    const int n = side.at("n").get<int>();
    return dressing::make_solution(complex_matrix_from(read_table(file(dir, "v.csv")), "v", n),
                                   side.value("real_form", false), side.value("tolerance", 1e-3));
}

void write_isothermic(const std::string& dir, const isothermic::IsothermicData& d)
{
    write_table(file(dir, "data.csv"), Table{d.grid(), {"q", "r1", "r2"}, {d.q.values, d.r1.values, d.r2.values}});
    write_json(file(dir, "isothermic.json"), json{{"tolerance", d.tolerance}});
}

isothermic::IsothermicData read_isothermic(const std::string& dir)
{
    const json side = read_json(file(dir, "isothermic.json"));
    const Table t = read_table(file(dir, "data.csv"));
    return isothermic::make_data(scalar_from(t, "q"), scalar_from(t, "r1"), scalar_from(t, "r2"),
                                 side.value("tolerance", 1e-3));
}

Table surface_report_table(const surfaces::SurfaceReport& r)
{
    std::vector<double> deg(r.degenerate.begin(), r.degenerate.end());
    return Table{r.grid,
                 {"E", "F", "G", "L", "M", "N", "K", "degenerate"},
                 {r.E.values, r.F.values, r.G.values, r.L.values, r.M.values, r.N.values, r.K.values, deg}};
}

} // namespace soliton_forge::io
