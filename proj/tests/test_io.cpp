#include "soliton_forge/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <numbers>

#include <unistd.h>

using namespace soliton_forge;
using namespace soliton_forge::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("soliton_forge_io_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.1, std::numbers::pi, -1e-300, 6.02214076e23, 1.0 / 3.0}) CHECK(std::stod(fmt(v)) == v);
    CHECK(fmt(0.5) == "0.5");
}

TEST_CASE("grid json")
{
    const GridSpec g({5, 7}, {-1.0, 0.25}, {0.5, 0.125});
    const auto back = grid_from_json(grid_json(g));
    CHECK(back.same_as(g));
    CHECK_THROWS_AS(grid_from_json(json::parse(R"({"dims":[2,5],"origin":[0,0],"spacing":[1,1]})")), Error);
}

TEST_CASE("tables")
{
    TempDir tmp;
    const auto g = GridSpec::box({0, 0}, {1, 2}, 0.5);
    const auto f = sample(g, [](const std::vector<double>& x) { return std::sin(x[0]) + x[1] / 3; });
    const auto path = tmp.str() + "/f.csv";
    write_table(path, scalar_table(f, "f"));
    const auto t = read_table(path);
    CHECK(t.names == std::vector<std::string>{"f"});
    const auto back = scalar_from(t, "f");
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(back[k] == f[k]);
    CHECK_THROWS_AS(t.column("g"), Error);

    const auto text = table_text(scalar_table(f, "f"));
    CHECK(text.rfind("# {", 0) == 0);
    CHECK(text.find("\nx0,x1,f\n") != std::string::npos);

    // Truncated and malformed files are rejected.
    write_text(tmp.str() + "/short.csv", text.substr(0, text.size() - 20));
    CHECK_THROWS_AS(read_table(tmp.str() + "/short.csv"), Error);
    auto broken = text;
    broken.replace(broken.rfind(',') + 1, 1, "z");
    write_text(tmp.str() + "/bad.csv", broken);
    CHECK_THROWS_AS(read_table(tmp.str() + "/bad.csv"), Error);
    CHECK_THROWS_AS(read_table(tmp.str() + "/missing.csv"), Error);
}

TEST_CASE("matrix tables")
{
    const auto g = GridSpec::box({0, 0}, {1, 1}, 0.5);
    std::vector<RMat> r(g.size());
    std::vector<Mat> c(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        r[k] = RMat::Random(3, 3);
        c[k] = Mat::Random(2, 2);
    }
    const RealMatrixField R(g, r);
    const MatrixField C(g, c);
    const auto rt = real_matrix_table(R, "A");
    CHECK(rt.names.front() == "A00");
    CHECK(rt.names.back() == "A22");
    const auto ct = complex_matrix_table(C, "v");
    CHECK(ct.names.front() == "v00_re");
    CHECK(ct.names[1] == "v00_im");
    const auto Rb = real_matrix_from(rt, "A", 3);
    const auto Cb = complex_matrix_from(ct, "v", 2);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(Rb[k] == R[k]);
        CHECK(Cb[k] == C[k]);
    }
}

TEST_CASE("config hash")
{
    const auto a = json::parse(R"({"mu":[1,2],"grid":"201x201"})");
    const auto b = json::parse(R"({"mu":[1,2],"grid":"201x201"})");
    const auto c = json::parse(R"({"mu":[2,1],"grid":"201x201"})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
    // FNV-1a 64 of the empty object "{}".
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : std::string("{}")) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    CHECK(config_hash(json::object()) == buf);
}

TEST_CASE("SGE files")
{
    TempDir tmp;
    const auto q = sge::multi_soliton(GridSpec::box({-1, -1}, {1, 1}, 0.05), {1.0, 2.0});
    write_sge(tmp.str(), "q", q);
    CHECK(fs::exists(tmp.path / "q.csv"));
    CHECK(fs::exists(tmp.path / "q.json"));
    const auto back = read_sge(tmp.str(), "q");
    CHECK(back.mu_history == q.mu_history);
    for (std::size_t k = 0; k < q.q.size(); ++k) CHECK(back.q[k] == q.q[k]);
    CHECK(back.residual == doctest::Approx(q.residual));
    CHECK(sge_sidecar(q).at("convention") == sge::convention);
}

TEST_CASE("GSGE files")
{
    TempDir tmp;
    const auto s = gsge::from_sge(
        gsge::sge_on_x_grid(GridSpec::box({-0.5, -0.5}, {0.5, 0.5}, 0.05),
                            [](double a, double b) { return 2 * std::atan(std::exp(a + b)); }));
    write_gsge(tmp.str(), s);
    const auto back = gsge::make_state(read_gsge(tmp.str()).A);
    for (std::size_t k = 0; k < s.A.size(); ++k) CHECK(back.A[k] == s.A[k]);
    CHECK(read_gsge(tmp.str()).n() == 2);
}

TEST_CASE("U(n) and isothermic files")
{
    TempDir tmp;
    const auto g = GridSpec::box({-0.5, -0.5}, {0.5, 0.5}, 0.05);
    Mat pi(2, 2);
    pi << 0.5, 0.5, 0.5, 0.5;
    const auto el = dressing::make_simple(cd(0.4, 0.9), pi);
    const auto back_el = simple_element_from(simple_element_json(el));
    CHECK(back_el.alpha == el.alpha);
    CHECK((back_el.pi - el.pi).norm() == 0.0);

    const auto d = dressing::dress_algebraic(dressing::vacuum(g, 2), dressing::vacuum_frame(g), el);
    write_un(tmp.str(), d.solution);
    const auto u = read_un(tmp.str());
    CHECK(dressing::max_difference(u.v, d.solution.v) == 0.0);
    CHECK(u.real_form == d.solution.real_form);

    const auto iso = isothermic::sphere(g);
    write_isothermic(tmp.str(), iso);
    const auto ib = read_isothermic(tmp.str());
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(ib.q[k] == iso.q[k]);
        CHECK(ib.r2[k] == iso.r2[k]);
    }
}

TEST_CASE("surface report table")
{
    const auto g = GridSpec::box({-1, -1}, {1, 1}, 0.25);
    std::vector<Vec> pts(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto x = g.point(k);
        pts[k] = Eigen::Vector3d(x[0], x[1], 0);
    }
    const auto t = surface_report_table(surfaces::fundamental_forms({PointField(g, pts), "plane", {}, {}}));
    CHECK(t.names == std::vector<std::string>{"E", "F", "G", "L", "M", "N", "K", "degenerate"});
    CHECK(t.column("E")[4] == doctest::Approx(1.0));
}
