#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path& work()
{
    static const fs::path p = [] {
        auto d = fs::temp_directory_path() / ("soliton_forge_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out;
    json report() const { return json::parse(out); }
};

Run cli(const std::string& args)
{
    const auto log = work() / "stdout.txt";
    const std::string cmd = std::string("\"") + SOLITON_FORGE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>/dev/null";
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(log)};
}

std::string dir(const std::string& name)
{
    return (work() / name).string();
}

} // namespace

TEST_CASE("sge subcommand writes solution and report")
{
    const auto r = cli("sge --grid 101x101 --lo -2 --hi 2 --mu 1.5 --out " + dir("sge1"));
    REQUIRE(r.code == 0);
    const auto rep = r.report();
    CHECK(rep["tool"] == "soliton-forge");
    CHECK(rep["command"] == "sge");
    CHECK(rep["pass"] == true);
    CHECK(rep["checks"]["sge_residual"]["value"].get<double>() <= 1e-3);
    CHECK_FALSE(rep["config"].contains("out"));
    CHECK(fs::exists(dir("sge1") + "/q.csv"));
    CHECK(fs::exists(dir("sge1") + "/q.json"));
    CHECK(json::parse(slurp(dir("sge1") + "/report.json")) == rep);

    const auto chk = cli("check " + dir("sge1"));
    CHECK(chk.code == 0);
    CHECK(chk.report()["pass"] == true);
}

TEST_CASE("sge permutability and Backlund")
{
    auto r = cli("sge --grid 101x101 --lo -2 --hi 2 --mu 1 --mu 2 --permute --out " + dir("sge2"));
    CHECK(r.code == 0);
    CHECK(r.report()["checks"].contains("bt_residual_0"));
    r = cli("sge --grid 101x101 --lo -1 --hi 1 --mu 1 --backlund --substeps 4 --out " + dir("sge3"));
    CHECK(r.code == 0);
    CHECK(r.report()["checks"]["bt_residual"]["value"].get<double>() <= 1e-3);
}

TEST_CASE("config errors exit 2 and write nothing")
{
    {
        std::ofstream(dir("bad.json")) << R"({"grid": "51x51", "nonsense": 1})";
        CHECK(cli("sge --config " + dir("bad.json") + " --out " + dir("e1")).code == 2);
        CHECK_FALSE(fs::exists(dir("e1")));
    }
    {
        std::ofstream(dir("broken.json")) << R"({"grid": )";
        CHECK(cli("sge --config " + dir("broken.json") + " --out " + dir("e2")).code == 2);
        CHECK_FALSE(fs::exists(dir("e2")));
    }
    CHECK(cli("sge --grid 2x2 --out " + dir("e3")).code == 2);
    CHECK(cli("sge --mu 1 --mu -1 --permute --out " + dir("e4")).code == 2);
    CHECK(cli("gsge --theta 4 --out " + dir("e5")).code == 2);
    CHECK(cli("dress --method banana --out " + dir("e6")).code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK_FALSE(fs::exists(dir("e3")));
    CHECK_FALSE(fs::exists(dir("e5")));
}

TEST_CASE("config file and flag precedence")
{
    std::ofstream(dir("cfg.json")) << R"({"grid": "61x61", "lo": -1, "hi": 1, "mu": [2.0]})";
    const auto r = cli("sge --config " + dir("cfg.json") + " --mu 0.5 --out " + dir("cfg"));
    REQUIRE(r.code == 0);
    const auto c = r.report()["config"];
    CHECK(c["mu"] == json::array({0.5}));
    CHECK(c["grid"] == json::array({61, 61}));
}

TEST_CASE("check detects corrupted output")
{
    REQUIRE(cli("sge --grid 61x61 --lo -1 --hi 1 --out " + dir("corrupt")).code == 0);
    const auto csv = dir("corrupt") + "/q.csv";
    auto text = slurp(csv);
    // Shift the last value by one.
    const auto pos = text.rfind(',') + 1;
    const double v = std::stod(text.substr(pos));
    text = text.substr(0, pos) + std::to_string(v + 1.0) + "\n";
    std::ofstream(csv, std::ios::binary) << text;
    const auto r = cli("check " + dir("corrupt"));
    CHECK(r.code == 1);
    CHECK(r.report()["pass"] == false);
    CHECK(cli("check " + dir("does_not_exist")).code == 2);
}

TEST_CASE("gsge subcommand")
{
    const auto r = cli("gsge --n 2 --grid 81x81 --lo -0.5 --hi 0.5 --theta 0.6 --out " + dir("gsge"));
    REQUIRE(r.code == 0);
    const auto rep = r.report();
    CHECK(rep["checks"]["orthogonality"]["value"].get<double>() <= 1e-8);
    CHECK(fs::exists(dir("gsge") + "/A.csv"));
    CHECK(fs::exists(dir("gsge") + "/gsge.json"));
    CHECK(cli("check " + dir("gsge")).code == 0);
}

TEST_CASE("dress subcommand")
{
    auto r = cli("dress --n 2 --grid 81x81 --method all --out " + dir("dress"));
    REQUIRE(r.code == 0);
    CHECK(r.report()["pass"] == true);
    CHECK(fs::exists(dir("dress") + "/v.csv"));
    CHECK(cli("check " + dir("dress")).code == 0);

    r = cli("dress --n 2 --grid 81x81 --real-form --out " + dir("dress_real"));
    CHECK(r.code == 0);
    CHECK(r.report()["config"]["real_form"] == true);
}

TEST_CASE("isothermic and surface subcommands")
{
    auto r = cli("isothermic --grid 81x81 --seed sphere --out " + dir("iso"));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir("iso") + "/f.obj"));
    CHECK(fs::exists(dir("iso") + "/f_dual.obj"));
    CHECK(cli("check " + dir("iso")).code == 0);

    r = cli("surface --grid 101x101 --lo -1 --hi 1 --mu 1 --out " + dir("sym"));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir("sym") + "/surface.obj"));
    CHECK(fs::exists(dir("sym") + "/forms.csv"));

    r = cli("surface --grid 101x101 --lo -1 --hi 1 --dress 0.8 --out " + dir("dsurf"));
    REQUIRE(r.code == 0);
    CHECK(r.report()["checks"]["distance"]["value"].get<double>() <= 1e-4);
    CHECK(fs::exists(dir("dsurf") + "/fhat.obj"));
}

TEST_CASE("repeated runs are byte-identical")
{
    const std::string args = "sge --grid 61x61 --lo -1 --hi 1 --mu 1 --mu 2 --permute --out ";
    const auto a = cli(args + dir("det_a"));
    const auto b = cli(args + dir("det_b"));
    CHECK(a.out == b.out);
    for (const char* f : {"q.csv", "q.json", "report.json"}) CHECK(slurp(dir("det_a") + "/" + f) == slurp(dir("det_b") + "/" + f));
}

TEST_CASE("cleanup")
{
    fs::remove_all(work());
}
