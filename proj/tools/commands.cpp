#include "commands.hpp"

#include "soliton_forge/dressing.hpp"
#include "soliton_forge/gsge.hpp"
#include "soliton_forge/isothermic.hpp"
#include "soliton_forge/sge.hpp"
#include "soliton_forge/surfaces.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <set>

namespace fs = std::filesystem;

namespace soliton_forge::cli {

namespace {

enum class Kind { Number, Integer, Boolean, String, Numbers, Grid };

struct Key {
    const char* name;
    Kind kind;
};

const std::vector<Key>& schema(const std::string& command)
{
    static const std::map<std::string, std::vector<Key>> table = {
        {"sge",
         {{"grid", Kind::Grid}, {"lo", Kind::Number}, {"hi", Kind::Number}, {"out", Kind::String},
          {"tol", Kind::Number}, {"mu", Kind::Numbers}, {"vacuum", Kind::Boolean}, {"permute", Kind::Boolean},
          {"backlund", Kind::Boolean}, {"qstar0", Kind::Number}, {"substeps", Kind::Integer}}},
        {"gsge",
         {{"grid", Kind::Grid}, {"lo", Kind::Number}, {"hi", Kind::Number}, {"out", Kind::String},
          {"tol", Kind::Number}, {"n", Kind::Integer}, {"theta", Kind::Numbers}, {"method", Kind::String},
          {"skew", Kind::Numbers}, {"substeps", Kind::Integer}}},
        {"dress",
         {{"grid", Kind::Grid}, {"lo", Kind::Number}, {"hi", Kind::Number}, {"out", Kind::String},
          {"tol", Kind::Number}, {"n", Kind::Integer}, {"alpha", Kind::Numbers}, {"pi", Kind::Numbers},
          {"pi_im", Kind::Numbers}, {"method", Kind::String}, {"real_form", Kind::Boolean},
          {"substeps", Kind::Integer}}},
        {"isothermic",
         {{"grid", Kind::Grid}, {"lo", Kind::Number}, {"hi", Kind::Number}, {"out", Kind::String},
          {"tol", Kind::Number}, {"seed", Kind::String}, {"dual", Kind::Boolean}, {"method", Kind::String}}},
        {"surface",
         {{"grid", Kind::Grid}, {"lo", Kind::Number}, {"hi", Kind::Number}, {"out", Kind::String},
          {"tol", Kind::Number}, {"from", Kind::String}, {"mu", Kind::Number}, {"sym_r", Kind::Number},
          {"isothermic_seed", Kind::String}, {"dress_s", Kind::Number}, {"direction", Kind::Numbers},
          {"method", Kind::String}}},
    };
    const auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown command " + command);
    return it->second;
}

json parse_grid(const json& v)
{
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        json dims = json::array();
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const std::size_t x = std::min(s.find('x', pos), s.size());
            const std::string part = s.substr(pos, x - pos);
            if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
                throw ConfigError("grid must look like 200x200, got " + s);
            dims.push_back(std::stoi(part));
            pos = x + 1;
        }
        return dims;
    }
    if (v.is_array()) {
        for (const auto& e : v)
            if (!e.is_number_integer()) throw ConfigError("grid entries must be integers");
        return v;
    }
    throw ConfigError("grid must be a list of node counts or a string like 200x200");
}

json typed(const Key& key, const json& v)
{
    const std::string name = key.name;
    switch (key.kind) {
    case Kind::Number:
        if (!v.is_number()) throw ConfigError(name + " must be a number");
        return v.get<double>();
    case Kind::Integer:
        if (!v.is_number_integer()) throw ConfigError(name + " must be an integer");
        return v;
    case Kind::Boolean:
        if (!v.is_boolean()) throw ConfigError(name + " must be true or false");
        return v;
    case Kind::String:
        if (!v.is_string()) throw ConfigError(name + " must be a string");
        return v;
    case Kind::Numbers: {
        json out = json::array();
        if (v.is_number()) {
            out.push_back(v.get<double>());
            return out;
        }
        if (!v.is_array()) throw ConfigError(name + " must be a list of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(name + " must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    case Kind::Grid:
        return parse_grid(v);
    }
    return v;
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

std::vector<double> numbers(const json& v)
{
    return v.get<std::vector<double>>();
}

void set_default(json& c, const char* key, const json& value)
{
    if (c[key].is_null()) c[key] = value;
}

void check_grid(json& c, int ndim, int default_count, double lo, double hi)
{
    set_default(c, "grid", json(std::vector<int>(ndim, default_count)));
    set_default(c, "lo", lo);
    set_default(c, "hi", hi);
    const auto dims = c["grid"].get<std::vector<int>>();
    require(static_cast<int>(dims.size()) == ndim, "grid needs " + std::to_string(ndim) + " node counts");
    double total = 1.0;
    for (int d : dims) {
        require(d >= 5, "grid needs at least 5 nodes per axis");
        total *= d;
    }
    require(total <= 2e7, "grid is too large");
    require(c["hi"].get<double>() > c["lo"].get<double>(), "hi must exceed lo");
}

void check_substeps(json& c)
{
    set_default(c, "substeps", 1);
    require(c["substeps"].get<int>() >= 1 && c["substeps"].get<int>() <= 64, "substeps must be in [1, 64]");
}

void check_distinct(const std::vector<double>& v, const std::string& what, bool by_magnitude = false)
{
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            const double d = by_magnitude ? std::abs(v[i]) - std::abs(v[j]) : v[i] - v[j];
            require(std::abs(d) > 1e-12, what + " values must be distinct" + (by_magnitude ? " in magnitude" : ""));
        }
}

void fill_sge(json& c)
{
    check_grid(c, 2, 201, -5.0, 5.0);
    set_default(c, "vacuum", false);
    set_default(c, "permute", false);
    set_default(c, "backlund", false);
    set_default(c, "qstar0", std::numbers::pi / 2);
    check_substeps(c);
    set_default(c, "mu", json::array({1.0}));
    const auto mu = numbers(c["mu"]);
    if (c["vacuum"].get<bool>()) {
        require(!c["permute"].get<bool>() && !c["backlund"].get<bool>(), "vacuum excludes permute and backlund");
        return;
    }
    require(!mu.empty(), "mu needs at least one value");
    require(mu.size() <= 6, "at most 6 mu values");
    for (double m : mu) require(std::isfinite(m) && std::abs(m) > 1e-8, "mu must be nonzero");
    check_distinct(mu, "mu", true);
    if (mu.size() > 1) {
        require(c["permute"].get<bool>(), "several mu values need permute");
        require(!c["backlund"].get<bool>(), "backlund takes a single mu");
    }
}

void fill_gsge(json& c)
{
    set_default(c, "n", 3);
    const int n = c["n"].get<int>();
    require(n >= 2 && n <= 5, "n must be in [2, 5]");
    if (n == 2)
        check_grid(c, 2, 201, -1.0, 1.0);
    else
        check_grid(c, n, 51, -0.25, 0.25);
    set_default(c, "theta", json::array({0.6}));
    const auto theta = numbers(c["theta"]);
    require(theta.size() == 1 || theta.size() == 2, "theta takes one or two values");
    for (double t : theta) require(t > 1e-3 && t < std::numbers::pi - 1e-3, "theta must lie in (0, pi)");
    check_distinct(theta, "theta");
    set_default(c, "method", "linear");
    const std::string m = c["method"].get<std::string>();
    require(m == "linear" || m == "riccati", "method must be linear or riccati");
    if (c["skew"].is_null()) {
        json s = json::array();
        for (int k = 0; k < n * (n - 1) / 2; ++k) s.push_back(0.3 + 0.2 * k);
        c["skew"] = s;
    }
    require(static_cast<int>(c["skew"].size()) == n * (n - 1) / 2, "skew needs n(n-1)/2 entries");
    check_substeps(c);
}

void fill_dress(json& c)
{
    set_default(c, "n", 2);
    const int n = c["n"].get<int>();
    require(n >= 2 && n <= 4, "n must be in [2, 4]");
    if (n == 2)
        check_grid(c, 2, 201, -1.0, 1.0);
    else
        check_grid(c, n, 51, -0.5, 0.5);
    set_default(c, "real_form", false);
    const bool real = c["real_form"].get<bool>();
    set_default(c, "alpha", real ? json::array({0.0, 0.8}) : json::array({0.4, 0.9}));
    const auto a = numbers(c["alpha"]);
    require(a.size() == 2, "alpha must be re,im");
    require(std::abs(a[1]) > 1e-6, "alpha must not be real");
    if (c["pi"].is_null()) {
        json p = json::array();
        for (int k = 0; k < n; ++k) p.push_back(1.0 - 0.4 * k);
        c["pi"] = p;
    }
    if (c["pi_im"].is_null()) {
        json p = json::array();
        for (int k = 0; k < n; ++k) p.push_back(real ? 0.0 : 0.3 - 0.5 * k);
        c["pi_im"] = p;
    }
    const auto re = numbers(c["pi"]), im = numbers(c["pi_im"]);
    require(static_cast<int>(re.size()) == n && static_cast<int>(im.size()) == n, "pi and pi_im need n entries");
    double norm = 0.0;
    for (int k = 0; k < n; ++k) norm += re[k] * re[k] + im[k] * im[k];
    require(norm > 1e-12, "pi must be a nonzero vector");
    set_default(c, "method", "algebraic");
    const std::string m = c["method"].get<std::string>();
    require(m == "algebraic" || m == "ode" || m == "linear" || m == "all",
            "method must be algebraic, ode, linear or all");
    if (real) {
        require(m == "algebraic", "real_form uses the algebraic method");
        if (a[0] == 0.0)
            for (double v : im) require(v == 0.0, "real_form with imaginary alpha needs a real pi");
    }
    check_substeps(c);
}

void check_seed_name(const json& v)
{
    const std::string s = v.get<std::string>();
    require(s == "plane" || s == "cylinder" || s == "sphere", "seed must be plane, cylinder or sphere");
}

void check_iso_method(json& c, const char* fallback)
{
    set_default(c, "method", fallback);
    const std::string m = c["method"].get<std::string>();
    require(m == "1" || m == "2" || m == "both", "method must be 1, 2 or both");
}

void fill_isothermic(json& c)
{
    check_grid(c, 2, 201, -1.0, 1.0);
    set_default(c, "seed", "cylinder");
    check_seed_name(c["seed"]);
    set_default(c, "dual", false);
    check_iso_method(c, "both");
}

void fill_surface(json& c)
{
    if (c["from"].is_null()) {
        if (!c["isothermic_seed"].is_null())
            c["from"] = "isothermic";
        else if (!c["dress_s"].is_null())
            c["from"] = "dress";
        else
            c["from"] = "sge";
    }
    const std::string from = c["from"].get<std::string>();
    require(from == "sge" || from == "isothermic" || from == "dress", "from must be sge, isothermic or dress");
    if (from != "isothermic") require(c["isothermic_seed"].is_null(), "isothermic_seed needs from=isothermic");
    if (from != "dress") require(c["dress_s"].is_null(), "dress needs from=dress");
    if (from != "sge") require(c["sym_r"].is_null(), "sym_r needs from=sge");
    if (from == "isothermic") {
        require(c["mu"].is_null() && c["direction"].is_null(), "mu and direction do not apply to isothermic");
        check_grid(c, 2, 201, -1.0, 1.0);
        set_default(c, "isothermic_seed", "cylinder");
        check_seed_name(c["isothermic_seed"]);
        check_iso_method(c, "1");
        return;
    }
    require(c["method"].is_null(), "method applies to isothermic surfaces only");
    check_grid(c, 2, 401, -2.0, 2.0);
    set_default(c, "mu", 1.0);
    require(std::abs(c["mu"].get<double>()) > 1e-8, "mu must be nonzero");
    if (from == "sge") {
        require(c["direction"].is_null(), "direction applies to dress only");
        set_default(c, "sym_r", 0.5);
        require(c["sym_r"].get<double>() > 1e-6, "sym_r must be positive");
        return;
    }
    set_default(c, "dress_s", 0.8);
    require(c["dress_s"].get<double>() > 1e-6, "dress s must be positive");
    set_default(c, "direction", json::array({1.0, 1.0}));
    const auto d = numbers(c["direction"]);
    require(d.size() == 2 && std::hypot(d[0], d[1]) > 1e-12, "direction must be a nonzero 2-vector");
}

// ---------------------------------------------------------------------------

struct Checks {
    json items = json::object();
    json diagnostics = json::object();
    bool pass = true;

    void add(const std::string& name, double value, double tolerance)
    {
        const bool ok = std::isfinite(value) && value <= tolerance;
        items[name] = json{{"value", value}, {"tolerance", tolerance}, {"pass", ok}};
        pass = pass && ok;
    }
    void note(const std::string& name, double value) { diagnostics[name] = value; }
    void note_all(const std::string& prefix, const std::map<std::string, double>& m)
    {
        for (const auto& [k, v] : m) diagnostics[prefix + k] = v;
    }
};

GridSpec grid_of(const json& c)
{
    const auto dims = c["grid"].get<std::vector<int>>();
    const double lo = c["lo"].get<double>(), hi = c["hi"].get<double>();
    std::vector<double> origin(dims.size(), lo), spacing;
    for (int d : dims) spacing.push_back((hi - lo) / (d - 1));
    return GridSpec(dims, origin, spacing);
}

std::string path_in(const json& c, const std::string& name)
{
    return (fs::path(c["out"].get<std::string>()) / name).string();
}

// The output directory is left out so that reports depend only on the computation.
json base_report(const std::string& command, json config)
{
    config.erase("out");
    return json{{"tool", "soliton-forge"},
                {"version", io::tool_version},
                {"command", command},
                {"config_hash", io::config_hash(config)},
                {"config", config}};
}

double sge_residual_max(const sge::SgeSolution& q)
{
    return max_abs(sge::sge_residual(q.q, 4));
}

void run_sge(const json& c, Checks& ch, std::vector<std::string>& outputs)
{
    const GridSpec g = grid_of(c);
    const double tol = c["tol"].get<double>();
    const auto mu = numbers(c["mu"]);
    sge::SgeSolution q;
    if (c["vacuum"].get<bool>()) {
        q = sge::vacuum(g);
    } else if (mu.size() == 1 && c["backlund"].get<bool>()) {
        sge::BacklundOptions o;
        o.substeps = c["substeps"].get<int>();
        o.tolerance = tol;
        q = sge::backlund(sge::vacuum(g), mu[0], c["qstar0"].get<double>(), o);
        ch.add("bt_residual", sge::bt_residual(ScalarField(g, 0.0), q.q, mu[0], 4).max(), tol);
        ch.note_all("", q.diagnostics);
    } else if (mu.size() == 1) {
        q = sge::one_soliton(g, mu[0]);
    } else {
        const auto lattice = sge::multi_soliton_lattice(g, mu);
        const unsigned top = (1u << mu.size()) - 1;
        q = lattice.at(top);
        for (std::size_t i = 0; i < mu.size(); ++i)
            ch.add("bt_residual_" + std::to_string(i), sge::bt_residual(lattice.at(top ^ (1u << i)).q, q.q, mu[i], 4).max(),
                   tol);
    }
    ch.add("sge_residual", sge_residual_max(q), tol);
    io::write_sge(c["out"].get<std::string>(), "q", q);
    outputs = {"q.csv", "q.json"};
}

RMat cayley(const std::vector<double>& skew, int n)
{
    RMat S = RMat::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            S(i, j) = skew[k];
            S(j, i) = -skew[k];
            ++k;
        }
    const RMat I = RMat::Identity(n, n);
    return (I - S).lu().solve(I + S);
}

void run_gsge(const json& c, Checks& ch, std::vector<std::string>& outputs)
{
    const GridSpec g = grid_of(c);
    const double tol = c["tol"].get<double>();
    const int n = c["n"].get<int>();
    const auto theta = numbers(c["theta"]);
    const bool linear = c["method"].get<std::string>() == "linear";
    gsge::BacklundOptions o;
    o.substeps = c["substeps"].get<int>();
    o.tolerance = tol;
    const RMat X0 = cayley(numbers(c["skew"]), n);
    auto transform = [&](const gsge::GsgeState& seed, double lambda, const RMat& X) {
        if (!linear) return gsge::backlund(seed, lambda, X, o);
        RMat y0(n, 2 * n);
        y0 << X, -RMat::Identity(n, n);
        return gsge::linear_backlund(seed, lambda, y0, o);
    };
    const gsge::GsgeState seed = gsge::vacuum(g, n);
    const double l1 = gsge::lambda_from_theta(theta[0]);
    gsge::GsgeState out = transform(seed, l1, X0);
    ch.add("bt_residual_0", out.diagnostics.at("bt_residual"), tol);
    ch.note_all("bt0_", out.diagnostics);
    if (theta.size() == 2) {
        const double l2 = gsge::lambda_from_theta(theta[1]);
        const gsge::GsgeState second = transform(seed, l2, RMat(X0.transpose()));
        ch.add("bt_residual_1", second.diagnostics.at("bt_residual"), tol);
        ch.note_all("bt1_", second.diagnostics);
        gsge::GsgeState top = gsge::permutability(seed, out, second, l1, l2);
        ch.add("permutability_bt_0", gsge::bt_residual(out, top.A, l2), tol);
        ch.add("permutability_bt_1", gsge::bt_residual(second, top.A, l1), tol);
        out = std::move(top);
    }
    ch.add("gsge_residual", out.residual.max(), tol);
    ch.add("orthogonality", out.orthogonality, 1e-8);
    std::size_t flagged = 0;
    for (auto f : out.flagged) flagged += f;
    ch.note("flagged_nodes", static_cast<double>(flagged));
    io::write_gsge(c["out"].get<std::string>(), out);
    outputs = {"A.csv", "F.csv", "gsge.json"};
}

Mat rank_one(const std::vector<double>& re, const std::vector<double>& im)
{
    Eigen::VectorXcd w(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) w(k) = cd(re[k], im[k]);
    w.normalize();
    return w * w.adjoint();
}

void add_un_checks(const dressing::DressingResult& r, double tol, Checks& ch)
{
    ch.add("un_residual", dressing::un_residual(r.solution.v, 4), tol);
    ch.add("structure", dressing::structure_defect(r.solution.v, r.solution.real_form), 1e-8);
    ch.add("projection_drift", r.projection_drift, 1e-6);
    ch.note("residue_defect", r.residue_defect);
}

void run_dress(const json& c, Checks& ch, std::vector<std::string>& outputs)
{
    const GridSpec g = grid_of(c);
    const double tol = c["tol"].get<double>();
    const int n = c["n"].get<int>();
    const bool real = c["real_form"].get<bool>();
    const auto a = numbers(c["alpha"]);
    const cd alpha(a[0], a[1]);
    const Mat P = rank_one(numbers(c["pi"]), numbers(c["pi_im"]));
    const std::string method = c["method"].get<std::string>();
    const dressing::UnSolution seed = dressing::vacuum(g, n, real);
    const dressing::FrameFamily E = dressing::vacuum_frame(g);
    dressing::OdeOptions oo;
    oo.substeps = c["substeps"].get<int>();

    dressing::DressingResult r;
    if (real) {
        dressing::RationalLoop f;
        if (alpha.real() == 0.0)
            f.factors = {dressing::make_simple(alpha, P)};
        else
            f = dressing::compose_f_element(alpha, P);
        const auto samples = dressing::lambda_samples(f);
        ch.add("loop_unitary_reality", dressing::unitary_reality_defect(f, samples), 1e-10);
        ch.add("loop_real_form_reality", dressing::real_form_reality_defect(f, samples), 1e-10);
        r = dressing::dress_loop(seed, E, f);
        const MatrixField Y = dressing::curved_flat(r.frame);
        double unitary = 0.0, symmetric = 0.0;
        for (const Mat& y : Y.values) {
            unitary = std::max(unitary, (y * y.adjoint() - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
            symmetric = std::max(symmetric, (y - y.transpose()).cwiseAbs().maxCoeff());
        }
        ch.add("curved_flat_unitary", unitary, 1e-8);
        ch.add("curved_flat_symmetric", symmetric, 1e-8);
    } else {
        const dressing::SimpleElement g1 = dressing::make_simple(alpha, P);
        if (method == "ode") {
            r = dressing::dress_ode(seed, g1, g1.pi, oo);
        } else if (method == "linear") {
            r = dressing::dress_linear(seed, g1, Mat(), oo);
        } else {
            r = dressing::dress_algebraic(seed, E, g1);
            ch.add("residue_defect", r.residue_defect, 1e-8);
            if (method == "all") {
                const auto ro = dressing::dress_ode(seed, g1, g1.pi, oo);
                const auto rl = dressing::dress_linear(seed, g1, Mat(), oo);
                ch.add("ode_vs_algebraic", dressing::max_difference(ro.pi_tilde, r.pi_tilde), 1e-6);
                ch.add("linear_vs_algebraic", dressing::max_difference(rl.pi_tilde, r.pi_tilde), 1e-6);
                ch.add("ode_vs_linear", dressing::max_difference(ro.pi_tilde, rl.pi_tilde), 1e-6);
            }
        }
    }
    add_un_checks(r, tol, ch);
    ch.note_all("", r.solution.diagnostics);
    io::write_un(c["out"].get<std::string>(), r.solution);
    outputs = {"v.csv", "un.json"};
}

isothermic::IsothermicData iso_seed(const std::string& name, const GridSpec& g)
{
    if (name == "plane") return isothermic::plane(g);
    if (name == "sphere") return isothermic::sphere(g);
    return isothermic::cylinder(g);
}

void pair_checks(const isothermic::IsothermicData& d, const std::string& method, double tol, const json& c,
                 Checks& ch, std::vector<std::string>& outputs)
{
    ch.add("data_residual", d.residual.max(), tol);
    isothermic::ChristoffelPair p;
    if (method == "2") {
        p = isothermic::christoffel_pair_method2(d);
    } else {
        p = isothermic::christoffel_pair_method1(d);
        ch.add("d_zeta", p.diagnostics.at("d_zeta"), 1e-3);
        if (method == "both") {
            const auto p2 = isothermic::christoffel_pair_method2(d);
            ch.add("methods_agree_f", isothermic::translation_distance(p.f.points, p2.f.points), 1e-6);
            ch.add("methods_agree_dual", isothermic::translation_distance(p.f_dual.points, p2.f_dual.points), 1e-6);
        }
    }
    const auto rep = isothermic::verify_pair(p, d, tol);
    ch.add("first_form_f", rep.first_form_f, tol);
    ch.add("first_form_dual", rep.first_form_dual, tol);
    ch.add("second_form_f", rep.second_form_f, tol);
    ch.add("second_form_dual", rep.second_form_dual, tol);
    ch.add("conformality", rep.conformality, tol);
    ch.add("normal_alignment", rep.normal_alignment, tol);
    ch.note("principal_alignment", rep.principal_alignment);
    ch.note("orientation_reversing", rep.orientation_reversing ? 1.0 : 0.0);
    surfaces::export_obj(p.f, path_in(c, "f.obj"));
    surfaces::export_obj(p.f_dual, path_in(c, "f_dual.obj"));
    outputs.push_back("f.obj");
    outputs.push_back("f_dual.obj");
}

void run_isothermic(const json& c, Checks& ch, std::vector<std::string>& outputs)
{
    const GridSpec g = grid_of(c);
    isothermic::IsothermicData d = iso_seed(c["seed"].get<std::string>(), g);
    if (c["dual"].get<bool>()) d = isothermic::christoffel_dual_data(d);
    io::write_isothermic(c["out"].get<std::string>(), d);
    outputs = {"data.csv", "isothermic.json"};
    pair_checks(d, c["method"].get<std::string>(), c["tol"].get<double>(), c, ch, outputs);
}

void run_surface(const json& c, Checks& ch, std::vector<std::string>& outputs)
{
    const GridSpec g = grid_of(c);
    const double tol = c["tol"].get<double>();
    const std::string from = c["from"].get<std::string>();
    const std::string dir = c["out"].get<std::string>();
    if (from == "isothermic") {
        const auto d = iso_seed(c["isothermic_seed"].get<std::string>(), g);
        pair_checks(d, c["method"].get<std::string>(), tol, c, ch, outputs);
        return;
    }
    const sge::SgeSolution q = sge::one_soliton(g, c["mu"].get<double>());
    io::write_sge(dir, "q", q);
    outputs = {"q.csv", "q.json"};
    if (from == "sge") {
        const double r = c["sym_r"].get<double>();
        const auto f = surfaces::sym_immersion(q, r);
        const auto rep = surfaces::fundamental_forms(f);
        const double K = surfaces::expected_curvature(r);
        double kerr = 0.0, ferr = 0.0, merr = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double s2 = std::sin(2 * q.q[k]), c2 = std::cos(2 * q.q[k]);
            if (std::abs(s2) > 0.1) kerr = std::max(kerr, std::abs(rep.K[k] - K));
            ferr = std::max({ferr, std::abs(rep.E[k] - 1), std::abs(rep.F[k] - c2), std::abs(rep.G[k] - 1)});
            merr = std::max(merr, std::abs(rep.M[k] - s2));
        }
        ch.add("curvature", kerr, 1e-2);
        ch.note("expected_curvature", K);
        if (r == 0.5) {
            ch.add("first_form", ferr, tol);
            ch.add("second_form_M", merr, tol);
        }
        surfaces::export_obj(f, path_in(c, "surface.obj"));
        io::write_table(path_in(c, "forms.csv"), io::surface_report_table(rep));
        outputs.push_back("surface.obj");
        outputs.push_back("forms.csv");
        return;
    }
    const auto dv = numbers(c["direction"]);
    const auto d = surfaces::dressing_bt_surface(q, c["dress_s"].get<double>(), Eigen::Vector2d(dv[0], dv[1]));
    double derr = 0.0, tangency = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        derr = std::max(derr, std::abs(d.distance[k] - d.expected_distance));
        tangency = std::max(tangency, d.normal_component[k]);
    }
    ch.add("distance", derr, 1e-4);
    ch.add("tangency", tangency, 1e-3);
    ch.add("frame_reality", d.real_defect, 1e-8);
    ch.add("qhat_residual", sge_residual_max(d.qhat), tol);
    ch.note("expected_distance", d.expected_distance);
    io::write_sge(dir, "qhat", d.qhat);
    surfaces::export_obj(d.f, path_in(c, "f.obj"));
    surfaces::export_obj(d.fhat, path_in(c, "fhat.obj"));
    for (const char* name : {"qhat.csv", "qhat.json", "f.obj", "fhat.obj"}) outputs.push_back(name);
}

} // namespace

json normalize(const std::string& command, const json& raw)
{
    const auto& keys = schema(command);
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    std::set<std::string> known;
    for (const auto& k : keys) known.insert(k.name);
    for (const auto& [name, value] : raw.items())
        if (!known.count(name)) throw ConfigError("unknown config key " + name);

    json c = json::object();
    for (const auto& k : keys) {
        const auto it = raw.find(k.name);
        c[k.name] = (it == raw.end() || it->is_null()) ? json(nullptr) : typed(k, *it);
    }
    set_default(c, "out", "out");
    set_default(c, "tol", 1e-3);
    require(c["tol"].get<double>() > 0.0, "tol must be positive");
    require(!c["out"].get<std::string>().empty(), "out must not be empty");

    if (command == "sge") fill_sge(c);
    if (command == "gsge") fill_gsge(c);
    if (command == "dress") fill_dress(c);
    if (command == "isothermic") fill_isothermic(c);
    if (command == "surface") fill_surface(c);

    json out = json::object();
    for (const auto& k : keys)
        if (!c[k.name].is_null()) out[k.name] = c[k.name];
    return out;
}

json run(const std::string& command, const json& config)
{
    const fs::path dir = config.at("out").get<std::string>();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());

    json report = base_report(command, config);
    Checks ch;
    std::vector<std::string> outputs;
    try {
        if (command == "sge") run_sge(config, ch, outputs);
        if (command == "gsge") run_gsge(config, ch, outputs);
        if (command == "dress") run_dress(config, ch, outputs);
        if (command == "isothermic") run_isothermic(config, ch, outputs);
        if (command == "surface") run_surface(config, ch, outputs);
    } catch (const Error& e) {
        ch.pass = false;
        report["error"] = e.what();
    }
    report["outputs"] = outputs;
    report["checks"] = ch.items;
    report["diagnostics"] = ch.diagnostics;
    report["pass"] = ch.pass;
    io::write_json((dir / "report.json").string(), report);
    return report;
}

json check(const std::string& path)
{
    std::error_code ec;
    const fs::path p(path);
    if (!fs::exists(p, ec)) throw ConfigError("no such path " + path);
    const fs::path dir = fs::is_directory(p) ? p : p.parent_path();
    const std::string d = dir.empty() ? std::string(".") : dir.string();
    auto has = [&](const char* name) { return fs::exists(dir / name); };

    json report{{"tool", "soliton-forge"}, {"version", io::tool_version}, {"command", "check"}};
    Checks ch;
    try {
        if (!fs::is_directory(p) && p.extension() != ".csv" && p.extension() != ".json")
            throw ConfigError("expected a directory, .csv or .json path");
        const std::string file = fs::is_directory(p) ? std::string() : p.filename().string();
        const std::string stem = fs::is_directory(p) ? std::string("q") : p.stem().string();
        if (file == "A.csv" || file == "F.csv" || file == "gsge.json" || (file.empty() && has("gsge.json"))) {
            report["type"] = "gsge";
            const auto s = io::read_gsge(d);
            ch.add("gsge_residual", s.residual.max(), s.tolerance);
            ch.add("orthogonality", s.orthogonality, 1e-8);
            ch.add("frame_residual", gsge::frame_residual(s.A, s.F), s.tolerance);
            ch.note("n", s.n());
        } else if (file == "v.csv" || file == "un.json" || (file.empty() && has("un.json"))) {
            report["type"] = "un";
            const auto s = io::read_un(d);
            ch.add("un_residual", dressing::un_residual(s.v, 4), s.tolerance);
            ch.add("structure", dressing::structure_defect(s.v, s.real_form), 1e-8);
            ch.note("n", s.n());
        } else if (file == "data.csv" || file == "isothermic.json" || (file.empty() && has("isothermic.json"))) {
            report["type"] = "isothermic";
            const auto s = io::read_isothermic(d);
            ch.add("data_residual", s.residual.max(), s.tolerance);
        } else if (fs::exists(dir / (stem + ".json")) && fs::exists(dir / (stem + ".csv"))) {
            report["type"] = "sge";
            const auto s = io::read_sge(d, stem);
            ch.add("sge_residual", sge_residual_max(s), s.tolerance);
            report["mu_history"] = s.mu_history;
        } else {
            throw ConfigError("no recognizable data at " + path);
        }
    } catch (const Error& e) {
        throw ConfigError(std::string("cannot read ") + path + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot read ") + path + ": " + e.what());
    }
    report["path"] = path;
    report["checks"] = ch.items;
    report["diagnostics"] = ch.diagnostics;
    report["pass"] = ch.pass;
    return report;
}

int exit_code(const json& report)
{
    return report.value("pass", false) ? 0 : 1;
}

} // namespace soliton_forge::cli
