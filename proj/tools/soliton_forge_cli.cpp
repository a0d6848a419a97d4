#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

using soliton_forge::cli::ConfigError;
using soliton_forge::cli::json;

namespace {

std::vector<double> split_numbers(const std::string& s, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            throw ConfigError(what + " must be a comma separated list of numbers");
        }
        if (used != part.size()) throw ConfigError(what + " must be a comma separated list of numbers");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

double parse_dress(const std::string& s)
{
    const std::string v = s.rfind("s=", 0) == 0 ? s.substr(2) : s;
    const auto n = split_numbers(v, "--dress");
    if (n.size() != 1) throw ConfigError("--dress takes s=<value>");
    return n[0];
}

struct Sub {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::function<void(json&)>> setters;
};

template <class T>
void flag_value(Sub& sub, const std::string& flag, const std::string& key, const std::string& help)
{
    auto holder = std::make_shared<T>();
    auto* opt = sub.app->add_option(flag, *holder, help);
    sub.setters[key] = [holder, opt, key](json& c) {
        if (opt->count()) c[key] = *holder;
    };
}

void flag_bool(Sub& sub, const std::string& flag, const std::string& key, const std::string& help)
{
    auto* opt = sub.app->add_flag(flag, help);
    sub.setters[key] = [opt, key](json& c) {
        if (opt->count()) c[key] = true;
    };
}

void flag_list(Sub& sub, const std::string& flag, const std::string& key, const std::string& help)
{
    auto holder = std::make_shared<std::string>();
    auto* opt = sub.app->add_option(flag, *holder, help);
    sub.setters[key] = [holder, opt, key, flag](json& c) {
        if (opt->count()) c[key] = split_numbers(*holder, flag);
    };
}

void common(Sub& sub)
{
    sub.app->add_option("--config", sub.config_path, "JSON config file; flags override its entries");
    flag_value<std::string>(sub, "--grid", "grid", "node counts, e.g. 200x200");
    flag_value<double>(sub, "--lo", "lo", "lower coordinate bound on every axis");
    flag_value<double>(sub, "--hi", "hi", "upper coordinate bound on every axis");
    flag_value<std::string>(sub, "--out", "out", "output directory");
    flag_value<double>(sub, "--tol", "tol", "residual tolerance");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Soliton and integrable-geometry toolkit"};
    app.set_version_flag("--version", soliton_forge::io::tool_version);
    app.require_subcommand(1);

    std::map<std::string, Sub> subs;
    auto make = [&](const std::string& name, const std::string& help) -> Sub& {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        common(s);
        return s;
    };

    {
        Sub& s = make("sge", "sine-Gordon solutions: closed form, ODE Backlund, Bianchi permutability");
        auto mus = std::make_shared<std::vector<double>>();
        auto* opt = s.app->add_option("--mu", *mus, "Backlund parameter (repeatable)");
        s.setters["mu"] = [mus, opt](json& c) {
            if (opt->count()) c["mu"] = *mus;
        };
        flag_bool(s, "--vacuum", "vacuum", "write the vacuum q = 0");
        flag_bool(s, "--permute", "permute", "build from the permutability lattice");
        flag_bool(s, "--backlund", "backlund", "integrate the Backlund ODE from the vacuum");
        flag_value<double>(s, "--qstar0", "qstar0", "basepoint value of the transformed solution");
        flag_value<int>(s, "--substeps", "substeps", "RK4 substeps per grid step");
    }
    {
        Sub& s = make("gsge", "generalized sine-Gordon: Backlund transforms and permutability from A = I");
        flag_value<int>(s, "--n", "n", "matrix size");
        auto th = std::make_shared<std::vector<double>>();
        auto* opt = s.app->add_option("--theta", *th, "angle in (0, pi), once or twice");
        s.setters["theta"] = [th, opt](json& c) {
            if (opt->count()) c["theta"] = *th;
        };
        flag_value<std::string>(s, "--method", "method", "linear or riccati");
        flag_list(s, "--skew", "skew", "upper entries of the skew matrix whose Cayley transform is X0");
        flag_value<int>(s, "--substeps", "substeps", "RK4 substeps per grid step");
    }
    {
        Sub& s = make("dress", "U(n) dressing of the vacuum by a simple element");
        flag_value<int>(s, "--n", "n", "matrix size");
        flag_list(s, "--alpha", "alpha", "pole as re,im");
        flag_list(s, "--pi", "pi", "real parts of the unit vector spanning Im pi");
        flag_list(s, "--pi-im", "pi_im", "imaginary parts of that vector");
        flag_value<std::string>(s, "--method", "method", "algebraic, ode, linear or all");
        flag_bool(s, "--real-form", "real_form", "U(n)/O(n) case with a reality-preserving loop");
        flag_value<int>(s, "--substeps", "substeps", "RK4 substeps per grid step");
    }
    {
        Sub& s = make("isothermic", "isothermic data and its Christoffel pair");
        flag_value<std::string>(s, "--seed", "seed", "plane, cylinder or sphere");
        flag_bool(s, "--dual", "dual", "start from the dual data");
        flag_value<std::string>(s, "--method", "method", "1, 2 or both");
    }
    {
        Sub& s = make("surface", "surfaces: Sym, Christoffel pair, dressing transform");
        flag_value<std::string>(s, "--from", "from", "sge, isothermic or dress");
        flag_value<double>(s, "--mu", "mu", "soliton parameter");
        flag_value<double>(s, "--sym-r", "sym_r", "spectral value for the Sym formula");
        flag_value<std::string>(s, "--isothermic-seed", "isothermic_seed", "plane, cylinder or sphere");
        auto ds = std::make_shared<std::string>();
        auto* opt = s.app->add_option("--dress", *ds, "dressing parameter, s=<value>");
        s.setters["dress_s"] = [ds, opt](json& c) {
            if (opt->count()) c["dress_s"] = parse_dress(*ds);
        };
        flag_list(s, "--direction", "direction", "real direction spanning Im pi");
        flag_value<std::string>(s, "--method", "method", "Christoffel method: 1, 2 or both");
    }
    std::string check_path;
    CLI::App* check_cmd = app.add_subcommand("check", "re-verify stored output");
    check_cmd->add_option("path", check_path, "output directory or file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (check_cmd->parsed()) {
            const json report = soliton_forge::cli::check(check_path);
            std::cout << soliton_forge::io::json_text(report);
            return soliton_forge::cli::exit_code(report);
        }
        for (auto& [name, sub] : subs) {
            if (!sub.app->parsed()) continue;
            json raw = json::object();
            if (!sub.config_path.empty()) {
                try {
                    raw = json::parse(soliton_forge::io::read_text(sub.config_path));
                } catch (const std::exception& e) {
                    throw ConfigError(std::string("bad config file: ") + e.what());
                }
                if (!raw.is_object()) throw ConfigError("config must be a JSON object");
            }
            for (auto& [key, set] : sub.setters) set(raw);
            const json config = soliton_forge::cli::normalize(name, raw);
            const json report = soliton_forge::cli::run(name, config);
            std::cout << soliton_forge::io::json_text(report);
            return soliton_forge::cli::exit_code(report);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
