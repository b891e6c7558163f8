#include "vortspec_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vortspec/format.hpp"

namespace vortspec::cli {

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& e : v) s += "\n  " + e;
    return s;
}

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys = {
        {"domain",
         {"K", "J", "quad_points", "radial_points", "angular_points", "R_in", "annulus_radial_points",
          "annulus_angular_points", "harmonic_degree", "galerkin_degree", "galerkin_angular_max"}},
        {"solver", {"nu", "dt", "T_final", "output_every", "cfl", "moment_tol", "nonlinear", "coupling"}},
        {"init", {"kind", "seed", "modes", "gamma0"}},
        {"output", {"dir", "snapshot_every", "pressure_cells", "circulation_dt"}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    template <class T>
    void get(const boost::property_tree::ptree& sec, const std::string& section, const std::string& key, T& out)
    {
        const auto v = sec.get_optional<std::string>(key);
        if (!v) return;
        const std::string name = section + "." + key;
        std::istringstream is(*v);
        is.imbue(std::locale::classic());
        T value{};
        if constexpr (std::is_same_v<T, bool>) {
            if (*v == "true" || *v == "1") {
                value = true;
            } else if (*v == "false" || *v == "0") {
                value = false;
            } else {
                errors_.push_back(name + ": expected true or false, got '" + *v + "'");
                return;
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            value = *v;
        } else {
            is >> value;
            if (is.fail() || !(is >> std::ws).eof()) {
                errors_.push_back(name + ": cannot parse '" + *v + "'");
                return;
            }
        }
        out = value;
    }

private:
    std::vector<std::string>& errors_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:" + join(problems)), problems_(std::move(problems))
{
}

std::vector<std::pair<ModeIndex, double>> parse_modes(const std::string& text)
{
    std::vector<std::pair<ModeIndex, double>> out;
    std::istringstream all(text);
    std::string item;
    while (std::getline(all, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream is(item);
        is.imbue(std::locale::classic());
        int k = 0, j = 0;
        std::string parity;
        double amp = 0.0;
        if (!(is >> k >> j >> parity >> amp) || !(is >> std::ws).eof() || (parity != "c" && parity != "s") ||
            k < 0 || j < 1 || (k == 0 && parity == "s")) {
            throw std::invalid_argument("malformed mode '" + item + "', expected 'k j c|s amplitude'");
        }
        out.push_back({make_mode(k, j, parity == "c" ? Parity::cosine : Parity::sine), amp});
    }
    return out;
}

std::string modes_to_string(const std::vector<std::pair<ModeIndex, double>>& modes)
{
    std::string s;
    for (const auto& [m, a] : modes) {
        if (!s.empty()) s += "; ";
        s += std::to_string(m.k) + " " + std::to_string(m.j) + (m.parity == Parity::cosine ? " c " : " s ") +
             format_real(a);
    }
    return s;
}

CliConfig parse_config(std::istream& in, const std::string& source)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError({source + ":" + std::to_string(e.line()) + ": " + e.message()});
    }

    std::vector<std::string> errors;
    for (const auto& [name, sec] : tree) {
        const auto it = known_keys().find(name);
        if (it == known_keys().end()) {
            errors.push_back(sec.empty() ? "key '" + name + "' outside any section"
                                         : "unknown section [" + name + "]");
            continue;
        }
        for (const auto& [key, value] : sec) {
            if (!it->second.count(key)) errors.push_back("unknown key " + name + "." + key);
        }
    }

    CliConfig cfg;
    cfg.run.init.seed.reset();
    Reader rd(errors);
    const boost::property_tree::ptree empty;
    auto section = [&](const char* name) -> const boost::property_tree::ptree& {
        const auto s = tree.get_child_optional(name);
        return s ? *s : empty;
    };

    const auto& dom = section("domain");
    rd.get(dom, "domain", "K", cfg.run.K);
    rd.get(dom, "domain", "J", cfg.run.J);
    rd.get(dom, "domain", "quad_points", cfg.run.quad_points);
    rd.get(dom, "domain", "radial_points", cfg.run.radial_points);
    rd.get(dom, "domain", "angular_points", cfg.run.angular_points);
    rd.get(dom, "domain", "R_in", cfg.annulus.R_in);
    rd.get(dom, "domain", "annulus_radial_points", cfg.annulus.radial_points);
    rd.get(dom, "domain", "annulus_angular_points", cfg.annulus.angular_points);
    rd.get(dom, "domain", "harmonic_degree", cfg.annulus.harmonic_degree);
    rd.get(dom, "domain", "galerkin_degree", cfg.galerkin.radial_degree);
    rd.get(dom, "domain", "galerkin_angular_max", cfg.galerkin.angular_max);

    const auto& sol = section("solver");
    rd.get(sol, "solver", "nu", cfg.run.nu);
    rd.get(sol, "solver", "dt", cfg.run.dt);
    rd.get(sol, "solver", "T_final", cfg.run.T_final);
    rd.get(sol, "solver", "output_every", cfg.run.output_every);
    rd.get(sol, "solver", "cfl", cfg.run.cfl);
    rd.get(sol, "solver", "moment_tol", cfg.run.moment_tol);
    rd.get(sol, "solver", "nonlinear", cfg.run.nonlinear);
    std::string coupling = "integrated";
    rd.get(sol, "solver", "coupling", coupling);
    if (coupling == "integrated") {
        cfg.run.coupling = Coupling::integrated;
    } else if (coupling == "lagged") {
        cfg.run.coupling = Coupling::lagged;
    } else {
        errors.push_back("solver.coupling: expected integrated or lagged, got '" + coupling + "'");
    }

    const auto& ini = section("init");
    std::string kind = "modes";
    rd.get(ini, "init", "kind", kind);
    if (kind == "random") {
        cfg.run.init.kind = InitSpec::Kind::random;
    } else if (kind == "modes") {
        cfg.run.init.kind = InitSpec::Kind::modes;
    } else {
        errors.push_back("init.kind: expected random or modes, got '" + kind + "'");
    }
    if (ini.get_optional<std::string>("seed")) {
        std::uint64_t seed = 0;
        const std::size_t before = errors.size();
        long long signed_seed = 0;
        rd.get(ini, "init", "seed", signed_seed);
        if (errors.size() == before) {
            if (signed_seed < 0) {
                errors.push_back("init.seed: must be nonnegative");
            } else {
                seed = static_cast<std::uint64_t>(signed_seed);
                cfg.run.init.seed = seed;
            }
        }
    }
    std::string modes;
    rd.get(ini, "init", "modes", modes);
    if (!modes.empty()) {
        try {
            cfg.run.init.modes = parse_modes(modes);
        } catch (const std::invalid_argument& e) {
            errors.push_back(std::string("init.modes: ") + e.what());
        }
    }
    if (cfg.run.init.kind == InitSpec::Kind::modes && modes.empty()) {
        cfg.run.init.modes = {{make_mode(0, 1, Parity::cosine), 1.0}};
    }
    rd.get(ini, "init", "gamma0", cfg.circulation.gamma0);

    const auto& outp = section("output");
    rd.get(outp, "output", "dir", cfg.output_dir);
    rd.get(outp, "output", "snapshot_every", cfg.snapshot_every);
    rd.get(outp, "output", "pressure_cells", cfg.pressure.radial_cells);
    rd.get(outp, "output", "circulation_dt", cfg.circulation.output_dt);

    cfg.circulation.nu = cfg.run.nu;
    cfg.circulation.T = cfg.run.T_final;

    for (auto& e : validate(cfg, false)) errors.push_back(std::move(e));
    if (!errors.empty()) {
        for (auto& e : errors) {
            if (e.rfind(source, 0) != 0) e = source + ": " + e;
        }
        throw ConfigError(errors);
    }
    return cfg;
}

CliConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    return parse_config(in, path);
}

std::vector<std::string> validate(const CliConfig& cfg, bool check_cfl)
{
    std::vector<std::string> errors = cfg.run.validate();
    try {
        cfg.annulus.validate();
    } catch (const std::invalid_argument& e) {
        errors.push_back(e.what());
    }
    if (cfg.galerkin.radial_degree < 5) errors.push_back("domain.galerkin_degree must be at least 5");
    if (cfg.galerkin.angular_max < 3) errors.push_back("domain.galerkin_angular_max must be at least 3");
    if (cfg.snapshot_every < 0) errors.push_back("output.snapshot_every must be nonnegative");
    if (cfg.pressure.radial_cells < 16) errors.push_back("output.pressure_cells must be at least 16");
    if (!(cfg.circulation.output_dt > 0.0) || !(cfg.run.T_final >= 2 * cfg.circulation.output_dt)) {
        errors.push_back("output.circulation_dt must be positive and at most T_final / 2");
    }
    if (!std::isfinite(cfg.circulation.gamma0)) errors.push_back("init.gamma0 must be finite");
    if (cfg.output_dir.empty()) errors.push_back("output.dir must not be empty");
    if (check_cfl && errors.empty()) {
        const NsSolver solver(cfg.run);
        const double c = solver.cfl_number(solver.initial_vorticity());
        if (c > cfg.run.cfl) {
            errors.push_back("solver.dt violates the CFL bound for the initial data: CFL number " + format_real(c) +
                             " exceeds " + format_real(cfg.run.cfl));
        }
    }
    return errors;
}

nlohmann::json to_json(const CliConfig& cfg)
{
    const RunConfig& r = cfg.run;
    nlohmann::json j;
    j["domain"] = {{"K", r.K},
                   {"J", r.J},
                   {"quad_points", r.resolved_quad_points()},
                   {"radial_points", r.resolved_radial_points()},
                   {"angular_points", r.resolved_angular_points()},
                   {"R_in", cfg.annulus.R_in},
                   {"annulus_radial_points", cfg.annulus.radial_points},
                   {"annulus_angular_points", cfg.annulus.angular_points},
                   {"harmonic_degree", cfg.annulus.harmonic_degree},
                   {"galerkin_degree", cfg.galerkin.radial_degree},
                   {"galerkin_angular_max", cfg.galerkin.angular_max}};
    j["solver"] = {{"nu", r.nu},
                   {"dt", r.dt},
                   {"T_final", r.T_final},
                   {"output_every", r.output_every},
                   {"cfl", r.cfl},
                   {"moment_tol", r.moment_tol},
                   {"nonlinear", r.nonlinear},
                   {"coupling", r.coupling == Coupling::integrated ? "integrated" : "lagged"}};
    j["init"] = {{"kind", r.init.kind == InitSpec::Kind::random ? "random" : "modes"},
                 {"modes", modes_to_string(r.init.modes)},
                 {"gamma0", cfg.circulation.gamma0}};
    j["init"]["seed"] = r.init.seed ? nlohmann::json(*r.init.seed) : nlohmann::json(nullptr);
    j["output"] = {{"dir", cfg.output_dir},
                   {"snapshot_every", cfg.snapshot_every},
                   {"pressure_cells", cfg.pressure.radial_cells},
                   {"circulation_dt", cfg.circulation.output_dt}};
    return j;
}

}  // namespace vortspec::cli
