#include "vortspec_cli/app.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "vortspec/format.hpp"
#include "vortspec/parallel.hpp"
#include "vortspec_cli/acceptance.hpp"
#include "vortspec_cli/config.hpp"
#include "vortspec_cli/manifest.hpp"

namespace vortspec::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Common {
    std::string config;
    std::string out;
    std::optional<long long> seed;
};

CliConfig resolve(const Common& c)
{
    CliConfig cfg;
    cfg.run.init.kind = InitSpec::Kind::modes;
    cfg.run.init.modes = {{make_mode(0, 1, Parity::cosine), 1.0}};
    if (!c.config.empty()) cfg = load_config(c.config);
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (c.seed) {
        if (*c.seed < 0) throw ConfigError({"--seed must be nonnegative"});
        cfg.run.init.seed = static_cast<std::uint64_t>(*c.seed);
    }
    return cfg;
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

template <class F>
void write_stream(const std::filesystem::path& p, F&& body)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os.imbue(std::locale::classic());
    body(os);
}

std::string snapshot_name(const char* stem, std::size_t index, const char* ext)
{
    std::ostringstream os;
    os << "snapshots/" << stem << '_' << std::setw(6) << std::setfill('0') << index << ext;
    return os.str();
}

void write_trajectory_outputs(RunManifest& m, const CliConfig& cfg, const Trajectory& tr)
{
    write_stream(m.output("trajectory.csv"), [&](std::ostream& os) { write_trajectory_csv(tr, os); });
    if (cfg.snapshot_every > 0) {
        for (std::size_t i = 0; i < tr.size(); i += static_cast<std::size_t>(cfg.snapshot_every)) {
            write_file(m.output(snapshot_name("omega", i, ".json")), spectral_to_json(tr.states[i]) + "\n");
        }
    }
}

nlohmann::json decay_json(const Trajectory& tr)
{
    nlohmann::json j;
    for (auto [name, member] : {std::pair{"energy", &DiagnosticsRow::energy},
                                std::pair{"enstrophy", &DiagnosticsRow::enstrophy},
                                std::pair{"palinstrophy_norm", &DiagnosticsRow::palinstrophy_norm}}) {
        try {
            const DecayFit f = fit_decay_rate(tr.times, tr.column(member));
            j[name] = {{"rate", f.rate}, {"r_squared", f.r_squared}, {"window", {f.window.first, f.window.second}}};
        } catch (const std::exception& e) {
            j[name] = {{"error", e.what()}};
        }
    }
    return j;
}

nlohmann::json final_json(const Trajectory& tr)
{
    const DiagnosticsRow r = tr.diagnostics.empty() ? linear_diagnostics(tr.times.back(), tr.states.back())
                                                    : tr.diagnostics.back();
    double drift = 0.0;
    for (const auto& d : tr.diagnostics) drift = std::max(drift, d.moment_drift);
    return {{"t", r.t},
            {"energy", r.energy},
            {"enstrophy", r.enstrophy},
            {"palinstrophy_norm", r.palinstrophy_norm},
            {"max_moment_drift", drift},
            {"samples", tr.size()}};
}

// Manifest written before the body runs and finalized after it, also when it throws.
template <class Body>
int with_manifest(const std::string& name, const Common& common, const CliConfig& cfg, Body&& body)
{
    RunManifest m(cfg.output_dir, name, common.config, to_json(cfg), cfg.run.init.seed);
    int code = kOk;
    try {
        code = body(m);
    } catch (...) {
        m.finish("failed", -1);
        throw;
    }
    m.finish(code == kOk ? "completed" : "tolerance_failure", code);
    return code;
}

int cmd_spectrum(const Common& common, std::optional<int> K, std::optional<int> J, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    if (K) cfg.run.K = *K;
    if (J) cfg.run.J = *J;
    if (auto errs = validate(cfg, false); !errs.empty()) throw ConfigError(errs);
    return with_manifest("spectrum", common, cfg, [&](RunManifest& m) {
        const TablePtr t = build_table(cfg.run.K, cfg.run.J, cfg.run.resolved_quad_points());
        const std::string js = table_to_json(*t);
        write_file(m.output("spectrum.json"), js + "\n");
        nlohmann::json rep = {{"modes", t->size()},
                              {"lambda_min", t->lambda_min()},
                              {"lambda_max", t->lambda_max()},
                              {"normalization_error", t->normalization_error()}};
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        out << js << '\n';
        return kOk;
    });
}

int cmd_stokes(const Common& common, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    cfg.run.nonlinear = false;
    if (auto errs = validate(cfg, false); !errs.empty()) throw ConfigError(errs);
    return with_manifest("stokes", common, cfg, [&](RunManifest& m) {
        const NsSolver s(cfg.run);
        const Trajectory tr = s.stokes_run();
        write_trajectory_outputs(m, cfg, tr);
        const SpectralField w0 = s.initial_vorticity();
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const SpectralField ex = propagate(w0, cfg.run.nu, tr.times[i]);
            const double scale = std::max(norm_at(ex, 0), 1e-300);
            worst = std::max(worst, norm_at(tr.states[i] - ex, 0) / scale);
        }
        nlohmann::json rep = {{"final", final_json(tr)}, {"decay", decay_json(tr)},
                              {"max_relative_deviation_from_semigroup", worst},
                              {"lambda_min", s.table()->lambda_min()}};
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        out << "stokes: " << tr.size() << " samples to t=" << format_real(tr.times.back()) << '\n';
        return kOk;
    });
}

int cmd_ns(const Common& common, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    if (auto errs = validate(cfg, true); !errs.empty()) throw ConfigError(errs);
    return with_manifest("ns", common, cfg, [&](RunManifest& m) {
        const NsSolver s(cfg.run);
        const Trajectory tr = s.run();
        write_trajectory_outputs(m, cfg, tr);
        const double nl = cfg.run.nu * s.table()->lambda_min();
        nlohmann::json rep = {{"final", final_json(tr)}, {"decay", decay_json(tr)}, {"nu_lambda_min", nl}};
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        out << "ns: " << tr.size() << " samples to t=" << format_real(tr.times.back()) << '\n';
        return kOk;
    });
}

int cmd_biot_savart(const Common& common, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    if (!cfg.run.init.seed) cfg.run.init.seed = 42;
    if (auto errs = validate(cfg, false); !errs.empty()) throw ConfigError(errs);
    return with_manifest("biot-savart-check", common, cfg, [&](RunManifest& m) {
        const int K = cfg.run.K, J = cfg.run.J;
        const TablePtr t = build_table(K, J, cfg.run.resolved_quad_points());
        const GridPtr g = make_grid(t, cfg.run.resolved_quad_points(), std::max(32, 4 * K + 4));
        const SpectralField w = random_field(t, *cfg.run.init.seed);
        const SpectralField psi = biot_savart(w);
        const GridField wg = to_grid(w, g);
        std::mt19937_64 gen(*cfg.run.init.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Point> in, ext;
        for (int i = 0; i < 24; ++i) {
            const double r = 0.95 * std::sqrt(u(gen)), th = 2 * kPi * u(gen);
            in.push_back({r * std::cos(th), r * std::sin(th)});
            const double re = 1.1 + u(gen), te = 2 * kPi * u(gen);
            ext.push_back({re * std::cos(te), re * std::sin(te)});
        }
        const auto pn = newtonian_potential(wg, in);
        const auto pg = dirichlet_green_potential(wg, in);
        const auto pe = newtonian_potential(wg, ext);
        double e_in = 0.0, e_green = 0.0, e_out = 0.0;
        write_stream(m.output("points.csv"), [&](std::ostream& os) {
            os << "x,y,spectral,newtonian,green\n";
            for (std::size_t p = 0; p < in.size(); ++p) {
                const double ref = evaluate(psi, std::hypot(in[p][0], in[p][1]), std::atan2(in[p][1], in[p][0]));
                e_in = std::max(e_in, std::abs(pn.values[p] - ref));
                e_green = std::max(e_green, std::abs(pg.values[p] - pn.values[p]));
                os << format_real(in[p][0]) << ',' << format_real(in[p][1]) << ',' << format_real(ref) << ','
                   << format_real(pn.values[p]) << ',' << format_real(pg.values[p]) << '\n';
            }
        });
        for (double v : pe.values) e_out = std::max(e_out, std::abs(v) / norm_at(w, 0));
        const bool ok = e_in <= 1e-5 && e_green <= 1e-5 && e_out <= 1e-6;
        nlohmann::json rep = {{"interior_max_error", e_in},
                              {"green_vs_newtonian_max", e_green},
                              {"exterior_max_relative", e_out},
                              {"passed", ok}};
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        out << "biot-savart-check: " << (ok ? "PASS" : "FAIL") << " interior " << format_real(e_in) << " green "
            << format_real(e_green) << " exterior " << format_real(e_out) << '\n';
        return ok ? kOk : kTolerance;
    });
}

int cmd_pressure(const Common& common, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    if (auto errs = validate(cfg, true); !errs.empty()) throw ConfigError(errs);
    return with_manifest("pressure", common, cfg, [&](RunManifest& m) {
        const NsSolver s(cfg.run);
        const Trajectory tr = cfg.run.nonlinear ? s.run() : s.stokes_run();
        write_trajectory_outputs(m, cfg, tr);
        const std::size_t every = cfg.snapshot_every > 0 ? static_cast<std::size_t>(cfg.snapshot_every) : tr.size();
        for (std::size_t i = 0; i < tr.size(); i += every) {
            const PressureField p = recover_pressure(tr.states[i], cfg.run.nu, s.grid(), cfg.pressure);
            write_stream(m.output(snapshot_name("pressure", i, ".csv")),
                         [&](std::ostream& os) { write_pressure_csv(p, os); });
        }
        const PressureField last = recover_pressure(tr.states.back(), cfg.run.nu, s.grid(), cfg.pressure);
        write_stream(m.output("pressure_final.csv"), [&](std::ostream& os) { write_pressure_csv(last, os); });
        nlohmann::json rep = {{"final", final_json(tr)}, {"compatibility_defect", last.compatibility_defect}};
        if (tr.size() >= 3) {
            const MomentumResidual r = momentum_residual(tr, tr.size() / 2, s.grid(), cfg.run.nu, cfg.pressure);
            rep["momentum_residual"] = {{"time", tr.times[tr.size() / 2]},
                                        {"absolute", r.absolute},
                                        {"scale", r.scale},
                                        {"relative", r.relative}};
            out << "pressure: momentum residual " << format_real(r.relative) << " at t="
                << format_real(tr.times[tr.size() / 2]) << '\n';
        }
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        return kOk;
    });
}

int cmd_annulus(const Common& common, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    if (auto errs = validate(cfg, false); !errs.empty()) throw ConfigError(errs);
    return with_manifest("annulus-verify", common, cfg, [&](RunManifest& m) {
        const AnnulusGridPtr grid = make_annulus_grid(cfg.annulus);
        const double R = cfg.annulus.R_in;
        const XiProfile xi = xi_circulation(cfg.annulus);
        const double xf = xi_flux(cfg.annulus, xi);
        const OmegaBig o = omega_big(grid);
        const int ang = std::min(4, cfg.annulus.harmonic_degree);
        const AnnulusExpansion bump = project_to_v0(
            fit_expansion(grid, std::min(16, grid->nr() - 1), ang,
                          [&](double r, double t) {
                              const double c = 0.5 * (1 + R);
                              return std::exp(-20 * (r - c) * (r - c)) * (1 + 0.3 * std::cos(t) + 0.2 * std::sin(2 * t));
                          }),
            grid);
        const BoundaryReport br = newtonian_bs_annulus(bump, grid);
        const AnnulusSpectra sp = galerkin_spectra(R, cfg.galerkin);
        const CirculationSeries cs = annulus_stokes_circulation(R, cfg.circulation);
        write_stream(m.output("spectra.csv"), [&](std::ostream& os) { write_spectra_csv(sp, os); });
        write_stream(m.output("circulation.csv"), [&](std::ostream& os) { write_circulation_csv(cs, os); });
        const double rel = std::abs(sp.lambda_V - sp.lambda_S) / sp.lambda_S;
        const bool ok = std::abs(xf + 1) <= 1e-10 && std::abs(o.flux + 1) <= 1e-8 && o.max_orthogonality <= 1e-8 &&
                        br.outer_max <= 5e-5 && br.inner_stddev <= 5e-5 && br.normal_max <= 5e-4 && rel <= 1e-6 &&
                        sp.lambda_Z <= sp.lambda_S && cs.lamb_residual <= 1e-4;
        nlohmann::json rep = {
            {"xi_flux", xf},
            {"omega", {{"flux", o.flux}, {"max_orthogonality", o.max_orthogonality},
                       {"distance_to_xi", o.distance_to_xi}, {"condition", o.condition}}},
            {"newtonian", {{"outer_max", br.outer_max}, {"inner_stddev", br.inner_stddev},
                           {"normal_max", br.normal_max}}},
            {"spectra", {{"lambda_V", sp.lambda_V}, {"lambda_S", sp.lambda_S}, {"lambda_Z", sp.lambda_Z},
                         {"relative_gap", rel}, {"max_symmetry_error", sp.max_symmetry_error}}},
            {"circulation", {{"lamb_residual", cs.lamb_residual}, {"residual_inner", cs.residual_inner},
                             {"residual_probe", cs.residual_probe}}},
            {"passed", ok}};
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        out << "annulus-verify: " << (ok ? "PASS" : "FAIL") << '\n';
        return ok ? kOk : kTolerance;
    });
}

int cmd_accept(const Common& common, const std::vector<int>& only, std::ostream& out)
{
    CliConfig cfg = resolve(common);
    for (int id : only) {
        if (id < 1 || id > criterion_count()) throw ConfigError({"--only ids must lie in [1, 12]"});
    }
    return with_manifest("accept", common, cfg, [&](RunManifest& m) {
        AcceptanceOptions opt;
        opt.only = only;
        if (common.seed) opt.seed = static_cast<std::uint64_t>(*common.seed);
        const auto results = run_acceptance(opt, &out);
        const nlohmann::json rep = to_json(results);
        write_file(m.output("report.json"), rep.dump(2) + "\n");
        return rep["all_passed"].get<bool>() ? kOk : kTolerance;
    });
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spectral vorticity/stream-function Navier-Stokes toolkit", "vortspec-cli"};
    app.require_subcommand(1);
    std::optional<int> threads;
    app.add_option("--threads", threads, "worker threads (overrides VORTSPEC_THREADS)")->check(CLI::PositiveNumber);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "INI run configuration");
        sub->add_option("--out", common.out, "output directory (overrides output.dir)");
        sub->add_option("--seed", common.seed, "seed override");
    };
    std::optional<int> K, J;
    std::vector<int> only;
    CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalue table of the disk");
    add_common(spectrum);
    spectrum->add_option("--K", K, "largest angular index");
    spectrum->add_option("--J", J, "radial modes per angular index");
    CLI::App* stokes = app.add_subcommand("stokes", "linear Stokes run");
    CLI::App* ns = app.add_subcommand("ns", "Navier-Stokes run");
    CLI::App* bs = app.add_subcommand("biot-savart-check", "Newtonian potential against the spectral inverse");
    CLI::App* pr = app.add_subcommand("pressure", "run and recover the pressure");
    CLI::App* an = app.add_subcommand("annulus-verify", "annulus flux, potential and spectrum checks");
    CLI::App* ac = app.add_subcommand("accept", "full acceptance suite");
    for (CLI::App* s : {stokes, ns, bs, pr, an, ac}) add_common(s);
    ac->add_option("--only", only, "criterion ids to run");

    std::vector<std::string> args(argv.rbegin(), argv.rend() - (argv.empty() ? 0 : 1));
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kValidation;
    }
    if (threads) set_thread_count(*threads);

    try {
        if (*spectrum) return cmd_spectrum(common, K, J, out);
        if (*stokes) return cmd_stokes(common, out);
        if (*ns) return cmd_ns(common, out);
        if (*bs) return cmd_biot_savart(common, out);
        if (*pr) return cmd_pressure(common, out);
        if (*an) return cmd_annulus(common, out);
        if (*ac) return cmd_accept(common, only, out);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kValidation;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kTolerance;
    }
    return kValidation;
}

}  // namespace vortspec::cli
