#include "vortspec_cli/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vortspec/annulus.hpp"
#include "vortspec/format.hpp"
#include "vortspec/ns_solver.hpp"
#include "vortspec/pressure.hpp"
#include "vortspec/specfun.hpp"

namespace vortspec::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fixed2(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

std::string sci(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

// First positive zero of J1 by plain bisection on std::cyl_bessel_j, independent of specfun.
double j1_first_zero_oracle()
{
    double lo = 3.0, hi = 4.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::cyl_bessel_j(1.0, lo) * std::cyl_bessel_j(1.0, mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double lambda_f_oracle()
{
    const double a = j1_first_zero_oracle();
    return a * a;
}

const ModeIndex kE01 = make_mode(0, 1, Parity::cosine);

Outcome spectrum_pinning()
{
    const TablePtr t = build_table(8, 8, recommended_quad_points(8, 8));
    const double oracle = lambda_f_oracle();
    const double rel = std::abs(t->lambda_min() - oracle) / oracle;
    return {rel <= 1e-6, "lambda_min " + format_real(t->lambda_min()) + " oracle " + format_real(oracle) +
                             " rel " + sci(rel)};
}

Outcome v0_membership()
{
    const TablePtr t = build_table(8, 8, recommended_quad_points(8, 8));
    double worst = 0.0;
    for (const auto& mode : t->modes()) {
        for (double v : membership_residuals(*t, mode, 8)) worst = std::max(worst, std::abs(v));
    }
    return {worst <= 1e-9, "max harmonic moment " + sci(worst) + " over " + std::to_string(t->size()) + " modes"};
}

struct DiskSetup {
    TablePtr table = build_table(8, 8, recommended_quad_points(8, 8));
    GridPtr grid = make_grid(table, recommended_quad_points(8, 8), 32);
};

std::vector<Point> interior_points(std::uint64_t seed, int n)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
        const double r = 0.95 * std::sqrt(u(gen)), th = 2 * kPi * u(gen);
        pts.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return pts;
}

Outcome biot_savart_newtonian(std::uint64_t seed)
{
    const DiskSetup d;
    double worst_in = 0.0, worst_out = 0.0;
    std::vector<Point> ext;
    for (int a = 0; a < 8; ++a) {
        const double r = 1.2 + 0.1 * a, th = 0.3 + a * kPi / 4;
        ext.push_back({r * std::cos(th), r * std::sin(th)});
    }
    for (std::uint64_t s = seed; s < seed + 5; ++s) {
        const SpectralField w = random_field(d.table, s);
        const SpectralField psi = biot_savart(w);
        const GridField wg = to_grid(w, d.grid);
        const auto pts = interior_points(s, 12);
        const auto pn = newtonian_potential(wg, pts);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const double ref = evaluate(psi, std::hypot(pts[p][0], pts[p][1]), std::atan2(pts[p][1], pts[p][0]));
            worst_in = std::max(worst_in, std::abs(pn.values[p] - ref));
        }
        const auto pe = newtonian_potential(wg, ext);
        for (double v : pe.values) worst_out = std::max(worst_out, std::abs(v) / norm_at(w, 0));
    }
    return {worst_in <= 1e-5 && worst_out <= 1e-6,
            "interior max error " + sci(worst_in) + ", exterior max |psi|/||omega|| " + sci(worst_out)};
}

Outcome euler_equivalence(std::uint64_t seed)
{
    const DiskSetup d;
    double worst = 0.0;
    for (std::uint64_t s = seed; s < seed + 5; ++s) {
        const GridField wg = to_grid(random_field(d.table, s), d.grid);
        const auto pts = interior_points(s + 1000, 12);
        const auto pn = newtonian_potential(wg, pts);
        const auto pg = dirichlet_green_potential(wg, pts);
        for (std::size_t p = 0; p < pts.size(); ++p) worst = std::max(worst, std::abs(pn.values[p] - pg.values[p]));
    }
    return {worst <= 1e-5, "max |Green - Newtonian| " + sci(worst)};
}

Outcome linear_decay()
{
    RunConfig c;
    c.nu = 0.1;
    c.K = 4;
    c.J = 4;
    c.dt = 0.05;
    c.T_final = 5.0;
    c.output_every = 10;
    c.nonlinear = false;
    c.init.kind = InitSpec::Kind::modes;
    c.init.modes = {{kE01, 1.0}};
    const NsSolver s(c);
    const Trajectory tr = s.stokes_run();
    double worst = 0.0;
    const double lam = lambda_f_oracle();
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double exact = std::exp(-c.nu * lam * tr.times[i]);
        worst = std::max(worst, std::abs(tr.states[i].at(kE01) - exact) / exact);
    }
    const bool at_end = std::abs(tr.times.back() - 5.0) < 1e-12;
    return {at_end && worst <= 1e-10, "max relative deviation from exp(-nu lambda_F t) up to t=" +
                                          format_real(tr.times.back()) + ": " + sci(worst)};
}

RunConfig reference_config(std::uint64_t seed)
{
    RunConfig c;
    c.nu = 0.1;
    c.K = 8;
    c.J = 8;
    c.dt = 1e-3;
    c.T_final = 6.0;
    c.output_every = 100;
    c.init.kind = InitSpec::Kind::random;
    c.init.seed = seed;
    return c;
}

struct ReferenceRun {
    Trajectory trajectory;
    double seconds = 0.0;
};

Outcome decay_rates(const ReferenceRun& ref)
{
    const Trajectory& tr = ref.trajectory;
    const double nl = 0.1 * lambda_f_oracle();
    const DecayFit e = fit_decay_rate(tr.times, tr.column(&DiagnosticsRow::energy));
    const DecayFit p = fit_decay_rate(tr.times, tr.column(&DiagnosticsRow::palinstrophy_norm));
    const bool ok = e.rate >= 0.95 * nl && p.rate >= 0.95 * 0.5 * nl;
    return {ok, "window [" + fixed2(e.window.first) + ", " + fixed2(e.window.second) +
                    "]: V-1 rate " + sci(e.rate) + " (need " + sci(0.95 * nl) + "), V1 rate " + sci(p.rate) +
                    " (need " + sci(0.475 * nl) + ")"};
}

Outcome moment_invariance(const ReferenceRun& ref)
{
    const Trajectory& tr = ref.trajectory;
    double worst = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        worst = std::max(worst, tr.diagnostics[i].moment_drift / tr.times[i]);
    }
    return {worst <= 1e-8, "max moment drift per unit time " + sci(worst)};
}

Outcome skew_symmetry(std::uint64_t seed)
{
    const DiskSetup d;
    const GridPtr grid = make_grid(d.table, recommended_quad_points(8, 8) + 16, 26);
    double worst = 0.0;
    for (std::uint64_t s = seed; s < seed + 20; ++s) {
        const SpectralField w = random_field(d.table, s);
        const AdvectionResult a = advection(w, grid);
        worst = std::max(worst, std::abs(advection_pairing(a, biot_savart(w))) / std::pow(norm_at(w, 0), 3));
    }
    return {worst <= 1e-8, "max |<Lambda(psi), psi>| / ||omega||^3 over 20 fields " + sci(worst)};
}

Outcome energy_identity(std::uint64_t seed)
{
    std::vector<double> res;
    // asymptotic regime: nu * lambda_max * dt <= 0.35 on the reference truncation
    for (double dt : {0.0025, 0.00125, 0.000625}) {
        RunConfig c = reference_config(seed);
        c.dt = dt;
        c.T_final = 1.0;
        const NsSolver s(c);
        SolverState st = s.initial_state();
        double worst = 0.0;
        for (int k = 0; k < static_cast<int>(std::lround(0.2 / dt)); ++k) {
            const SolverState nx = s.step(st);
            const SpectralField a = st.omega(), b = nx.omega();
            const double lhs = 0.5 * (std::pow(norm_at(b, 0), 2) - std::pow(norm_at(a, 0), 2)) / dt;
            const double rate = 0.5 * (s.enstrophy_rate(a) + s.enstrophy_rate(b));
            worst = std::max(worst, std::abs(lhs - rate));
            st = nx;
        }
        res.push_back(worst);
    }
    const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
    return {o1 >= 1.8 && o2 >= 1.8, "residuals " + sci(res[0]) + ", " + sci(res[1]) + ", " + sci(res[2]) +
                                        "; orders " + fixed2(o1) + ", " +
                                        fixed2(o2)};
}

Outcome pressure_consistency()
{
    // circular flow: radial balance and radial grid order
    const TablePtr t = build_table(6, 6, recommended_quad_points(6, 6));
    const GridPtr g = make_grid(t, recommended_quad_points(6, 6) + 16, 20);
    const SpectralField w = SpectralField::single(t, kE01);
    const SpectralField psi = biot_savart(w);
    std::vector<double> balance;
    for (int cells : {100, 200, 400}) {
        PressureOptions opt;
        opt.radial_cells = cells;
        const PressureField p = recover_pressure(w, 0.1, g, opt);
        double worst = 0.0;
        for (int i = 0; i < g->nr(); ++i) {
            const double u = evaluate(psi, g->r(i), 0.0, Derivative::d_r);
            for (int q = 0; q < g->nt(); ++q) worst = std::max(worst, std::abs(p.d_r.at(i, q) - u * u / g->r(i)));
        }
        balance.push_back(worst);
    }
    const double grid_order = std::log2(balance[1] / balance[2]);

    // Stokes circular run: time order of the momentum residual
    std::vector<double> stokes;
    for (int every : {4, 2, 1}) {
        RunConfig c;
        c.nu = 0.1;
        c.K = 4;
        c.J = 4;
        c.dt = 0.0125;
        c.T_final = 0.5;
        c.output_every = every;
        c.nonlinear = false;
        c.init.kind = InitSpec::Kind::modes;
        c.init.modes = {{kE01, 1.0}};
        const NsSolver s(c);
        const Trajectory tr = s.stokes_run();
        std::size_t mid = 0;
        while (tr.times[mid] < 0.25 - 1e-9) ++mid;
        stokes.push_back(momentum_residual(tr, mid, s.grid(), c.nu).relative);
    }
    const double time_order = std::log2(stokes[1] / stokes[2]);

    // two-mode Navier-Stokes run, refined in the truncation
    std::vector<double> two;
    for (int K : {8, 10}) {
        RunConfig c;
        c.nu = 0.1;
        c.K = K;
        c.J = K;
        c.dt = 2e-3;
        c.T_final = 0.2;
        c.output_every = 5;
        c.init.kind = InitSpec::Kind::modes;
        c.init.modes = {{kE01, 1.0}, {make_mode(1, 1, Parity::cosine), 0.5}};
        const NsSolver s(c);
        const Trajectory tr = s.run();
        two.push_back(momentum_residual(tr, tr.size() / 2, s.grid(), c.nu).relative);
    }
    const bool ok = balance[2] <= 1e-4 && grid_order >= 1.8 && time_order >= 1.8 && two[0] <= 1e-3 &&
                    two[1] <= two[0];
    return {ok, "circular dp/dr error " + sci(balance[2]) + " (grid order " +
                    fixed2(grid_order) + "), Stokes residual " + sci(stokes[2]) +
                    " (time order " + fixed2(time_order) + "), two-mode residual " +
                    sci(two[0]) + " at K=J=8, " + sci(two[1]) + " at K=J=10"};
}

Outcome annulus_spectrum()
{
    const AnnulusSpectra s = galerkin_spectra(0.5);
    const double rel = std::abs(s.lambda_V - s.lambda_S) / s.lambda_S;
    const bool ok = rel <= 1e-6 && s.lambda_Z <= s.lambda_S;
    return {ok, "lambda_V " + format_real(s.lambda_V) + ", lambda_S " + format_real(s.lambda_S) + " (rel " +
                    sci(rel) + "), lambda_Z " + format_real(s.lambda_Z)};
}

Outcome annulus_flux()
{
    AnnulusGeometry geom;
    const XiProfile xi = xi_circulation(geom);
    const double xf = xi_flux(geom, xi);
    const OmegaBig o = omega_big(make_annulus_grid(geom));
    const CirculationSeries c = annulus_stokes_circulation(geom.R_in, CirculationOptions{});
    const bool ok = std::abs(xf + 1.0) <= 1e-10 && std::abs(o.flux + 1.0) <= 1e-8 && o.max_orthogonality <= 1e-8 &&
                    c.lamb_residual <= 1e-4;
    return {ok, "xi flux " + format_real(xf) + ", Omega flux " + format_real(o.flux) + " (orthogonality " +
                    sci(o.max_orthogonality) + "), Lamb residual " + sci(c.lamb_residual)};
}

struct CriterionInfo {
    int id;
    const char* name;
    double budget;
};

constexpr CriterionInfo kCriteria[] = {
    {1, "spectrum-pinning", 1.0},        {2, "v0-membership", 10.0},
    {3, "biot-savart-newtonian", 30.0},  {4, "euler-equivalence", 30.0},
    {5, "linear-decay", 5.0},            {6, "nonlinear-decay-rates", 300.0},
    {7, "moment-invariance", 300.0},     {8, "skew-symmetry", 30.0},
    {9, "energy-identity", 120.0},       {10, "pressure-consistency", 120.0},
    {11, "annulus-spectrum", 120.0},     {12, "annulus-flux", 120.0},
};

}  // namespace

int criterion_count() { return static_cast<int>(std::size(kCriteria)); }

std::string format_result(const CriterionResult& r)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << (r.passed ? "PASS" : "FAIL") << ' ' << r.id << ' ' << r.name << ": " << r.detail << " ["
       << std::fixed;
    os.precision(2);
    os << r.seconds << " s, budget " << r.budget << " s]";
    return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream* progress)
{
    auto wanted = [&](int id) {
        return opt.only.empty() || std::find(opt.only.begin(), opt.only.end(), id) != opt.only.end();
    };
    std::optional<ReferenceRun> ref;
    auto reference = [&]() -> const ReferenceRun& {
        if (!ref) {
            const auto t0 = std::chrono::steady_clock::now();
            ReferenceRun r;
            r.trajectory = NsSolver(reference_config(opt.seed)).run();
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            ref = std::move(r);
        }
        return *ref;
    };

    std::vector<CriterionResult> out;
    for (const CriterionInfo& item : kCriteria) {
        if (!wanted(item.id)) continue;
        CriterionResult r;
        r.id = item.id;
        r.name = item.name;
        r.budget = item.budget;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            switch (item.id) {
                case 1: o = spectrum_pinning(); break;
                case 2: o = v0_membership(); break;
                case 3: o = biot_savart_newtonian(opt.seed); break;
                case 4: o = euler_equivalence(opt.seed); break;
                case 5: o = linear_decay(); break;
                case 6: o = decay_rates(reference()); break;
                case 7: o = moment_invariance(reference()); break;
                case 8: o = skew_symmetry(opt.seed); break;
                case 9: o = energy_identity(opt.seed); break;
                case 10: o = pressure_consistency(); break;
                case 11: o = annulus_spectrum(); break;
                case 12: o = annulus_flux(); break;
                default: break;
            }
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // criteria 6 and 7 share the reference run; each is charged its full cost
        if ((item.id == 6 || item.id == 7) && ref) r.seconds = std::max(r.seconds, ref->seconds);
        r.passed = o.ok && r.seconds <= r.budget;
        r.detail = o.detail;
        if (o.ok && !r.passed) r.detail += "; runtime over budget";
        if (progress) *progress << format_result(r) << std::endl;
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const std::vector<CriterionResult>& results)
{
    nlohmann::json j = nlohmann::json::array();
    bool all = true;
    for (const auto& r : results) {
        j.push_back({{"id", r.id},
                     {"name", r.name},
                     {"passed", r.passed},
                     {"detail", r.detail},
                     {"seconds", r.seconds},
                     {"budget_seconds", r.budget}});
        all = all && r.passed;
    }
    return {{"criteria", j}, {"all_passed", all}};
}

}  // namespace vortspec::cli
