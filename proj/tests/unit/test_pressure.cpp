#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vortspec/ns_solver.hpp"
#include "vortspec/pressure.hpp"

using namespace vortspec;

namespace {

constexpr double kPi = std::numbers::pi;

TablePtr table66()
{
    static const TablePtr t = build_table(6, 6, recommended_quad_points(6, 6));
    return t;
}

GridPtr grid66()
{
    static const GridPtr g = make_grid(table66(), recommended_quad_points(6, 6) + 16, 20);
    return g;
}

const ModeIndex e01 = make_mode(0, 1, Parity::cosine);

// u_theta^2 / r from the spectral stream function, independent of the pressure solve
double centripetal(const SpectralField& psi, double r)
{
    const double u = evaluate(psi, r, 0.3, Derivative::d_r);
    return u * u / r;
}

double worst_radial_mismatch(const PressureField& p, const SpectralField& psi)
{
    double worst = 0.0;
    for (int i = 0; i < p.grid->nr(); ++i) {
        const double expect = centripetal(psi, p.grid->r(i));
        for (int q = 0; q < p.grid->nt(); ++q) worst = std::max(worst, std::abs(p.d_r.at(i, q) - expect));
    }
    return worst;
}

}  // namespace

TEST_CASE("harmonic conjugate rotates coefficient pairs")
{
    HarmonicExpansion h = HarmonicExpansion::zeros(3);
    h.c[1] = 1.0;  // r cos(theta), up to normalization
    HarmonicExpansion g = harmonic_conjugate(h);
    CHECK(g.s[1] == 1.0);
    CHECK(g.c[1] == 0.0);
    CHECK(g.value(0.7, 0.4) == doctest::Approx(harmonic_normalizer(1) * 0.7 * std::sin(0.4)));

    HarmonicExpansion h2 = HarmonicExpansion::zeros(3);
    h2.s[2] = 1.0;  // r^2 sin(2 theta)
    CHECK(harmonic_conjugate(h2).c[2] == -1.0);

    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-1, 1);
    HarmonicExpansion r = HarmonicExpansion::zeros(6);
    for (int m = 1; m <= 6; ++m) {
        r.c[m] = u(gen);
        r.s[m] = u(gen);
    }
    const HarmonicExpansion twice = harmonic_conjugate(harmonic_conjugate(r));
    for (int m = 0; m <= 6; ++m) {
        CHECK(twice.c[m] == -r.c[m]);
        CHECK(twice.s[m] == -r.s[m]);
    }
    CHECK(harmonic_conjugate(r).l2_norm() == r.l2_norm());

    // Cauchy-Riemann: d_r g = -(1/r) d_theta h
    const HarmonicExpansion cr = harmonic_conjugate(r);
    for (double rr : {0.3, 0.8}) {
        for (double th : {0.2, 2.5}) {
            CHECK(cr.d_r(rr, th) == doctest::Approx(-r.d_theta(rr, th) / rr).epsilon(1e-13));
        }
    }
    HarmonicExpansion bad = HarmonicExpansion::zeros(2);
    bad.c[0] = 0.5;
    CHECK_THROWS_AS(harmonic_conjugate(bad), std::invalid_argument);
}

TEST_CASE("zero vorticity gives zero pressure")
{
    const SpectralField z = SpectralField::zeros(table66());
    const PressureField p = recover_pressure(z, 0.1, grid66());
    for (double v : p.values.values) CHECK(v == 0.0);
    for (double v : phi_of_u(z, grid66()).values) CHECK(v == 0.0);
    CHECK(p.zero_mean);
}

TEST_CASE("circular flow: radial balance and second-order refinement")
{
    const SpectralField w = SpectralField::single(table66(), e01);
    const SpectralField psi = biot_savart(w);
    std::vector<double> err;
    for (int cells : {100, 200, 400}) {
        PressureOptions opt;
        opt.radial_cells = cells;
        const PressureField p = recover_pressure(w, 0.1, grid66(), opt);
        err.push_back(worst_radial_mismatch(p, psi));
        CHECK(p.zero_mean);
        CHECK(std::abs(p.mean) <= 1e-9);
        // theta independent, and p = Phi[u] exactly
        for (int i = 0; i < p.grid->nr(); ++i) {
            for (int q = 1; q < p.grid->nt(); ++q) CHECK(std::abs(p.values.at(i, q) - p.values.at(i, 0)) < 1e-12);
            for (int q = 0; q < p.grid->nt(); ++q) CHECK(std::abs(p.values.at(i, q) - p.phi.at(i, q)) < 1e-15);
        }
        CHECK(p.compatibility_defect < 1e-5);
    }
    CHECK(err[2] < 1e-5);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.2));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.2));

    // pressure differences against the integrated oracle
    const PressureField p = recover_pressure(w, 0.1, grid66());
    const auto q = specfun::gauss_legendre(40, p.grid->r(0), p.grid->r(p.grid->nr() - 1));
    double integral = 0.0;
    for (int k = 0; k < q.order; ++k) integral += q.weights[k] * centripetal(psi, q.nodes[k]);
    CHECK(std::abs(p.values.at(p.grid->nr() - 1, 0) - p.values.at(0, 0) - integral) < 1e-5);
}

TEST_CASE("pressure is zero-mean and phi_of_u matches the advective part")
{
    const SpectralField w = random_field(table66(), 11);
    const PressureField p = recover_pressure(w, 0.05, grid66());
    CHECK(std::abs(integrate(p.values)) <= 1e-9);
    const GridField phi = phi_of_u(w, grid66());
    for (std::size_t q = 0; q < phi.values.size(); ++q) CHECK(phi.values[q] == p.phi.values[q]);
    // no-slip fields have a vanishing normal flux, so the mean mode is compatible
    CHECK(p.compatibility_defect < 1e-4);
}

TEST_CASE("pressure preconditions")
{
    const SpectralField w = random_field(table66(), 2);
    CHECK_THROWS_AS(recover_pressure(w, 0.0, grid66()), std::invalid_argument);
    CHECK_THROWS_AS(recover_pressure(biot_savart(w), 0.1, grid66()), std::invalid_argument);
    CHECK_THROWS_AS(phi_of_u(w, make_grid(table66(), 40, 12)), std::invalid_argument);
    PressureOptions few;
    few.angular_points = 10;
    CHECK_THROWS_AS(phi_of_u(w, grid66(), few), std::invalid_argument);
}

TEST_CASE("momentum residual of a Stokes circular flow is second order in time")
{
    std::vector<double> res;
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
        c.init.modes = {{e01, 1.0}};
        const NsSolver s(c);
        const Trajectory tr = s.stokes_run();
        std::size_t mid = 0;
        while (tr.times[mid] < 0.25 - 1e-9) ++mid;
        const MomentumResidual r = momentum_residual(tr, mid, s.grid(), c.nu);
        res.push_back(r.relative);
        CHECK_THROWS_AS(momentum_residual(tr, 0, s.grid(), c.nu), std::out_of_range);
        CHECK_THROWS_AS(momentum_residual(tr, tr.size() - 1, s.grid(), c.nu), std::out_of_range);
    }
    CHECK(res[2] <= 1e-4);
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("zero solution has zero momentum residual")
{
    Trajectory tr;
    const SpectralField z = SpectralField::zeros(table66());
    for (int k = 0; k < 3; ++k) tr.push(0.1 * k, z);
    const MomentumResidual r = momentum_residual(tr, 1, grid66(), 0.1);
    CHECK(r.absolute == 0.0);
    CHECK(r.relative == 0.0);
}

TEST_CASE("momentum residual on a two-mode Navier-Stokes run")
{
    RunConfig c;
    c.nu = 0.1;
    c.K = 8;
    c.J = 8;
    c.dt = 2e-3;
    c.T_final = 0.2;
    c.output_every = 5;
    c.init.kind = InitSpec::Kind::modes;
    c.init.modes = {{e01, 1.0}, {make_mode(1, 1, Parity::cosine), 0.5}};
    const NsSolver s(c);
    const Trajectory tr = s.run();
    const MomentumResidual r = momentum_residual(tr, tr.size() / 2, s.grid(), c.nu);
    MESSAGE("two-mode relative residual " << r.relative);
    CHECK(r.relative <= 1e-3);
}

TEST_CASE("pressure snapshot CSV")
{
    const PressureField p = recover_pressure(SpectralField::single(table66(), e01), 0.1, grid66());
    std::ostringstream os;
    write_pressure_csv(p, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "r,theta,p");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == grid66()->points());
}
