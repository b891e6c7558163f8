#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "vortspec/annulus.hpp"
#include "vortspec/specfun.hpp"

using namespace vortspec;

namespace {

constexpr double kPi = std::numbers::pi;

AnnulusGridPtr grid_at(double R)
{
    AnnulusGeometry g;
    g.R_in = R;
    return make_annulus_grid(g);
}

double J(int k, double x) { return specfun::bessel_j(k, x); }
double Y(int k, double x) { return specfun::bessel_y(k, x); }

// Clamped radial Stokes modes: psi = a J_k + b Y_k + c r^k + d r^-k with psi = psi' = 0 on both circles.
// For k = 0 the inner value is free, leaving J1(aR) Y1(a) - J1(a) Y1(aR).
double clamped_det(int k, double R, double a)
{
    if (k == 0) return J(1, a * R) * Y(1, a) - J(1, a) * Y(1, a * R);
    Eigen::Matrix4d m;
    int row = 0;
    for (double r : {1.0, R}) {
        m.row(row++) << J(k, a * r), Y(k, a * r), std::pow(r, k), std::pow(r, -k);
        m.row(row++) << a * specfun::bessel_j_prime(k, a * r), a * specfun::bessel_y_prime(k, a * r),
            k * std::pow(r, k - 1), -k * std::pow(r, -k - 1);
    }
    return m.determinant();
}

// Relaxed side: Dirichlet for k >= 1, Dirichlet outside and Neumann inside for k = 0.
double relaxed_det(int k, double R, double a)
{
    if (k == 0) return J(0, a) * Y(1, a * R) - J(1, a * R) * Y(0, a);
    return J(k, a) * Y(k, a * R) - J(k, a * R) * Y(k, a);
}

// Root of f bracketed around lambda, returned as an eigenvalue.
double oracle_root(const std::function<double(double)>& f, double lambda)
{
    double lo = std::sqrt(lambda) * 0.98, hi = std::sqrt(lambda) * 1.02;
    REQUIRE(f(lo) * f(hi) < 0.0);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.25 * (lo + hi) * (lo + hi);
}

AnnulusExpansion bump(const AnnulusGridPtr& grid, double centre, double c1, double s2)
{
    return fit_expansion(grid, 16, 4, [=](double r, double t) {
        return std::exp(-20 * (r - centre) * (r - centre)) * (1 + c1 * std::cos(t) + s2 * std::sin(2 * t));
    });
}

AnnulusSamples radial_samples(const AnnulusGridPtr& grid, const std::function<double(double, double)>& f)
{
    AnnulusSamples s = AnnulusSamples::zeros(grid);
    for (int i = 0; i < grid->nr(); ++i) {
        for (int m = 0; m < grid->nt(); ++m) s.at(i, m) = f(grid->r(i), grid->theta(m));
    }
    return s;
}

}  // namespace

TEST_CASE("geometry validation lists every problem")
{
    AnnulusGeometry g;
    CHECK_NOTHROW(g.validate());
    g.R_in = 1.2;
    g.radial_points = 2;
    try {
        g.validate();
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("R_in") != std::string::npos);
        CHECK(msg.find("radial_points") != std::string::npos);
    }
}

TEST_CASE("xi is harmonic, vanishes outside and carries unit flux")
{
    for (double R : {0.2, 0.5, 0.8}) {
        AnnulusGeometry g;
        g.R_in = R;
        const XiProfile xi = xi_circulation(g);
        CHECK(std::abs(xi_flux(g, xi) + 1.0) <= 1e-10);
        CHECK(xi.value(1.0) == 0.0);
        CHECK(xi.inner_value(R) < 0.0);
        const double h = 1e-4;
        for (double r : {R + 0.1 * (1 - R), 0.5 * (1 + R)}) {
            const double lap = (xi.value(r + h) - 2 * xi.value(r) + xi.value(r - h)) / (h * h) +
                               (xi.value(r + h) - xi.value(r - h)) / (2 * h * r);
            CHECK(std::abs(lap) < 1e-6);
            CHECK(xi.d_rr(r) + xi.d_r(r) / r == doctest::Approx(0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("Omega keeps the flux and is orthogonal to the zero-flux harmonics")
{
    const AnnulusGridPtr grid = grid_at(0.5);
    const OmegaBig o = omega_big(grid);
    CHECK(std::abs(o.flux + 1.0) <= 1e-8);
    CHECK(o.max_orthogonality <= 1e-8);
    CHECK(o.distance_to_xi > 1e-3);
    CHECK(o.condition < 1e12);
    // xi is radial, so its projection only removes the mean
    const XiProfile xi = xi_circulation(grid->geometry());
    const AnnulusSamples xs = radial_samples(grid, [&](double r, double) { return xi.value(r); });
    const double area = kPi * (1 - 0.25);
    const double mean = annulus_inner(xs, radial_samples(grid, [](double, double) { return 1.0; })) / area;
    for (double r : {0.55, 0.8}) CHECK(o.value(r, 1.1) == doctest::Approx(xi.value(r) - mean).epsilon(1e-10));
}

TEST_CASE("harmonic projector is an orthogonal projection")
{
    const AnnulusGridPtr grid = grid_at(0.4);
    const HarmonicProjector P(grid);
    CHECK(P.size() == 1 + 4 * grid->geometry().harmonic_degree);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1, 1);
    auto random_samples = [&] {
        AnnulusSamples s = AnnulusSamples::zeros(grid);
        for (double& v : s.values) v = u(gen);
        return s;
    };
    const AnnulusSamples f = random_samples(), g = random_samples();
    const AnnulusSamples pf = P.project(f), ppf = P.project(pf);
    double diff = 0.0;
    for (std::size_t q = 0; q < pf.values.size(); ++q) diff = std::max(diff, std::abs(pf.values[q] - ppf.values[q]));
    CHECK(diff <= 1e-9);
    CHECK(std::abs(annulus_inner(pf, g) - annulus_inner(f, P.project(g))) <= 1e-9);
    CHECK(P.max_pairing(pf) <= 1e-9);
    for (int j = 0; j < P.size(); ++j) {
        const double flux =
            inner_flux(grid->R(), grid->nt(), [&](double r, double t) { return P.basis_d_r(j, r, t); });
        CHECK(std::abs(flux) <= 1e-10);
    }
}

TEST_CASE("zeta pairing equals the jump of the mean trace")
{
    const AnnulusGridPtr grid = grid_at(0.5);
    const XiProfile xi = xi_circulation(grid->geometry());
    const double R = 0.5;
    const AnnulusExpansion w = fit_expansion(grid, 12, 3, [](double r, double t) {
        return r * r + 0.3 * r * std::cos(t) + std::exp(r) * std::sin(2 * t);
    });
    const ZetaPairing z = zeta_pairing(grid, xi, w);
    CHECK(std::abs(z.volume - z.boundary) <= 1e-6);
    CHECK(z.boundary == doctest::Approx(R * R - 1.0).epsilon(1e-10));
    const AnnulusDirichletSplit sp = annulus_dirichlet_split(w);
    CHECK(sp.inner_constant == doctest::Approx(R * R - 1.0).epsilon(1e-10));
    // the harmonic part matches the traces of every nonconstant mode
    for (double t : {0.3, 2.0}) {
        CHECK(sp.h_value(1.0, t) == doctest::Approx(w.value(1.0, t)).epsilon(1e-10));
        CHECK(sp.h_value(R, t) + sp.inner_constant == doctest::Approx(w.value(R, t)).epsilon(1e-10));
    }
    const AnnulusExpansion c = fit_expansion(grid, 4, 2, [](double, double) { return 2.5; });
    const ZetaPairing zc = zeta_pairing(grid, xi, c);
    CHECK(std::abs(zc.volume) <= 1e-12);
    CHECK(std::abs(zc.boundary) <= 1e-12);
}

TEST_CASE("Newtonian potential of a V0 vorticity satisfies the no-slip traces")
{
    const AnnulusGridPtr grid = grid_at(0.5);
    const AnnulusExpansion w = project_to_v0(bump(grid, 0.7, 0.3, 0.2), grid);
    const BoundaryReport rep = newtonian_bs_annulus(w, grid);
    CHECK(rep.orthogonality <= 1e-8);
    CHECK(rep.outer_max <= 5e-5);
    CHECK(rep.inner_stddev <= 5e-5);
    CHECK(rep.normal_max <= 5e-4);

    std::mt19937 gen(17);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        AnnulusExpansion e = AnnulusExpansion::zeros(0.5, 10, 4);
        for (double& c : e.coeffs) c = u(gen);
        for (int k = 0; k <= 10; ++k) e.at(0, 1, k) = 0.0;
        const BoundaryReport r = newtonian_bs_annulus(project_to_v0(e, grid), grid);
        CHECK(r.outer_max <= 5e-5);
        CHECK(r.inner_stddev <= 5e-5);
        CHECK(r.normal_max <= 5e-4);
    }

    CHECK_THROWS_AS(newtonian_bs_annulus(bump(grid, 0.7, 0.3, 0.2), grid), std::invalid_argument);
    const BoundaryReport zero = newtonian_bs_annulus(AnnulusExpansion::zeros(0.5, 6, 3), grid);
    CHECK(zero.outer_max == 0.0);
    CHECK(zero.inner_stddev == 0.0);
    CHECK(zero.normal_max == 0.0);
}

TEST_CASE("Newtonian potential without the V0 projection leaks through the outer circle")
{
    const AnnulusGridPtr grid = grid_at(0.5);
    const AnnulusExpansion w = bump(grid, 0.7, 0.3, 0.2);
    CHECK(std::abs(annulus_newtonian_potential(w, 1.0, 0.4, 48)) > 1e-3);
}

TEST_CASE("vorticity and stream Galerkin operators share their spectrum")
{
    for (double R : {0.3, 0.5, 0.7}) {
        const AnnulusSpectra s = galerkin_spectra(R);
        CHECK(std::abs(s.lambda_V - s.lambda_S) <= 1e-6 * s.lambda_S);
        CHECK(s.lambda_Z <= s.lambda_S);
        CHECK(s.max_symmetry_error <= 1e-12);
        CHECK(s.masses_positive);
        for (int k = 0; k <= 3; ++k) {
            const auto v = galerkin_eigenvalues(assemble_galerkin(R, GalerkinSide::vorticity, k, 24));
            const auto st = galerkin_eigenvalues(assemble_galerkin(R, GalerkinSide::stream, k, 24));
            for (int j = 0; j < 3; ++j) CHECK(std::abs(v[j] - st[j]) <= 1e-6 * st[j]);
        }
    }
}

TEST_CASE("Galerkin eigenvalues match the Bessel determinant oracles")
{
    for (double R : {0.3, 0.5}) {
        for (int k = 0; k <= 2; ++k) {
            const double ls = galerkin_eigenvalues(assemble_galerkin(R, GalerkinSide::stream, k, 30))[0];
            const double os = oracle_root([&](double a) { return clamped_det(k, R, a); }, ls);
            CHECK(ls == doctest::Approx(os).epsilon(1e-8));
            const double lz = galerkin_eigenvalues(assemble_galerkin(R, GalerkinSide::relaxed, k, 30))[0];
            const double oz = oracle_root([&](double a) { return relaxed_det(k, R, a); }, lz);
            CHECK(lz == doctest::Approx(oz).epsilon(1e-8));
        }
    }
}

TEST_CASE("Galerkin eigenvalues decrease under degree refinement")
{
    for (GalerkinSide side : {GalerkinSide::stream, GalerkinSide::relaxed}) {
        double prev = std::numeric_limits<double>::infinity();
        for (int P : {8, 12, 16, 24}) {
            const double l = galerkin_eigenvalues(assemble_galerkin(0.5, side, 1, P))[0];
            CHECK(l <= prev * (1 + 1e-9));  // converged values agree to roundoff
            prev = l;
        }
    }
    CHECK_THROWS_AS(assemble_galerkin(0.5, GalerkinSide::stream, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(assemble_galerkin(1.5, GalerkinSide::stream, 0, 10), std::invalid_argument);
    GalerkinOptions bad;
    bad.angular_max = 1;
    CHECK_THROWS_AS(galerkin_spectra(0.5, bad), std::invalid_argument);
}

TEST_CASE("circulation: Lamb residual and its time-step convergence")
{
    CirculationOptions opt;
    const CirculationSeries s = annulus_stokes_circulation(0.5, opt);
    CHECK(s.lamb_residual <= 1e-4);
    CHECK(s.gamma_probe.front() > 0.0);
    CHECK(std::abs(s.gamma_probe.back()) < std::abs(s.gamma_probe.front()));
    for (double g : s.gamma_inner) CHECK(std::abs(g) <= 1e-8);

    std::vector<double> res;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        CirculationOptions o;
        o.output_dt = dt;
        res.push_back(annulus_stokes_circulation(0.5, o).lamb_residual);
    }
    CHECK(res[0] / res[1] >= 2.0);
    CHECK(res[1] / res[2] >= 2.0);
}

TEST_CASE("circulation stays zero for V0 data without circulation")
{
    CirculationOptions opt;
    opt.gamma0 = 0.0;
    // radial vorticity with zero mean against r dr
    const auto w0 = [](double r) { return r * r - 0.5 * (1 - std::pow(0.5, 4)) / (1 - 0.25); };
    const CirculationSeries s = annulus_stokes_circulation(0.5, opt, w0);
    for (double g : s.gamma_inner) CHECK(std::abs(g) <= 1e-8);
    CHECK(s.lamb_residual <= 1e-4);

    const CirculationSeries z = annulus_stokes_circulation(0.5, opt);
    for (double g : z.gamma_probe) CHECK(g == 0.0);

    CirculationOptions bad;
    bad.nu = 0.0;
    CHECK_THROWS_AS(annulus_stokes_circulation(0.5, bad), std::invalid_argument);
    bad = {};
    bad.probe_radius = 0.2;
    CHECK_THROWS_AS(annulus_stokes_circulation(0.5, bad), std::invalid_argument);
}

TEST_CASE("annulus CSV writers")
{
    std::ostringstream a, b;
    write_spectra_csv(galerkin_spectra(0.5), a);
    CHECK(a.str().rfind("side,index,k,multiplicity,lambda\n", 0) == 0);
    CirculationOptions o;
    o.output_dt = 0.01;
    write_circulation_csv(annulus_stokes_circulation(0.5, o), b);
    std::istringstream is(b.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,gamma_inner,gamma_probe,flux_inner,flux_probe");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 101);
}
