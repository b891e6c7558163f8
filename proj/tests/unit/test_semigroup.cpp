#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vortspec/semigroup.hpp"

using namespace vortspec;

namespace {

TablePtr table44()
{
    static const TablePtr t = build_table(4, 4, 40);
    return t;
}

SpectralField random_coeffs(const TablePtr& t, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpectralField f = SpectralField::zeros(t);
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = u(gen);
    return f;
}

const ModeIndex e01 = make_mode(0, 1, Parity::cosine);

}  // namespace

TEST_CASE("propagate: identity, halving, semigroup law")
{
    const auto t = table44();
    const SpectralField f = random_coeffs(t, 1);
    CHECK(propagate(f, 0.3, 0.0).coeffs == f.coeffs);

    const double nu = 0.1;
    const double lam = t->eigenvalue(t->index_of(e01));
    const SpectralField one = SpectralField::single(t, e01);
    CHECK(propagate(one, nu, std::log(2.0) / (nu * lam)).at(e01) == doctest::Approx(0.5).epsilon(1e-15));

    const SpectralField a = propagate(propagate(f, nu, 0.7), nu, 1.3);
    const SpectralField b = propagate(f, nu, 2.0);
    for (std::size_t n = 0; n < f.size(); ++n) CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-14));
}

TEST_CASE("propagate decays every norm at least at the Poincare rate")
{
    const auto t = table44();
    const SpectralField f = random_coeffs(t, 2);
    const double nu = 0.05;
    for (double s : {0.1, 1.0, 5.0}) {
        const SpectralField g = propagate(f, nu, s);
        for (int k = -2; k <= 2; ++k) {
            CHECK(norm_at(g, k) <= std::exp(-nu * t->lambda_min() * s) * norm_at(f, k) * (1 + 1e-14));
        }
    }
}

TEST_CASE("phi functions against direct formulas and their series")
{
    for (double z : {-30.0, -1.0, -0.2, -2e-2, 0.05, 1.0}) {
        CHECK(phi1(z) == doctest::Approx((std::exp(z) - 1) / z).epsilon(1e-13));
        CHECK(phi2(z) == doctest::Approx((std::exp(z) - 1 - z) / (z * z)).epsilon(1e-11));
    }
    for (double z : {-9e-6, -1e-9, 0.0, 1e-12, 9e-6}) {
        const double s1 = 1 + z / 2 + z * z / 6 + z * z * z / 24;
        CHECK(phi1(z) == doctest::Approx(s1).epsilon(1e-16));
    }
    for (double z : {-9e-3, -1e-6, 0.0, 9e-3}) {
        const double s2 = 0.5 + z / 6 + z * z / 24 + z * z * z / 120 + std::pow(z, 4) / 720 + std::pow(z, 5) / 5040;
        CHECK(phi2(z) == doctest::Approx(s2).epsilon(1e-15));
    }
    // continuity across the branch switches
    CHECK(phi1(1e-5 * (1 - 1e-12)) == doctest::Approx(phi1(1e-5 * (1 + 1e-12))).epsilon(1e-15));
    CHECK(phi2(1e-2 * (1 - 1e-12)) == doctest::Approx(phi2(1e-2 * (1 + 1e-12))).epsilon(1e-13));
}

TEST_CASE("duhamel_step without forcing equals propagate")
{
    const auto t = table44();
    const SpectralField f = random_coeffs(t, 3);
    const Forcing zero = [&](double) { return SpectralField::zeros(t); };
    for (EtdScheme s : {EtdScheme::etd1, EtdScheme::etd2rk}) {
        const SpectralField a = duhamel_step(f, zero, 0.1, 0.0, 0.25, s);
        const SpectralField b = propagate(f, 0.1, 0.25);
        for (std::size_t n = 0; n < f.size(); ++n) CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-15));
    }
    CHECK_THROWS_AS(duhamel_step(f, zero, 0.1, 0.0, 0.0, EtdScheme::etd1), std::invalid_argument);
}

TEST_CASE("constant forcing converges to f/(nu lambda)")
{
    const auto t = table44();
    const double nu = 0.1;
    const SpectralField f = SpectralField::single(t, e01, 0.7);
    const Forcing g = [&](double) { return f; };
    const double lam = t->eigenvalue(t->index_of(e01));
    for (EtdScheme s : {EtdScheme::etd1, EtdScheme::etd2rk}) {
        SpectralField u = SpectralField::zeros(t);
        double time = 0.0;
        for (int i = 0; i < 400; ++i, time += 0.1) u = duhamel_step(u, g, nu, time, 0.1, s);
        CHECK(std::abs(u.at(e01) - 0.7 / (nu * lam)) < 1e-10);
    }
}

TEST_CASE("etd2rk is second order on a sinusoidal forcing")
{
    const auto t = table44();
    const double nu = 0.1;
    const double a = nu * t->eigenvalue(t->index_of(e01));
    const Forcing g = [&](double s) { return SpectralField::single(t, e01, std::sin(s)); };
    // u' = -a u + sin t, u(0) = 1
    auto exact = [a](double s) {
        const double p0 = -1.0 / (1 + a * a);
        return (1.0 - p0) * std::exp(-a * s) + (a * std::sin(s) - std::cos(s)) / (1 + a * a);
    };
    std::vector<double> err;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
        SpectralField u = SpectralField::single(t, e01, 1.0);
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) u = duhamel_step(u, g, nu, i * dt, dt, EtdScheme::etd2rk);
        err.push_back(std::abs(u.at(e01) - exact(1.0)));
    }
    CHECK(std::log2(err[0] / err[1]) > 1.9);
    CHECK(std::log2(err[1] / err[2]) > 1.9);
    CHECK(err[2] < 1e-5);
}

TEST_CASE("etd_step handles a state-dependent right-hand side")
{
    // u' = -a u - b u  has the exact solution exp(-(a+b) t)
    const auto t = table44();
    const double nu = 0.1, b = 0.5;
    const double a = nu * t->eigenvalue(t->index_of(e01));
    const Nonlinearity rhs = [b](const SpectralField& u, double) { return (-b) * SpectralField(u); };
    std::vector<double> err;
    for (double dt : {2e-2, 1e-2}) {
        SpectralField u = SpectralField::single(t, e01, 1.0);
        for (int i = 0; i < static_cast<int>(std::lround(1.0 / dt)); ++i) {
            u = etd_step(u, rhs, nu, i * dt, dt, EtdScheme::etd2rk);
        }
        err.push_back(std::abs(u.at(e01) - std::exp(-(a + b))));
    }
    CHECK(std::log2(err[0] / err[1]) > 1.9);
}

TEST_CASE("linear Stokes energy identity holds to second order")
{
    const auto t = table44();
    const double nu = 0.1;
    const SpectralField f = random_coeffs(t, 4);
    std::vector<double> res;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const SpectralField u1 = propagate(f, nu, dt);
        const double lhs = 0.5 * (std::pow(norm_at(u1, 0), 2) - std::pow(norm_at(f, 0), 2)) / dt;
        const double diss = 0.5 * nu * (std::pow(norm_at(u1, 1), 2) + std::pow(norm_at(f, 1), 2));
        res.push_back(std::abs(lhs + diss));
    }
    CHECK(std::log2(res[0] / res[1]) > 1.9);
    CHECK(std::log2(res[1] / res[2]) > 1.9);
}

TEST_CASE("fit_decay_rate")
{
    std::vector<double> ts, vs;
    for (int i = 0; i <= 50; ++i) {
        ts.push_back(0.1 * i);
        vs.push_back(std::exp(-3.0 * 0.1 * i));
    }
    const DecayFit fit = fit_decay_rate(ts, vs);
    CHECK(fit.rate == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.window.first == doctest::Approx(2.5));
    CHECK(fit.samples == 26);

    // propagated lowest mode decays at nu lambda_F
    const auto t = table44();
    const double nu = 0.1;
    std::vector<double> ns;
    for (double s : ts) ns.push_back(norm_at(propagate(SpectralField::single(t, e01), nu, s), 0));
    CHECK(fit_decay_rate(ts, ns).rate == doctest::Approx(nu * 14.6819706421).epsilon(1e-8));

    // 1% multiplicative noise
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    std::vector<double> noisy;
    for (double v : vs) noisy.push_back(v * (1 + u(gen)));
    const DecayFit nf = fit_decay_rate(ts, noisy, std::make_pair(0.0, 5.0));
    CHECK(std::abs(nf.rate - 3.0) < 0.02 * 3.0);
    CHECK(nf.r_squared < 1.0);

    std::vector<double> bad = vs;
    bad.back() = 0.0;
    CHECK_THROWS_AS(fit_decay_rate(ts, bad), std::domain_error);
    CHECK_THROWS_AS(fit_decay_rate({0, 1, 2}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("trajectory bookkeeping and CSV")
{
    const auto t = table44();
    Trajectory tr;
    const SpectralField f = random_coeffs(t, 5);
    tr.push(0.0, f, linear_diagnostics(0.0, f));
    tr.push(0.5, propagate(f, 0.1, 0.5), linear_diagnostics(0.5, propagate(f, 0.1, 0.5)));
    CHECK_THROWS_AS(tr.push(0.5, f, linear_diagnostics(0.5, f)), std::invalid_argument);
    CHECK_THROWS_AS(tr.push(1.0, f), std::invalid_argument);
    CHECK(tr.column(&DiagnosticsRow::enstrophy)[0] == doctest::Approx(norm_at(f, 0)));

    std::ostringstream os;
    write_trajectory_csv(tr, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,energy,enstrophy,palinstrophy_norm,moment_drift,correction_norm");
    std::getline(is, line);
    CHECK(line.rfind("0,", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("0.5,", 0) == 0);
}
