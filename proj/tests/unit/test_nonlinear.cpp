#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "vortspec/nonlinear.hpp"
#include "vortspec/semigroup.hpp"

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

}  // namespace

TEST_CASE("radially symmetric vorticity is a steady Euler state")
{
    const auto t = table66();
    SpectralField w = SpectralField::zeros(t);
    for (int j = 1; j <= 6; ++j) w.at(make_mode(0, j, Parity::cosine)) = 1.0 / j;
    const AdvectionResult a = advection(w, grid66());
    double worst = 0.0;
    for (double c : a.projected.coeffs) worst = std::max(worst, std::abs(c));
    CHECK(worst < 1e-10);
    CHECK(a.harmonic.max_abs() < 1e-10);
    CHECK(a.raw_l2_norm < 1e-10);
}

TEST_CASE("skew-symmetry, mean conservation and the split bound over random fields")
{
    const auto t = table66();
    const auto g = grid66();
    double worst_skew = 0.0, worst_enst = 0.0, worst_mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SpectralField w = random_field(t, seed);
        const AdvectionResult a = advection(w, g);
        const double n3 = std::pow(norm_at(w, 0), 3);
        worst_skew = std::max(worst_skew, std::abs(advection_pairing(a, biot_savart(w))) / n3);
        worst_enst = std::max(worst_enst, std::abs(advection_pairing(a, w)) / n3);
        worst_mean = std::max(worst_mean, std::abs(integrate(a.samples)));
        const double split = std::pow(norm_at(a.projected, 0), 2) + std::pow(a.harmonic.l2_norm(), 2);
        CHECK(split <= a.raw_l2_norm * a.raw_l2_norm + 1e-8);
        CHECK(a.raw_l2_norm > 1e-3);
    }
    CHECK(worst_skew < 1e-8);
    CHECK(worst_enst < 1e-8);
    CHECK(worst_mean < 1e-9);
}

TEST_CASE("two-mode advection matches a brute-force evaluation on a finer grid")
{
    const auto t = table66();
    SpectralField w = SpectralField::single(t, make_mode(0, 1, Parity::cosine));
    w.at(make_mode(1, 1, Parity::cosine)) = 1.0;
    const AdvectionResult a = advection(w, grid66());

    const SpectralField psi = biot_savart(w);
    const auto q = specfun::gauss_legendre(4 * grid66()->nr(), 0.0, 1.0);
    const int M = 4 * grid66()->nt();
    std::vector<double> ref(t->size(), 0.0);
    std::vector<double> moments(2 * (t->max_angular() + 1), 0.0);
    for (int i = 0; i < q.order; ++i) {
        const double r = q.nodes[i];
        for (int m = 0; m < M; ++m) {
            const double th = 2 * kPi * m / M;
            const double lam = (evaluate(psi, r, th, Derivative::d_r) * evaluate(w, r, th, Derivative::d_theta) -
                                evaluate(psi, r, th, Derivative::d_theta) * evaluate(w, r, th, Derivative::d_r)) /
                               r;
            const double wt = q.weights[i] * r * 2 * kPi / M;
            for (std::size_t n = 0; n < t->size(); ++n) ref[n] += wt * lam * eigenfunction_eval(*t, t->modes()[n], r, th);
            for (int k = 0; k <= t->max_angular(); ++k) {
                moments[2 * k] += wt * lam * harmonic_normalizer(k) * std::pow(r, k) * std::cos(k * th);
                moments[2 * k + 1] += wt * lam * harmonic_normalizer(k) * std::pow(r, k) * std::sin(k * th);
            }
        }
    }
    for (std::size_t n = 0; n < t->size(); ++n) CHECK(std::abs(a.projected[n] - ref[n]) < 1e-6);
    for (int k = 0; k <= t->max_angular(); ++k) {
        CHECK(std::abs(a.harmonic.c[k] - moments[2 * k]) < 1e-6);
        if (k > 0) CHECK(std::abs(a.harmonic.s[k] - moments[2 * k + 1]) < 1e-6);
    }
    // this pair does interact
    CHECK(a.raw_l2_norm > 0.1);
}

TEST_CASE("advection rejects stream input")
{
    const auto t = table66();
    CHECK_THROWS_AS(advection(SpectralField::zeros(t, FieldKind::stream), grid66()), std::invalid_argument);
}

TEST_CASE("elliptic correction: zero, closed form, boundary trace")
{
    const auto t = table66();
    const auto g = grid66();
    const int K = t->max_angular();

    const EllipticCorrection z = elliptic_correction(HarmonicExpansion::zeros(K), 0.5, g);
    for (double c : z.omega_B.coeffs) CHECK(c == 0.0);

    HarmonicExpansion h = HarmonicExpansion::zeros(K);
    h.c[1] = 1.0 / harmonic_normalizer(1);  // h = r cos(theta)
    const double nu = 1.0;
    for (double r : {0.2, 0.6, 0.9}) {
        for (double th : {0.0, 1.1}) {
            CHECK(elliptic_stream(h, nu, r, th) == doctest::Approx((r * r * r - r) / 8 * std::cos(th)).epsilon(1e-14));
            const double e = 1e-3;
            auto f = [&](double rr, double tt) { return elliptic_stream(h, nu, rr, tt); };
            const double lap = (f(r + e, th) - 2 * f(r, th) + f(r - e, th)) / (e * e) +
                               (f(r + e, th) - f(r - e, th)) / (2 * e * r) +
                               (f(r, th + e) - 2 * f(r, th) + f(r, th - e)) / (e * e * r * r);
            CHECK(std::abs(lap - r * std::cos(th)) < 1e-5);
            const double an = elliptic_stream(h, nu, r, th, Derivative::d_rr) +
                              elliptic_stream(h, nu, r, th, Derivative::d_r) / r +
                              elliptic_stream(h, nu, r, th, Derivative::d_thetatheta) / (r * r);
            CHECK(an == doctest::Approx(r * std::cos(th)).epsilon(1e-12));
        }
    }
    HarmonicExpansion hr = HarmonicExpansion::zeros(K);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int m = 0; m <= K; ++m) {
        hr.c[m] = u(gen);
        if (m > 0) hr.s[m] = u(gen);
    }
    for (int q = 0; q < 24; ++q) CHECK(std::abs(elliptic_stream(hr, 0.1, 1.0, 2 * kPi * q / 24)) <= 1e-12);
}

TEST_CASE("omega_B matches the boundary-integral formula and lies in V0")
{
    // (psi_B, e_n) = (1/lambda_n) * boundary integral of e_n d_r psi_B, since psi_B vanishes on
    // the boundary and its Laplacian is harmonic, hence orthogonal to e_n.
    const auto t = table66();
    const auto g = grid66();
    const int K = t->max_angular();
    HarmonicExpansion h = HarmonicExpansion::zeros(K);
    std::mt19937 gen(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int m = 0; m <= K; ++m) {
        h.c[m] = u(gen);
        if (m > 0) h.s[m] = u(gen);
    }
    const double nu = 0.3;
    const EllipticCorrection ec = elliptic_correction(h, nu, g);
    for (std::size_t n = 0; n < t->size(); ++n) {
        const ModeIndex& mode = t->modes()[n];
        const double coef = mode.parity == Parity::cosine ? h.c[mode.k] : h.s[mode.k];
        const double dpsi = harmonic_normalizer(mode.k) * coef / nu / (2.0 * mode.k + 2.0);
        const double ang = mode.k == 0 ? 2 * kPi : kPi;
        const double expect = t->norm_constant(n) * t->boundary_bessel(n) * dpsi * ang / t->eigenvalue(n);
        CHECK(std::abs(ec.omega_B[n] - expect) < 1e-11);
    }
    const Decomposition d = from_grid(to_grid(ec.omega_B, g), t);
    CHECK(d.harmonic.max_abs() < 1e-8);
}

TEST_CASE("advection_time_derivative")
{
    const auto t = table66();
    const auto g = grid66();
    const SpectralField w = random_field(t, 4);
    const AdvectionResult a = advection(w, g);
    const HarmonicExpansion z = advection_time_derivative(a, a, 0.1);
    CHECK(z.max_abs() == 0.0);
    CHECK_THROWS_AS(advection_time_derivative(a, a, 0.0), std::invalid_argument);

    AdvectionResult b = a;
    AdvectionResult c = a;
    const int K = t->max_angular();
    for (int m = 0; m <= K; ++m) {
        b.harmonic.c[m] = 1.0 + 2.0 * m * 0.3;
        c.harmonic.c[m] = 1.0 + 2.0 * m * 0.5;
    }
    const HarmonicExpansion s = advection_time_derivative(c, b, 0.2);
    for (int m = 0; m <= K; ++m) CHECK(s.c[m] == doctest::Approx(2.0 * m).epsilon(1e-12));

    // first-order consistency along a smooth trajectory
    auto harm = [&](double time) { return advection(propagate(w, 0.1, time), g); };
    std::vector<double> gap;
    for (double dt : {0.04, 0.02, 0.01}) {
        const HarmonicExpansion back = advection_time_derivative(harm(1.0), harm(1.0 - dt), dt);
        HarmonicExpansion centred = advection_time_derivative(harm(1.0 + dt), harm(1.0 - dt), 2 * dt);
        centred -= back;
        gap.push_back(centred.l2_norm());
    }
    CHECK(gap[0] / gap[1] == doctest::Approx(2.0).epsilon(0.1));
    CHECK(gap[1] / gap[2] == doctest::Approx(2.0).epsilon(0.1));
}
