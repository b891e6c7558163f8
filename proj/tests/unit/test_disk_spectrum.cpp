#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "vortspec/disk_spectrum.hpp"

using namespace vortspec;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent zero oracle: bisection on the plain power series, long double.
long double series(int n, long double x)
{
    long double term = 1.0L;
    for (int i = 1; i <= n; ++i) term *= (x / 2) / i;
    long double sum = term;
    for (int m = 1; m < 400; ++m) {
        term *= -(x * x / 4) / (static_cast<long double>(m) * (m + n));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return sum;
}

double bisect(int n, long double lo, long double hi)
{
    long double flo = series(n, lo);
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double fm = series(n, mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace

TEST_CASE("make_mode validates")
{
    CHECK_THROWS_AS(make_mode(0, 1, Parity::sine), std::invalid_argument);
    CHECK_THROWS_AS(make_mode(-1, 1, Parity::cosine), std::invalid_argument);
    CHECK_THROWS_AS(make_mode(1, 0, Parity::cosine), std::invalid_argument);
    CHECK(make_mode(2, 3, Parity::sine).k == 2);
}

TEST_CASE("build_table preconditions")
{
    CHECK_THROWS_AS(build_table(-1, 1, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_table(0, 0, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_table(4, 4, 19), std::invalid_argument);
    CHECK_NOTHROW(build_table(4, 4, 20));
}

TEST_CASE("lowest eigenvalues pinned by a bisection oracle")
{
    const double a1 = bisect(1, 3.0L, 4.5L);
    const double a2 = bisect(2, 4.5L, 6.0L);
    const auto t0 = build_table(0, 1, 64);
    REQUIRE(t0->size() == 1);
    CHECK(std::abs(t0->eigenvalue(0) - a1 * a1) < 1e-10);
    CHECK(std::abs(t0->eigenvalue(0) - 14.6819706421) < 1e-7);

    const auto t1 = build_table(1, 1, 64);
    REQUIRE(t1->size() == 3);
    const std::size_t n = t1->index_of(make_mode(1, 1, Parity::cosine));
    CHECK(std::abs(t1->eigenvalue(n) - a2 * a2) < 1e-10);
    CHECK(std::abs(t1->eigenvalue(n) - 26.3746164272) < 1e-7);
    CHECK(t1->lambda_min() == t0->eigenvalue(0));
}

TEST_CASE("ordering: sorted, ties only between parities")
{
    const auto t = build_table(16, 16, recommended_quad_points(16, 16));
    CHECK(t->size() == 16 * 33);
    for (std::size_t n = 1; n < t->size(); ++n) {
        const auto& a = t->modes()[n - 1];
        const auto& b = t->modes()[n];
        CHECK(t->eigenvalue(n - 1) <= t->eigenvalue(n));
        if (t->eigenvalue(n - 1) == t->eigenvalue(n)) {
            CHECK(a.k == b.k);
            CHECK(a.j == b.j);
            CHECK(a.parity == Parity::cosine);
            CHECK(b.parity == Parity::sine);
        } else {
            // distinct (k, j) never nearly collide below K, J = 16
            CHECK(t->eigenvalue(n) - t->eigenvalue(n - 1) > 1e-6 * t->eigenvalue(n));
        }
    }
    for (int k = 0; k <= 16; ++k) {
        for (int j = 2; j <= 16; ++j) {
            CHECK(t->eigenvalue(t->index_of(make_mode(k, j, Parity::cosine))) >
                  t->eigenvalue(t->index_of(make_mode(k, j - 1, Parity::cosine))));
        }
    }
    CHECK(t->find(17, 1, Parity::cosine) == -1);
    CHECK(t->find(0, 1, Parity::sine) == -1);
    CHECK_THROWS_AS(t->index_of(make_mode(3, 17, Parity::cosine)), std::out_of_range);
}

TEST_CASE("eigenvalues do not depend on the quadrature")
{
    const auto a = build_table(3, 3, 20);
    const auto b = build_table(3, 3, 120);
    for (std::size_t n = 0; n < a->size(); ++n) CHECK(a->eigenvalue(n) == b->eigenvalue(n));
}

TEST_CASE("eigenfunction_eval trivial values and sign convention")
{
    const auto t = build_table(4, 4, 64);
    for (double r : {0.0, 0.2, 0.7, 1.0}) {
        CHECK(std::abs(eigenfunction_eval(*t, make_mode(1, 1, Parity::cosine), r, kPi / 2)) < 1e-15);
    }
    const std::size_t n0 = t->index_of(make_mode(0, 1, Parity::cosine));
    CHECK(eigenfunction_eval(*t, make_mode(0, 1, Parity::cosine), 0.0, 0.3) == t->norm_constant(n0));
    for (std::size_t n = 0; n < t->size(); ++n) {
        const auto& m = t->modes()[n];
        const double at_half = t->norm_constant(n) * specfun::bessel_j(m.k, 0.5 * t->sqrt_eigenvalue(n));
        if (std::abs(at_half) > 1e-12) CHECK(at_half > 0.0);
    }
    CHECK_THROWS_AS(eigenfunction_eval(*t, make_mode(5, 1, Parity::cosine), 0.5, 0.0), std::out_of_range);
}

TEST_CASE("orthonormality by an independent fine quadrature")
{
    const auto t = build_table(4, 4, 64);
    const auto q = specfun::gauss_legendre(120, 0.0, 1.0);
    const int M = 40;
    double worst = 0.0;
    for (std::size_t a = 0; a < t->size(); ++a) {
        for (std::size_t b = a; b < t->size(); ++b) {
            double s = 0.0;
            for (int i = 0; i < q.order; ++i) {
                for (int m = 0; m < M; ++m) {
                    const double th = 2 * kPi * m / M;
                    s += q.weights[i] * q.nodes[i] * (2 * kPi / M) *
                         eigenfunction_eval(*t, t->modes()[a], q.nodes[i], th) *
                         eigenfunction_eval(*t, t->modes()[b], q.nodes[i], th);
                }
            }
            worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
        }
    }
    CHECK(worst < 1e-10);
    CHECK(t->normalization_error() < 1e-10);
}

TEST_CASE("membership residuals certify V0")
{
    const auto t = build_table(8, 8, recommended_quad_points(8, 8));
    double worst = 0.0;
    for (const auto& mode : t->modes()) {
        for (double v : membership_residuals(*t, mode, 8)) worst = std::max(worst, std::abs(v));
    }
    CHECK(worst < 1e-9);

    const auto r0 = membership_residuals(*t, make_mode(0, 1, Parity::cosine), 0);
    CHECK(std::abs(r0[0]) < 1e-9);
    const auto r2 = membership_residuals(*t, make_mode(2, 1, Parity::cosine), 1);
    CHECK(std::abs(r2[1]) < 1e-15);
    CHECK_THROWS_AS(membership_residuals(*t, make_mode(1, 1, Parity::cosine), 10000),
                    std::invalid_argument);
}

TEST_CASE("matching moment equals the closed-form J_{k+1}(alpha)/alpha")
{
    // int_0^1 J_k(a r) r^{k+1} dr = J_{k+1}(a)/a, which vanishes at the table zeros.
    const auto t = build_table(6, 3, 64);
    for (std::size_t n = 0; n < t->size(); ++n) {
        const auto& m = t->modes()[n];
        const double a = t->sqrt_eigenvalue(n);
        const double closed = t->norm_constant(n) * specfun::bessel_j(m.k + 1, a) / a;
        const double ang = m.k == 0 ? 2 * kPi : kPi;
        const double hn = m.k == 0 ? 1 / std::sqrt(kPi) : std::sqrt((2.0 * m.k + 2) / kPi);
        const double quad = membership_residuals(*t, m, m.k)[m.k];
        CHECK(std::abs(quad - hn * ang * closed) < 1e-11);
        CHECK(std::abs(closed) < 1e-11);
    }
}

TEST_CASE("json dump lists every mode")
{
    const auto t = build_table(2, 2, 32);
    const auto j = nlohmann::json::parse(table_to_json(*t));
    CHECK(j["modes"].size() == t->size());
    CHECK(j["modes"][0]["eigenvalue"].get<double>() == t->eigenvalue(0));
    CHECK(j["modes"][0]["parity"] == "cos");
}
