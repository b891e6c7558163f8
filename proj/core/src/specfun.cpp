#include "vortspec/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vortspec::specfun {

namespace {

void check_order(int order)
{
    if (order < 0 || order > kMaxOrder) {
        throw std::domain_error("Bessel order " + std::to_string(order) +
                                " outside [0, " + std::to_string(kMaxOrder) + "]");
    }
}

void check_argument(double x)
{
    if (!std::isfinite(x) || x < 0.0) {
        throw std::domain_error("Bessel argument must be finite and nonnegative");
    }
}

// Ascending series; used only where the terms do not cancel.
double series_j(int n, double x)
{
    const double h = 0.5 * x;
    double term = 1.0;
    for (int i = 1; i <= n; ++i) term *= h / i;
    double sum = term;
    const double h2 = h * h;
    for (int m = 1; m < 200; ++m) {
        term *= -h2 / (static_cast<double>(m) * (m + n));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

bool series_region(int n, double x) { return x * x <= 4.0 * (n + 1); }

// Miller backward recurrence normalized by J_0 + 2 sum J_2k = 1.
std::vector<double> miller(int nmax, double x)
{
    const int m0 = std::max(nmax, static_cast<int>(std::ceil(x)));
    int start = m0 + 20 + static_cast<int>(std::ceil(10.0 * std::cbrt(m0 + 1.0)));
    if (start % 2 != 0) ++start;

    std::vector<double> vals(nmax + 1, 0.0);
    double jp1 = 0.0;
    double j = 1e-30;
    double sum = 0.0;
    for (int k = start; k >= 1; --k) {
        if (k <= nmax) vals[k] = j;
        if (k % 2 == 0) sum += 2.0 * j;
        const double jm1 = (2.0 * k / x) * j - jp1;
        jp1 = j;
        j = jm1;
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            for (int i = std::max(k - 1, 1); i <= nmax; ++i) vals[i] *= 1e-250;
        }
    }
    vals[0] = j;
    sum += j;
    for (double& v : vals) v /= sum;
    return vals;
}

double j_unchecked(int n, double x)
{
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (series_region(n, x)) return series_j(n, x);
    return miller(n, x)[n];
}

}  // namespace

double bessel_j(int order, double x)
{
    check_order(order);
    check_argument(x);
    return j_unchecked(order, x);
}

std::vector<double> bessel_j_all(int nmax, double x)
{
    check_order(nmax);
    check_argument(x);
    if (x == 0.0) {
        std::vector<double> v(nmax + 1, 0.0);
        v[0] = 1.0;
        return v;
    }
    std::vector<double> v = miller(nmax, x);
    for (int n = 0; n <= nmax; ++n) {
        if (series_region(n, x)) v[n] = series_j(n, x);
    }
    return v;
}

double bessel_j_prime(int order, double x)
{
    check_order(order);
    check_argument(x);
    if (order == 0) return -j_unchecked(1, x);
    return 0.5 * (j_unchecked(order - 1, x) - j_unchecked(order + 1, x));
}

double bessel_y(int order, double x)
{
    check_order(order);
    if (!std::isfinite(x) || x <= 0.0) {
        throw std::domain_error("Bessel Y requires a finite positive argument");
    }
    return std::cyl_neumann(static_cast<double>(order), x);
}

double bessel_y_prime(int order, double x)
{
    if (order == 0) return -bessel_y(1, x);
    check_order(order);
    if (!std::isfinite(x) || x <= 0.0) {
        throw std::domain_error("Bessel Y requires a finite positive argument");
    }
    return 0.5 * (std::cyl_neumann(order - 1.0, x) - std::cyl_neumann(order + 1.0, x));
}

double bessel_j_zero(int order, int index)
{
    check_order(order);
    if (index < 1 || index > 512) {
        throw std::domain_error("Bessel zero index must lie in [1, 512]");
    }
    // No zero of J_n lies below n; consecutive zeros are more than 3 apart,
    // so a step of 0.5 never straddles two of them.
    const double step = 0.5;
    const double limit = order + index * std::numbers::pi + 50.0;
    double a = std::max(static_cast<double>(order), 0.5);
    double fa = j_unchecked(order, a);
    int found = 0;
    while (a < limit) {
        const double b = a + step;
        const double fb = j_unchecked(order, b);
        if (fa == 0.0) {
            if (++found == index) return a;
        } else if (fa * fb < 0.0) {
            if (++found == index) {
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 20; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = j_unchecked(order, mid);
                    if (fm == 0.0) return mid;
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                double z = 0.5 * (lo + hi);
                for (int it = 0; it < 30; ++it) {
                    const double f = j_unchecked(order, z);
                    const double df = order * f / z - j_unchecked(order + 1, z);
                    const double dz = f / df;
                    double next = z - dz;
                    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
                    const double fn = j_unchecked(order, next);
                    if ((fn < 0.0) == (flo < 0.0)) lo = next; else hi = next;
                    const bool done = std::abs(next - z) <= 1e-15 * next;
                    z = next;
                    if (done) break;
                }
                return z;
            }
        }
        a = b;
        fa = fb;
    }
    throw std::runtime_error("failed to bracket zero " + std::to_string(index) +
                             " of J_" + std::to_string(order) + " below x = " +
                             std::to_string(limit));
}

QuadratureRule gauss_legendre(int n, double a, double b)
{
    if (n < 1) throw std::invalid_argument("Gauss-Legendre needs n >= 1");
    if (!(a < b)) throw std::invalid_argument("Gauss-Legendre needs a < b");

    QuadratureRule rule;
    rule.order = n;
    rule.a = a;
    rule.b = b;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-16) break;
        }
        // recompute derivative at the converged root
        double p1 = 1.0, p2 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

}  // namespace vortspec::specfun
