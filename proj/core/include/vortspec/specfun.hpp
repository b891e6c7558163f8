#pragma once

#include <vector>

namespace vortspec::specfun {

// Largest Bessel order accepted by the public evaluators.
inline constexpr int kMaxOrder = 64;

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
    double a = 0.0;
    double b = 0.0;
};

// J_n(x) for integer 0 <= n <= kMaxOrder and x >= 0.
double bessel_j(int order, double x);

// J_0(x) .. J_nmax(x) from one backward recurrence.
std::vector<double> bessel_j_all(int nmax, double x);

// d/dx J_n(x).
double bessel_j_prime(int order, double x);

// Y_n(x) for x > 0.
double bessel_y(int order, double x);
double bessel_y_prime(int order, double x);

// index-th positive zero of J_order (index >= 1).
double bessel_j_zero(int order, int index);

// n-point Gauss-Legendre rule on (a, b), nodes increasing.
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace vortspec::specfun
