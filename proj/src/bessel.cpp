#include "srcimg/bessel.hpp"

#include <cmath>
#include <numbers>

namespace srcimg {

namespace {

double j1_series(double x) {
    const double h = 0.5 * x, h2 = h * h;
    double term = h, sum = h;
    for (int k = 1; k < 80; ++k) {
        term *= -h2 / (k * (k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// J1(x) ~ sqrt(2/(pi x)) (P cos(w) - Q sin(w)), w = x - 3pi/4, mu = 4.
double j1_asymptotic(double x) {
    const double mu = 4.0, z8 = 8.0 * x;
    double P = 1.0, Q = 0.0, term = 1.0, prev = INFINITY;
    for (int k = 1; k < 60; ++k) {
        double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * z8);
        if (std::abs(term) > prev) break;  // asymptotic series: stop at the smallest term
        prev = std::abs(term);
        if (k % 2 == 1) Q += (k % 4 == 1 ? 1.0 : -1.0) * term;
        else P += (k % 4 == 2 ? -1.0 : 1.0) * term;
    }
    const double w = x - 0.75 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (P * std::cos(w) - Q * std::sin(w));
}

}  // namespace

double bessel_j1(double x) {
    if (x < 0) return -bessel_j1(-x);
    return x <= 12.0 ? j1_series(x) : j1_asymptotic(x);
}

}  // namespace srcimg
