#pragma once

namespace srcimg {

// Bessel function of the first kind, order one. Power series for |x| <= 12,
// Hankel asymptotic expansion beyond; absolute error below 1e-10.
double bessel_j1(double x);

}  // namespace srcimg
