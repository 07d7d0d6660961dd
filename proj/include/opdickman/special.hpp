#pragma once

#include <cmath>

namespace opdickman {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

// log |Gamma(x)| without touching the global signgam (std::lgamma writes
// it, which races when callers run concurrently).
inline double log_gamma(double x) {
#if defined(__GLIBC__) || defined(__APPLE__)
    int sign = 0;
    return lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

// Characteristic function of the uniform distribution on the unit sphere
// S^{d-1} evaluated at radius s: Y_1(s) = cos(s), Y_d(s) =
// (s/2)^{1-d/2} Gamma(d/2) J_{d/2-1}(s) for d >= 2. Y_d(0) = 1 exactly.
// Absolute error <= 1e-10 on the supported range.
double spherical_bessel_Y(int d, double s);

// Bessel J of integer order via Miller's downward recurrence (s > 0).
double bessel_j_integer(int order, double s);
// Spherical Bessel j_m via downward recurrence normalized at j_0.
double spherical_bessel_j(int m, double s);

// Modified Bessel I_n by its power series; relative error ~1e-15.
double modified_bessel_I(int order, double x);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// Kolmogorov-Smirnov tail: Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

}  // namespace opdickman
