#pragma once

#include <complex>
#include <cstdint>
#include <mutex>
#include <vector>

#include "opdickman/rng.hpp"

namespace opdickman {

// Density table for GD_theta built from the recurrence
//   f(x) = c x^{theta-1} - theta x^{theta-1} \int_0^{x-1} f(z)/(1+z)^theta dz,
//   c = exp(-gamma*theta)/Gamma(theta),
// with the closed form c x^{theta-1} on (0,1]. The grid is extended lazily
// one unit interval at a time; the kernel integral is carried on the grid
// nodes (analytic series on [0,1], cumulative third-order end rule beyond).
class DickmanDensity {
public:
    explicit DickmanDensity(double theta, double step = 1e-3);

    double theta() const { return theta_; }
    double step() const { return h_; }
    double front_constant() const { return c_; }

    double operator()(double x) const;  // f_theta(x)
    double cdf(double x) const;         // \int_0^x f_theta

private:
    void extend_to(double x) const;
    double kernel_integral(double y) const;  // \int_0^y f(z)/(1+z)^theta dz
    double head_kernel_series(double z) const;

    double theta_, h_, c_;
    int per_unit_;
    mutable std::mutex lock_;
    mutable std::vector<double> f_;     // node values of f
    mutable std::vector<double> iker_;  // cumulative f/(1+x)^theta
    mutable std::vector<double> icdf_;  // cumulative f
};

// Convenience wrapper with a per-(theta, step) cache.
double dickman_density(double theta, double x, double step = 1e-3);

struct RhoTable {
    double theta = 0.0;
    double h = 0.0;
    std::vector<double> x;
    std::vector<double> rho;
};

// Method-of-steps RK4 for x rho' + (1-theta) rho + theta rho(x-1) = 0
// with rho = x^{theta-1} on (0,1]. The delayed term uses the closed form
// on the first unit interval and linear interpolation afterwards. For
// theta < 1 the first interval is integrated in the regularized time
// tau = (x-1)^theta where the forcing is bounded.
RhoTable rho_ode_solve(double theta, double x_max, double h = 1e-3);

// log characteristic function of GD_theta:
// theta * \int_0^1 (e^{izu} - 1) du/u.
std::complex<double> gd_log_cf(double theta, double z, double abs_tol = 1e-10);

// Truncated perpetuity sampler (same eps / n_max policy as the operator
// sampler).
double gd_sample_one(double theta, Rng& rng, double eps = 1e-10, int n_max = 10000);
std::vector<double> gd_sample(double theta, int n, std::uint64_t seed,
                              double eps = 1e-10, int n_max = 10000);

// alpha_d = \int_0^1 (1 - Y_d(s)) ds/s - \int_1^inf Y_d(s) ds/s, the
// normalization constant of the uniform-sphere density; alpha_1 equals
// Euler's constant. The oscillatory tail is summed between consecutive
// Bessel zeros with repeated averaging.
double alpha_d(int d, double abs_tol = 1e-8);

// Density of w1 X1 + w2 X2 with w = +-1 and X_i ~ GD_{theta/2} independent
// (the d=1 uniform-sphere case), computed by numerical convolution of the
// recurrence tables. Rejects theta = 1 + 2n.
double density_convolution_check(double theta, double x, double step = 1e-3);

}  // namespace opdickman
