#include "opdickman/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "opdickman/quadrature.hpp"
#include "opdickman/special.hpp"

namespace opdickman {

DickmanDensity::DickmanDensity(double theta, double step) : theta_(theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(step > 0.0) || step > 0.01) throw std::invalid_argument("step must lie in (0, 0.01]");
    per_unit_ = static_cast<int>(std::lround(1.0 / step));
    h_ = 1.0 / per_unit_;  // unit shifts land exactly on grid nodes
    c_ = std::exp(-kEulerGamma * theta - log_gamma(theta));

    f_.resize(static_cast<std::size_t>(per_unit_) + 1);
    iker_.resize(f_.size());
    icdf_.resize(f_.size());
    for (int j = 0; j <= per_unit_; ++j) {
        const double x = j * h_;
        f_[static_cast<std::size_t>(j)] = c_ * std::pow(x, theta_ - 1.0);
        iker_[static_cast<std::size_t>(j)] = head_kernel_series(x);
        icdf_[static_cast<std::size_t>(j)] = c_ * std::pow(x, theta_) / theta_;
    }
}

// \int_0^z t^{theta-1} (1+t)^{-theta} dt scaled by c: substituting
// w = z/(1+z) turns it into c * sum_k w^{theta+k} / (theta+k), which
// converges geometrically for z <= 1.
double DickmanDensity::head_kernel_series(double z) const {
    if (z <= 0.0) return 0.0;
    const double w = z / (1.0 + z);
    double wp = std::pow(w, theta_);
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double term = wp / (theta_ + k);
        sum += term;
        if (term < 1e-17 * std::max(sum, 1e-30)) break;
        wp *= w;
    }
    return c_ * sum;
}

void DickmanDensity::extend_to(double x) const {
    if (x > 200.0) throw std::invalid_argument("density table capped at x = 200");
    std::lock_guard guard(lock_);
    const std::size_t need = static_cast<std::size_t>(std::ceil(x / h_)) + 2;
    while (f_.size() < need) {
        const std::size_t j = f_.size();
        const double xj = static_cast<double>(j) * h_;
        const double xpow = std::pow(xj, theta_ - 1.0);
        const double fj = c_ * xpow - theta_ * xpow * iker_[j - static_cast<std::size_t>(per_unit_)];
        f_.push_back(std::max(0.0, fj));
        if (j <= 2 * static_cast<std::size_t>(per_unit_)) {
            // (1,2]: f has a (x-1)^theta cusp, so composite rules lose
            // accuracy here. The cdf has the closed form obtained by parts,
            //   F(x) = F(1) + c (x^t - 1)/t + c (x-1)^t / t - x^t Iker(x-1),
            // and the kernel cumulative is refined adaptively per step.
            icdf_.push_back(icdf_[static_cast<std::size_t>(per_unit_)] +
                            c_ * (std::pow(xj, theta_) - 1.0) / theta_ +
                            c_ * std::pow(xj - 1.0, theta_) / theta_ -
                            std::pow(xj, theta_) * head_kernel_series(xj - 1.0));
            auto g = [this](double z) {
                const double zpow = std::pow(z, theta_ - 1.0);
                const double fz = c_ * zpow - theta_ * zpow * head_kernel_series(z - 1.0);
                return fz / std::pow(1.0 + z, theta_);
            };
            iker_.push_back(iker_[j - 1] +
                            integrate_adaptive<double>(g, xj - h_, xj, 1e-14, 200).value);
        } else {
            // beyond x = 2 the integrands are smooth enough for the
            // 3-point end rule (locally O(h^4))
            const auto ker = [this](std::size_t i) {
                const double xi = static_cast<double>(i) * h_;
                return f_[i] / std::pow(1.0 + xi, theta_);
            };
            iker_.push_back(iker_[j - 1] + h_ / 12.0 * (-ker(j - 2) + 8.0 * ker(j - 1) + 5.0 * ker(j)));
            icdf_.push_back(icdf_[j - 1] + h_ / 12.0 * (-f_[j - 2] + 8.0 * f_[j - 1] + 5.0 * f_[j]));
        }
    }
}

double DickmanDensity::kernel_integral(double y) const {
    if (y <= 0.0) return 0.0;
    if (y <= 1.0) return head_kernel_series(y);
    extend_to(y + 1.0);
    const double pos = y / h_;
    const std::size_t j = std::min(static_cast<std::size_t>(pos), iker_.size() - 2);
    const double frac = pos - static_cast<double>(j);
    return iker_[j] * (1.0 - frac) + iker_[j + 1] * frac;
}

double DickmanDensity::operator()(double x) const {
    if (x < 0.0) throw std::invalid_argument("density argument must be >= 0");
    if (x == 0.0) {
        if (theta_ > 1.0) return 0.0;
        if (theta_ == 1.0) return c_;
        return std::numeric_limits<double>::infinity();
    }
    const double xpow = std::pow(x, theta_ - 1.0);
    if (x <= 1.0) return c_ * xpow;
    return std::max(0.0, c_ * xpow - theta_ * xpow * kernel_integral(x - 1.0));
}

double DickmanDensity::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x <= 1.0) return c_ * std::pow(x, theta_) / theta_;
    extend_to(x);
    const double pos = x / h_;
    const std::size_t j = std::min(static_cast<std::size_t>(pos), icdf_.size() - 2);
    const double frac = pos - static_cast<double>(j);
    return icdf_[j] * (1.0 - frac) + icdf_[j + 1] * frac;
}

double dickman_density(double theta, double x, double step) {
    static std::mutex cache_lock;
    static std::map<std::pair<double, double>, std::shared_ptr<DickmanDensity>> cache;
    std::shared_ptr<DickmanDensity> table;
    {
        std::lock_guard guard(cache_lock);
        auto& slot = cache[{theta, step}];
        if (!slot) slot = std::make_shared<DickmanDensity>(theta, step);
        table = slot;
    }
    return (*table)(x);
}

namespace {

double rho_rhs(double theta, double x, double rho, double delayed) {
    return ((theta - 1.0) * rho - theta * delayed) / x;
}

}  // namespace

RhoTable rho_ode_solve(double theta, double x_max, double h) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (x_max > 50.0) throw std::invalid_argument("rho table capped at x_max = 50");
    if (!(h > 0.0) || h > 1e-3 + 1e-12) throw std::invalid_argument("step must be <= 1e-3");

    const int per_unit = static_cast<int>(std::lround(1.0 / h));
    h = 1.0 / per_unit;
    const int n_nodes = static_cast<int>(std::ceil(x_max / h)) + 1;

    RhoTable t;
    t.theta = theta;
    t.h = h;
    t.x.resize(static_cast<std::size_t>(n_nodes));
    t.rho.resize(static_cast<std::size_t>(n_nodes));
    for (int j = 0; j < n_nodes; ++j) t.x[static_cast<std::size_t>(j)] = j * h;

    for (int j = 0; j < n_nodes && j <= per_unit; ++j)
        t.rho[static_cast<std::size_t>(j)] = std::pow(t.x[static_cast<std::size_t>(j)], theta - 1.0);
    if (n_nodes <= per_unit + 1) return t;

    // interpolated lookup into already-computed nodes
    const auto table_at = [&t, h](double x) {
        const double pos = x / h;
        const std::size_t j = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(j);
        if (j + 1 >= t.rho.size()) return t.rho.back();
        return t.rho[j] * (1.0 - frac) + t.rho[j + 1] * frac;
    };

    const int last = n_nodes - 1;
    if (theta >= 1.0) {
        // first interval: the delayed term (x-1)^{theta-1} is known exactly
        for (int j = per_unit; j < std::min(last, 2 * per_unit); ++j) {
            const double x0 = j * h;
            const double y0 = t.rho[static_cast<std::size_t>(j)];
            const auto delayed = [theta](double x) { return std::pow(x - 1.0, theta - 1.0); };
            const double k1 = rho_rhs(theta, x0, y0, delayed(x0));
            const double k2 = rho_rhs(theta, x0 + 0.5 * h, y0 + 0.5 * h * k1, delayed(x0 + 0.5 * h));
            const double k3 = rho_rhs(theta, x0 + 0.5 * h, y0 + 0.5 * h * k2, delayed(x0 + 0.5 * h));
            const double k4 = rho_rhs(theta, x0 + h, y0 + h * k3, delayed(x0 + h));
            t.rho[static_cast<std::size_t>(j + 1)] = y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    } else {
        // regularized time tau = (x-1)^theta removes the forcing singularity:
        // drho/dtau = (theta-1)/(theta x) tau^{1/theta - 1} rho - 1/x
        const int m_steps = per_unit;
        const double dtau = 1.0 / m_steps;
        std::vector<double> tau_rho(static_cast<std::size_t>(m_steps) + 1);
        tau_rho[0] = 1.0;
        const auto rhs_tau = [theta](double tau, double r) {
            const double x = 1.0 + std::pow(tau, 1.0 / theta);
            const double pull = tau > 0.0 ? std::pow(tau, 1.0 / theta - 1.0) : 0.0;
            return (theta - 1.0) / (theta * x) * pull * r - 1.0 / x;
        };
        for (int i = 0; i < m_steps; ++i) {
            const double tau0 = i * dtau;
            const double y0 = tau_rho[static_cast<std::size_t>(i)];
            const double k1 = rhs_tau(tau0, y0);
            const double k2 = rhs_tau(tau0 + 0.5 * dtau, y0 + 0.5 * dtau * k1);
            const double k3 = rhs_tau(tau0 + 0.5 * dtau, y0 + 0.5 * dtau * k2);
            const double k4 = rhs_tau(tau0 + dtau, y0 + dtau * k3);
            tau_rho[static_cast<std::size_t>(i + 1)] = y0 + dtau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        for (int j = per_unit + 1; j <= std::min(last, 2 * per_unit); ++j) {
            const double tau = std::pow(j * h - 1.0, theta);
            const double pos = tau / dtau;
            const std::size_t i = std::min(static_cast<std::size_t>(pos), tau_rho.size() - 2);
            const double frac = pos - static_cast<double>(i);
            t.rho[static_cast<std::size_t>(j)] = tau_rho[i] * (1.0 - frac) + tau_rho[i + 1] * frac;
        }
    }

    // later intervals: delayed term interpolated from the computed table
    for (int j = 2 * per_unit; j < last; ++j) {
        const double x0 = j * h;
        const double y0 = t.rho[static_cast<std::size_t>(j)];
        const double k1 = rho_rhs(theta, x0, y0, table_at(x0 - 1.0));
        const double k2 = rho_rhs(theta, x0 + 0.5 * h, y0 + 0.5 * h * k1, table_at(x0 - 1.0 + 0.5 * h));
        const double k3 = rho_rhs(theta, x0 + 0.5 * h, y0 + 0.5 * h * k2, table_at(x0 - 1.0 + 0.5 * h));
        const double k4 = rho_rhs(theta, x0 + h, y0 + h * k3, table_at(x0 - 1.0 + h));
        t.rho[static_cast<std::size_t>(j + 1)] = y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return t;
}

std::complex<double> gd_log_cf(double theta, double z, double abs_tol) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (z == 0.0) return {0.0, 0.0};
    auto f = [z](double u) {
        if (u == 0.0) return std::complex<double>(0.0, z);
        const double s = std::sin(0.5 * z * u);
        return std::complex<double>(-2.0 * s * s, std::sin(z * u)) / u;
    };
    const auto r = integrate_adaptive<std::complex<double>>(f, 0.0, 1.0, abs_tol / std::max(theta, 1.0));
    return theta * r.value;
}

double gd_sample_one(double theta, Rng& rng, double eps, int n_max) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const double inv_theta = 1.0 / theta;
    double acc = 0.0, prod = 1.0;
    for (int k = 0; k < n_max; ++k) {
        prod *= std::pow(rng.uniform01(), inv_theta);
        acc += prod;
        if (prod < eps) break;
    }
    return acc;
}

std::vector<double> gd_sample(double theta, int n, std::uint64_t seed, double eps, int n_max) {
    Rng rng(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = gd_sample_one(theta, rng, eps, n_max);
    return out;
}

double alpha_d(int d, double abs_tol) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    auto head = [d](double s) {
        if (s == 0.0) return 0.0;
        return (1.0 - spherical_bessel_Y(d, s)) / s;
    };
    const double piece1 = integrate_adaptive<double>(head, 0.0, 1.0, 0.25 * abs_tol).value;

    // tail: segments between consecutive Bessel zeros alternate in sign;
    // partial sums are contracted by repeated averaging
    const double nu = 0.5 * d - 1.0;
    auto tail_f = [d](double s) { return spherical_bessel_Y(d, s) / s; };
    const int n_seg = 48;
    std::vector<double> partial;
    partial.reserve(n_seg);
    double lo = 1.0, acc = 0.0;
    int k = 1;
    const double seg_tol = 0.02 * abs_tol / n_seg;
    while (static_cast<int>(partial.size()) < n_seg) {
        double hi = (k + 0.5 * nu - 0.25) * kPi;  // McMahon zero estimate
        ++k;
        if (hi <= lo) continue;
        acc += integrate_adaptive<double>(tail_f, lo, hi, seg_tol).value;
        partial.push_back(acc);
        lo = hi;
    }
    std::vector<double> avg = partial;
    std::size_t m = avg.size();
    while (m > 1) {
        for (std::size_t i = 0; i + 1 < m; ++i) avg[i] = 0.5 * (avg[i] + avg[i + 1]);
        --m;
    }
    const double piece2 = avg[0];
    return piece1 - piece2;
}

double density_convolution_check(double theta, double x, double step) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    for (int n = 0; n <= 60; ++n)
        if (std::fabs(theta - (1.0 + 2.0 * n)) < 1e-9)
            throw std::invalid_argument("theta = 1 + 2n is outside the supported range");
    static std::mutex cache_lock;
    static std::map<std::pair<double, double>, std::shared_ptr<DickmanDensity>> cache;
    std::shared_ptr<DickmanDensity> half;
    {
        std::lock_guard guard(cache_lock);
        auto& slot = cache[{theta, step}];
        if (!slot) slot = std::make_shared<DickmanDensity>(0.5 * theta, step);
        half = slot;
    }
    const DickmanDensity& f = *half;
    x = std::fabs(x);  // the law is symmetric
    const double z_max = 16.0;
    if (x > 14.0) return 0.0;

    // g(x) = \int_0^inf f(x+z) f(z) dz; the z^{theta/2-1} head is absorbed
    // by substituting z = v^{2/theta}
    const double th2 = 0.5 * theta;
    const double c = f.front_constant();
    auto head = [&](double v) {
        if (v <= 0.0) return (2.0 * c / theta) * f(x);
        return (2.0 * c / theta) * f(x + std::pow(v, 1.0 / th2));
    };
    const double head_val = integrate_adaptive<double>(head, 0.0, 1.0, 1e-9).value;
    auto tail = [&](double z) { return f(x + z) * f(z); };
    const double tail_val = integrate_adaptive<double>(tail, 1.0, z_max, 1e-9).value;
    return head_val + tail_val;
}

}  // namespace opdickman
