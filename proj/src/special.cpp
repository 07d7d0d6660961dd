#include "opdickman/special.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace opdickman {

namespace {

// 0F1(; d/2; -s^2/4). Safe for s <= 8: the largest term is ~4e2, so
// cancellation stays below ~1e-13 absolute.
double y_series(int d, double s) {
    const double q = -0.25 * s * s;
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 200; ++k) {
        term *= q / ((k + 1.0) * (0.5 * d + k));
        sum += term;
        if (std::fabs(term) < 1e-18) break;
    }
    return sum;
}

}  // namespace

double bessel_j_integer(int order, double s) {
    if (order < 0) throw std::invalid_argument("negative Bessel order");
    if (s <= 0.0) return order == 0 ? 1.0 : 0.0;
    // start far enough above the turning point n ~ s that the dominant
    // solution is suppressed below machine precision (Airy width ~ s^{1/3})
    const int start = static_cast<int>(std::ceil(std::max<double>(order, s) + 12.0 * std::cbrt(s))) + 30;
    double fnext = 0.0, fcur = 1e-30;
    double norm = 0.0, target = 0.0;
    for (int n = start; n >= 1; --n) {
        const double fprev = (2.0 * n / s) * fcur - fnext;
        fnext = fcur;
        fcur = fprev;
        if (n - 1 == order) target = fcur;
        if ((n - 1) >= 2 && (n - 1) % 2 == 0) norm += 2.0 * fcur;
        if (std::fabs(fcur) > 1e250) {  // rescale to avoid overflow
            fcur *= 1e-250;
            fnext *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    norm += fcur;  // J_0 + 2 J_2 + 2 J_4 + ... = 1
    return target / norm;
}

double spherical_bessel_j(int m, double s) {
    if (s <= 0.0) return m == 0 ? 1.0 : 0.0;
    const double j0 = std::sin(s) / s;
    if (m == 0) return j0;
    // the downward recurrence purifies only above the turning point n ~ s
    const int start = static_cast<int>(std::ceil(std::max<double>(m, s) + 12.0 * std::cbrt(s))) + 30;
    double fnext = 0.0, fcur = 1e-30, target = 0.0;
    for (int n = start; n >= 1; --n) {
        const double fprev = ((2.0 * n + 1.0) / s) * fcur - fnext;
        fnext = fcur;
        fcur = fprev;
        if (n - 1 == m) target = fcur;
        if (std::fabs(fcur) > 1e250) {
            fcur *= 1e-250;
            fnext *= 1e-250;
            target *= 1e-250;
        }
    }
    return target * (j0 / fcur);
}

double spherical_bessel_Y(int d, double s) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (s < 0.0) throw std::invalid_argument("radius must be >= 0");
    if (s == 0.0) return 1.0;
    if (d == 1) return std::cos(s);
    if (s <= 8.0) return y_series(d, s);
    if (d % 2 == 1) {
        // half-integer order: Y_{2m+3}(s) = Gamma(m+3/2) 2^{m+1} / sqrt(pi) * s^-m * j_m(s)
        const int m = (d - 3) / 2;
        const double factor =
            std::exp(log_gamma(m + 1.5) + (m + 1) * std::log(2.0) - 0.5 * std::log(kPi) - m * std::log(s));
        return factor * spherical_bessel_j(m, s);
    }
    const int nu = d / 2 - 1;
    const double factor = std::exp(log_gamma(0.5 * d) - nu * std::log(0.5 * s));
    return factor * bessel_j_integer(nu, s);
}

double modified_bessel_I(int order, double x) {
    if (order < 0) throw std::invalid_argument("negative Bessel order");
    const double q = 0.25 * x * x;
    double term = 1.0;
    for (int j = 1; j <= order; ++j) term *= 0.5 * x / j;
    double sum = term;
    for (int k = 0; k < 100000; ++k) {
        term *= q / ((k + 1.0) * (k + order + 1.0));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("invalid incomplete gamma arguments");
    if (x == 0.0) return 0.0;
    const double lg = log_gamma(a);
    if (x < a + 1.0) {
        // lower series
        double term = 1.0 / a, sum = term;
        for (int k = 1; k < 10000; ++k) {
            term *= x / (a + k);
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q(a,x), modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, dd = 1.0 / b, h = dd;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::fabs(dd) < tiny) dd = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        dd = 1.0 / dd;
        const double del = dd * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.05) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    const double q = 2.0 * sum;
    return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
}

}  // namespace opdickman
