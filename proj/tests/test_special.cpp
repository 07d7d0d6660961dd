#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "opdickman/special.hpp"

using namespace opdickman;

TEST_CASE("Y_1 is cosine") {
    for (double s : {0.0, 0.3, 2.0, 9.5, 40.0}) CHECK(spherical_bessel_Y(1, s) == doctest::Approx(std::cos(s)).epsilon(1e-12));
}

TEST_CASE("Y_3 is sin(s)/s") {
    for (double s : {0.1, 1.0, 4.0, 7.9, 8.1, 25.0, 90.0})
        CHECK(spherical_bessel_Y(3, s) == doctest::Approx(std::sin(s) / s).epsilon(1e-10));
}

TEST_CASE("Y_d(0) = 1 and small-s expansion 1 - s^2/(2d)") {
    for (int d : {1, 2, 3, 5, 8, 16}) {
        CHECK(spherical_bessel_Y(d, 0.0) == 1.0);
        const double s = 1e-4;
        CHECK(spherical_bessel_Y(d, s) == doctest::Approx(1.0 - s * s / (2.0 * d)).epsilon(1e-10));
    }
}

TEST_CASE("Y_d agrees with the standard-library Bessel route") {
    // independent oracle: Y_d(s) = (s/2)^{1-d/2} Gamma(d/2) J_{d/2-1}(s)
    for (int d : {2, 3, 4, 5, 6, 9, 12}) {
        for (double s : {0.4, 1.7, 5.0, 7.99, 8.01, 13.7, 44.0, 123.0}) {
            const double nu = 0.5 * d - 1.0;
            const double oracle =
                std::pow(0.5 * s, 1.0 - 0.5 * d) * std::tgamma(0.5 * d) * std::cyl_bessel_j(nu, s);
            CHECK(spherical_bessel_Y(d, s) == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("Y_d magnitude stays at or below 1") {
    for (int d : {1, 2, 3, 7}) {
        for (double s = 0.0; s < 60.0; s += 0.37) CHECK(std::fabs(spherical_bessel_Y(d, s)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("modified Bessel I_0, I_1 against library values") {
    for (double x : {0.0, 0.5, 2.0, 8.0, 20.0}) {
        CHECK(modified_bessel_I(0, x) == doctest::Approx(std::cyl_bessel_i(0.0, x)).epsilon(1e-12));
        CHECK(modified_bessel_I(1, x) == doctest::Approx(std::cyl_bessel_i(1.0, x)).epsilon(1e-12));
        CHECK(modified_bessel_I(2, x) == doctest::Approx(std::cyl_bessel_i(2.0, x)).epsilon(1e-12));
    }
    CHECK(modified_bessel_I(0, 0.0) == 1.0);
}

TEST_CASE("regularized incomplete gamma basics") {
    CHECK(regularized_gamma_p(1.0, 0.0) == 0.0);
    // P(1, x) = 1 - exp(-x)
    for (double x : {0.1, 1.0, 2.5, 10.0})
        CHECK(regularized_gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
    // P(2, x) = 1 - (1+x) exp(-x)
    for (double x : {0.3, 1.7, 6.0})
        CHECK(regularized_gamma_p(2.0, x) == doctest::Approx(1.0 - (1.0 + x) * std::exp(-x)).epsilon(1e-12));
    // chi-square with 1 dof: P(1/2, x/2) = erf(sqrt(x/2))
    for (double x : {0.5, 1.0, 4.0})
        CHECK(regularized_gamma_p(0.5, 0.5 * x) == doctest::Approx(std::erf(std::sqrt(0.5 * x))).epsilon(1e-12));
}

TEST_CASE("Kolmogorov survival endpoints") {
    CHECK(kolmogorov_survival(0.01) == 1.0);
    CHECK(kolmogorov_survival(5.0) < 1e-10);
    // Q(1.0) reference value per the defining series
    double ref = 0.0, sign = 1.0;
    for (int k = 1; k <= 50; ++k) {
        ref += sign * 2.0 * std::exp(-2.0 * k * k);
        sign = -sign;
    }
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(ref).epsilon(1e-12));
}
