#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "opdickman/amplitude.hpp"
#include "opdickman/quadrature.hpp"
#include "opdickman/special.hpp"

using namespace opdickman;

namespace {

std::complex<double> empirical_cf_of(const AmplitudeMeasure& m, const Vec& z, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const Vec w = m.sample(rng);
        const double phase = dot(z, w);
        acc += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc / static_cast<double>(n);
}

std::vector<Vec> small_grid(int d, std::uint64_t seed) {
    std::vector<Vec> grid;
    Rng rng(seed);
    for (int i = 0; i < 25; ++i) {
        Vec z(static_cast<std::size_t>(d));
        for (double& v : z) v = 3.0 * (2.0 * rng.uniform01() - 1.0);
        grid.push_back(std::move(z));
    }
    return grid;
}

}  // namespace

TEST_CASE("delta measure always returns its atom") {
    const auto m = AmplitudeMeasure::delta({1.0, 0.0});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Vec w = m.sample(rng);
        CHECK(w[0] == 1.0);
        CHECK(w[1] == 0.0);
    }
}

TEST_CASE("sampling is deterministic given the seed") {
    const auto m = AmplitudeMeasure::uniform_sphere(3);
    Rng a(99), b(99);
    for (int i = 0; i < 50; ++i) {
        const Vec x = m.sample(a), y = m.sample(b);
        for (int k = 0; k < 3; ++k) CHECK(x[static_cast<std::size_t>(k)] == y[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("two-atom empirical frequency is 0.5 within the binomial band") {
    const auto m = AmplitudeMeasure::atoms({{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}});
    Rng rng(17);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (m.sample(rng)[0] == 1.0) ++hits;
    CHECK(std::fabs(hits / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("uniform sphere samples have unit norm and near-zero mean") {
    const auto m = AmplitudeMeasure::uniform_sphere(2);
    Rng rng(5);
    Vec mean{0.0, 0.0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec w = m.sample(rng);
        CHECK(std::fabs(norm2(w) - 1.0) <= 1e-12);
        mean[0] += w[0];
        mean[1] += w[1];
    }
    CHECK(std::fabs(mean[0] / n) < 0.01);
    CHECK(std::fabs(mean[1] / n) < 0.01);
}

TEST_CASE("von Mises samples stay on the circle") {
    const auto m = AmplitudeMeasure::von_mises(0.5, 2.0);
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) CHECK(std::fabs(norm2(m.sample(rng)) - 1.0) <= 1e-12);
}

TEST_CASE("cf at the origin is exactly one") {
    const std::vector<AmplitudeMeasure> measures = {
        AmplitudeMeasure::delta({0.7, -0.3}),
        AmplitudeMeasure::atoms({{{1.0, 0.0}, 0.25}, {{0.0, -1.0}, 0.75}}),
        AmplitudeMeasure::uniform_sphere(2),
        AmplitudeMeasure::von_mises(1.0, 4.0),
    };
    for (const auto& m : measures) {
        const auto v = m.cf({0.0, 0.0});
        CHECK(v.real() == 1.0);
        CHECK(v.imag() == 0.0);
    }
    const auto e = AmplitudeMeasure::exp_radial(2.0).cf({0.0});
    CHECK(e.real() == 1.0);
}

TEST_CASE("sphere cf in one dimension is cos(z)") {
    const auto m = AmplitudeMeasure::uniform_sphere(1);
    for (double z : {0.2, 1.0, 5.5}) {
        const auto v = m.cf({z});
        CHECK(v.real() == doctest::Approx(std::cos(z)).epsilon(1e-12));
        CHECK(std::fabs(v.imag()) < 1e-14);
    }
    // ...and matches the two-atom representation of S^0
    const auto atoms = AmplitudeMeasure::atoms({{{1.0}, 0.5}, {{-1.0}, 0.5}});
    for (double z : {0.3, 2.2}) CHECK(std::abs(m.cf({z}) - atoms.cf({z})) < 1e-12);
}

TEST_CASE("delta cf is a pure phase") {
    const auto m = AmplitudeMeasure::delta({0.4, 1.1});
    const Vec z{1.3, -0.2};
    const double phase = 1.3 * 0.4 - 0.2 * 1.1;
    const auto v = m.cf(z);
    CHECK(v.real() == doctest::Approx(std::cos(phase)).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(std::sin(phase)).epsilon(1e-14));
}

TEST_CASE("exponential-radial cf is rate/(rate - iz)") {
    const auto m = AmplitudeMeasure::exp_radial(1.5);
    for (double z : {0.0, 0.7, -2.0}) {
        const auto expect = 1.5 / std::complex<double>(1.5, -z);
        CHECK(std::abs(m.cf({z}) - expect) < 1e-14);
    }
}

TEST_CASE("von Mises density: normalization, mode, flat limit") {
    auto f = [](double t) { return von_mises_density(2.0, 0.5, t); };
    const double total = integrate_adaptive<double>(f, 0.0, kTwoPi, 1e-10).value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    const double peak = von_mises_density(2.0, 0.5, 0.5);
    for (double x : {0.0, 0.2, 1.0, 3.0, 6.0}) CHECK(von_mises_density(2.0, 0.5, x) <= peak + 1e-15);
    CHECK(peak == doctest::Approx(std::exp(2.0) / (kTwoPi * modified_bessel_I(0, 2.0))).epsilon(1e-12));
    for (double x : {0.1, 2.0, 5.0})
        CHECK(std::fabs(von_mises_density(1e-8, 1.0, x) - 1.0 / kTwoPi) < 1e-6);
    CHECK_THROWS_AS(von_mises_density(0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(AmplitudeMeasure::von_mises(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("cf magnitude bound and conjugate symmetry") {
    const std::vector<AmplitudeMeasure> measures = {
        AmplitudeMeasure::atoms({{{0.6, 0.8}, 0.3}, {{-1.0, 0.0}, 0.7}}),
        AmplitudeMeasure::uniform_sphere(2),
        AmplitudeMeasure::von_mises(2.5, 1.5),
    };
    for (const auto& m : measures) {
        for (const auto& z : small_grid(2, 1234)) {
            const auto v = m.cf(z);
            CHECK(std::abs(v) <= 1.0 + 1e-10);
            Vec neg = z;
            for (double& c : neg) c = -c;
            CHECK(std::abs(m.cf(neg) - std::conj(v)) < 1e-9);
        }
    }
}

TEST_CASE("empirical cf matches the analytic cf for every built-in family") {
    struct Case {
        AmplitudeMeasure m;
        int d;
    };
    const std::vector<Case> cases = {
        {AmplitudeMeasure::delta({1.0, 0.0}), 2},
        {AmplitudeMeasure::atoms({{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}}), 2},
        {AmplitudeMeasure::uniform_sphere(2), 2},
        {AmplitudeMeasure::uniform_sphere(3), 3},
        {AmplitudeMeasure::von_mises(0.5, 2.0), 2},
        {AmplitudeMeasure::exp_radial(1.0), 1},
    };
    const int n = 100000;
    const double band = 2.0 * 3.0 / std::sqrt(static_cast<double>(n));  // ~0.019
    int c_idx = 0;
    for (const auto& c : cases) {
        double worst = 0.0;
        for (const auto& z : small_grid(c.d, 777 + c_idx)) {
            const auto emp = empirical_cf_of(c.m, z, n, 4242 + c_idx);
            worst = std::max(worst, std::abs(emp - c.m.cf(z)));
        }
        CHECK(worst < band);
        ++c_idx;
    }
}

TEST_CASE("uniform-sphere empirical cf cross-validates the Bessel code") {
    const auto m = AmplitudeMeasure::uniform_sphere(3);
    const int n = 100000;
    for (const auto& z : small_grid(3, 31)) {
        const auto emp = empirical_cf_of(m, z, n, 57);
        CHECK(std::abs(emp - std::complex<double>(spherical_bessel_Y(3, norm2(z)), 0.0)) < 0.019);
    }
}

TEST_CASE("log-moment bounds") {
    CHECK(AmplitudeMeasure::uniform_sphere(4).log_moment_bound() == 0.0);
    CHECK(AmplitudeMeasure::von_mises(0.0, 3.0).log_moment_bound() == 0.0);
    const auto scaled = AmplitudeMeasure::delta({3.0, 4.0});  // |w| = 5
    CHECK(scaled.log_moment_bound() == doctest::Approx(std::log(5.0)));
    const auto e = AmplitudeMeasure::exp_radial(1.0);
    Rng rng(8);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += std::max(0.0, std::log(std::fabs(e.sample(rng)[0])));
    CHECK(acc / n <= e.log_moment_bound());
}

TEST_CASE("measure validation rejects bad inputs") {
    CHECK_THROWS_AS(AmplitudeMeasure::delta({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(AmplitudeMeasure::atoms({{{1.0}, 0.5}, {{-1.0}, 0.6}}), std::invalid_argument);
    CHECK_THROWS_AS(AmplitudeMeasure::atoms({{{1.0}, 1.5}, {{-1.0}, -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(AmplitudeMeasure::atoms({{{0.0}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(AmplitudeMeasure::exp_radial(0.0), std::invalid_argument);
}

TEST_CASE("von Mises exact moments match Monte Carlo") {
    const double mu = 0.8, kappa = 3.0;
    const auto m = AmplitudeMeasure::von_mises(mu, kappa);
    const auto mean = *m.mean();
    const double r1 = modified_bessel_I(1, kappa) / modified_bessel_I(0, kappa);
    CHECK(mean[0] == doctest::Approx(r1 * std::cos(mu)).epsilon(1e-12));
    CHECK(mean[1] == doctest::Approx(r1 * std::sin(mu)).epsilon(1e-12));
    Rng rng(12);
    const int n = 200000;
    double s0 = 0.0, s1 = 0.0, s00 = 0.0, s01 = 0.0, s11 = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec w = m.sample(rng);
        s0 += w[0];
        s1 += w[1];
        s00 += w[0] * w[0];
        s01 += w[0] * w[1];
        s11 += w[1] * w[1];
    }
    CHECK(s0 / n == doctest::Approx(mean[0]).epsilon(0.02));
    CHECK(s1 / n == doctest::Approx(mean[1]).epsilon(0.02));
    const Mat m2 = *m.second_moment();
    CHECK(s00 / n == doctest::Approx(m2(0, 0)).epsilon(0.03));
    CHECK(s01 / n == doctest::Approx(m2(0, 1)).epsilon(0.05));
    CHECK(s11 / n == doctest::Approx(m2(1, 1)).epsilon(0.03));
}

TEST_CASE("measure spec strings round-trip") {
    const char* specs[] = {"delta:w=1,0", "atoms:(1,0)@0.5;(0,1)@0.5", "usphere",
                           "vonmises:mu=0.5,kappa=2", "exp:rate=1"};
    for (const char* s : specs) {
        const auto m = parse_measure_spec(s, 2);
        CHECK(format_measure_spec(m) == s);
    }
    CHECK(parse_measure_spec("usphere", 5).dim() == 5);
    CHECK_THROWS_AS(parse_measure_spec("usphere", 0), std::invalid_argument);
    CHECK_THROWS_AS(parse_measure_spec("nope:x=1", 1), std::invalid_argument);
    CHECK_THROWS_AS(parse_measure_spec("vonmises:mu=0.5", 2), std::invalid_argument);
    CHECK_THROWS_AS(parse_measure_spec("atoms:(1,0)0.5", 2), std::invalid_argument);
}

TEST_CASE("atomic mixtures collapse and mix their cf") {
    const auto a = AmplitudeMeasure::delta({1.0, 0.0});
    const auto b = AmplitudeMeasure::delta({0.0, 1.0});
    const auto mix = AmplitudeMeasure::mixture({1.0, 3.0}, {a, b});
    CHECK(mix.kind() == MeasureKind::atoms);
    REQUIRE(mix.atom_list().size() == 2);
    const Vec z{0.4, -1.0};
    const auto expect = 0.25 * a.cf(z) + 0.75 * b.cf(z);
    CHECK(std::abs(mix.cf(z) - expect) < 1e-14);

    const auto general = AmplitudeMeasure::mixture({0.5, 0.5}, {AmplitudeMeasure::uniform_sphere(2), b});
    CHECK(general.kind() == MeasureKind::mixture);
    const auto ge = 0.5 * AmplitudeMeasure::uniform_sphere(2).cf(z) + 0.5 * b.cf(z);
    CHECK(std::abs(general.cf(z) - ge) < 1e-10);
}

TEST_CASE("cap masses") {
    const auto s2 = AmplitudeMeasure::uniform_sphere(2);
    CHECK(s2.cap_mass({1.0, 0.0}, 0.5 * kPi) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s2.cap_mass({0.0, 1.0}, 0.25 * kPi) == doctest::Approx(0.25).epsilon(1e-12));
    const auto s3 = AmplitudeMeasure::uniform_sphere(3);
    CHECK(s3.cap_mass({0.0, 0.0, 1.0}, 0.5 * kPi) == doctest::Approx(0.5).epsilon(1e-10));
    // d=3 cap of half-angle phi has fraction (1-cos phi)/2
    CHECK(s3.cap_mass({1.0, 0.0, 0.0}, 1.0) == doctest::Approx(0.5 * (1.0 - std::cos(1.0))).epsilon(1e-10));
    const auto at = AmplitudeMeasure::atoms({{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}});
    CHECK(at.cap_mass({1.0, 0.0}, 0.1) == doctest::Approx(0.5));
    CHECK(at.cap_mass({-1.0, 0.0}, 0.1) == doctest::Approx(0.0));
    const auto vm = AmplitudeMeasure::von_mises(0.0, 5.0);
    const double half = vm.cap_mass({1.0, 0.0}, 0.5 * kPi);
    CHECK(half > 0.9);
    CHECK(vm.cap_mass({1.0, 0.0}, kPi) == doctest::Approx(1.0).epsilon(1e-8));
}
