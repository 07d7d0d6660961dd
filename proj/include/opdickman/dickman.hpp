#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "opdickman/amplitude.hpp"
#include "opdickman/matrix.hpp"

namespace opdickman {

// The distribution D(Q, nu): fixed point of x -> U^Q (x + W).
struct DickmanDistribution {
    OperatorMatrix Q;
    AmplitudeMeasure nu;

    DickmanDistribution(OperatorMatrix q, AmplitudeMeasure measure);
    int dim() const { return Q.dim; }
};

struct SampleBatch {
    int n = 0, d = 0;
    std::vector<double> data;  // row-major n x d
    std::uint64_t seed = 0;
    double eps = 0.0;
    int n_max = 0;
    std::vector<std::uint32_t> term_counts;
    int cap_hits = 0;

    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * d; }
    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * d; }
    Vec row_vec(int i) const { return Vec(row(i), row(i) + d); }
};

// Perpetuity sampler: x = sum_k (U_1...U_k)^Q W_k with the running product
// accumulated as M <- u^Q M, truncated when |M|_inf < eps or at n_max terms.
// Work is split into fixed-size chunks with one generator per chunk, so the
// output is reproducible bit-for-bit for any thread count.
SampleBatch sample(const DickmanDistribution& dist, int n, std::uint64_t seed,
                   double eps = 1e-10, int n_max = 10000);

// log psi(z) = \int_0^1 (nu^(s^{Q^T} z) - 1) ds/s, computed after the
// substitution s = e^{-t} with the tail cut where the Lemma-3.1 bound
// c1 e^{-Kt} |z| (1 + E|W|) drops below tol.
std::complex<double> log_cf(const DickmanDistribution& dist, const Vec& z, double tol = 1e-9);

// log psi_t(z) = \int_{e^{-t}}^1 (nu^(s^{Q^T} z) - 1) ds/s; satisfies
// log psi(z) = log psi(e^{-t Q^T} z) + log psi_t(z).
std::complex<double> selfdecomp_factor_log_cf(const DickmanDistribution& dist, double t,
                                              const Vec& z, double tol = 1e-9);

// m = Q^{-1} E W.
Vec mean(const DickmanDistribution& dist);
// solves Q C + C Q^T = E[W W^T].
Mat covariance(const DickmanDistribution& dist);

// Wedge A_{t,D} = {r^Q x : r > t, x in D} with D either a finite direction
// set or a spherical cap.
struct LevyWedge {
    double t = 1.0;
    std::vector<Vec> directions;  // finite set when non-empty
    Vec cap_axis;
    double cap_half_angle = 0.0;

    static LevyWedge atom_set(double t, std::vector<Vec> dirs);
    static LevyWedge cap(double t, Vec axis, double half_angle);
};

// M(A_{t,D}) = nu(D) * (-log(t ^ 1)); requires nu supported on S_Q,
// which is checked numerically on a finite r-grid.
double levy_wedge_mass(const DickmanDistribution& dist, const LevyWedge& wedge);

// Convolution closure: inputs with operators proportional to a common Q
// produce D(Q/(c1+c2), (c1 nu1 + c2 nu2)/(c1+c2)).
DickmanDistribution convolve(const DickmanDistribution& a, const DickmanDistribution& b);

// When nu is discrete and every atom lies in a real eigenspace of Q,
// rewrites D(Q, nu) as D(theta I, nu~) with 1/theta = sum p_k / a_k.
DickmanDistribution reduce_to_scalar(const DickmanDistribution& dist);

struct UnivariateComponent {
    Vec direction;
    double theta = 0.0;
};

// Scalar Q and finite nu: the representation x = sum_i w_i X_i with
// independent X_i ~ GD_{theta p_i}.
std::vector<UnivariateComponent> finite_atom_decomposition(const DickmanDistribution& dist);

// Sampler built from the decomposition above; must agree in law with
// the perpetuity sampler.
SampleBatch sample_by_decomposition(const DickmanDistribution& dist, int n, std::uint64_t seed,
                                    double eps = 1e-10, int n_max = 10000);

struct CFGrid {
    enum class Method { analytic, empirical };
    std::vector<Vec> points;
    std::vector<std::complex<double>> values;
    Method method = Method::analytic;
};

// Canonical 25-point frequency grid: the origin plus 24 seeded directions
// on radii 0.5 / 1.5 / 3.
std::vector<Vec> default_cf_grid(int d);

CFGrid analytic_cf(const DickmanDistribution& dist, const std::vector<Vec>& grid, double tol = 1e-9);

// Drift vector of the characteristic triplet (diagnostic only):
// a = \int\int_0^1 s^Q x 1{|s^Q x| <= 1} nu(dx) ds/s.
Vec levy_drift(const DickmanDistribution& dist, double tol = 1e-8);

}  // namespace opdickman
