#pragma once

#include <complex>
#include <string>
#include <vector>

namespace opdickman {

using Vec = std::vector<double>;

// Dense square matrix, row-major. Dimensions stay small (hard cap 64),
// so everything below is plain O(n^3) dense code.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int dim, double fill = 0.0)
        : n(dim), a(static_cast<std::size_t>(dim) * dim, fill) {}

    static Mat identity(int dim);
    static Mat diag(const Vec& d);

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

Mat operator*(const Mat& x, const Mat& y);
Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(double s, const Mat& x);
Mat transpose(const Mat& x);

Vec mat_vec(const Mat& m, const Vec& v);
// transpose(m) * v without forming the transpose
Vec mat_tvec(const Mat& m, const Vec& v);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
// largest absolute entry (the truncation norm used by the sampler)
double norm_entry_inf(const Mat& m);
// max absolute row sum; submultiplicative, used for exp scaling
double norm_row_inf(const Mat& m);

// exp(A) by scaling-and-squaring: 13-term Taylor core after scaling
// so that the row-inf norm is <= 0.5. Diagonal input short-circuits to
// the exact elementwise exponential.
Mat mat_exp(const Mat& a);

struct LuFactors {
    Mat lu;
    std::vector<int> piv;
};
LuFactors lu_factor(const Mat& a);  // throws std::runtime_error on singular input
Vec lu_solve(const LuFactors& f, Vec b);
Vec solve(const Mat& a, const Vec& b);
Mat mat_inverse(const Mat& a);

// Eigenvalues of a real square matrix: balancing, Householder reduction
// to Hessenberg form, then Francis double-shift QR.
std::vector<std::complex<double>> eigenvalues(const Mat& a);

// A matrix validated to lie in M+ (all eigenvalue real parts positive),
// together with the spectral metadata the rest of the library relies on:
// growth_bound_K = min Re(lambda) and scale_c1 with
// |s^Q x| <= scale_c1 * s^K * |x| for s in (0,1].
struct OperatorMatrix {
    Mat q;
    int dim = 0;
    std::vector<std::complex<double>> spectrum;
    double growth_bound_K = 0.0;
    double scale_c1 = 1.0;
};

// Validates membership in M+ and estimates scale_c1 on a deterministic
// grid of s = 2^-20..1 against 2d axis directions plus 100 seeded unit
// vectors, times a 1.1 safety factor. Throws std::invalid_argument when
// some eigenvalue has real part <= 1e-12 or the input is not finite.
OperatorMatrix validate_mplus(const Mat& m);

// u^Q = exp(Q log u) for u in (0,1]; exact identity at u = 1.
// Returns the zero matrix when u < 1e-300 and c1 * u^K underflows.
Mat matrix_power(const OperatorMatrix& q, double u);
// Same computation on a raw matrix (no underflow guard metadata).
Mat mat_power_raw(const Mat& q, double u);

enum class VecOrder { by_column, by_row };

// Solves Q C + C Q^T = B for symmetric B via the vectorized linear
// system; residual is checked against 1e-10 * |B|_inf.
Mat lyapunov_solve(const OperatorMatrix& q, const Mat& b,
                   VecOrder order = VecOrder::by_column);

struct Eigenspace {
    double value = 0.0;
    std::vector<Vec> basis;  // orthonormal
};

struct SpectralDecomposition {
    std::vector<std::complex<double>> eigenvalues;
    // real-diagonalizable: all eigenvalues real with full geometric
    // multiplicity and the reconstruction S diag S^-1 verified against Q
    bool diagonalizable = false;
    Mat change_of_basis;      // valid when diagonalizable
    Mat change_of_basis_inv;  // valid when diagonalizable
    Vec diag_eigenvalues;     // valid when diagonalizable, column order of S
    std::vector<Eigenspace> real_eigenspaces;
};

SpectralDecomposition spectral_decompose(const OperatorMatrix& q);

// Text format "1,0;0,2": rows separated by ';', entries by ','.
Mat parse_matrix(const std::string& text);
std::string format_matrix(const Mat& m);
std::string format_double(double v);  // shortest round-trip, locale-free

}  // namespace opdickman
