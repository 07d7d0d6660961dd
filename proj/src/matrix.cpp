#include "opdickman/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "opdickman/rng.hpp"

namespace opdickman {

namespace {

constexpr int kMaxDim = 64;

void require_finite(const Mat& m) {
    for (double v : m.a)
        if (!std::isfinite(v)) throw std::invalid_argument("matrix has non-finite entries");
}

}  // namespace

Mat Mat::identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(const Vec& d) {
    Mat m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
}

Mat operator*(const Mat& x, const Mat& y) {
    const int n = x.n;
    Mat r(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (int j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

Mat operator+(const Mat& x, const Mat& y) {
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

Mat operator-(const Mat& x, const Mat& y) {
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
    return r;
}

Mat operator*(double s, const Mat& x) {
    Mat r = x;
    for (double& v : r.a) v *= s;
    return r;
}

Mat transpose(const Mat& x) {
    Mat r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) r(j, i) = x(i, j);
    return r;
}

Vec mat_vec(const Mat& m, const Vec& v) {
    Vec r(static_cast<std::size_t>(m.n), 0.0);
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n; ++j) s += m(i, j) * v[static_cast<std::size_t>(j)];
        r[static_cast<std::size_t>(i)] = s;
    }
    return r;
}

Vec mat_tvec(const Mat& m, const Vec& v) {
    Vec r(static_cast<std::size_t>(m.n), 0.0);
    for (int i = 0; i < m.n; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (int j = 0; j < m.n; ++j) r[static_cast<std::size_t>(j)] += m(i, j) * vi;
    }
    return r;
}

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_entry_inf(const Mat& m) {
    double r = 0.0;
    for (double v : m.a) r = std::max(r, std::fabs(v));
    return r;
}

double norm_row_inf(const Mat& m) {
    double r = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n; ++j) s += std::fabs(m(i, j));
        r = std::max(r, s);
    }
    return r;
}

Mat mat_exp(const Mat& a) {
    const int n = a.n;
    bool is_diag = true;
    for (int i = 0; i < n && is_diag; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a(i, j) != 0.0) { is_diag = false; break; }
    if (is_diag) {
        Mat r(n);
        for (int i = 0; i < n; ++i) r(i, i) = std::exp(a(i, i));
        return r;
    }

    const double nrm = norm_row_inf(a);
    int k = 0;
    if (nrm > 0.5) k = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const double scale = std::ldexp(1.0, -k);
    Mat b = scale * a;

    // 13-term Taylor core via Horner; remainder < 2^-50 at |B| <= 0.5
    const Mat id = Mat::identity(n);
    Mat p = id + (1.0 / 13.0) * b;
    for (int j = 12; j >= 1; --j) p = id + (1.0 / j) * (b * p);
    for (int i = 0; i < k; ++i) p = p * p;
    return p;
}

LuFactors lu_factor(const Mat& a) {
    const int n = a.n;
    LuFactors f{a, std::vector<int>(static_cast<std::size_t>(n))};
    Mat& lu = f.lu;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::fabs(lu(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(lu(i, k)) > best) { best = std::fabs(lu(i, k)); piv = i; }
        if (best == 0.0) throw std::runtime_error("singular matrix in LU factorization");
        f.piv[static_cast<std::size_t>(k)] = piv;
        if (piv != k)
            for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
        const double inv = 1.0 / lu(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = lu(i, k) * inv;
            lu(i, k) = m;
            for (int j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
        }
    }
    return f;
}

Vec lu_solve(const LuFactors& f, Vec b) {
    const int n = f.lu.n;
    for (int k = 0; k < n; ++k) {
        const int p = f.piv[static_cast<std::size_t>(k)];
        if (p != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
        for (int i = k + 1; i < n; ++i) b[static_cast<std::size_t>(i)] -= f.lu(i, k) * b[static_cast<std::size_t>(k)];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * b[static_cast<std::size_t>(j)];
        b[static_cast<std::size_t>(i)] = s / f.lu(i, i);
    }
    return b;
}

Vec solve(const Mat& a, const Vec& b) { return lu_solve(lu_factor(a), b); }

Mat mat_inverse(const Mat& a) {
    const int n = a.n;
    const LuFactors f = lu_factor(a);
    Mat r(n);
    Vec e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        Vec col = lu_solve(f, e);
        e[static_cast<std::size_t>(j)] = 0.0;
        for (int i = 0; i < n; ++i) r(i, j) = col[static_cast<std::size_t>(i)];
    }
    return r;
}

namespace {

// EISPACK-style balancing: similarity scaling by powers of 2 to even out
// row/column norms. Leaves eigenvalues unchanged.
void balance(Mat& a) {
    const int n = a.n;
    const double radix = 2.0;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) { c += std::fabs(a(j, i)); r += std::fabs(a(i, j)); }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0, s = c + r;
            while (c < g) { f *= radix; c *= radix * radix; }
            g = r * radix;
            while (c > g) { f /= radix; c /= radix * radix; }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (int j = 0; j < n; ++j) a(i, j) *= ginv;
                for (int j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Householder reduction to upper Hessenberg form.
void hessenberg(Mat& a) {
    const int n = a.n;
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::fabs(a(i, k));
        if (scale == 0.0) continue;
        Vec v(static_cast<std::size_t>(n), 0.0);
        double sigma = 0.0;
        for (int i = k + 1; i < n; ++i) {
            v[static_cast<std::size_t>(i)] = a(i, k) / scale;
            sigma += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        double alpha = std::sqrt(sigma);
        if (v[static_cast<std::size_t>(k + 1)] > 0) alpha = -alpha;
        const double beta = sigma - alpha * v[static_cast<std::size_t>(k + 1)];
        if (beta == 0.0) continue;
        v[static_cast<std::size_t>(k + 1)] -= alpha;
        // A <- (I - v v^T / beta) A (I - v v^T / beta)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = k + 1; i < n; ++i) s += v[static_cast<std::size_t>(i)] * a(i, j);
            s /= beta;
            for (int i = k + 1; i < n; ++i) a(i, j) -= s * v[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += a(i, j) * v[static_cast<std::size_t>(j)];
            s /= beta;
            for (int j = k + 1; j < n; ++j) a(i, j) -= s * v[static_cast<std::size_t>(j)];
        }
        a(k + 1, k) = alpha * scale;
        for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

double sign_with(double magnitude, double s) {
    return s >= 0 ? std::fabs(magnitude) : -std::fabs(magnitude);
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
std::vector<std::complex<double>> hqr(Mat& h) {
    const int n = h.n;
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    const double eps = std::numeric_limits<double>::epsilon();

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(h(i, j));
    if (anorm == 0.0) {
        for (int i = 0; i < n; ++i) out.emplace_back(0.0, 0.0);
        return out;
    }

    int nn = n - 1;
    double t = 0.0;
    int its = 0;
    while (nn >= 0) {
        int l;
        for (l = nn; l >= 1; --l) {
            double s = std::fabs(h(l - 1, l - 1)) + std::fabs(h(l, l));
            if (s == 0.0) s = anorm;
            if (std::fabs(h(l, l - 1)) <= eps * s) { h(l, l - 1) = 0.0; break; }
        }
        double x = h(nn, nn);
        if (l == nn) {  // one real eigenvalue
            out.emplace_back(x + t, 0.0);
            --nn;
            its = 0;
            continue;
        }
        double y = h(nn - 1, nn - 1);
        double w = h(nn, nn - 1) * h(nn - 1, nn);
        if (l == nn - 1) {  // 2x2 block
            double p = 0.5 * (y - x);
            double q = p * p + w;
            double z = std::sqrt(std::fabs(q));
            x += t;
            if (q >= 0.0) {
                z = p + sign_with(z, p);
                out.emplace_back(x + z, 0.0);
                out.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
            } else {
                out.emplace_back(x + p, z);
                out.emplace_back(x + p, -z);
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if (its == 30) throw std::runtime_error("eigenvalue QR iteration did not converge");
        if (its == 10 || its == 20) {  // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) h(i, i) -= x;
            const double s = std::fabs(h(nn, nn - 1)) + std::fabs(h(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
        }
        ++its;
        int m;
        double p = 0.0, q = 0.0, r = 0.0;
        for (m = nn - 2; m >= l; --m) {
            const double z = h(m, m);
            const double rr = x - z;
            const double ss = y - z;
            p = (rr * ss - w) / h(m + 1, m) + h(m, m + 1);
            q = h(m + 1, m + 1) - z - rr - ss;
            r = h(m + 2, m + 1);
            const double sc = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= sc; q /= sc; r /= sc;
            if (m == l) break;
            const double u = std::fabs(h(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            const double v = std::fabs(p) * (std::fabs(h(m - 1, m - 1)) + std::fabs(z) + std::fabs(h(m + 1, m + 1)));
            if (u <= eps * v) break;
        }
        for (int i = m + 2; i <= nn; ++i) {
            h(i, i - 2) = 0.0;
            if (i != m + 2) h(i, i - 3) = 0.0;
        }
        for (int k = m; k <= nn - 1; ++k) {  // bulge chase
            if (k != m) {
                p = h(k, k - 1);
                q = h(k + 1, k - 1);
                r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
                x = std::fabs(p) + std::fabs(q) + std::fabs(r);
                if (x != 0.0) { p /= x; q /= x; r /= x; }
            }
            const double s = sign_with(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
                if (l != m) h(k, k - 1) = -h(k, k - 1);
            } else {
                h(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            double z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
                double pp = h(k, j) + q * h(k + 1, j);
                if (k != nn - 1) {
                    pp += r * h(k + 2, j);
                    h(k + 2, j) -= pp * z;
                }
                h(k + 1, j) -= pp * y;
                h(k, j) -= pp * x;
            }
            const int mmin = std::min(nn, k + 3);
            for (int i = l; i <= mmin; ++i) {
                double pp = x * h(i, k) + y * h(i, k + 1);
                if (k != nn - 1) {
                    pp += z * h(i, k + 2);
                    h(i, k + 2) -= pp * r;
                }
                h(i, k + 1) -= pp * q;
                h(i, k) -= pp;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Mat& a) {
    require_finite(a);
    if (a.n == 0) return {};
    if (a.n == 1) return {std::complex<double>(a(0, 0), 0.0)};
    Mat h = a;
    balance(h);
    hessenberg(h);
    auto eig = hqr(h);
    std::sort(eig.begin(), eig.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return eig;
}

OperatorMatrix validate_mplus(const Mat& m) {
    if (m.n <= 0) throw std::invalid_argument("matrix must be non-empty and square");
    if (m.n > kMaxDim) throw std::invalid_argument("dimension above the supported cap of 64");
    require_finite(m);

    OperatorMatrix op;
    op.q = m;
    op.dim = m.n;
    op.spectrum = eigenvalues(m);
    double k = std::numeric_limits<double>::infinity();
    for (const auto& ev : op.spectrum) k = std::min(k, ev.real());
    if (!(k > 1e-12)) throw std::invalid_argument("not in M+: eigenvalue with non-positive real part");
    op.growth_bound_K = k;

    // c1 witness: maximize |s^Q x| / s^K over s = 2^-20..1 and unit directions
    const int d = m.n;
    std::vector<Vec> dirs;
    for (int i = 0; i < d; ++i) {
        Vec e(static_cast<std::size_t>(d), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        dirs.push_back(e);
        e[static_cast<std::size_t>(i)] = -1.0;
        dirs.push_back(e);
    }
    Rng rng(0x0bd1c4a15c41eULL);
    for (int r = 0; r < 100; ++r) {
        Vec v(static_cast<std::size_t>(d));
        double nrm = 0.0;
        do {
            for (double& x : v) x = rng.gaussian();
            nrm = norm2(v);
        } while (nrm == 0.0);
        for (double& x : v) x /= nrm;
        dirs.push_back(v);
    }
    double worst = 1.0;
    for (int j = 0; j <= 20; ++j) {
        const double s = std::ldexp(1.0, -j);
        const Mat sq = (s == 1.0) ? Mat::identity(d) : mat_exp(std::log(s) * m);
        const double sk = std::pow(s, k);
        for (const auto& x : dirs)
            worst = std::max(worst, norm2(mat_vec(sq, x)) / sk);
    }
    op.scale_c1 = 1.1 * worst;
    return op;
}

Mat mat_power_raw(const Mat& q, double u) {
    if (!(u > 0.0)) throw std::invalid_argument("matrix power requires u > 0");
    if (u == 1.0) return Mat::identity(q.n);
    return mat_exp(std::log(u) * q);
}

Mat matrix_power(const OperatorMatrix& q, double u) {
    if (!(u > 0.0)) throw std::invalid_argument("matrix power requires u > 0");
    if (u == 1.0) return Mat::identity(q.dim);
    if (u < 1e-300) {
        // |u^Q| <= c1 u^K; return 0 once that bound underflows
        const double log10bound = std::log10(q.scale_c1) + q.growth_bound_K * std::log10(u);
        if (log10bound < -308.0) return Mat(q.dim);
    }
    return mat_exp(std::log(u) * q.q);
}

Mat lyapunov_solve(const OperatorMatrix& q, const Mat& b, VecOrder order) {
    const int d = q.dim;
    if (b.n != d) throw std::invalid_argument("dimension mismatch in Lyapunov solve");
    const double bn = norm_entry_inf(b);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::fabs(b(i, j) - b(j, i)) > 1e-9 * std::max(1.0, bn))
                throw std::invalid_argument("Lyapunov right-hand side must be symmetric");

    const auto idx = [d, order](int i, int j) {
        return order == VecOrder::by_column ? i + d * j : j + d * i;
    };
    Mat big(d * d);
    Vec rhs(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int row = idx(i, j);
            for (int k = 0; k < d; ++k) {
                big(row, idx(k, j)) += q.q(i, k);   // (Q C)_{ij}
                big(row, idx(i, k)) += q.q(j, k);   // (C Q^T)_{ij}
            }
            rhs[static_cast<std::size_t>(row)] = b(i, j);
        }
    const Vec x = solve(big, rhs);
    Mat c(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c(i, j) = x[static_cast<std::size_t>(idx(i, j))];
    // symmetrize and verify the residual promised by the contract
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double v = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = c(j, i) = v;
        }
    const Mat resid = q.q * c + c * transpose(q.q) - b;
    if (norm_entry_inf(resid) > 1e-10 * std::max(bn, 1e-30))
        throw std::runtime_error("Lyapunov solve residual above tolerance");
    return c;
}

namespace {

// Null space basis of M via Gaussian elimination with full pivoting.
std::vector<Vec> null_space(const Mat& m0, double tol) {
    const int n = m0.n;
    Mat m = m0;
    std::vector<int> col_of(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) col_of[static_cast<std::size_t>(j)] = j;
    int rank = 0;
    for (int k = 0; k < n; ++k) {
        int pi = k, pj = k;
        double best = 0.0;
        for (int i = k; i < n; ++i)
            for (int j = k; j < n; ++j)
                if (std::fabs(m(i, j)) > best) { best = std::fabs(m(i, j)); pi = i; pj = j; }
        if (best <= tol) break;
        if (pi != k)
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(pi, j));
        if (pj != k) {
            for (int i = 0; i < n; ++i) std::swap(m(i, k), m(i, pj));
            std::swap(col_of[static_cast<std::size_t>(k)], col_of[static_cast<std::size_t>(pj)]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
        }
        ++rank;
    }
    std::vector<Vec> basis;
    for (int f = rank; f < n; ++f) {
        Vec y(static_cast<std::size_t>(n), 0.0);  // in permuted coordinates
        y[static_cast<std::size_t>(f)] = 1.0;
        for (int i = rank - 1; i >= 0; --i) {
            double s = 0.0;
            for (int j = i + 1; j < n; ++j) s += m(i, j) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = -s / m(i, i);
        }
        Vec x(static_cast<std::size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(col_of[static_cast<std::size_t>(j)])] = y[static_cast<std::size_t>(j)];
        // orthogonalize against previous basis vectors
        for (const auto& bprev : basis) {
            const double c = dot(x, bprev);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * bprev[i];
        }
        const double nx = norm2(x);
        if (nx > tol) {
            for (double& v : x) v /= nx;
            basis.push_back(x);
        }
    }
    return basis;
}

}  // namespace

SpectralDecomposition spectral_decompose(const OperatorMatrix& q) {
    SpectralDecomposition sd;
    sd.eigenvalues = q.spectrum;
    const int d = q.dim;
    const double scale = std::max(1.0, norm_row_inf(q.q));
    const double imag_tol = 1e-8 * scale;

    // cluster distinct real eigenvalues
    std::vector<double> reals;
    bool all_real = true;
    for (const auto& ev : sd.eigenvalues) {
        if (std::fabs(ev.imag()) > imag_tol) { all_real = false; continue; }
        bool seen = false;
        for (double r : reals)
            if (std::fabs(r - ev.real()) <= 1e-8 * scale) { seen = true; break; }
        if (!seen) reals.push_back(ev.real());
    }
    std::sort(reals.begin(), reals.end());

    int total_multiplicity = 0;
    for (double a : reals) {
        Mat shifted = q.q;
        for (int i = 0; i < d; ++i) shifted(i, i) -= a;
        Eigenspace es;
        es.value = a;
        es.basis = null_space(shifted, 1e-10 * scale * d);
        if (!es.basis.empty()) {
            total_multiplicity += static_cast<int>(es.basis.size());
            sd.real_eigenspaces.push_back(std::move(es));
        }
    }

    if (all_real && total_multiplicity == d) {
        Mat s(d);
        Vec lam(static_cast<std::size_t>(d), 0.0);
        int col = 0;
        for (const auto& es : sd.real_eigenspaces)
            for (const auto& v : es.basis) {
                for (int i = 0; i < d; ++i) s(i, col) = v[static_cast<std::size_t>(i)];
                lam[static_cast<std::size_t>(col)] = es.value;
                ++col;
            }
        try {
            const Mat sinv = mat_inverse(s);
            const Mat recon = s * Mat::diag(lam) * sinv;
            if (norm_entry_inf(recon - q.q) <= 1e-10 * std::max(norm_entry_inf(q.q), 1e-30)) {
                sd.diagonalizable = true;
                sd.change_of_basis = s;
                sd.change_of_basis_inv = sinv;
                sd.diag_eigenvalues = lam;
            }
        } catch (const std::runtime_error&) {
            // singular basis matrix: leave non-diagonalizable
        }
    }
    return sd;
}

Mat parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t semi = std::min(text.find(';', pos), text.size());
        std::vector<double> row;
        std::size_t p = pos;
        while (p <= semi) {
            const std::size_t comma = std::min(text.find(',', p), semi);
            std::string tok = text.substr(p, comma - p);
            const std::size_t b = tok.find_first_not_of(" \t");
            if (b == std::string::npos) throw std::invalid_argument("empty entry in matrix text");
            const std::size_t e = tok.find_last_not_of(" \t");
            tok = tok.substr(b, e - b + 1);
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size() || !std::isfinite(v))
                throw std::invalid_argument("bad matrix entry: '" + tok + "'");
            row.push_back(v);
            if (comma == semi) break;
            p = comma + 1;
        }
        rows.push_back(std::move(row));
        if (semi == text.size()) break;
        pos = semi + 1;
    }
    const std::size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("empty matrix text");
    for (const auto& r : rows)
        if (r.size() != n) throw std::invalid_argument("matrix text is not square");
    Mat m(static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return m;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_matrix(const Mat& m) {
    std::string out;
    for (int i = 0; i < m.n; ++i) {
        if (i) out += ';';
        for (int j = 0; j < m.n; ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
    }
    return out;
}

}  // namespace opdickman
