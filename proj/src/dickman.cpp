#include "opdickman/dickman.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "opdickman/quadrature.hpp"
#include "opdickman/special.hpp"
#include "opdickman/univariate.hpp"

namespace opdickman {

DickmanDistribution::DickmanDistribution(OperatorMatrix q, AmplitudeMeasure measure)
    : Q(std::move(q)), nu(std::move(measure)) {
    if (Q.dim != nu.dim()) throw std::invalid_argument("operator and amplitude measure dimensions differ");
}

SampleBatch sample(const DickmanDistribution& dist, int n, std::uint64_t seed, double eps, int n_max) {
    if (!(eps > 0.0)) throw std::invalid_argument("truncation eps must be positive");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (n < 0) throw std::invalid_argument("sample count must be >= 0");

    const int d = dist.dim();
    SampleBatch batch;
    batch.n = n;
    batch.d = d;
    batch.seed = seed;
    batch.eps = eps;
    batch.n_max = n_max;
    batch.data.assign(static_cast<std::size_t>(n) * d, 0.0);
    batch.term_counts.assign(static_cast<std::size_t>(n), 0);
    if (n == 0) return batch;

    constexpr int kChunk = 1024;
    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::atomic<int> next_chunk{0};
    std::atomic<int> cap_hits{0};

    auto worker = [&]() {
        for (;;) {
            const int chunk = next_chunk.fetch_add(1);
            if (chunk >= n_chunks) return;
            Rng rng = Rng::for_worker(seed, static_cast<std::uint64_t>(chunk));
            const int lo = chunk * kChunk;
            const int hi = std::min(n, lo + kChunk);
            for (int i = lo; i < hi; ++i) {
                Vec x(static_cast<std::size_t>(d), 0.0);
                Mat m = Mat::identity(d);
                int terms = 0;
                for (;;) {
                    const double u = rng.uniform01();
                    m = matrix_power(dist.Q, u) * m;
                    const Vec w = dist.nu.sample(rng);
                    const Vec mw = mat_vec(m, w);
                    for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] += mw[static_cast<std::size_t>(k)];
                    ++terms;
                    if (norm_entry_inf(m) < eps) break;
                    if (terms == n_max) {
                        cap_hits.fetch_add(1);
                        break;
                    }
                }
                batch.term_counts[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(terms);
                double* row = batch.row(i);
                for (int k = 0; k < d; ++k) row[k] = x[static_cast<std::size_t>(k)];
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(n_chunks)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    batch.cap_hits = cap_hits.load();
    return batch;
}

namespace {

bool is_zero_vec(const Vec& z) {
    for (double v : z)
        if (v != 0.0) return false;
    return true;
}

// truncation horizon: c1 e^{-KT} |z| (1 + E|W|) / K <= tail_tol
double integration_horizon(const DickmanDistribution& dist, const Vec& z, double tail_tol) {
    const double c1 = dist.Q.scale_c1;
    const double k = dist.Q.growth_bound_K;
    const double bound = c1 * norm2(z) * (1.0 + dist.nu.abs_moment_bound()) / k;
    if (bound <= tail_tol) return 1.0;
    return std::max(1.0, std::log(bound / tail_tol) / k);
}

std::complex<double> cf_minus_one_at(const DickmanDistribution& dist, double t, const Vec& z) {
    const Mat e = mat_exp(-t * dist.Q.q);
    const Vec w = mat_tvec(e, z);  // e^{-t Q^T} z
    return dist.nu.cf(w) - 1.0;
}

}  // namespace

std::complex<double> log_cf(const DickmanDistribution& dist, const Vec& z, double tol) {
    if (static_cast<int>(z.size()) != dist.dim()) throw std::invalid_argument("frequency has wrong dimension");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (is_zero_vec(z)) return {0.0, 0.0};
    const double horizon = integration_horizon(dist, z, 0.5 * tol);
    auto f = [&](double t) { return cf_minus_one_at(dist, t, z); };
    auto r = integrate_adaptive<std::complex<double>>(f, 0.0, horizon, 0.5 * tol);
    return {std::min(r.value.real(), 0.0), r.value.imag()};
}

std::complex<double> selfdecomp_factor_log_cf(const DickmanDistribution& dist, double t,
                                              const Vec& z, double tol) {
    if (!(t > 0.0)) throw std::invalid_argument("selfdecomposability time must be positive");
    if (static_cast<int>(z.size()) != dist.dim()) throw std::invalid_argument("frequency has wrong dimension");
    if (is_zero_vec(z)) return {0.0, 0.0};
    const double horizon = std::min(t, integration_horizon(dist, z, 0.5 * tol));
    auto f = [&](double s) { return cf_minus_one_at(dist, s, z); };
    auto r = integrate_adaptive<std::complex<double>>(f, 0.0, horizon, 0.5 * tol);
    return {std::min(r.value.real(), 0.0), r.value.imag()};
}

Vec mean(const DickmanDistribution& dist) {
    const auto ew = dist.nu.mean();
    if (!ew) throw std::domain_error("moments unavailable for this amplitude measure");
    return solve(dist.Q.q, *ew);
}

Mat covariance(const DickmanDistribution& dist) {
    const auto m2 = dist.nu.second_moment();
    if (!m2) throw std::domain_error("moments unavailable for this amplitude measure");
    return lyapunov_solve(dist.Q, *m2);
}

LevyWedge LevyWedge::atom_set(double t, std::vector<Vec> dirs) {
    LevyWedge w;
    w.t = t;
    w.directions = std::move(dirs);
    return w;
}

LevyWedge LevyWedge::cap(double t, Vec axis, double half_angle) {
    LevyWedge w;
    w.t = t;
    w.cap_axis = std::move(axis);
    w.cap_half_angle = half_angle;
    return w;
}

namespace {

std::vector<Vec> support_probe_directions(const AmplitudeMeasure& nu) {
    switch (nu.kind()) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            std::vector<Vec> dirs;
            for (const auto& a : nu.atom_list()) dirs.push_back(a.w);
            return dirs;
        }
        case MeasureKind::exp_radial:
            return {Vec{1.0}};
        case MeasureKind::uniform_sphere:
        case MeasureKind::von_mises: {
            std::vector<Vec> dirs;
            Rng rng(0x5bedac0de5ULL);
            AmplitudeMeasure probe = nu;
            for (int i = 0; i < 64; ++i) dirs.push_back(probe.sample(rng));
            return dirs;
        }
        case MeasureKind::mixture: {
            std::vector<Vec> dirs;
            for (const auto& part : nu.mix_parts())
                for (auto& d : support_probe_directions(part)) dirs.push_back(std::move(d));
            return dirs;
        }
    }
    return {};
}

// semi-decision: |r^Q x| > 1 is only checked on a finite r-grid
void check_supported_on_sq(const DickmanDistribution& dist) {
    static const double r_grid[] = {1.000001, 1.05, 1.25, 2.0, 4.0, 16.0, 256.0};
    const auto dirs = support_probe_directions(dist.nu);
    for (const auto& x : dirs)
        if (std::fabs(norm2(x) - 1.0) > 1e-9)
            throw std::invalid_argument("amplitude measure is not concentrated on the unit sphere");
    for (double r : r_grid) {
        const Mat rq = mat_exp(std::log(r) * dist.Q.q);
        for (const auto& x : dirs)
            if (!(norm2(mat_vec(rq, x)) > 1.0 - 1e-9))
                throw std::invalid_argument("amplitude support leaves S_Q (checked on a finite r-grid)");
    }
}

}  // namespace

double levy_wedge_mass(const DickmanDistribution& dist, const LevyWedge& wedge) {
    if (!(wedge.t > 0.0)) throw std::invalid_argument("wedge threshold t must be positive");
    check_supported_on_sq(dist);
    double nu_d;
    if (!wedge.directions.empty()) {
        nu_d = dist.nu.atom_set_mass(wedge.directions);
    } else {
        nu_d = dist.nu.cap_mass(wedge.cap_axis, wedge.cap_half_angle);
    }
    const double radial = wedge.t >= 1.0 ? 0.0 : -std::log(wedge.t);
    return nu_d * radial;
}

DickmanDistribution convolve(const DickmanDistribution& a, const DickmanDistribution& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in convolution");
    const Mat& a1 = a.Q.q;
    const Mat& a2 = b.Q.q;
    const double n1 = norm_entry_inf(a1);
    const double n2 = norm_entry_inf(a2);
    Mat diff = (1.0 / n1) * a1 - (1.0 / n2) * a2;
    if (norm_entry_inf(diff) > 1e-10)
        throw std::invalid_argument("closure not applicable: operators are not proportional");
    // write a.Q = Q / c1 with Q := a.Q (c1 = 1); then b.Q = Q / c2
    const double c1 = 1.0;
    const double c2 = n1 / n2;
    const Mat combined = (1.0 / (c1 + c2)) * a1;
    AmplitudeMeasure mixed = AmplitudeMeasure::mixture({c1 / (c1 + c2), c2 / (c1 + c2)}, {a.nu, b.nu});
    return DickmanDistribution(validate_mplus(combined), std::move(mixed));
}

DickmanDistribution reduce_to_scalar(const DickmanDistribution& dist) {
    const auto kind = dist.nu.kind();
    if (kind != MeasureKind::delta && kind != MeasureKind::atoms)
        throw std::invalid_argument("not eigenspace-supported: measure must be finitely supported");
    const SpectralDecomposition sd = spectral_decompose(dist.Q);
    if (sd.real_eigenspaces.empty())
        throw std::invalid_argument("not eigenspace-supported: no real eigenspaces");

    double theta_inv = 0.0;
    std::vector<Atom> reweighted;
    for (const auto& atom : dist.nu.atom_list()) {
        const Vec qw = mat_vec(dist.Q.q, atom.w);
        const double wn = norm2(atom.w);
        double a_k = 0.0;
        bool found = false;
        // eigenspaces are sorted ascending, so ties resolve to the smallest eigenvalue
        for (const auto& es : sd.real_eigenspaces) {
            Vec resid = qw;
            for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= es.value * atom.w[i];
            if (norm2(resid) <= 1e-10 * wn) {
                a_k = es.value;
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("not eigenspace-supported: atom outside every real eigenspace");
        theta_inv += atom.p / a_k;
        reweighted.push_back({atom.w, atom.p / a_k});
    }
    const double theta = 1.0 / theta_inv;
    for (auto& a : reweighted) a.p *= theta;

    Mat scalar_q(dist.dim());
    for (int i = 0; i < dist.dim(); ++i) scalar_q(i, i) = theta;
    return DickmanDistribution(validate_mplus(scalar_q), AmplitudeMeasure::atoms(std::move(reweighted)));
}

namespace {

double scalar_operator_value(const OperatorMatrix& q) {
    double trace = 0.0;
    for (int i = 0; i < q.dim; ++i) trace += q.q(i, i);
    const double v = trace / q.dim;
    Mat diff = q.q;
    for (int i = 0; i < q.dim; ++i) diff(i, i) -= v;
    if (norm_entry_inf(diff) > 1e-10 * std::max(1.0, norm_entry_inf(q.q)))
        throw std::invalid_argument("operator is not a positive multiple of the identity");
    return v;
}

}  // namespace

std::vector<UnivariateComponent> finite_atom_decomposition(const DickmanDistribution& dist) {
    const auto kind = dist.nu.kind();
    if (kind != MeasureKind::delta && kind != MeasureKind::atoms)
        throw std::invalid_argument("finite-atom decomposition needs a finitely supported measure");
    const double q = scalar_operator_value(dist.Q);
    const double theta = 1.0 / q;
    std::vector<UnivariateComponent> parts;
    for (const auto& a : dist.nu.atom_list()) parts.push_back({a.w, theta * a.p});
    return parts;
}

SampleBatch sample_by_decomposition(const DickmanDistribution& dist, int n, std::uint64_t seed,
                                    double eps, int n_max) {
    const auto parts = finite_atom_decomposition(dist);
    const int d = dist.dim();
    SampleBatch batch;
    batch.n = n;
    batch.d = d;
    batch.seed = seed;
    batch.eps = eps;
    batch.n_max = n_max;
    batch.data.assign(static_cast<std::size_t>(n) * d, 0.0);
    batch.term_counts.assign(static_cast<std::size_t>(n), 0);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        double* row = batch.row(i);
        for (const auto& part : parts) {
            const double x = gd_sample_one(part.theta, rng, eps, n_max);
            for (int k = 0; k < d; ++k) row[k] += part.direction[static_cast<std::size_t>(k)] * x;
        }
    }
    return batch;
}

std::vector<Vec> default_cf_grid(int d) {
    std::vector<Vec> grid;
    grid.emplace_back(static_cast<std::size_t>(d), 0.0);
    Rng rng(0xcf96f1d5eedULL);
    const double radii[3] = {0.5, 1.5, 3.0};
    for (int i = 0; i < 24; ++i) {
        Vec v(static_cast<std::size_t>(d));
        double nrm = 0.0;
        do {
            for (double& x : v) x = rng.gaussian();
            nrm = norm2(v);
        } while (nrm == 0.0);
        const double r = radii[i % 3];
        for (double& x : v) x *= r / nrm;
        grid.push_back(std::move(v));
    }
    return grid;
}

CFGrid analytic_cf(const DickmanDistribution& dist, const std::vector<Vec>& grid, double tol) {
    CFGrid out;
    out.method = CFGrid::Method::analytic;
    out.points = grid;
    out.values.reserve(grid.size());
    for (const auto& z : grid) out.values.push_back(std::exp(log_cf(dist, z, tol)));
    return out;
}

namespace {

// (weight, point) nodes approximating integration against nu
std::vector<std::pair<double, Vec>> measure_nodes(const AmplitudeMeasure& nu) {
    switch (nu.kind()) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            std::vector<std::pair<double, Vec>> nodes;
            for (const auto& a : nu.atom_list()) nodes.push_back({a.p, a.w});
            return nodes;
        }
        case MeasureKind::von_mises: {
            // periodic trapezoid: spectrally accurate for smooth densities
            const int m = 512;
            std::vector<std::pair<double, Vec>> nodes;
            for (int i = 0; i < m; ++i) {
                const double t = kTwoPi * i / m;
                const double w = von_mises_density(nu.vm_kappa(), nu.vm_mu(), t) * kTwoPi / m;
                nodes.push_back({w, Vec{std::cos(t), std::sin(t)}});
            }
            return nodes;
        }
        case MeasureKind::exp_radial: {
            // substitute x = -log(v)/rate: integral against e^{-rate x} dx
            const int m = 2048;
            std::vector<std::pair<double, Vec>> nodes;
            for (int i = 0; i < m; ++i) {
                const double v = (i + 0.5) / m;
                nodes.push_back({1.0 / m, Vec{-std::log(v) / nu.exp_rate()}});
            }
            return nodes;
        }
        case MeasureKind::uniform_sphere: {
            if (nu.dim() == 1) return {{0.5, Vec{1.0}}, {0.5, Vec{-1.0}}};
            if (nu.dim() == 2) {
                const int m = 512;
                std::vector<std::pair<double, Vec>> nodes;
                for (int i = 0; i < m; ++i) {
                    const double t = kTwoPi * i / m;
                    nodes.push_back({1.0 / m, Vec{std::cos(t), std::sin(t)}});
                }
                return nodes;
            }
            // quasi-random fallback for d >= 3 diagnostics
            const int m = 8192;
            std::vector<std::pair<double, Vec>> nodes;
            Rng rng(0xd21f70de5ULL);
            AmplitudeMeasure probe = nu;
            for (int i = 0; i < m; ++i) nodes.push_back({1.0 / m, probe.sample(rng)});
            return nodes;
        }
        case MeasureKind::mixture: {
            std::vector<std::pair<double, Vec>> nodes;
            for (std::size_t i = 0; i < nu.mix_parts().size(); ++i)
                for (auto& [w, p] : measure_nodes(nu.mix_parts()[i]))
                    nodes.push_back({w * nu.mix_weights()[i], std::move(p)});
            return nodes;
        }
    }
    return {};
}

}  // namespace

Vec levy_drift(const DickmanDistribution& dist, double tol) {
    const int d = dist.dim();
    Vec a(static_cast<std::size_t>(d), 0.0);
    if (dist.nu.kind() == MeasureKind::uniform_sphere) return a;  // odd symmetry
    const auto nodes = measure_nodes(dist.nu);
    const double horizon = std::log(std::max(2.0, dist.Q.scale_c1 *
                                                      (1.0 + dist.nu.abs_moment_bound()) / tol)) /
                           dist.Q.growth_bound_K;
    for (const auto& [w, x] : nodes) {
        for (int i = 0; i < d; ++i) {
            auto f = [&](double t) {
                const Vec v = mat_vec(mat_exp(-t * dist.Q.q), x);
                return norm2(v) <= 1.0 ? v[static_cast<std::size_t>(i)] : 0.0;
            };
            a[static_cast<std::size_t>(i)] +=
                w * integrate_adaptive<double>(f, 0.0, horizon, tol / std::max<std::size_t>(nodes.size(), 1)).value;
        }
    }
    return a;
}

}  // namespace opdickman
