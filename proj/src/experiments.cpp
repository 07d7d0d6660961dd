#include "opdickman/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "opdickman/special.hpp"
#include "opdickman/univariate.hpp"

namespace opdickman {

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> v;
    std::size_t p = 0;
    while (p <= s.size() && !s.empty()) {
        const std::size_t comma = std::min(s.find(',', p), s.size());
        const std::string tok = s.substr(p, comma - p);
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            throw std::invalid_argument("bad numeric list entry: '" + tok + "'");
        v.push_back(x);
        if (comma == s.size()) break;
        p = comma + 1;
    }
    return v;
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> v;
    for (double x : split_doubles(s)) v.push_back(static_cast<int>(std::lround(x)));
    return v;
}

std::uint64_t sub_seed(std::uint64_t base, std::uint64_t salt) {
    return base ^ (0x9e3779b97f4a7c15ULL * (salt + 2));
}

}  // namespace

std::string ExperimentConfig::format() const {
    std::string s;
    s += "experiment=" + experiment + "\n";
    s += "q=" + q_spec + "\n";
    s += "nu=" + nu_spec + "\n";
    s += "dim=" + std::to_string(dim) + "\n";
    s += "n=" + std::to_string(n) + "\n";
    s += "seed=" + std::to_string(seed) + "\n";
    s += "eps=" + format_double(eps) + "\n";
    s += "nmax=" + std::to_string(n_max) + "\n";
    s += "alpha=" + format_double(alpha) + "\n";
    s += "eps_schedule=" + join_doubles(eps_schedule) + "\n";
    s += "n_list=" + join_ints(n_list) + "\n";
    s += "k_list=" + join_ints(k_list) + "\n";
    s += "m_samples=" + std::to_string(m_samples) + "\n";
    s += "out=" + out + "\n";
    return s;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "experiment") c.experiment = val;
        else if (key == "q") c.q_spec = val;
        else if (key == "nu") c.nu_spec = val;
        else if (key == "dim") c.dim = std::atoi(val.c_str());
        else if (key == "n") c.n = std::atoi(val.c_str());
        else if (key == "seed") c.seed = std::strtoull(val.c_str(), nullptr, 10);
        else if (key == "eps") c.eps = std::strtod(val.c_str(), nullptr);
        else if (key == "nmax") c.n_max = std::atoi(val.c_str());
        else if (key == "alpha") c.alpha = std::strtod(val.c_str(), nullptr);
        else if (key == "eps_schedule") c.eps_schedule = split_doubles(val);
        else if (key == "n_list") c.n_list = split_ints(val);
        else if (key == "k_list") c.k_list = split_ints(val);
        else if (key == "m_samples") c.m_samples = std::atoi(val.c_str());
        else if (key == "out") c.out = val;
        else throw std::invalid_argument("unknown config key: '" + key + "'");
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

DickmanDistribution make_distribution(const ExperimentConfig& c) {
    Mat q;
    try {
        q = parse_matrix(c.q_spec);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("field q: ") + e.what());
    }
    OperatorMatrix op = validate_mplus(q);
    AmplitudeMeasure nu = [&] {
        try {
            return parse_measure_spec(c.nu_spec, c.dim > 0 ? c.dim : op.dim);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("field nu: ") + e.what());
        }
    }();
    if (c.dim > 0 && c.dim != op.dim) throw std::invalid_argument("field dim: does not match q");
    return DickmanDistribution(std::move(op), std::move(nu));
}

void write_batch_csv(const SampleBatch& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write to '" + path + "'");
    for (int k = 0; k < b.d; ++k) out << (k ? "," : "") << "x" << (k + 1);
    out << "\n";
    for (int i = 0; i < b.n; ++i) {
        const double* row = b.row(i);
        for (int k = 0; k < b.d; ++k) {
            if (k) out << ',';
            out << format_double(row[k]);
        }
        out << "\n";
    }
    if (!out) throw std::invalid_argument("write failed for '" + path + "'");
}

void cmd_sample(const ExperimentConfig& c) {
    const DickmanDistribution dist = make_distribution(c);
    const SampleBatch batch = sample(dist, c.n, c.seed, c.eps, c.n_max);
    if (c.out.empty()) throw std::invalid_argument("field out: sample needs an output path");
    write_batch_csv(batch, c.out);
    double mean_terms = 0.0;
    std::uint32_t max_terms = 0;
    for (auto t : batch.term_counts) {
        mean_terms += t;
        max_terms = std::max(max_terms, t);
    }
    if (batch.n > 0) mean_terms /= batch.n;
    std::fprintf(stderr, "sampled n=%d d=%d seed=%llu mean_terms=%.2f max_terms=%u cap_hits=%d\n",
                 batch.n, batch.d, static_cast<unsigned long long>(batch.seed), mean_terms, max_terms,
                 batch.cap_hits);
    if (batch.cap_hits > 0)
        std::fprintf(stderr, "warning: %d samples hit the n_max=%d term cap\n", batch.cap_hits, c.n_max);
}

namespace {

Vec batch_col_mean(const SampleBatch& b) {
    Vec m(static_cast<std::size_t>(b.d), 0.0);
    for (int i = 0; i < b.n; ++i) {
        const double* row = b.row(i);
        for (int k = 0; k < b.d; ++k) m[static_cast<std::size_t>(k)] += row[k];
    }
    for (double& v : m) v /= b.n;
    return m;
}

SampleBatch fixed_point_image(const DickmanDistribution& dist, const SampleBatch& x, std::uint64_t seed) {
    SampleBatch y = x;
    y.seed = seed;
    Rng rng(seed);
    for (int i = 0; i < x.n; ++i) {
        const double u = rng.uniform01();
        const Vec w = dist.nu.sample(rng);
        Vec v = x.row_vec(i);
        for (int k = 0; k < x.d; ++k) v[static_cast<std::size_t>(k)] += w[static_cast<std::size_t>(k)];
        const Vec img = mat_vec(matrix_power(dist.Q, u), v);
        double* row = y.row(i);
        for (int k = 0; k < x.d; ++k) row[k] = img[static_cast<std::size_t>(k)];
    }
    return y;
}

void push_report(std::string* log, const TestReport& rep) {
    if (log) *log += rep.to_json_line() + "\n";
}

}  // namespace

std::vector<CheckResult> verify_distribution(const ExperimentConfig& c, std::string* log) {
    const DickmanDistribution dist = make_distribution(c);
    const int d = dist.dim();
    std::vector<CheckResult> results;
    const auto grid = default_cf_grid(d);

    // fixed point: X vs U^Q(X + W)
    {
        const SampleBatch x = sample(dist, c.n, c.seed, c.eps, c.n_max);
        const SampleBatch y = fixed_point_image(dist, x, sub_seed(c.seed, 1));
        TestReport rep = energy_test(x, y, 299, sub_seed(c.seed, 2));
        rep.name = "fixed_point";
        push_report(log, rep);
        results.push_back({"fixed_point", rep.p_value > 0.01, true,
                           "energy p=" + format_double(rep.p_value)});
    }
    // CF agreement at n = 1e5 (band 0.02 is pinned to that size)
    {
        const SampleBatch x = sample(dist, 100000, sub_seed(c.seed, 3), c.eps, c.n_max);
        const double dist_cf = cf_distance(empirical_cf(x, grid), analytic_cf(dist, grid));
        results.push_back({"cf_agreement", dist_cf <= 0.02, true, "sup distance " + format_double(dist_cf)});
    }
    // moments: 4 standard errors
    {
        const SampleBatch x = sample(dist, c.n, sub_seed(c.seed, 4), c.eps, c.n_max);
        const Vec mu_hat = batch_col_mean(x);
        const Vec mu = mean(dist);
        const Mat cov = covariance(dist);
        bool ok = true;
        std::string detail;
        for (int k = 0; k < d; ++k) {
            double var = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double dv = x.row(i)[k] - mu_hat[static_cast<std::size_t>(k)];
                var += dv * dv;
            }
            var /= (x.n - 1.0);
            const double se = std::sqrt(var / x.n);
            if (std::fabs(mu_hat[static_cast<std::size_t>(k)] - mu[static_cast<std::size_t>(k)]) > 4.0 * se) {
                ok = false;
                detail = "mean coordinate " + std::to_string(k + 1);
            }
        }
        for (int a = 0; a < d && ok; ++a)
            for (int b = a; b < d && ok; ++b) {
                double s = 0.0, s2 = 0.0;
                for (int i = 0; i < x.n; ++i) {
                    const double z = (x.row(i)[a] - mu_hat[static_cast<std::size_t>(a)]) *
                                     (x.row(i)[b] - mu_hat[static_cast<std::size_t>(b)]);
                    s += z;
                    s2 += z * z;
                }
                const double m1 = s / x.n;
                const double se = std::sqrt(std::max(0.0, s2 / x.n - m1 * m1) / x.n);
                if (std::fabs(m1 - cov(a, b)) > 4.0 * se) {
                    ok = false;
                    detail = "covariance entry (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
                }
            }
        results.push_back({"moments", ok, true, ok ? "within 4 SE" : detail});
    }
    // selfdecomposability factorization
    {
        double worst = 0.0;
        for (double t : {0.1, 1.0, 10.0}) {
            for (const auto& z : grid) {
                const Vec shifted = mat_tvec(mat_exp(-t * dist.Q.q), z);
                const auto lhs = log_cf(dist, z);
                const auto rhs = log_cf(dist, shifted) + selfdecomp_factor_log_cf(dist, t, z);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        results.push_back({"selfdecomposability", worst < 2e-9, true, "max residual " + format_double(worst)});
    }
    // eigenspace reduction (when the measure is atomic on real eigenspaces)
    {
        CheckResult r{"reduction", true, true, ""};
        try {
            const DickmanDistribution reduced = reduce_to_scalar(dist);
            double worst = 0.0;
            for (const auto& z : grid) worst = std::max(worst, std::abs(log_cf(dist, z) - log_cf(reduced, z)));
            r.pass = worst < 2e-9;
            r.detail = "max log-cf gap " + format_double(worst);
        } catch (const std::invalid_argument&) {
            r.applicable = false;
            r.detail = "not applicable";
        }
        results.push_back(r);
    }
    // finite-atom decomposition sampler agreement
    {
        CheckResult r{"decomposition", true, true, ""};
        try {
            const SampleBatch a = sample(dist, c.n, sub_seed(c.seed, 5), c.eps, c.n_max);
            const SampleBatch b = sample_by_decomposition(dist, c.n, sub_seed(c.seed, 6), c.eps, c.n_max);
            TestReport rep = energy_test(a, b, 299, sub_seed(c.seed, 7));
            rep.name = "decomposition";
            push_report(log, rep);
            r.pass = rep.p_value > 0.01;
            r.detail = "energy p=" + format_double(rep.p_value);
        } catch (const std::invalid_argument&) {
            r.applicable = false;
            r.detail = "not applicable";
        }
        results.push_back(r);
    }
    // Gamma identification for d=1 exponential amplitudes
    {
        CheckResult r{"gamma_reduction", true, true, ""};
        if (d == 1 && dist.nu.kind() == MeasureKind::exp_radial) {
            const double theta = 1.0 / dist.Q.q(0, 0);
            const double rate = dist.nu.exp_rate();
            const SampleBatch x = sample(dist, c.n, sub_seed(c.seed, 8), c.eps, c.n_max);
            std::vector<double> xs(x.data.begin(), x.data.end());
            TestReport rep = ks_test_1d(xs, [theta, rate](double v) {
                return v <= 0.0 ? 0.0 : regularized_gamma_p(theta, rate * v);
            });
            rep.seed = sub_seed(c.seed, 8);
            push_report(log, rep);
            r.pass = rep.p_value > 0.01;
            r.detail = "KS p=" + format_double(rep.p_value);
        } else {
            r.applicable = false;
            r.detail = "not applicable";
        }
        results.push_back(r);
    }
    return results;
}

namespace {

// log survival increment phi(x) = lgamma(x+1-alpha) - lgamma(x+1);
// Stirling form above 1e8 where direct lgamma differences cancel.
double survival_phi(double x, double alpha) {
    if (x < 1e8) return log_gamma(x + 1.0 - alpha) - log_gamma(x + 1.0);
    const double xp = x + 1.0;
    return -alpha * std::log(xp) + (x + 0.5 - alpha) * std::log1p(-alpha / xp) + alpha +
           (1.0 / 12.0) * (1.0 / (xp - alpha) - 1.0 / xp);
}

}  // namespace

double record_epoch_next_success(double m, double alpha, Rng& rng) {
    const double v = rng.uniform01();
    const double target = std::log(v) + survival_phi(m, alpha);
    // smallest k > m with phi(k) < target; phi is strictly decreasing.
    // The continuous inverse is ~ m v^{-1/alpha}, which seeds the bracket.
    const double est = (m + 1.0) * std::pow(v, -1.0 / alpha);
    if (!(est < 1e300)) throw std::runtime_error("record-epoch index overflow");
    double lo = m, hi = std::max(m + 1.0, est);
    while (survival_phi(hi, alpha) >= target) {
        lo = hi;
        hi = std::max(hi * 2.0, hi + 1.0);
        if (hi > 1e300) throw std::runtime_error("record-epoch index overflow");
    }
    if (hi < 9e15) {
        // integer regime: exact inverse over the lattice. phi decreases, so
        // floor(lo) keeps phi >= target and ceil(hi) keeps phi < target.
        double lo_i = std::floor(lo);
        double hi_i = std::ceil(hi);
        while (hi_i - lo_i > 1.0) {
            const double mid = std::floor(0.5 * (lo_i + hi_i));
            if (survival_phi(mid, alpha) < target) hi_i = mid;
            else lo_i = mid;
        }
        return hi_i;
    }
    while ((hi - lo) > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (survival_phi(mid, alpha) < target) hi = mid;
        else lo = mid;
    }
    return hi;
}

std::vector<RecordEpochRow> experiment_record_epochs(const ExperimentConfig& c) {
    if (!(c.alpha > 0.0) || !(c.alpha < 1.0))
        throw std::invalid_argument("field alpha: must lie in (0,1)");
    const DickmanDistribution dist = make_distribution(c);
    if (!spectral_decompose(dist.Q).diagonalizable)
        throw std::invalid_argument("field q: record-epochs requires a real-diagonalizable operator");

    std::vector<int> ns = c.n_list;
    std::sort(ns.begin(), ns.end());
    const int d = dist.dim();
    const int m = c.m_samples;

    // one chain and one W-stream per sample, shared across every n (the
    // statistics for growing n are coupled, which keeps the distance
    // sequence monotone up to noise)
    std::vector<SampleBatch> stats(ns.size());
    for (std::size_t q = 0; q < ns.size(); ++q) {
        stats[q].n = m;
        stats[q].d = d;
        stats[q].seed = c.seed;
        stats[q].eps = c.eps;
        stats[q].n_max = c.n_max;
        stats[q].data.assign(static_cast<std::size_t>(m) * d, 0.0);
        stats[q].term_counts.assign(static_cast<std::size_t>(m), 0);
    }

    for (int i = 0; i < m; ++i) {
        Rng rng = Rng::for_worker(c.seed, static_cast<std::uint64_t>(i));
        std::vector<double> chain;  // chain[j] = L(j+1)
        std::vector<Vec> ws;
        auto level = [&](int j) {  // L(j), j >= 1
            while (static_cast<int>(chain.size()) < j) {
                const double prev = chain.empty() ? 0.0 : chain.back();
                chain.push_back(record_epoch_next_success(prev, c.alpha, rng));
            }
            return chain[static_cast<std::size_t>(j - 1)];
        };
        auto amplitude = [&](int k) -> const Vec& {  // W_k, k >= 1
            while (static_cast<int>(ws.size()) < k) ws.push_back(dist.nu.sample(rng));
            return ws[static_cast<std::size_t>(k - 1)];
        };
        for (std::size_t q = 0; q < ns.size(); ++q) {
            const int n = ns[q];
            const double ln = level(n);
            Vec x(static_cast<std::size_t>(d), 0.0);
            int terms = 0;
            for (int k = 1; k <= c.n_max; ++k) {
                const double ratio = ln / level(n + k);
                const Mat mk = matrix_power(dist.Q, ratio);
                const Vec mw = mat_vec(mk, amplitude(k));
                for (int t = 0; t < d; ++t) x[static_cast<std::size_t>(t)] += mw[static_cast<std::size_t>(t)];
                ++terms;
                if (norm_entry_inf(mk) < c.eps) break;
            }
            stats[q].term_counts[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(terms);
            double* row = stats[q].row(i);
            for (int t = 0; t < d; ++t) row[t] = x[static_cast<std::size_t>(t)];
        }
    }

    // consecutive epoch ratios L(n)/L(n+1) converge to U^{1/alpha} when
    // p_k = alpha/k, so the statistic targets D(Q/alpha, nu)
    const OperatorMatrix limit_op = validate_mplus((1.0 / c.alpha) * dist.Q.q);
    const DickmanDistribution limit(limit_op, dist.nu);
    const SampleBatch reference = sample(limit, m, sub_seed(c.seed, 100), c.eps, c.n_max);
    std::vector<RecordEpochRow> rows;
    for (std::size_t q = 0; q < ns.size(); ++q) {
        const TestReport rep = energy_test(stats[q], reference, 299, sub_seed(c.seed, 200 + q));
        rows.push_back({ns[q], rep.statistic, rep.p_value});
    }
    if (!c.out.empty()) {
        std::ofstream out(c.out);
        if (!out) throw std::invalid_argument("cannot write to '" + c.out + "'");
        out << "n,energy_distance,p_value\n";
        for (const auto& r : rows)
            out << r.n << ',' << format_double(r.energy) << ',' << format_double(r.p_value) << "\n";
    }
    return rows;
}

namespace {

bool is_sphere_measure(const AmplitudeMeasure& nu) {
    switch (nu.kind()) {
        case MeasureKind::uniform_sphere:
        case MeasureKind::von_mises:
            return true;
        case MeasureKind::delta:
        case MeasureKind::atoms:
            for (const auto& a : nu.atom_list())
                if (std::fabs(norm2(a.w) - 1.0) > 1e-9) return false;
            return true;
        case MeasureKind::exp_radial:
            return false;
        case MeasureKind::mixture:
            for (const auto& part : nu.mix_parts())
                if (!is_sphere_measure(part)) return false;
            return true;
    }
    return false;
}

}  // namespace

std::vector<SmallJumpRow> experiment_small_jumps(const ExperimentConfig& c) {
    const DickmanDistribution limit = make_distribution(c);
    for (double e : c.eps_schedule)
        if (!(e > 0.0)) throw std::invalid_argument("field eps_schedule: entries must be positive");
    if (!is_sphere_measure(limit.nu))
        throw std::invalid_argument("field nu: small-jumps needs a sphere-supported direction measure");
    const int d = limit.dim();
    const auto grid = default_cf_grid(d);
    const CFGrid analytic = analytic_cf(limit, grid);

    const double wedge_t = std::exp(-1.0);
    Vec axis(static_cast<std::size_t>(d), 0.0);
    axis[0] = 1.0;
    const double sigma_cap = limit.nu.cap_mass(axis, 0.5 * kPi);
    const double wedge_limit = -std::log(wedge_t) * sigma_cap;

    std::vector<SmallJumpRow> rows;
    for (double eps_jump : c.eps_schedule) {
        SampleBatch batch;
        batch.n = c.n;
        batch.d = d;
        batch.seed = c.seed;
        batch.eps = c.eps;
        batch.n_max = c.n_max;
        batch.data.assign(static_cast<std::size_t>(c.n) * d, 0.0);
        batch.term_counts.assign(static_cast<std::size_t>(c.n), 0);

        // the generator stream per sample is identical for every eps_jump:
        // acceptance sets are nested as eps decreases, so the sampled laws
        // are coupled monotonically along the schedule
        std::int64_t proposed = 0, accepted = 0;
        double wedge_count = 0.0;
        for (int i = 0; i < c.n; ++i) {
            Rng rng = Rng::for_worker(c.seed, static_cast<std::uint64_t>(i));
            Vec x(static_cast<std::size_t>(d), 0.0);
            double t = 0.0;
            int terms = 0;
            for (;;) {
                t += -std::log(rng.uniform01());  // unit-rate Poisson arrival gap
                const double r = std::exp(-t);
                if (r < c.eps) break;
                const Vec w = limit.nu.sample(rng);
                const double u_acc = rng.uniform01();
                ++proposed;
                if (u_acc <= std::exp(-eps_jump * r)) {
                    const Vec jump = mat_vec(matrix_power(limit.Q, r), w);
                    for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] += jump[static_cast<std::size_t>(k)];
                    ++accepted;
                    ++terms;
                    if (r > wedge_t && dot(w, axis) >= -1e-12) wedge_count += 1.0;
                }
            }
            batch.term_counts[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(terms);
            double* row = batch.row(i);
            for (int k = 0; k < d; ++k) row[k] = x[static_cast<std::size_t>(k)];
        }
        const double dist_cf = cf_distance(empirical_cf(batch, grid), analytic);
        const double rate = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
        const double wedge_err = std::fabs(wedge_count / c.n - wedge_limit);
        rows.push_back({eps_jump, dist_cf, rate, wedge_err});
    }
    if (!c.out.empty()) {
        std::ofstream out(c.out);
        if (!out) throw std::invalid_argument("cannot write to '" + c.out + "'");
        out << "eps,cf_distance,accept_rate,wedge_abs_err\n";
        for (const auto& r : rows)
            out << format_double(r.eps) << ',' << format_double(r.cf_dist) << ','
                << format_double(r.accept_rate) << ',' << format_double(r.wedge_abs_err) << "\n";
    }
    return rows;
}

std::vector<ConvolutionRow> run_countable_convolution(
    const OperatorMatrix& q, const std::function<AmplitudeMeasure(int)>& nu_k,
    const std::vector<int>& k_list, int m_samples, std::uint64_t seed, double eps, int n_max,
    const std::string& out_csv, const std::function<double(int)>& c_k) {
    std::vector<int> ks = k_list;
    std::sort(ks.begin(), ks.end());
    const int k_big = ks.back();
    const int d = q.dim;

    // mixture limit truncated where the weight tail is negligible
    const int k_trunc = std::max(k_big, 30);
    std::vector<double> weights;
    std::vector<AmplitudeMeasure> parts;
    double ratio_worst = 0.0;
    for (int k = 1; k <= k_trunc; ++k) {
        const double ck = c_k(k);
        if (!(ck > 0.0)) throw std::invalid_argument("amplitude schedule must be positive");
        if (k > 1) ratio_worst = std::max(ratio_worst, ck / weights.back());
        weights.push_back(ck);
        parts.push_back(nu_k(k));
    }
    if (ratio_worst >= 1.0 - 1e-9)
        throw std::invalid_argument("amplitude schedule does not converge over the provided range");
    // c = sum over all k, with the unseen tail bounded by the worst ratio
    const double partial = [&weights] {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }();
    const double c_total = partial + weights.back() * ratio_worst / (1.0 - ratio_worst);
    const DickmanDistribution limit(validate_mplus((1.0 / c_total) * q.q),
                                    AmplitudeMeasure::mixture(weights, parts));
    const SampleBatch reference = sample(limit, m_samples, sub_seed(seed, 777), eps, n_max);

    SampleBatch running;
    running.n = m_samples;
    running.d = d;
    running.seed = seed;
    running.eps = eps;
    running.n_max = n_max;
    running.data.assign(static_cast<std::size_t>(m_samples) * d, 0.0);
    running.term_counts.assign(static_cast<std::size_t>(m_samples), 0);

    std::vector<ConvolutionRow> rows;
    std::size_t next_k = 0;
    for (int k = 1; k <= k_big; ++k) {
        const double ck = c_k(k);
        const OperatorMatrix op_k = validate_mplus((1.0 / ck) * q.q);
        const DickmanDistribution dist_k(op_k, nu_k(k));
        const SampleBatch part = sample(dist_k, m_samples, sub_seed(seed, static_cast<std::uint64_t>(k)), eps, n_max);
        for (std::size_t i = 0; i < running.data.size(); ++i) running.data[i] += part.data[i];
        while (next_k < ks.size() && ks[next_k] == k) {
            const TestReport rep = energy_test(running, reference, 299, sub_seed(seed, 500 + static_cast<std::uint64_t>(k)));
            rows.push_back({k, rep.statistic, rep.p_value});
            ++next_k;
        }
    }
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw std::invalid_argument("cannot write to '" + out_csv + "'");
        out << "K,energy_distance,p_value\n";
        for (const auto& r : rows)
            out << r.k << ',' << format_double(r.energy) << ',' << format_double(r.p_value) << "\n";
    }
    return rows;
}

std::vector<ConvolutionRow> experiment_countable_convolution(const ExperimentConfig& c) {
    const DickmanDistribution base = make_distribution(c);
    const AmplitudeMeasure nu = base.nu;
    return run_countable_convolution(
        base.Q, [&nu](int) { return nu; }, c.k_list, c.m_samples, c.seed, c.eps, c.n_max, c.out);
}

std::vector<std::string> experiment_figures(const ExperimentConfig& c) {
    const std::string prefix = c.out.empty() ? std::string(".") : c.out;
    std::error_code ec;
    std::filesystem::create_directories(prefix, ec);  // best effort; writes report failures
    std::vector<std::string> written;
    const int n_points = 500;

    const char* fig1_q[5] = {"1,0;0,1", "1,0;0,2", "1,-1;1,1", "1,1;0,1", "0.5,0;0,0.5"};
    for (int i = 0; i < 5; ++i) {
        const DickmanDistribution dist(validate_mplus(parse_matrix(fig1_q[i])), AmplitudeMeasure::uniform_sphere(2));
        const SampleBatch b = sample(dist, n_points, sub_seed(c.seed, 10 + static_cast<std::uint64_t>(i)), c.eps, c.n_max);
        const std::string path = prefix + "/fig1_q" + std::to_string(i + 1) + ".csv";
        write_batch_csv(b, path);
        written.push_back(path);
    }
    for (int dd : {3, 6, 9}) {
        Mat eye = Mat::identity(dd);
        const DickmanDistribution dist(validate_mplus(eye), AmplitudeMeasure::uniform_sphere(dd));
        const SampleBatch b = sample(dist, n_points, sub_seed(c.seed, 20 + static_cast<std::uint64_t>(dd)), c.eps, c.n_max);
        SampleBatch first_two;
        first_two.n = b.n;
        first_two.d = 2;
        first_two.seed = b.seed;
        first_two.eps = b.eps;
        first_two.n_max = b.n_max;
        first_two.data.resize(static_cast<std::size_t>(b.n) * 2);
        first_two.term_counts = b.term_counts;
        for (int i = 0; i < b.n; ++i) {
            first_two.row(i)[0] = b.row(i)[0];
            first_two.row(i)[1] = b.row(i)[1];
        }
        const std::string path = prefix + "/fig2_d" + std::to_string(dd) + ".csv";
        write_batch_csv(first_two, path);
        written.push_back(path);
    }
    const double fig3_params[3][2] = {{0.5, 2.0}, {2.0, 8.0}, {4.0, 0.5}};
    for (int i = 0; i < 3; ++i) {
        const DickmanDistribution dist(validate_mplus(Mat::identity(2)),
                                       AmplitudeMeasure::von_mises(fig3_params[i][0], fig3_params[i][1]));
        const SampleBatch b = sample(dist, n_points, sub_seed(c.seed, 30 + static_cast<std::uint64_t>(i)), c.eps, c.n_max);
        const std::string path = prefix + "/fig3_vm" + std::to_string(i + 1) + ".csv";
        write_batch_csv(b, path);
        written.push_back(path);
    }
    return written;
}

}  // namespace opdickman
