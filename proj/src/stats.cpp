#include "opdickman/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "opdickman/special.hpp"

namespace opdickman {

std::string TestReport::to_json_line() const {
    std::string s = "{\"name\":\"" + name + "\"";
    s += ",\"statistic\":" + format_double(statistic);
    s += ",\"p_value\":" + format_double(p_value);
    s += ",\"n_permutations\":" + std::to_string(n_permutations);
    s += ",\"seed\":" + std::to_string(seed);
    s += ",\"alpha\":" + format_double(alpha);
    s += std::string(",\"reject\":") + (reject ? "true" : "false") + "}";
    return s;
}

CFGrid empirical_cf(const SampleBatch& batch, const std::vector<Vec>& grid) {
    if (batch.n < 1) throw std::invalid_argument("empirical cf needs a non-empty batch");
    CFGrid out;
    out.method = CFGrid::Method::empirical;
    out.points = grid;
    out.values.reserve(grid.size());
    for (const auto& z : grid) {
        if (static_cast<int>(z.size()) != batch.d) throw std::invalid_argument("grid dimension mismatch");
        bool zero = true;
        for (double v : z)
            if (v != 0.0) { zero = false; break; }
        if (zero) {
            out.values.emplace_back(1.0, 0.0);
            continue;
        }
        double re = 0.0, im = 0.0;
        for (int i = 0; i < batch.n; ++i) {
            const double* row = batch.row(i);
            double phase = 0.0;
            for (int k = 0; k < batch.d; ++k) phase += z[static_cast<std::size_t>(k)] * row[k];
            re += std::cos(phase);
            im += std::sin(phase);
        }
        out.values.emplace_back(re / batch.n, im / batch.n);
    }
    return out;
}

double cf_distance(const CFGrid& a, const CFGrid& b) {
    if (a.points.size() != b.points.size()) throw std::invalid_argument("cf grids differ in size");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].size() != b.points[i].size()) throw std::invalid_argument("cf grids differ");
        for (std::size_t k = 0; k < a.points[i].size(); ++k)
            if (std::fabs(a.points[i][k] - b.points[i][k]) > 1e-12)
                throw std::invalid_argument("cf grids differ");
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    return worst;
}

namespace {

// sum_{i<j} (g_j - g_i) for an ascending sequence
double sorted_pair_sum(const std::vector<double>& g) {
    double s = 0.0;
    const double q = static_cast<double>(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) s += g[k] * (2.0 * (k + 1.0) - 1.0 - q);
    return s;
}

double energy_from_sums(double sx, double sy, double cross, double n, double m) {
    const double within_x = n > 1 ? 2.0 * sx / (n * (n - 1.0)) : 0.0;
    const double within_y = m > 1 ? 2.0 * sy / (m * (m - 1.0)) : 0.0;
    return 2.0 * cross / (n * m) - within_x - within_y;
}

struct PooledDistances {
    int n = 0, m = 0;                // group sizes after subsampling
    std::vector<double> condensed;   // upper triangle, d >= 2 only
    std::vector<double> sorted_pool; // 1-d only
    std::vector<int> sorted_label;   // 1-d only: 0 for x, 1 for y (observed labels)
    double total_pairs_sum = 0.0;

    int size() const { return n + m; }
    double at(int i, int j) const {  // i != j
        if (i > j) std::swap(i, j);
        const std::size_t nn = static_cast<std::size_t>(n + m);
        return condensed[static_cast<std::size_t>(i) * nn - static_cast<std::size_t>(i) * (i + 1) / 2 +
                         static_cast<std::size_t>(j - i - 1)];
    }
};

std::vector<int> subsample_indices(int n, int cap, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    if (n <= cap) return idx;
    for (int i = 0; i < cap; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(cap));
    return idx;
}

double row_distance(const SampleBatch& a, int i, const SampleBatch& b, int j) {
    const double* x = a.row(i);
    const double* y = b.row(j);
    double s = 0.0;
    for (int k = 0; k < a.d; ++k) {
        const double dk = x[k] - y[k];
        s += dk * dk;
    }
    return std::sqrt(s);
}

PooledDistances pool_batches(const SampleBatch& x, const SampleBatch& y, std::uint64_t seed) {
    PooledDistances p;
    if (x.d == 1) {
        p.n = x.n;
        p.m = y.n;
        std::vector<std::pair<double, int>> vals;
        vals.reserve(static_cast<std::size_t>(x.n + y.n));
        for (int i = 0; i < x.n; ++i) vals.push_back({x.data[static_cast<std::size_t>(i)], 0});
        for (int i = 0; i < y.n; ++i) vals.push_back({y.data[static_cast<std::size_t>(i)], 1});
        std::sort(vals.begin(), vals.end());
        p.sorted_pool.reserve(vals.size());
        p.sorted_label.reserve(vals.size());
        for (auto& [v, lab] : vals) {
            p.sorted_pool.push_back(v);
            p.sorted_label.push_back(lab);
        }
        p.total_pairs_sum = sorted_pair_sum(p.sorted_pool);
        return p;
    }
    constexpr int kCap = 2000;
    Rng rng(seed ^ 0x5ab5a4713e5ULL);
    const auto ix = subsample_indices(x.n, kCap, rng);
    const auto iy = subsample_indices(y.n, kCap, rng);
    p.n = static_cast<int>(ix.size());
    p.m = static_cast<int>(iy.size());
    const int nn = p.n + p.m;
    p.condensed.resize(static_cast<std::size_t>(nn) * (nn - 1) / 2);
    auto fetch = [&](int k) -> std::pair<const SampleBatch*, int> {
        if (k < p.n) return {&x, ix[static_cast<std::size_t>(k)]};
        return {&y, iy[static_cast<std::size_t>(k - p.n)]};
    };
    std::size_t pos = 0;
    for (int i = 0; i < nn; ++i) {
        const auto [bi, ri] = fetch(i);
        for (int j = i + 1; j < nn; ++j) {
            const auto [bj, rj] = fetch(j);
            const double dist = row_distance(*bi, ri, *bj, rj);
            p.condensed[pos++] = dist;
            p.total_pairs_sum += dist;
        }
    }
    return p;
}

// energy statistic for the labeling "labels[k] == 0 -> group X"
double stat_for_labels_1d(const PooledDistances& p, const std::vector<int>& labels) {
    std::vector<double> gx, gy;
    gx.reserve(static_cast<std::size_t>(p.n));
    gy.reserve(static_cast<std::size_t>(p.m));
    for (std::size_t k = 0; k < p.sorted_pool.size(); ++k)
        (labels[k] == 0 ? gx : gy).push_back(p.sorted_pool[k]);
    const double sx = sorted_pair_sum(gx);
    const double sy = sorted_pair_sum(gy);
    const double cross = p.total_pairs_sum - sx - sy;
    return energy_from_sums(sx, sy, cross, static_cast<double>(p.n), static_cast<double>(p.m));
}

double stat_for_members_nd(const PooledDistances& p, const std::vector<int>& members_x,
                           const std::vector<int>& members_y) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t a = 0; a < members_x.size(); ++a)
        for (std::size_t b = a + 1; b < members_x.size(); ++b)
            sx += p.at(members_x[a], members_x[b]);
    for (std::size_t a = 0; a < members_y.size(); ++a)
        for (std::size_t b = a + 1; b < members_y.size(); ++b)
            sy += p.at(members_y[a], members_y[b]);
    const double cross = p.total_pairs_sum - sx - sy;
    return energy_from_sums(sx, sy, cross, static_cast<double>(p.n), static_cast<double>(p.m));
}

}  // namespace

double energy_statistic(const SampleBatch& x, const SampleBatch& y) {
    if (x.n < 1 || y.n < 1) throw std::invalid_argument("energy statistic needs non-empty batches");
    if (x.d != y.d) throw std::invalid_argument("energy statistic needs equal dimensions");
    const PooledDistances p = pool_batches(x, y, 0);
    if (x.d == 1) return stat_for_labels_1d(p, p.sorted_label);
    std::vector<int> mx(static_cast<std::size_t>(p.n)), my(static_cast<std::size_t>(p.m));
    std::iota(mx.begin(), mx.end(), 0);
    std::iota(my.begin(), my.end(), p.n);
    return stat_for_members_nd(p, mx, my);
}

TestReport energy_test(const SampleBatch& x, const SampleBatch& y, int n_perm, std::uint64_t seed,
                       double alpha) {
    if (x.n < 2 || y.n < 2) throw std::invalid_argument("energy test needs at least two points per batch");
    if (x.d != y.d) throw std::invalid_argument("energy test needs equal dimensions");
    if (n_perm < 1) throw std::invalid_argument("need at least one permutation");

    const PooledDistances p = pool_batches(x, y, seed);
    const int nn = p.size();

    double observed;
    if (x.d == 1) {
        observed = stat_for_labels_1d(p, p.sorted_label);
    } else {
        std::vector<int> mx(static_cast<std::size_t>(p.n)), my(static_cast<std::size_t>(p.m));
        std::iota(mx.begin(), mx.end(), 0);
        std::iota(my.begin(), my.end(), p.n);
        observed = stat_for_members_nd(p, mx, my);
    }

    std::atomic<int> exceed{0};
    std::atomic<int> next{0};
    auto run_perms = [&]() {
        std::vector<int> idx(static_cast<std::size_t>(nn));
        for (;;) {
            const int perm = next.fetch_add(1);
            if (perm >= n_perm) return;
            Rng rng = Rng::for_worker(seed, static_cast<std::uint64_t>(perm) + 1);
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = nn - 1; i > 0; --i) {
                const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
                std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            }
            double stat;
            if (x.d == 1) {
                std::vector<int> labels(static_cast<std::size_t>(nn), 1);
                for (int k = 0; k < p.n; ++k) labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 0;
                stat = stat_for_labels_1d(p, labels);
            } else {
                std::vector<int> mx(idx.begin(), idx.begin() + p.n);
                std::vector<int> my(idx.begin() + p.n, idx.end());
                std::sort(mx.begin(), mx.end());
                std::sort(my.begin(), my.end());
                stat = stat_for_members_nd(p, mx, my);
            }
            if (stat >= observed - 1e-12) exceed.fetch_add(1);
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, 4));
    if (n_threads <= 1 || n_perm < 32) {
        run_perms();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(run_perms);
        for (auto& t : pool) t.join();
    }

    TestReport rep;
    rep.name = "energy_two_sample";
    rep.statistic = observed;
    rep.n_permutations = n_perm;
    rep.seed = seed;
    rep.alpha = alpha;
    rep.p_value = (1.0 + exceed.load()) / (n_perm + 1.0);
    rep.reject = rep.p_value <= alpha;
    return rep;
}

TestReport ks_test_1d(const std::vector<double>& samples, const std::function<double(double)>& cdf,
                      double alpha) {
    if (samples.empty()) throw std::invalid_argument("KS test needs samples");
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max(d, std::fabs((i + 1.0) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    TestReport rep;
    rep.name = "ks_one_sample";
    rep.statistic = d;
    rep.alpha = alpha;
    const double sq = std::sqrt(n);
    rep.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    rep.reject = rep.p_value <= alpha;
    return rep;
}

TestReport chi2_histogram_test(const std::vector<double>& samples,
                               const std::function<double(double)>& cdf, double lo, double hi,
                               int bins, double alpha) {
    if (samples.empty() || bins < 2) throw std::invalid_argument("bad chi-square inputs");
    const double n = static_cast<double>(samples.size());
    const double width = (hi - lo) / bins;
    std::vector<double> observed(static_cast<std::size_t>(bins) + 2, 0.0);
    for (double v : samples) {
        int k;
        if (v < lo) k = 0;
        else if (v >= hi) k = bins + 1;
        else k = 1 + static_cast<int>((v - lo) / width);
        observed[static_cast<std::size_t>(std::min(k, bins + 1))] += 1.0;
    }
    std::vector<double> expected(static_cast<std::size_t>(bins) + 2, 0.0);
    expected[0] = n * cdf(lo);
    for (int k = 0; k < bins; ++k)
        expected[static_cast<std::size_t>(k) + 1] = n * (cdf(lo + (k + 1) * width) - cdf(lo + k * width));
    expected.back() = n * (1.0 - cdf(hi));

    // merge low-expectation bins leftwards
    std::vector<std::pair<double, double>> merged;  // (obs, exp)
    for (std::size_t k = 0; k < observed.size(); ++k) {
        if (!merged.empty() && (expected[k] < 5.0 || merged.back().second < 5.0)) {
            merged.back().first += observed[k];
            merged.back().second += expected[k];
        } else {
            merged.push_back({observed[k], expected[k]});
        }
    }
    while (merged.size() > 1 && merged.back().second < 5.0) {
        merged[merged.size() - 2].first += merged.back().first;
        merged[merged.size() - 2].second += merged.back().second;
        merged.pop_back();
    }

    double stat = 0.0;
    for (const auto& [obs, exp] : merged)
        if (exp > 0.0) stat += (obs - exp) * (obs - exp) / exp;
    const int dof = static_cast<int>(merged.size()) - 1;

    TestReport rep;
    rep.name = "chi2_histogram";
    rep.statistic = stat;
    rep.alpha = alpha;
    rep.p_value = dof > 0 ? 1.0 - regularized_gamma_p(0.5 * dof, 0.5 * stat) : 1.0;
    rep.reject = rep.p_value <= alpha;
    return rep;
}

}  // namespace opdickman
