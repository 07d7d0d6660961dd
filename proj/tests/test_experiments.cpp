#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "opdickman/experiments.hpp"
#include "opdickman/special.hpp"
#include "opdickman/univariate.hpp"

using namespace opdickman;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("config format/parse round-trips exactly") {
    ExperimentConfig c;
    c.experiment = "small-jumps";
    c.q_spec = "1,0;0,2";
    c.nu_spec = "usphere";
    c.dim = 2;
    c.n = 555;
    c.seed = 987654321;
    c.eps = 1e-9;
    c.alpha = 0.25;
    c.eps_schedule = {2.0, 0.5, 0.001};
    c.n_list = {1, 7};
    c.k_list = {2, 4, 8};
    c.m_samples = 345;
    c.out = "/tmp/x.csv";
    const std::string text = c.format();
    const ExperimentConfig back = ExperimentConfig::parse(text);
    CHECK(back.format() == text);
    CHECK(back.q_spec == c.q_spec);
    CHECK(back.eps_schedule == c.eps_schedule);
    CHECK(back.seed == c.seed);
    CHECK_THROWS_AS(ExperimentConfig::parse("bogus_key=1\n"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::parse("line without equals\n"), std::invalid_argument);
}

TEST_CASE("make_distribution names the offending field") {
    ExperimentConfig c;
    c.q_spec = "not a matrix";
    try {
        make_distribution(c);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("field q") != std::string::npos);
    }
    c.q_spec = "1,0;0,2";
    c.nu_spec = "wat";
    try {
        make_distribution(c);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("field nu") != std::string::npos);
    }
    c.nu_spec = "usphere";
    c.dim = 3;  // does not match q
    CHECK_THROWS_AS(make_distribution(c), std::invalid_argument);
}

TEST_CASE("cmd_sample writes a reproducible CSV") {
    ExperimentConfig c;
    c.q_spec = "1";
    c.nu_spec = "delta:w=1";
    c.n = 200;
    c.seed = 5;
    c.out = "/tmp/opdickman_test_sample.csv";
    cmd_sample(c);
    const std::string first = slurp(c.out);
    cmd_sample(c);
    CHECK(slurp(c.out) == first);
    CHECK(first.rfind("x1\n", 0) == 0);
    int rows = 0;
    for (char ch : first)
        if (ch == '\n') ++rows;
    CHECK(rows == 201);
    std::remove(c.out.c_str());
    c.out = "/nonexistent_dir/file.csv";
    CHECK_THROWS_AS(cmd_sample(c), std::invalid_argument);
}

TEST_CASE("record-epoch increments follow the product law") {
    // P(m, k) = p_k prod_{j=m+1}^{k-1} (1 - p_j), p_j = alpha / j
    const double alpha = 0.5;
    const int m = 1;
    Rng rng(2026);
    const int reps = 50000;
    std::vector<double> counts(30, 0.0);
    for (int r = 0; r < reps; ++r) {
        const double k = record_epoch_next_success(m, alpha, rng);
        const int idx = static_cast<int>(k) - m - 1;
        counts[static_cast<std::size_t>(std::min(idx, 29))] += 1.0;
    }
    double stat = 0.0;
    int dof = -1;
    double tail_p = 1.0;
    for (int idx = 0; idx < 29; ++idx) {
        const int k = m + 1 + idx;
        double p = alpha / k;
        for (int j = m + 1; j < k; ++j) p *= 1.0 - alpha / j;
        tail_p -= p;
        const double expect = reps * p;
        if (expect > 5.0) {
            stat += (counts[static_cast<std::size_t>(idx)] - expect) * (counts[static_cast<std::size_t>(idx)] - expect) / expect;
            ++dof;
        }
    }
    const double expect_tail = reps * tail_p;
    if (expect_tail > 5.0) {
        stat += (counts[29] - expect_tail) * (counts[29] - expect_tail) / expect_tail;
        ++dof;
    }
    const double p = 1.0 - regularized_gamma_p(0.5 * dof, 0.5 * stat);
    CHECK(p > 0.01);
}

TEST_CASE("record-epoch jumps stay valid at huge indices") {
    // the jump tails are heavy (E[L(n+1)/L(n)] = inf for alpha < 1), so the
    // index grows like e^{n/alpha}; sixty jumps stay comfortably in range
    Rng rng(7);
    double m = 1e9;
    for (int i = 0; i < 60; ++i) {
        const double next = record_epoch_next_success(m, 0.3, rng);
        CHECK(next > m);
        CHECK(std::isfinite(next));
        m = next;
    }
    CHECK(m > 1e9);
}

TEST_CASE("record-epoch statistic converges to D(Q/alpha, nu)") {
    // ratio law: P(L(n)/L(n+1) <= x) -> x^alpha, i.e. U^{1/alpha}; the
    // rescaled perpetuity is GD_{alpha/q} in one dimension
    const double alpha = 0.5;
    const int m_samples = 2000;
    Rng chain_rng(42);
    std::vector<double> stat(static_cast<std::size_t>(m_samples));
    for (auto& target : stat) {
        std::vector<double> levels;
        double prev = 0.0;
        auto level = [&](int j) {
            while (static_cast<int>(levels.size()) < j) {
                prev = record_epoch_next_success(prev, alpha, chain_rng);
                levels.push_back(prev);
            }
            return levels[static_cast<std::size_t>(j - 1)];
        };
        double x = 0.0;
        const double ln = level(200);
        for (int k = 1; k <= 10000; ++k) {
            const double r = ln / level(200 + k);
            x += r;  // Q = [1]
            if (r < 1e-10) break;
        }
        target = x;
    }
    SampleBatch sb;
    sb.n = m_samples;
    sb.d = 1;
    sb.data = stat;
    sb.term_counts.assign(static_cast<std::size_t>(m_samples), 1);
    // Q/alpha = 2, i.e. GD_{1/2}
    auto ref_ok = gd_sample(0.5, m_samples, 778);
    auto ref_bad = gd_sample(1.0, m_samples, 777);
    SampleBatch b_ok, b_bad;
    b_ok.n = b_bad.n = m_samples;
    b_ok.d = b_bad.d = 1;
    b_ok.data = ref_ok;
    b_bad.data = ref_bad;
    b_ok.term_counts.assign(static_cast<std::size_t>(m_samples), 1);
    b_bad.term_counts.assign(static_cast<std::size_t>(m_samples), 1);
    CHECK(energy_test(sb, b_ok, 299, 9).p_value > 0.01);
    CHECK(energy_test(sb, b_bad, 299, 9).p_value < 0.01);
}

TEST_CASE("record-epochs experiment converges toward the Dickman law") {
    ExperimentConfig c;
    c.q_spec = "1";
    c.nu_spec = "delta:w=1";
    c.alpha = 0.5;
    c.n_list = {1, 200};
    c.m_samples = 1500;
    c.seed = 97;
    c.out = "/tmp/opdickman_test_re.csv";
    const auto rows = experiment_record_epochs(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 1);
    CHECK(rows[1].n == 200);
    CHECK(rows[1].energy < rows[0].energy);
    CHECK(rows[1].p_value > 0.01);
    const std::string csv = slurp(c.out);
    CHECK(csv.rfind("n,energy_distance,p_value\n", 0) == 0);
    std::remove(c.out.c_str());

    c.alpha = 1.5;
    CHECK_THROWS_AS(experiment_record_epochs(c), std::invalid_argument);
    c.alpha = 0.5;
    c.q_spec = "1,1;0,1";  // defective: not diagonalizable
    c.nu_spec = "usphere";
    c.dim = 2;
    CHECK_THROWS_AS(experiment_record_epochs(c), std::invalid_argument);
}

TEST_CASE("small-jumps experiment tightens as eps decreases") {
    ExperimentConfig c;
    c.q_spec = "1,0;0,1";
    c.nu_spec = "usphere";
    c.dim = 2;
    c.n = 20000;
    c.seed = 3;
    c.eps_schedule = {2.0, 0.001};
    c.out = "/tmp/opdickman_test_sj.csv";
    const auto rows = experiment_small_jumps(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].cf_dist < rows[0].cf_dist);
    CHECK(rows[1].cf_dist <= 0.03);
    CHECK(rows[1].accept_rate > 0.999);
    CHECK(rows[1].wedge_abs_err < 0.05);
    std::remove(c.out.c_str());
    c.eps_schedule = {0.0};
    CHECK_THROWS_AS(experiment_small_jumps(c), std::invalid_argument);
    c.eps_schedule = {1.0};
    c.q_spec = "1";
    c.nu_spec = "exp:rate=1";  // not a sphere measure
    c.dim = 0;
    CHECK_THROWS_AS(experiment_small_jumps(c), std::invalid_argument);
}

TEST_CASE("countable convolution: partial sums approach the limit law") {
    ExperimentConfig c;
    c.q_spec = "1";
    c.nu_spec = "delta:w=1";
    c.k_list = {1, 20};
    c.m_samples = 1500;
    c.seed = 41;
    const auto rows = experiment_countable_convolution(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].energy < rows[0].energy);
    CHECK(rows[1].p_value > 0.01);
}

TEST_CASE("countable convolution with alternating atoms") {
    // nu_k = delta at (-1)^k; the limit mixture is (2/3) delta_-1 + (1/3) delta_+1
    const auto q = validate_mplus(parse_matrix("1"));
    auto nu_k = [](int k) {
        return AmplitudeMeasure::delta({k % 2 == 1 ? -1.0 : 1.0});
    };
    const auto rows = run_countable_convolution(q, nu_k, {20}, 1500, 11, 1e-10, 10000, "");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].p_value > 0.01);
    // weight bookkeeping: sum of odd-index geometric weights is 2/3
    std::vector<double> w;
    std::vector<AmplitudeMeasure> parts;
    for (int k = 1; k <= 30; ++k) {
        w.push_back(std::ldexp(1.0, -k));
        parts.push_back(nu_k(k));
    }
    const auto mixed = AmplitudeMeasure::mixture(w, parts);
    REQUIRE(mixed.kind() == MeasureKind::atoms);
    double minus = 0.0, plus = 0.0;
    for (const auto& a : mixed.atom_list()) (a.w[0] < 0 ? minus : plus) += a.p;
    CHECK(minus == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(plus == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("countable convolution rejects non-summable schedules") {
    const auto q = validate_mplus(parse_matrix("1"));
    auto nu_k = [](int) { return AmplitudeMeasure::delta({1.0}); };
    // constant weights: ratio 1, the summability hypothesis fails
    CHECK_THROWS_AS(run_countable_convolution(q, nu_k, {5}, 100, 1, 1e-10, 10000, "",
                                              [](int) { return 0.1; }),
                    std::invalid_argument);
    // a different convergent schedule still works: c_k = 3^-k, c = 1/2
    const auto rows = run_countable_convolution(q, nu_k, {12}, 1200, 21, 1e-10, 10000, "",
                                                [](int k) { return std::pow(3.0, -k); });
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].p_value > 0.01);
}

TEST_CASE("figure CSVs are written with the expected shapes") {
    ExperimentConfig c;
    c.seed = 2024;
    c.out = "/tmp";
    const auto files = experiment_figures(c);
    REQUIRE(files.size() == 11);
    for (const auto& path : files) {
        const std::string text = slurp(path);
        int rows = 0;
        for (char ch : text)
            if (ch == '\n') ++rows;
        CHECK(rows == 501);  // header + 500 points
        if (path.find("fig2") != std::string::npos) CHECK(text.rfind("x1,x2\n", 0) == 0);
        std::remove(path.c_str());
    }
}

TEST_CASE("verify passes on the classical Dickman configuration") {
    ExperimentConfig c;
    c.q_spec = "1";
    c.nu_spec = "delta:w=1";
    c.n = 3000;
    c.seed = 6;
    std::string log;
    const auto results = verify_distribution(c, &log);
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.pass);
    }
    // one JSON line per permutation-backed check
    CHECK(log.find("\"name\":\"fixed_point\"") != std::string::npos);
    CHECK(log.find("\"name\":\"decomposition\"") != std::string::npos);
}

TEST_CASE("verify exercises reduction and Gamma checks when applicable") {
    ExperimentConfig c;
    c.q_spec = "1,0;0,2";
    c.nu_spec = "atoms:(1,0)@0.5;(0,1)@0.5";
    c.n = 3000;
    c.seed = 8;
    const auto results = verify_distribution(c);
    bool saw_reduction = false;
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.pass);
        if (r.name == "reduction") {
            saw_reduction = true;
            CHECK(r.applicable);
        }
    }
    CHECK(saw_reduction);

    ExperimentConfig g;
    g.q_spec = "0.5";
    g.nu_spec = "exp:rate=1";
    g.n = 3000;
    g.seed = 9;
    bool saw_gamma = false;
    for (const auto& r : verify_distribution(g)) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.pass);
        if (r.name == "gamma_reduction") {
            saw_gamma = true;
            CHECK(r.applicable);
        }
    }
    CHECK(saw_gamma);
}
