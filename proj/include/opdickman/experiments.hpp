#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "opdickman/dickman.hpp"
#include "opdickman/stats.hpp"

namespace opdickman {

// Flat key=value configuration shared by the CLI and the experiment
// drivers; format() and parse() round-trip exactly.
struct ExperimentConfig {
    std::string experiment;  // record-epochs | small-jumps | convolution | figures
    std::string q_spec = "1";
    std::string nu_spec = "delta:w=1";
    int dim = 0;  // 0 = inferred from the specs
    int n = 1000;
    std::uint64_t seed = 1;
    double eps = 1e-10;
    int n_max = 10000;
    double alpha = 0.5;
    std::vector<double> eps_schedule = {2.0, 1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001};
    std::vector<int> n_list = {1, 5, 25, 200};
    std::vector<int> k_list = {1, 5, 20};
    int m_samples = 1000;
    std::string out;

    std::string format() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

DickmanDistribution make_distribution(const ExperimentConfig& c);

// `sample` subcommand: CSV with header x1,...,xd; truncation diagnostics
// go to stderr.
void cmd_sample(const ExperimentConfig& c);
void write_batch_csv(const SampleBatch& b, const std::string& path);

struct CheckResult {
    std::string name;
    bool pass = false;
    bool applicable = true;
    std::string detail;
};

// `verify` subcommand: fixed-point, CF, moment, selfdecomposability,
// reduction, decomposition and Gamma checks for the configured
// distribution. JSON report lines are appended to *log when given.
std::vector<CheckResult> verify_distribution(const ExperimentConfig& c, std::string* log = nullptr);

// Next success index of the thinned Bernoulli sequence with p_k = alpha/k,
// given the previous success at m: inverse-cdf sampling through the
// survival product prod_{j=m+1}^k (1 - alpha/j). Exact for every scale of
// m (log-gamma form below 1e8, Stirling asymptotics above).
double record_epoch_next_success(double m, double alpha, Rng& rng);

struct RecordEpochRow {
    int n = 0;
    double energy = 0.0;
    double p_value = 0.0;
};
std::vector<RecordEpochRow> experiment_record_epochs(const ExperimentConfig& c);

struct SmallJumpRow {
    double eps = 0.0;
    double cf_dist = 0.0;
    double accept_rate = 0.0;
    double wedge_abs_err = 0.0;
};
std::vector<SmallJumpRow> experiment_small_jumps(const ExperimentConfig& c);

struct ConvolutionRow {
    int k = 0;
    double energy = 0.0;
    double p_value = 0.0;
};
std::vector<ConvolutionRow> experiment_countable_convolution(const ExperimentConfig& c);
// generator-driven variant used by tests (nu_k and c_k may vary with k);
// the default schedule is geometric, c_k = 2^-k. Schedules whose observed
// ratios do not stay below 1 are rejected (the summability hypothesis
// cannot hold).
std::vector<ConvolutionRow> run_countable_convolution(
    const OperatorMatrix& q, const std::function<AmplitudeMeasure(int)>& nu_k,
    const std::vector<int>& k_list, int m_samples, std::uint64_t seed, double eps, int n_max,
    const std::string& out_csv,
    const std::function<double(int)>& c_k = [](int k) { return std::ldexp(1.0, -k); });

// Figure CSVs (fig1_*.csv, fig2_*.csv, fig3_*.csv) under the out prefix.
std::vector<std::string> experiment_figures(const ExperimentConfig& c);

}  // namespace opdickman
