#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "opdickman/dickman.hpp"

namespace opdickman {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    int n_permutations = 0;
    std::uint64_t seed = 0;
    double alpha = 0.01;
    bool reject = false;

    std::string to_json_line() const;
};

// (1/n) sum exp(i z . x_j) on the grid; exactly 1 at z = 0.
CFGrid empirical_cf(const SampleBatch& batch, const std::vector<Vec>& grid);

// sup_z |a(z) - b(z)|; the grids must coincide.
double cf_distance(const CFGrid& a, const CFGrid& b);

// Energy-distance U-statistic 2 E|X-Y| - E|X-X'| - E|Y-Y'|.
double energy_statistic(const SampleBatch& x, const SampleBatch& y);

// Two-sample permutation test on the energy statistic. In one dimension
// the statistic is computed from sorted prefix sums; in higher dimensions
// batches above 2000 points are deterministically subsampled so the pooled
// pairwise-distance work stays within the 4000x4000 cap.
TestReport energy_test(const SampleBatch& x, const SampleBatch& y, int n_perm = 499,
                       std::uint64_t seed = 1, double alpha = 0.01);

// Kolmogorov-Smirnov against a tabulated cdf, asymptotic p-value.
TestReport ks_test_1d(const std::vector<double>& samples,
                      const std::function<double(double)>& cdf, double alpha = 0.01);

// Pearson chi-square of a histogram on [lo, hi] (plus tail bins) against
// a cdf; bins with expected count < 5 are merged leftwards.
TestReport chi2_histogram_test(const std::vector<double>& samples,
                               const std::function<double(double)>& cdf, double lo, double hi,
                               int bins, double alpha = 0.01);

}  // namespace opdickman
