#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maskwatch/date.hpp"

namespace maskwatch {

enum class TestMethod { spearman_t, spearman_perm, mwu_normal, mwu_exact };

const char* to_string(TestMethod m);

struct TestResult {
    double statistic = 0;  // rho for Spearman, U of the first sample for Mann-Whitney
    double p_value = 1;
    TestMethod method = TestMethod::spearman_t;
    std::size_t n = 0;
    std::size_t m = 0;                // second sample size (Mann-Whitney only)
    std::uint64_t permutations = 0;   // orderings evaluated by permutation regimes
    bool exhaustive = false;          // permutation p is exact (full enumeration)
};

/// Mask rate (x) and R_t posterior mean (y) on dates present in both series.
struct PairedSeries {
    std::vector<Date> dates;
    std::vector<double> x;
    std::vector<double> y;
};

PairedSeries join_by_date(const std::vector<std::pair<Date, double>>& rates,
                          const std::vector<std::pair<Date, double>>& rt);

/// Midranks (1-based); ties share the average of the ranks they span.
std::vector<double> rank_with_ties(const std::vector<double>& values);

inline constexpr std::uint64_t kSpearmanDraws = 100000;
inline constexpr std::size_t kSpearmanExactMax = 8;
inline constexpr std::size_t kSpearmanPermMax = 20;

struct SpearmanOptions {
    std::uint64_t seed = 1;
    std::uint64_t draws = kSpearmanDraws;
    bool parallel = true;
};

/// Two-sided Spearman test. p from full enumeration for n <= 8, seeded Monte Carlo
/// permutation for n <= 20 and the t approximation above.
TestResult spearman(const std::vector<double>& x, const std::vector<double>& y, const SpearmanOptions& opt = {});

enum class MwuMode { automatic, exact, normal };

/// Two-sided Mann-Whitney U. Automatic mode enumerates when both samples have at most
/// 8 values and there are no ties; otherwise normal approximation with tie-corrected
/// variance and continuity correction.
TestResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y,
                          MwuMode mode = MwuMode::automatic);

struct Regression {
    double slope = 0;
    double intercept = 0;
    double r = 0;
    double p = 1;
    double r_squared = 0;  // coefficient of determination
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
Regression linear_regression(const std::vector<double>& x, const std::vector<double>& y);

/// x values whose paired y is below `cut`, and those at or above it.
std::pair<std::vector<double>, std::vector<double>> split_by_rt(const PairedSeries& pairs, double cut = 1.0);

double median(std::vector<double> v);

} // namespace maskwatch
