#include "maskwatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "maskwatch/error.hpp"
#include "maskwatch/kernels.hpp"
#include "maskwatch/special.hpp"

namespace maskwatch {

const char* to_string(TestMethod m) {
    switch (m) {
    case TestMethod::spearman_t: return "spearman_t";
    case TestMethod::spearman_perm: return "spearman_perm";
    case TestMethod::mwu_normal: return "mwu_normal";
    case TestMethod::mwu_exact: return "mwu_exact";
    }
    return "?";
}

PairedSeries join_by_date(const std::vector<std::pair<Date, double>>& rates,
                          const std::vector<std::pair<Date, double>>& rt) {
    std::map<Date, double> by_date(rt.begin(), rt.end());
    PairedSeries out;
    std::vector<std::pair<Date, double>> sorted = rates;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [d, rate] : sorted) {
        auto it = by_date.find(d);
        if (it == by_date.end()) continue;
        out.dates.push_back(d);
        out.x.push_back(rate);
        out.y.push_back(it->second);
    }
    return out;
}

std::vector<double> rank_with_ties(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) throw DomainError("rank_with_ties: empty input");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("rank_with_ties: non-finite value");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

namespace {

bool has_ties(const std::vector<double>& ranks) {
    for (double r : ranks)
        if (r != std::floor(r)) return true;
    // integral midranks can still hide an odd-sized tie group
    std::vector<double> s = ranks;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

double variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss;
}

} // namespace

TestResult spearman(const std::vector<double>& x, const std::vector<double>& y, const SpearmanOptions& opt) {
    if (x.size() != y.size()) throw DomainError("spearman: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw DomainError("spearman: need at least 3 pairs");
    const auto rx = rank_with_ties(x);
    const auto ry = rank_with_ties(y);
    if (variance(rx) == 0 || variance(ry) == 0) throw DomainError("spearman: zero rank variance");

    TestResult res;
    res.n = n;
    res.statistic = kernels::pearson(rx, ry);
    const double obs = std::fabs(res.statistic);

    if (n <= kSpearmanExactMax) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> perm(n);
        std::uint64_t hits = 0, total = 0;
        do {
            for (std::size_t i = 0; i < n; ++i) perm[i] = ry[idx[i]];
            if (std::fabs(kernels::pearson(rx, perm)) >= obs - 1e-12) ++hits;
            ++total;
        } while (std::next_permutation(idx.begin(), idx.end()));
        res.method = TestMethod::spearman_perm;
        res.permutations = total;
        res.exhaustive = true;
        res.p_value = static_cast<double>(hits) / static_cast<double>(total);
    } else if (n <= kSpearmanPermMax) {
        if (opt.draws == 0) throw DomainError("spearman: draws must be positive");
        const auto hits = opt.parallel ? kernels::omp::permutation_exceedances(rx, ry, obs, opt.draws, opt.seed)
                                       : kernels::serial::permutation_exceedances(rx, ry, obs, opt.draws, opt.seed);
        res.method = TestMethod::spearman_perm;
        res.permutations = opt.draws;
        res.p_value = (static_cast<double>(hits) + 1.0) / (static_cast<double>(opt.draws) + 1.0);
    } else {
        res.method = TestMethod::spearman_t;
        const double df = static_cast<double>(n - 2);
        if (obs >= 1.0) {
            res.p_value = 0.0;
        } else {
            const double t = res.statistic * std::sqrt(df / (1 - res.statistic * res.statistic));
            res.p_value = special::student_t_two_sided(t, df);
        }
    }
    res.p_value = std::clamp(res.p_value, 0.0, 1.0);
    return res;
}

TestResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y, MwuMode mode) {
    const std::size_t n = x.size(), m = y.size();
    if (n == 0 || m == 0) throw DomainError("mann_whitney_u: empty group");
    if (n + m < 3) throw DomainError("mann_whitney_u: need at least 3 observations");

    std::vector<double> all(x);
    all.insert(all.end(), y.begin(), y.end());
    const auto ranks = rank_with_ties(all);
    double rx = 0;
    for (std::size_t i = 0; i < n; ++i) rx += ranks[i];
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    const double u = rx - nd * (nd + 1) / 2;

    TestResult res;
    res.statistic = u;
    res.n = n;
    res.m = m;

    const bool ties = has_ties(ranks);
    const bool exact = mode == MwuMode::exact || (mode == MwuMode::automatic && n <= 8 && m <= 8 && !ties);
    if (exact) {
        if (ties) throw DomainError("mann_whitney_u: exact distribution requires tie-free data");
        // counts[i][j][k]: arrangements of i first-sample and j second-sample values with U = k
        std::vector<std::vector<std::vector<double>>> counts(
            n + 1, std::vector<std::vector<double>>(m + 1, std::vector<double>(n * m + 1, 0.0)));
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j <= m; ++j) {
                if (i == 0 || j == 0) {
                    counts[i][j][0] = 1;
                    continue;
                }
                for (std::size_t k = 0; k <= i * j; ++k) {
                    double c = counts[i][j - 1][k];
                    if (k >= j) c += counts[i - 1][j][k - j];
                    counts[i][j][k] = c;
                }
            }
        const auto& dist = counts[n][m];
        const auto uk = static_cast<std::size_t>(std::llround(u));
        double le = 0, ge = 0, total = 0;
        for (std::size_t k = 0; k < dist.size(); ++k) {
            total += dist[k];
            if (k <= uk) le += dist[k];
            if (k >= uk) ge += dist[k];
        }
        res.method = TestMethod::mwu_exact;
        res.exhaustive = true;
        res.permutations = static_cast<std::uint64_t>(total);
        res.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
        return res;
    }

    const double big_n = nd + md;
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double var = nd * md / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)));
    res.method = TestMethod::mwu_normal;
    if (var <= 0) {
        res.p_value = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::fabs(u - nd * md / 2) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return res;
}

Regression linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DomainError("linear_regression: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw DomainError("linear_regression: need at least 3 points");
    const double nd = static_cast<double>(n);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) throw DomainError("linear_regression: constant x");

    Regression reg;
    reg.n = n;
    reg.slope = sxy / sxx;
    reg.intercept = my - reg.slope * mx;
    if (syy == 0) return reg;  // flat response: slope 0, r 0, p 1
    reg.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (reg.intercept + reg.slope * x[i]);
        ss_res += e * e;
    }
    reg.r_squared = 1.0 - ss_res / syy;

    const double df = nd - 2;
    if (std::fabs(reg.r) >= 1.0) {
        reg.p = 0.0;
    } else {
        const double t = reg.r * std::sqrt(df / (1 - reg.r * reg.r));
        reg.p = special::student_t_two_sided(t, df);
    }
    return reg;
}

std::pair<std::vector<double>, std::vector<double>> split_by_rt(const PairedSeries& pairs, double cut) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < pairs.x.size(); ++i) (pairs.y[i] < cut ? out.first : out.second).push_back(pairs.x[i]);
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace maskwatch
