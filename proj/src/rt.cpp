#include "maskwatch/rt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maskwatch/error.hpp"
#include "maskwatch/kernels.hpp"
#include "maskwatch/special.hpp"

namespace maskwatch {

GammaParams gamma_from_moments(double mean, double sd) {
    if (!(mean > 0) || !(sd > 0) || !std::isfinite(mean) || !std::isfinite(sd))
        throw DomainError("gamma_from_moments: mean and sd must be positive");
    const double cv = mean / sd;
    return {cv * cv, sd * sd / mean};
}

double gamma_cdf(double x, double shape, double scale) {
    if (!(shape > 0) || !(scale > 0)) throw DomainError("gamma_cdf: shape and scale must be positive");
    if (x <= 0) return 0.0;
    return special::gamma_p(shape, x / scale);
}

double gamma_quantile(double shape, double scale, double p) {
    if (!(shape > 0) || !(scale > 0) || !std::isfinite(shape) || !std::isfinite(scale))
        throw DomainError("gamma_quantile: shape and scale must be positive");
    if (!(p > 0 && p < 1)) throw DomainError("gamma_quantile: p must lie in (0, 1)");

    // Work on the unit-scale variate; bracket with 0 < lo < hi, then safeguarded Newton.
    // Quantiles of small shapes can sit far below 1, so bisection steps are geometric.
    double hi = std::max(1.0, shape);
    while (special::gamma_p(shape, hi) < p) hi *= 2;
    double lo = hi;
    while (special::gamma_p(shape, lo) >= p) {
        if (lo < std::numeric_limits<double>::min()) return lo * scale;
        hi = lo;
        lo /= 2;
    }
    const double log_norm = std::lgamma(shape);
    double x = std::sqrt(lo * hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double f = special::gamma_p(shape, x) - p;
        if (f == 0) break;
        (f < 0 ? lo : hi) = x;
        const double dens = std::exp((shape - 1) * std::log(x) - x - log_norm);
        double next = dens > 0 ? x - f / dens : std::sqrt(lo * hi);
        if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
        const bool done = std::fabs(next - x) <= 1e-15 * x || hi - lo <= 1e-15 * hi;
        x = next;
        if (done) break;
    }
    return x * scale;
}

namespace {

std::vector<double> truncate_and_normalize(std::vector<double> w) {
    double sum = 0;
    for (double v : w) sum += v;
    if (!(sum > 0)) throw DomainError("serial interval has no mass on days >= 1");
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

std::vector<double> discretize_serial_interval(double shape, double scale, double tail_eps, Discretization rule) {
    if (!(shape > 0) || !(scale > 0)) throw DomainError("discretize_serial_interval: invalid gamma parameters");
    if (!(tail_eps > 0)) throw DomainError("discretize_serial_interval: tail_eps must be positive");

    std::vector<double> w{0.0};
    double cum = 0;
    if (rule == Discretization::midpoint) {
        double prev = 0;  // mass below 0.5 is folded into w_1
        for (std::size_t k = 1; k <= kMaxSiSupport; ++k) {
            const double g = gamma_cdf(k + 0.5, shape, scale);
            w.push_back(g - prev);
            prev = g;
            cum = g;
            if (1.0 - cum <= tail_eps) break;
        }
    } else {
        const double mean = shape * scale;
        const double sd = std::sqrt(shape) * scale;
        if (!(mean > 1)) throw DomainError("epiestim discretization requires a serial-interval mean > 1");
        const GammaParams off = gamma_from_moments(mean - 1, sd);
        const double a = off.shape, b = off.scale;
        auto F = [&](double x, double s) { return x <= 0 ? 0.0 : special::gamma_p(s, x / b); };
        for (std::size_t kk = 1; kk <= kMaxSiSupport; ++kk) {
            const double k = static_cast<double>(kk);
            double r = k * F(k, a) + (k - 2) * F(k - 2, a) - 2 * (k - 1) * F(k - 1, a) +
                       a * b * (2 * F(k - 1, a + 1) - F(k - 2, a + 1) - F(k, a + 1));
            r = std::max(0.0, r);
            w.push_back(r);
            cum += r;
            if (1.0 - cum <= tail_eps) break;
        }
    }
    return truncate_and_normalize(std::move(w));
}

SerialInterval make_serial_interval(double mean, double sd, Discretization rule, double tail_eps) {
    SerialInterval si;
    si.mean = mean;
    si.sd = sd;
    si.gamma = gamma_from_moments(mean, sd);
    si.weights = discretize_serial_interval(si.gamma.shape, si.gamma.scale, tail_eps, rule);
    return si;
}

double total_infectiousness(const std::vector<long>& incidence, const std::vector<double>& weights, std::size_t t) {
    if (t < 1 || t >= incidence.size()) throw DomainError("total_infectiousness: t out of range");
    double s = 0;
    for (std::size_t k = 1; k <= t && k < weights.size(); ++k) s += static_cast<double>(incidence[t - k]) * weights[k];
    return s;
}

Date first_feasible_start(const IncidenceSeries& incidence, std::size_t window) {
    return incidence.start_date + static_cast<long>(window);
}

RtResult estimate_rt(const IncidenceSeries& incidence, const SerialInterval& si, const RtConfig& cfg) {
    if (cfg.window < 1) throw DomainError("window must be >= 1 day");
    if (!(cfg.prior_mean > 0) || !(cfg.prior_sd > 0)) throw DomainError("prior mean and sd must be positive");
    if (si.weights.size() < 2 || si.weights[0] != 0.0) throw DomainError("serial interval weights are invalid");
    const std::size_t len = incidence.counts.size();
    if (len <= si.support())
        throw Error("case series of " + std::to_string(len) + " days is shorter than the serial-interval support (" +
                    std::to_string(si.support()) + " days)");

    const Date start = cfg.start_date.value_or(first_feasible_start(incidence, cfg.window));
    const long start_idx = start - incidence.start_date;
    if (start_idx < static_cast<long>(cfg.window))
        throw Error("estimation start " + start.str() + " needs " + std::to_string(cfg.window) +
                    " days of history; cases begin " + incidence.start_date.str());
    if (start_idx >= static_cast<long>(len))
        throw Error("estimation start " + start.str() + " is after the last case date " + incidence.end_date().str());

    for (long c : incidence.counts)
        if (c < 0) throw DomainError("negative incidence");

    const GammaParams prior = gamma_from_moments(cfg.prior_mean, cfg.prior_sd);
    const std::span<const long> counts(incidence.counts);
    const auto lambda = cfg.parallel ? kernels::omp::infectiousness(counts, si.weights)
                                     : kernels::serial::infectiousness(counts, si.weights);
    const kernels::PosteriorInputs in{counts, lambda, static_cast<std::size_t>(start_idx), cfg.window,
                                      prior.shape, prior.scale};
    const auto posts = cfg.parallel ? kernels::omp::window_posteriors(in) : kernels::serial::window_posteriors(in);

    RtResult res;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const Date end = incidence.date_at(static_cast<std::size_t>(start_idx) + i);
        const auto& p = posts[i];
        if (p.lambda_sum <= 0) {
            res.warnings.push_back("window ending " + end.str() + ": zero total infectiousness, skipped");
            continue;
        }
        res.estimates.push_back({end, p.shape, p.scale, p.mean, p.q025, p.q975});
    }
    return res;
}

} // namespace maskwatch
