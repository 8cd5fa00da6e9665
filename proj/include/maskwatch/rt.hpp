#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "maskwatch/date.hpp"
#include "maskwatch/records.hpp"

namespace maskwatch {

struct GammaParams {
    double shape = 1;
    double scale = 1;
};

/// Moment matching: shape = (mean/sd)^2, scale = sd^2/mean.
GammaParams gamma_from_moments(double mean, double sd);

double gamma_cdf(double x, double shape, double scale);

/// Inverse gamma CDF to absolute tolerance 1e-8 or better.
double gamma_quantile(double shape, double scale, double p);

enum class Discretization {
    midpoint,  // w_k = G(k+1/2) - G(k-1/2), w_1 = G(3/2), w_0 = 0
    epiestim,  // EpiEstim's discr_si: linear interpolation of a gamma offset by one day
};

inline constexpr double kDefaultSiMean = 3.93;
inline constexpr double kDefaultSiSd = 4.86;
inline constexpr std::size_t kMaxSiSupport = 60;

struct SerialInterval {
    double mean = kDefaultSiMean;
    double sd = kDefaultSiSd;
    GammaParams gamma;
    std::vector<double> weights;  // weights[k] for k = 0..K, weights[0] == 0, sum 1

    std::size_t support() const { return weights.empty() ? 0 : weights.size() - 1; }
};

/// Daily weights truncated at the smallest K whose remaining mass is <= tail_eps (K <= 60),
/// then renormalized.
std::vector<double> discretize_serial_interval(double shape, double scale, double tail_eps = 1e-6,
                                               Discretization rule = Discretization::midpoint);

SerialInterval make_serial_interval(double mean = kDefaultSiMean, double sd = kDefaultSiSd,
                                    Discretization rule = Discretization::midpoint, double tail_eps = 1e-6);

/// Lambda_t = sum_{s=1..t} I_{t-s} w_s. Requires 1 <= t < incidence.size().
double total_infectiousness(const std::vector<long>& incidence, const std::vector<double>& weights, std::size_t t);

struct RtConfig {
    std::size_t window = 7;
    double prior_mean = 5;
    double prior_sd = 5;
    std::optional<Date> start_date;  // first window end; unset -> first feasible day
    bool parallel = true;
};

inline const Date kDefaultRtStart{2020, 2, 22};

struct RtEstimate {
    Date date;  // window end
    double post_shape = 0;
    double post_scale = 0;
    double mean = 0;
    double q025 = 0;
    double q975 = 0;
};

struct RtResult {
    std::vector<RtEstimate> estimates;
    std::vector<std::string> warnings;  // one per skipped zero-infectiousness window
};

/// Sliding-window gamma posterior of R_t (Poisson renewal likelihood, gamma prior).
/// Throws Error when the series cannot support the requested start.
RtResult estimate_rt(const IncidenceSeries& incidence, const SerialInterval& si, const RtConfig& cfg);

/// Earliest window end the series supports for window length `window`.
Date first_feasible_start(const IncidenceSeries& incidence, std::size_t window);

} // namespace maskwatch
