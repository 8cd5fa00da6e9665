#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "maskwatch/date.hpp"
#include "maskwatch/stats.hpp"

namespace maskwatch::svg {

struct RatePoint {
    Date date;
    double rate, lo, hi;
};

struct RtPoint {
    Date date;
    double mean, lo, hi;
};

/// Daily rates with interval bars (left axis, 0..1) overlaid on the R_t line and its
/// credible band (right axis), plus a dashed R_t = 1 reference.
void timeseries(std::ostream& out, const std::vector<RatePoint>& rates, const std::vector<RtPoint>& rt,
                const std::string& title);

/// Rate (x) against R_t (y) with credible-interval bars and the fitted line.
void scatter(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<double>& y_lo, const std::vector<double>& y_hi, const Regression& fit,
             const std::string& title);

} // namespace maskwatch::svg
