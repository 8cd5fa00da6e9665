#include "maskwatch/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace maskwatch::svg {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 60, kRight = 60, kTop = 40, kBottom = 50;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Axis {
    double lo, hi, px_lo, px_hi;
    double operator()(double v) const {
        if (hi == lo) return 0.5 * (px_lo + px_hi);
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

void open(std::ostream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
        << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
        << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
}

void y_ticks(std::ostream& out, const Axis& ax, double x, const char* anchor, int count = 5) {
    for (int i = 0; i <= count; ++i) {
        const double v = ax.lo + (ax.hi - ax.lo) * i / count;
        out << "<text x=\"" << num(x) << "\" y=\"" << num(ax(v) + 4) << "\" text-anchor=\"" << anchor << "\">"
            << num(v) << "</text>\n";
    }
}

} // namespace

void timeseries(std::ostream& out, const std::vector<RatePoint>& rates, const std::vector<RtPoint>& rt,
                const std::string& title) {
    open(out, title);
    long first = 0, last = 1;
    bool any = false;
    auto extend = [&](Date d) {
        if (!any) first = last = d.serial();
        first = std::min(first, d.serial());
        last = std::max(last, d.serial());
        any = true;
    };
    for (const auto& r : rates) extend(r.date);
    for (const auto& r : rt) extend(r.date);
    double rt_max = 2.0;
    for (const auto& r : rt) rt_max = std::max(rt_max, std::ceil(r.hi));
    rt_max = std::min(rt_max, 10.0);

    const Axis xs{static_cast<double>(first), static_cast<double>(last), kLeft, kWidth - kRight};
    const Axis rate_ax{0, 1, kHeight - kBottom, kTop};
    const Axis rt_ax{0, rt_max, kHeight - kBottom, kTop};
    y_ticks(out, rate_ax, kLeft - 6, "end");
    y_ticks(out, rt_ax, kWidth - kRight + 6, "start");
    if (any) {
        out << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kHeight - kBottom + 18) << "\">" << Date(std::chrono::sys_days{std::chrono::days{first}}).str() << "</text>\n";
        out << "<text x=\"" << num(kWidth - kRight) << "\" y=\"" << num(kHeight - kBottom + 18) << "\" text-anchor=\"end\">"
            << Date(std::chrono::sys_days{std::chrono::days{last}}).str() << "</text>\n";
    }
    out << "<text x=\"15\" y=\"" << num(kHeight / 2) << "\" transform=\"rotate(-90 15 " << num(kHeight / 2)
        << ")\" text-anchor=\"middle\" fill=\"steelblue\">mask wearing rate</text>\n";
    out << "<text x=\"" << num(kWidth - 15) << "\" y=\"" << num(kHeight / 2) << "\" transform=\"rotate(90 "
        << num(kWidth - 15) << ' ' << num(kHeight / 2) << ")\" text-anchor=\"middle\" fill=\"firebrick\">R_t</text>\n";

    if (!rt.empty()) {
        out << "<polygon fill=\"firebrick\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (const auto& r : rt) out << num(xs(r.date.serial())) << ',' << num(rt_ax(std::min(r.hi, rt_max))) << ' ';
        for (auto it = rt.rbegin(); it != rt.rend(); ++it)
            out << num(xs(it->date.serial())) << ',' << num(rt_ax(std::min(it->lo, rt_max))) << ' ';
        out << "\"/>\n<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : rt) out << num(xs(r.date.serial())) << ',' << num(rt_ax(std::min(r.mean, rt_max))) << ' ';
        out << "\"/>\n";
    }
    out << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kWidth - kRight) << "\" y1=\"" << num(rt_ax(1)) << "\" y2=\""
        << num(rt_ax(1)) << "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& r : rates) {
        const double x = xs(r.date.serial());
        out << "<line x1=\"" << num(x) << "\" x2=\"" << num(x) << "\" y1=\"" << num(rate_ax(r.lo)) << "\" y2=\""
            << num(rate_ax(r.hi)) << "\" stroke=\"steelblue\"/>\n";
        out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(rate_ax(r.rate)) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
    out << "</svg>\n";
}

void scatter(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<double>& y_lo, const std::vector<double>& y_hi, const Regression& fit,
             const std::string& title) {
    open(out, title);
    double x_lo = 0, x_hi = 1, yl = 0, yh = 2;
    for (double v : y_hi) yh = std::max(yh, std::ceil(v));
    yh = std::min(yh, 10.0);
    const Axis xs{x_lo, x_hi, kLeft, kWidth - kRight};
    const Axis ys{yl, yh, kHeight - kBottom, kTop};
    y_ticks(out, ys, kLeft - 6, "end");
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        out << "<text x=\"" << num(xs(v)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
            << num(v) << "</text>\n";
    }
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">mask wearing rate</text>\n";
    out << "<text x=\"15\" y=\"" << num(kHeight / 2) << "\" transform=\"rotate(-90 15 " << num(kHeight / 2)
        << ")\" text-anchor=\"middle\">R_t</text>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double px = xs(x[i]);
        if (i < y_lo.size() && i < y_hi.size())
            out << "<line x1=\"" << num(px) << "\" x2=\"" << num(px) << "\" y1=\"" << num(ys(std::min(y_lo[i], yh)))
                << "\" y2=\"" << num(ys(std::min(y_hi[i], yh))) << "\" stroke=\"gray\" stroke-opacity=\"0.6\"/>\n";
        out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(ys(std::min(y[i], yh))) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
    const double y0 = fit.intercept + fit.slope * x_lo, y1 = fit.intercept + fit.slope * x_hi;
    out << "<line x1=\"" << num(xs(x_lo)) << "\" x2=\"" << num(xs(x_hi)) << "\" y1=\"" << num(ys(std::clamp(y0, yl, yh)))
        << "\" y2=\"" << num(ys(std::clamp(y1, yl, yh))) << "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << num(kLeft + 8) << "\" y=\"" << num(kTop + 16) << "\">r = " << num(fit.r) << "</text>\n";
    out << "</svg>\n";
}

} // namespace maskwatch::svg
