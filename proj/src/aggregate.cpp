#include "maskwatch/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "maskwatch/error.hpp"
#include "maskwatch/special.hpp"
#include "maskwatch/text.hpp"

namespace maskwatch {

const char* to_string(Granularity g) {
    switch (g) {
    case Granularity::video: return "video";
    case Granularity::day: return "day";
    case Granularity::week: return "week";
    case Granularity::month: return "month";
    }
    return "?";
}

std::optional<Granularity> parse_granularity(const std::string& s) {
    if (s == "video") return Granularity::video;
    if (s == "day") return Granularity::day;
    if (s == "week") return Granularity::week;
    if (s == "month") return Granularity::month;
    return std::nullopt;
}

std::pair<double, double> wilson_interval(long m, long n, double confidence) {
    if (n < 1 || m < 0 || m > n) throw DomainError("wilson_interval: requires 0 <= m <= n, n >= 1");
    if (!(confidence > 0 && confidence < 1)) throw DomainError("wilson_interval: confidence must lie in (0, 1)");
    const double z = special::normal_quantile(0.5 + confidence / 2);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(m) / nn;
    const double z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    double lo = m == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
    double hi = m == n ? 1.0 : std::clamp(center + half, p, 1.0);
    return {lo, hi};
}

std::pair<long, long> count_masked(const std::vector<FaceDetection>& kept, double mask_conf_threshold) {
    long m = 0, n = 0;
    for (const auto& f : kept) {
        if (f.mask_conf < mask_conf_threshold) continue;
        ++n;
        if (f.mask == MaskLabel::masked) ++m;
    }
    return {m, n};
}

namespace {

RateEstimate make_estimate(Granularity g, Date start, std::string country, long m, long n, double confidence) {
    RateEstimate r;
    r.granularity = g;
    r.period_start = start;
    r.country = std::move(country);
    r.m = m;
    r.n = n;
    r.rate = static_cast<double>(m) / static_cast<double>(n);
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(m, n, confidence);
    return r;
}

struct Tally {
    const VideoMeta* meta;
    long m;
    long n;
};

// One tally per counted video, in video_id order so pooled sums never depend on manifest order.
std::vector<Tally> tallies(const Corpus& corpus, const FilteredCorpus& filtered, const AggregateConfig& cfg) {
    std::vector<Tally> out;
    for (const auto& v : corpus.videos) {
        if (cfg.country && v.country != *cfg.country) continue;
        auto it = filtered.find(v.video_id);
        if (it == filtered.end()) continue;
        auto [m, n] = count_masked(it->second.kept, cfg.mask_conf_threshold);
        if (n == 0) continue;
        out.push_back({&v, m, n});
    }
    std::sort(out.begin(), out.end(), [](const Tally& a, const Tally& b) { return a.meta->video_id < b.meta->video_id; });
    return out;
}

template <typename BinOf>
std::vector<RateEstimate> pooled(const Corpus& corpus, const FilteredCorpus& filtered, const AggregateConfig& cfg,
                                 Granularity g, BinOf bin_of) {
    std::map<std::pair<std::string, Date>, std::pair<long, long>> bins;
    for (const auto& t : tallies(corpus, filtered, cfg)) {
        auto& b = bins[{t.meta->country, bin_of(t.meta->recorded_date)}];
        b.first += t.m;
        b.second += t.n;
    }
    std::vector<RateEstimate> out;
    for (const auto& [key, mn] : bins) out.push_back(make_estimate(g, key.second, key.first, mn.first, mn.second, cfg.confidence));
    return out;
}

} // namespace

RateEstimate video_rate(const std::vector<FaceDetection>& kept, double confidence, double mask_conf_threshold) {
    auto [m, n] = count_masked(kept, mask_conf_threshold);
    if (n == 0) throw Error("empty video");
    auto r = make_estimate(Granularity::video, Date{}, {}, m, n, confidence);
    if (!kept.empty()) r.video_id = kept.front().video_id;
    return r;
}

std::vector<RateEstimate> video_rates(const Corpus& corpus, const FilteredCorpus& filtered, const AggregateConfig& cfg) {
    std::vector<RateEstimate> out;
    for (const auto& t : tallies(corpus, filtered, cfg)) {
        auto r = make_estimate(Granularity::video, t.meta->recorded_date, t.meta->country, t.m, t.n, cfg.confidence);
        r.video_id = t.meta->video_id;
        out.push_back(std::move(r));
    }
    return out;
}

std::optional<RateEstimate> daily_rate(const Corpus& corpus, const FilteredCorpus& filtered, Date date,
                                       const std::string& country, const AggregateConfig& cfg) {
    long m = 0, n = 0;
    for (const auto& t : tallies(corpus, filtered, cfg)) {
        if (t.meta->country != country || t.meta->recorded_date != date) continue;
        m += t.m;
        n += t.n;
    }
    if (n == 0) return std::nullopt;
    return make_estimate(Granularity::day, date, country, m, n, cfg.confidence);
}

std::vector<RateEstimate> daily_rates(const Corpus& corpus, const FilteredCorpus& filtered, const AggregateConfig& cfg) {
    return pooled(corpus, filtered, cfg, Granularity::day, [](Date d) { return d; });
}

std::vector<RateEstimate> weekly_rates(const Corpus& corpus, const FilteredCorpus& filtered, const AggregateConfig& cfg) {
    return pooled(corpus, filtered, cfg, Granularity::week, [&](Date d) { return d.week_start(cfg.week_start); });
}

MonthlyTable monthly_country_means(const Corpus& corpus, const FilteredCorpus& filtered, std::size_t min_videos,
                                   const AggregateConfig& cfg) {
    struct Acc {
        std::vector<double> rates;
        long m = 0, n = 0;
    };
    std::map<std::string, std::map<Date, Acc>> by_country;
    std::map<std::string, std::size_t> totals;
    for (const auto& t : tallies(corpus, filtered, cfg)) {
        auto& acc = by_country[t.meta->country][t.meta->recorded_date.first_of_month()];
        acc.rates.push_back(static_cast<double>(t.m) / static_cast<double>(t.n));
        acc.m += t.m;
        acc.n += t.n;
        ++totals[t.meta->country];
    }

    const double z = special::normal_quantile(0.5 + cfg.confidence / 2);
    MonthlyTable table;
    for (const auto& [country, months] : by_country) {
        if (totals[country] <= min_videos) continue;  // "more than" is strict
        table.country_videos[country] = totals[country];
        for (const auto& [month, acc] : months) {
            MonthlyMean row;
            row.country = country;
            row.month = month;
            row.video_count = acc.rates.size();
            row.m = acc.m;
            row.n = acc.n;
            double sum = 0;
            for (double r : acc.rates) sum += r;
            const double k = static_cast<double>(acc.rates.size());
            row.mean_rate = sum / k;
            row.ci_lo = row.ci_hi = row.mean_rate;
            if (acc.rates.size() > 1) {
                double ss = 0;
                for (double r : acc.rates) ss += (r - row.mean_rate) * (r - row.mean_rate);
                const double half = z * std::sqrt(ss / (k - 1) / k);
                row.ci_lo = std::max(0.0, row.mean_rate - half);
                row.ci_hi = std::min(1.0, row.mean_rate + half);
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

RateEstimate to_rate_estimate(const MonthlyMean& row) {
    RateEstimate r;
    r.granularity = Granularity::month;
    r.period_start = row.month;
    r.country = row.country;
    r.m = row.m;
    r.n = row.n;
    r.rate = row.mean_rate;
    r.ci_lo = row.ci_lo;
    r.ci_hi = row.ci_hi;
    return r;
}

std::vector<SurveyRate> binarize_yougov(const SurveyResponses& responses) {
    if (responses.source != SurveySource::yougov) throw Error("binarize_yougov: not a yougov survey");
    std::map<Date, std::pair<long, long>> weeks;
    for (const auto& row : responses.yougov) {
        auto& w = weeks[row.week_start];
        ++w.second;
        if (row.answer == SurveyAnswer::always || row.answer == SurveyAnswer::frequently) ++w.first;
    }
    std::vector<SurveyRate> out;
    for (const auto& [week, c] : weeks) {
        if (c.second == 0) continue;
        out.push_back({week, static_cast<double>(c.first) / static_cast<double>(c.second), c.second, c.first});
    }
    return out;
}

std::vector<SurveyRate> facebook_rates(const SurveyResponses& responses) {
    if (responses.source != SurveySource::facebook) throw Error("facebook_rates: not a facebook survey");
    std::vector<SurveyRate> out;
    for (const auto& row : responses.facebook) out.push_back({row.week_start, row.rate, std::nullopt, std::nullopt});
    return out;
}

void write_rates_header(std::ostream& out) { out << "granularity,period_start,country,m,n,rate,ci_lo,ci_hi\n"; }

void write_rates_csv(std::ostream& out, const std::vector<RateEstimate>& rows) {
    write_rates_header(out);
    for (const auto& r : rows)
        out << to_string(r.granularity) << ',' << r.period_start.str() << ',' << r.country << ',' << r.m << ','
            << r.n << ',' << fmt6(r.rate) << ',' << fmt6(r.ci_lo) << ',' << fmt6(r.ci_hi) << '\n';
}

void write_survey_rates_csv(std::ostream& out, const std::vector<SurveyRate>& rows, const std::string& country,
                            double confidence) {
    write_rates_header(out);
    for (const auto& r : rows) {
        out << "week," << r.week_start.str() << ',' << country << ',';
        if (r.respondents && *r.respondents > 0) {
            auto [lo, hi] = wilson_interval(*r.wearing, *r.respondents, confidence);
            out << *r.wearing << ',' << *r.respondents << ',' << fmt6(r.rate) << ',' << fmt6(lo) << ',' << fmt6(hi);
        } else {
            out << ",," << fmt6(r.rate) << ",,";
        }
        out << '\n';
    }
}

} // namespace maskwatch
