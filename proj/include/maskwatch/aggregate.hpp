#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maskwatch/date.hpp"
#include "maskwatch/performer_filter.hpp"
#include "maskwatch/records.hpp"

namespace maskwatch {

enum class Granularity { video, day, week, month };

const char* to_string(Granularity g);
std::optional<Granularity> parse_granularity(const std::string& s);

struct RateEstimate {
    Granularity granularity = Granularity::day;
    Date period_start;
    std::string country;
    long m = 0;
    long n = 0;
    double rate = 0;
    double ci_lo = 0;
    double ci_hi = 0;
    std::string video_id;  // only for granularity == video
};

struct AggregateConfig {
    double confidence = 0.95;
    double mask_conf_threshold = 0.0;  // faces with lower mask_conf are not counted
    WeekStart week_start = WeekStart::monday;
    std::optional<std::string> country;  // restrict output to one country
};

/// Wilson score interval for m successes out of n.
std::pair<double, double> wilson_interval(long m, long n, double confidence = 0.95);

/// Masked and total counts among `kept`, ignoring faces below the mask_conf threshold.
std::pair<long, long> count_masked(const std::vector<FaceDetection>& kept, double mask_conf_threshold = 0.0);

/// Rate of one performer-filtered video. Throws Error("empty video") when nothing is counted.
RateEstimate video_rate(const std::vector<FaceDetection>& kept, double confidence = 0.95,
                        double mask_conf_threshold = 0.0);

using FilteredCorpus = std::map<std::string, FilterOutcome>;

/// Per-video rates (videos with nothing counted are skipped), ordered by video_id.
std::vector<RateEstimate> video_rates(const Corpus& corpus, const FilteredCorpus& filtered,
                                      const AggregateConfig& cfg = {});

/// Faces pooled over all videos of `country` recorded on `date`; nullopt when there are none.
std::optional<RateEstimate> daily_rate(const Corpus& corpus, const FilteredCorpus& filtered, Date date,
                                       const std::string& country, const AggregateConfig& cfg = {});

/// Pooled rates per (country, day), ordered by country then date; empty days are absent.
std::vector<RateEstimate> daily_rates(const Corpus& corpus, const FilteredCorpus& filtered,
                                      const AggregateConfig& cfg = {});

/// Pooled rates per (country, week) with weeks starting on cfg.week_start.
std::vector<RateEstimate> weekly_rates(const Corpus& corpus, const FilteredCorpus& filtered,
                                       const AggregateConfig& cfg = {});

struct MonthlyMean {
    std::string country;
    Date month;
    double mean_rate = 0;
    std::size_t video_count = 0;
    long m = 0;  // pooled, for reference
    long n = 0;
    double ci_lo = 0;
    double ci_hi = 0;
};

struct MonthlyTable {
    std::vector<MonthlyMean> rows;                      // by country, then month
    std::map<std::string, std::size_t> country_videos;  // included countries only
};

/// Unweighted mean of per-video rates per (country, month). Countries with at most
/// `min_videos` rated videos are omitted.
MonthlyTable monthly_country_means(const Corpus& corpus, const FilteredCorpus& filtered, std::size_t min_videos = 10,
                                   const AggregateConfig& cfg = {});

RateEstimate to_rate_estimate(const MonthlyMean& row);

struct SurveyRate {
    Date week_start;
    double rate = 0;
    std::optional<long> respondents;  // absent for pre-aggregated sources
    std::optional<long> wearing;
};

/// "Always" and "Frequently" count as wearing a mask; the rest do not.
std::vector<SurveyRate> binarize_yougov(const SurveyResponses& responses);

std::vector<SurveyRate> facebook_rates(const SurveyResponses& responses);

void write_rates_header(std::ostream& out);
void write_rates_csv(std::ostream& out, const std::vector<RateEstimate>& rows);
void write_survey_rates_csv(std::ostream& out, const std::vector<SurveyRate>& rows, const std::string& country,
                            double confidence = 0.95);

} // namespace maskwatch
