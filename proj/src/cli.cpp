#include "maskwatch/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskwatch/aggregate.hpp"
#include "maskwatch/error.hpp"
#include "maskwatch/performer_filter.hpp"
#include "maskwatch/records.hpp"
#include "maskwatch/rng.hpp"
#include "maskwatch/rt.hpp"
#include "maskwatch/stats.hpp"
#include "maskwatch/svg.hpp"
#include "maskwatch/synth.hpp"
#include "maskwatch/text.hpp"

namespace maskwatch::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

/// Exit-code carrying failure raised inside subcommands.
struct Exit {
    int code;
    std::string message;
};

Date parse_date_flag(const std::string& s, const char* flag) {
    auto d = Date::parse(s);
    if (!d) throw Exit{input_error, std::string("invalid date for ") + flag + ": '" + s + "'"};
    return *d;
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("MASKWATCH_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const auto s = std::strtoull(v, &end, 10);
    if (*end != '\0') throw Exit{input_error, std::string("MASKWATCH_SEED is not an integer: '") + v + "'"};
    return s;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Exit{input_error, "cannot open '" + path + "'"};
    return in;
}

/// Writes to `path`, or to `fallback` when path is empty.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : path_(path), stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw Exit{input_error, "cannot write '" + path + "'"};
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

// ---- validate ---------------------------------------------------------------------

struct ValidateArgs {
    std::string manifest;
    bool strict = false;
    std::string window_start = "2019-12-01";
    std::string window_end = "2020-12-31";
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    StudyWindow window{parse_date_flag(a.window_start, "--window-start"), parse_date_flag(a.window_end, "--window-end")};
    Corpus corpus;
    try {
        corpus = load_corpus(a.manifest);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }
    const auto rep = validate_corpus(corpus, window);
    out << "videos " << rep.video_count << '\n'
        << "faces " << rep.face_count << '\n'
        << "hours " << fmt6(rep.hours) << '\n'
        << "warnings " << rep.warnings.size() << '\n';
    for (const auto& w : rep.warnings) out << "warning " << w.video_id << ": " << w.message << '\n';
    return a.strict && !rep.warnings.empty() ? failure : ok;
}

// ---- aggregate --------------------------------------------------------------------

struct AggregateArgs {
    std::string manifest;
    std::string granularity = "day";
    std::string country;
    std::size_t min_videos = 10;
    double threshold = 0.6;
    double confidence = 0.95;
    double mask_conf_threshold = 0.0;
    std::string week_start = "monday";
    std::string out;
    std::string survey;
    std::string survey_source = "yougov";
};

int cmd_aggregate(const AggregateArgs& a, std::ostream& out, std::ostream& err) {
    AggregateConfig cfg;
    cfg.confidence = a.confidence;
    cfg.mask_conf_threshold = a.mask_conf_threshold;
    cfg.week_start = a.week_start == "sunday" ? WeekStart::sunday : WeekStart::monday;
    if (!a.country.empty()) cfg.country = a.country;

    if (!a.survey.empty()) {
        const auto source = a.survey_source == "facebook" ? SurveySource::facebook : SurveySource::yougov;
        auto in = open_input(a.survey);
        SurveyResponses responses;
        try {
            responses = parse_survey(in, source);
        } catch (const Error& e) {
            throw Exit{input_error, a.survey + ": " + e.what()};
        }
        const auto rows = source == SurveySource::yougov ? binarize_yougov(responses) : facebook_rates(responses);
        if (rows.empty()) throw Exit{failure, "survey has no weeks with respondents"};
        Output o(a.out, out);
        write_survey_rates_csv(*o, rows, a.country, a.confidence);
        return ok;
    }
    if (a.manifest.empty()) throw Exit{input_error, "aggregate needs a manifest or --survey"};

    const auto gran = parse_granularity(a.granularity);
    if (!gran) throw Exit{input_error, "unknown granularity '" + a.granularity + "'"};

    Corpus corpus;
    try {
        corpus = load_corpus(a.manifest);
    } catch (const Error& e) {
        throw Exit{input_error, e.what()};
    }
    const auto filtered = filter_corpus(corpus, FilterConfig{a.threshold});
    for (const auto& v : corpus.videos) {
        const auto& f = filtered.at(v.video_id);
        if (count_masked(f.kept, cfg.mask_conf_threshold).second == 0 && (!cfg.country || v.country == *cfg.country))
            err << "warning " << v.video_id << ": no faces after performer filtering, skipped\n";
    }

    std::vector<RateEstimate> rows;
    MonthlyTable monthly;
    switch (*gran) {
    case Granularity::video: rows = video_rates(corpus, filtered, cfg); break;
    case Granularity::day: rows = daily_rates(corpus, filtered, cfg); break;
    case Granularity::week: rows = weekly_rates(corpus, filtered, cfg); break;
    case Granularity::month:
        monthly = monthly_country_means(corpus, filtered, a.min_videos, cfg);
        for (const auto& m : monthly.rows) rows.push_back(to_rate_estimate(m));
        break;
    }
    if (rows.empty()) throw Exit{failure, "no qualifying videos"};

    Output o(a.out, out);
    write_rates_csv(*o, rows);
    if (*gran == Granularity::month) {
        std::ostringstream counts;
        counts << "country,videos\n";
        for (const auto& [c, n] : monthly.country_videos) counts << c << ',' << n << '\n';
        if (a.out.empty()) {
            err << counts.str();
        } else {
            Output side(a.out + ".videos.csv", out);
            *side << counts.str();
        }
    }
    return ok;
}

// ---- rt ---------------------------------------------------------------------------

struct RtArgs {
    std::string cases;
    std::string country = "KR";
    double si_mean = kDefaultSiMean;
    double si_sd = kDefaultSiSd;
    std::size_t window = 7;
    double prior_mean = 5;
    double prior_sd = 5;
    std::string start;
    bool allow_gaps = false;
    std::string discretization = "midpoint";
    std::string out;
};

int cmd_rt(const RtArgs& a, std::ostream& out, std::ostream& err) {
    auto in = open_input(a.cases);
    IncidenceSeries series;
    try {
        series = parse_cases(in, a.country, a.allow_gaps);
    } catch (const ParseError& e) {
        throw Exit{input_error, a.cases + ": " + e.what()};
    } catch (const Error& e) {
        throw Exit{failure, a.cases + ": " + e.what()};
    }

    const auto rule = a.discretization == "epiestim" ? Discretization::epiestim : Discretization::midpoint;
    RtConfig cfg;
    cfg.window = a.window;
    cfg.prior_mean = a.prior_mean;
    cfg.prior_sd = a.prior_sd;
    if (!a.start.empty()) {
        cfg.start_date = parse_date_flag(a.start, "--start");
    } else if (a.country == "KR" && series.index_of(kDefaultRtStart) &&
               kDefaultRtStart >= first_feasible_start(series, cfg.window)) {
        cfg.start_date = kDefaultRtStart;
    }

    RtResult res;
    try {
        const auto si = make_serial_interval(a.si_mean, a.si_sd, rule);
        res = estimate_rt(series, si, cfg);
    } catch (const Error& e) {
        throw Exit{failure, e.what()};
    }
    for (const auto& w : res.warnings) err << "warning " << w << '\n';

    const Date start = cfg.start_date.value_or(first_feasible_start(series, cfg.window));
    Output o(a.out, out);
    *o << "# maskwatch rt country=" << a.country << " si_mean=" << fmt6(a.si_mean) << " si_sd=" << fmt6(a.si_sd)
       << " window=" << a.window << " prior_mean=" << fmt6(a.prior_mean) << " prior_sd=" << fmt6(a.prior_sd)
       << " start=" << start.str() << " discretization=" << a.discretization << '\n';
    *o << "date,post_shape,post_scale,mean,q025,q975,window,si_mean,si_sd\n";
    for (const auto& e : res.estimates)
        *o << e.date.str() << ',' << fmt6(e.post_shape) << ',' << fmt6(e.post_scale) << ',' << fmt6(e.mean) << ','
           << fmt6(e.q025) << ',' << fmt6(e.q975) << ',' << a.window << ',' << fmt6(a.si_mean) << ','
           << fmt6(a.si_sd) << '\n';
    return ok;
}

// ---- correlate --------------------------------------------------------------------

struct CorrelateArgs {
    std::string rates;
    std::string rt;
    std::string out_dir = ".";
    std::string country;
    double cut = 1.0;
    std::optional<std::uint64_t> seed;
};

struct RateRow {
    Date date;  // join date
    double rate, lo, hi;
    std::string country;
};

std::vector<RateRow> read_rates(const std::string& path, const std::string& country) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        if (!header) {
            if (trim(line) != "granularity,period_start,country,m,n,rate,ci_lo,ci_hi")
                throw Exit{input_error, path + ": unexpected rates header"};
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 8) throw Exit{input_error, path + ":" + std::to_string(line_no) + ": expected 8 columns"};
        const auto gran = parse_granularity(std::string(trim(f[0])));
        auto d = Date::parse(trim(f[1]));
        if (!gran || !d) throw Exit{input_error, path + ":" + std::to_string(line_no) + ": bad granularity or date"};
        if (*gran != Granularity::day && *gran != Granularity::week)
            throw Exit{input_error, path + ": correlate needs day or week rows"};
        if (!country.empty() && trim(f[2]) != country) continue;
        RateRow r;
        r.country = std::string(trim(f[2]));
        // A week is paired with the R_t window that ends on its last day.
        r.date = *gran == Granularity::week ? *d + 6 : *d;
        char* end = nullptr;
        const std::string rate_s(trim(f[5]));
        r.rate = std::strtod(rate_s.c_str(), &end);
        if (rate_s.empty() || *end) throw Exit{input_error, path + ":" + std::to_string(line_no) + ": bad rate"};
        const std::string lo_s(trim(f[6])), hi_s(trim(f[7]));
        r.lo = lo_s.empty() ? r.rate : std::strtod(lo_s.c_str(), nullptr);
        r.hi = hi_s.empty() ? r.rate : std::strtod(hi_s.c_str(), nullptr);
        rows.push_back(r);
    }
    if (!header) throw Exit{input_error, path + ": missing rates header"};
    std::map<std::string, int> countries;
    for (const auto& r : rows) countries[r.country]++;
    if (countries.size() > 1) throw Exit{input_error, path + ": several countries present; pass --country"};
    return rows;
}

std::vector<svg::RtPoint> read_rt(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<svg::RtPoint> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        if (!header) {
            if (trim(line) != "date,post_shape,post_scale,mean,q025,q975,window,si_mean,si_sd")
                throw Exit{input_error, path + ": unexpected R_t header"};
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        auto d = Date::parse(trim(f[0]));
        if (f.size() != 9 || !d) throw Exit{input_error, path + ":" + std::to_string(line_no) + ": malformed row"};
        rows.push_back({*d, std::strtod(f[3].c_str(), nullptr), std::strtod(f[4].c_str(), nullptr),
                        std::strtod(f[5].c_str(), nullptr)});
    }
    if (!header) throw Exit{input_error, path + ": missing R_t header"};
    return rows;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << content)) throw Exit{input_error, "cannot write '" + p.string() + "'"};
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream& err) {
    std::uint64_t seed = 1;
    if (a.seed) seed = *a.seed;
    else if (auto s = env_seed()) seed = *s;

    const auto rates = read_rates(a.rates, a.country);
    const auto rt = read_rt(a.rt);

    std::vector<std::pair<Date, double>> rate_pairs, rt_pairs;
    for (const auto& r : rates) rate_pairs.emplace_back(r.date, r.rate);
    for (const auto& r : rt) rt_pairs.emplace_back(r.date, r.mean);
    const auto paired = join_by_date(rate_pairs, rt_pairs);
    if (paired.x.size() < 3)
        throw Exit{failure, "only " + std::to_string(paired.x.size()) + " dates shared by rates and R_t (need >= 3)"};

    SpearmanOptions sopt;
    sopt.seed = seed;
    TestResult rho;
    Regression reg;
    try {
        rho = spearman(paired.x, paired.y, sopt);
        reg = linear_regression(paired.x, paired.y);
    } catch (const DomainError& e) {
        throw Exit{failure, e.what()};
    }

    ordered_json report;
    report["rho"] = rho.statistic;
    report["p"] = rho.p_value;
    report["method"] = to_string(rho.method);
    report["n"] = rho.n;
    report["permutations"] = rho.permutations;
    report["seed"] = seed;
    report["alpha"] = 0.05;
    report["significant"] = rho.p_value < 0.05;
    report["regression"] = {{"slope", reg.slope}, {"intercept", reg.intercept}, {"r", reg.r}, {"p", reg.p}};

    const auto [low, high] = split_by_rt(paired, a.cut);
    if (low.empty() || high.empty()) {
        err << "warning: one R_t group is empty; group test skipped\n";
        report["group_test"] = nullptr;
    } else {
        const auto u = mann_whitney_u(low, high);
        report["group_test"] = {{"u", u.statistic},        {"p", u.p_value},
                                {"n_low", low.size()},     {"n_high", high.size()},
                                {"method", to_string(u.method)}, {"cut", a.cut},
                                {"median_low", median(low)}, {"median_high", median(high)}};
    }

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Exit{input_error, "cannot create '" + dir.string() + "': " + ec.message()};

    write_file(dir / "report.json", report.dump(2) + "\n");

    std::vector<svg::RatePoint> rate_pts;
    for (const auto& r : rates) rate_pts.push_back({r.date, r.rate, r.lo, r.hi});
    std::sort(rate_pts.begin(), rate_pts.end(), [](const auto& l, const auto& r) { return l.date < r.date; });
    std::ostringstream ts;
    svg::timeseries(ts, rate_pts, rt, "Mask wearing rate and R_t");
    write_file(dir / "timeseries.svg", ts.str());

    std::map<Date, const svg::RtPoint*> rt_by_date;
    for (const auto& r : rt) rt_by_date[r.date] = &r;
    std::vector<double> lo, hi;
    for (const auto& d : paired.dates) {
        lo.push_back(rt_by_date.at(d)->lo);
        hi.push_back(rt_by_date.at(d)->hi);
    }
    std::ostringstream sc;
    svg::scatter(sc, paired.x, paired.y, lo, hi, reg, "R_t against mask wearing rate");
    write_file(dir / "scatter.svg", sc.str());

    out << "rho " << fmt6(rho.statistic) << " p " << fmt6(rho.p_value) << " (" << to_string(rho.method) << ", n "
        << rho.n << ")\n";
    return ok;
}

// ---- synth ------------------------------------------------------------------------

struct SynthArgs {
    std::string spec;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

Date json_date(const nlohmann::json& j, const char* key, Date fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    auto d = Date::parse(it->get<std::string>());
    if (!d) throw Exit{input_error, std::string("spec: invalid date in '") + key + "'"};
    return *d;
}

EpidemicSpec epidemic_spec(const nlohmann::json& j, std::uint64_t seed) {
    EpidemicSpec s;
    s.seed = derive_seed(seed, 0);
    s.horizon = get_or<std::size_t>(j, "horizon", 120);
    s.start_date = json_date(j, "start_date", s.start_date);
    s.country = get_or<std::string>(j, "country", "KR");
    s.si = make_serial_interval(get_or(j, "si_mean", kDefaultSiMean), get_or(j, "si_sd", kDefaultSiSd));
    if (j.contains("seed_cases")) s.seed_cases = j.at("seed_cases").get<std::vector<long>>();
    if (j.contains("rt_segments")) {
        for (const auto& seg : j.at("rt_segments")) {
            const auto days = seg.at("days").get<std::size_t>();
            const auto r = seg.at("rt").get<double>();
            s.rt_profile.insert(s.rt_profile.end(), days, r);
        }
    } else if (j.contains("rt") && j.at("rt").is_array()) {
        s.rt_profile = j.at("rt").get<std::vector<double>>();
    } else {
        s.rt_profile = {get_or(j, "rt", 1.5)};
    }
    return s;
}

struct Coupling {
    double base = 0.5, slope = 0.2, noise_sd = 0.05;
};

CorpusSpec corpus_spec(const nlohmann::json& j, std::uint64_t seed, const EpidemicResult* epi) {
    CorpusSpec s;
    s.seed = derive_seed(seed, 1);
    s.country = get_or<std::string>(j, "country", s.country);
    s.channel = get_or<std::string>(j, "channel", s.channel);
    s.embedding_dim = get_or(j, "embedding_dim", s.embedding_dim);
    s.performer_spread = get_or(j, "performer_spread", s.performer_spread);
    s.performer_faces_per_video = get_or(j, "performer_faces_per_video", s.performer_faces_per_video);
    s.performer_refs_per_video = get_or(j, "performer_refs_per_video", s.performer_refs_per_video);
    s.crowd_spread = get_or(j, "crowd_spread", s.crowd_spread);
    s.min_separation = get_or(j, "min_separation", s.min_separation);
    s.label_noise = get_or(j, "label_noise", s.label_noise);
    s.duration_s = get_or(j, "duration_s", s.duration_s);
    s.clean = get_or(j, "clean", s.clean);
    s.threshold = get_or(j, "threshold", s.threshold);

    for (const auto& d : j.value("days", nlohmann::json::array())) {
        CorpusDay day;
        day.date = json_date(d, "date", day.date);
        day.true_p = get_or(d, "true_p", day.true_p);
        day.videos = get_or(d, "videos", day.videos);
        day.faces_per_video = get_or(d, "faces_per_video", day.faces_per_video);
        s.days.push_back(day);
    }
    if (j.contains("range")) {
        const auto& r = j.at("range");
        const Date first = json_date(r, "start", Date{2020, 1, 1});
        const Date last = json_date(r, "end", first);
        const auto step = get_or<long>(r, "every_days", 1);
        if (step < 1) throw Exit{input_error, "spec: every_days must be >= 1"};
        std::optional<Coupling> coupling;
        if (r.contains("coupling")) {
            const auto& c = r.at("coupling");
            coupling = Coupling{get_or(c, "base", 0.5), get_or(c, "slope", 0.2), get_or(c, "noise_sd", 0.05)};
            if (!epi) throw Exit{input_error, "spec: coupling needs an epidemic section"};
        }
        Rng noise(derive_seed(seed, 2));
        for (Date d = first; d <= last; d = d + step) {
            CorpusDay day;
            day.date = d;
            day.true_p = get_or(r, "true_p", day.true_p);
            day.videos = get_or(r, "videos", day.videos);
            day.faces_per_video = get_or(r, "faces_per_video", day.faces_per_video);
            if (coupling) {
                const long idx = d - epi->incidence.start_date;
                const double rt = idx < 0 ? 1.0 : epi->true_rt[std::min<std::size_t>(idx, epi->true_rt.size() - 1)];
                day.true_p = std::clamp(coupling->base + coupling->slope * (rt - 1) + noise.normal(0, coupling->noise_sd),
                                        0.0, 1.0);
            }
            s.days.push_back(day);
        }
    }
    return s;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
    nlohmann::json spec;
    {
        auto in = open_input(a.spec);
        try {
            in >> spec;
        } catch (const nlohmann::json::exception& e) {
            throw Exit{input_error, a.spec + ": " + e.what()};
        }
    }
    std::uint64_t seed = 1;
    if (a.seed) seed = *a.seed;
    else if (spec.contains("seed")) seed = spec.at("seed").get<std::uint64_t>();
    else if (auto s = env_seed()) seed = *s;

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Exit{input_error, "cannot create '" + dir.string() + "'"};

    try {
        std::optional<EpidemicResult> epi;
        if (spec.contains("epidemic")) {
            epi = generate_epidemic(epidemic_spec(spec.at("epidemic"), seed));
            write_synth_epidemic(*epi, dir);
            out << "epidemic: " << epi->incidence.counts.size() << " days -> " << (dir / "cases.csv").string()
                << (epi->extinct ? " (extinct)" : "") << '\n';
        }
        if (spec.contains("corpus")) {
            const auto synth = generate_corpus(corpus_spec(spec.at("corpus"), seed, epi ? &*epi : nullptr));
            const auto manifest = write_synth_corpus(synth, dir);
            out << "corpus: " << synth.corpus.videos.size() << " videos -> " << manifest.string() << '\n';
        }
        if (!spec.contains("epidemic") && !spec.contains("corpus"))
            throw Exit{input_error, a.spec + ": expected an 'epidemic' or 'corpus' section"};
    } catch (const nlohmann::json::exception& e) {
        throw Exit{input_error, a.spec + ": " + e.what()};
    } catch (const Error& e) {
        throw Exit{input_error, e.what()};
    }
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"maskwatch: mask-wearing rates from crowd-video detections, R_t estimation, and their association"};
    app.require_subcommand(1);

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Check a corpus manifest and its detection files");
    validate->add_option("manifest", va.manifest, "Manifest CSV")->required();
    validate->add_flag("--strict", va.strict, "Exit 1 when any warning is reported");
    validate->add_option("--window-start", va.window_start, "First day of the study window")->capture_default_str();
    validate->add_option("--window-end", va.window_end, "Last day of the study window")->capture_default_str();

    AggregateArgs ag;
    auto* aggregate = app.add_subcommand("aggregate", "Filter performers and compute mask-wearing rates");
    aggregate->add_option("manifest", ag.manifest, "Manifest CSV");
    aggregate->add_option("--granularity", ag.granularity, "video, day, week or month")
        ->check(CLI::IsMember({"video", "day", "week", "month"}))
        ->capture_default_str();
    aggregate->add_option("--country", ag.country, "Restrict to one ISO 3166-1 alpha-2 country");
    aggregate->add_option("--min-videos", ag.min_videos, "Monthly table keeps countries with more than this many videos")
        ->capture_default_str();
    aggregate->add_option("--threshold", ag.threshold, "Performer match distance (Euclidean, inclusive)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    aggregate->add_option("--confidence", ag.confidence, "Wilson interval confidence level")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    aggregate->add_option("--mask-conf-threshold", ag.mask_conf_threshold, "Ignore faces with lower mask_conf")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    aggregate->add_option("--week-start", ag.week_start, "First weekday of a week bin")
        ->check(CLI::IsMember({"monday", "sunday"}))
        ->capture_default_str();
    aggregate->add_option("--survey", ag.survey, "Survey CSV to convert into weekly rates instead of a corpus");
    aggregate->add_option("--survey-source", ag.survey_source, "yougov or facebook")
        ->check(CLI::IsMember({"yougov", "facebook"}))
        ->capture_default_str();
    aggregate->add_option("-o,--out", ag.out, "Output CSV (default: stdout)");

    RtArgs ra;
    auto* rt = app.add_subcommand("rt", "Estimate the time-varying reproduction number from daily cases");
    rt->add_option("cases", ra.cases, "Cases CSV (date,country,new_cases)")->required();
    rt->add_option("--country", ra.country, "Country code to select")->capture_default_str();
    rt->add_option("--si-mean", ra.si_mean, "Serial interval mean (days)")->check(CLI::PositiveNumber)->capture_default_str();
    rt->add_option("--si-sd", ra.si_sd, "Serial interval standard deviation (days)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rt->add_option("--window", ra.window, "Sliding window length (days)")->check(CLI::PositiveNumber)->capture_default_str();
    rt->add_option("--prior-mean", ra.prior_mean, "Gamma prior mean of R_t")->check(CLI::PositiveNumber)->capture_default_str();
    rt->add_option("--prior-sd", ra.prior_sd, "Gamma prior sd of R_t")->check(CLI::PositiveNumber)->capture_default_str();
    rt->add_option("--start", ra.start, "First window end (default 2020-02-22 for KR, else earliest feasible)");
    rt->add_flag("--allow-gaps", ra.allow_gaps, "Fill missing interior dates with zero cases");
    rt->add_option("--discretization", ra.discretization, "Serial interval discretization: midpoint or epiestim")
        ->check(CLI::IsMember({"midpoint", "epiestim"}))
        ->capture_default_str();
    rt->add_option("-o,--out", ra.out, "Output CSV (default: stdout)");

    CorrelateArgs ca;
    std::uint64_t correlate_seed = 0;
    auto* correlate = app.add_subcommand("correlate", "Relate mask-wearing rates to R_t");
    correlate->add_option("rates", ca.rates, "Rates CSV from aggregate (day or week rows)")->required();
    correlate->add_option("rt", ca.rt, "R_t CSV from rt")->required();
    correlate->add_option("--out-dir", ca.out_dir, "Directory for report.json and SVG plots")->capture_default_str();
    correlate->add_option("--country", ca.country, "Country to select from the rates CSV");
    correlate->add_option("--cut", ca.cut, "R_t value splitting the two groups (upper group inclusive)")
        ->capture_default_str();
    auto* cseed = correlate->add_option("--seed", correlate_seed, "Permutation seed (fallback: MASKWATCH_SEED, then 1)");

    SynthArgs sa;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic epidemic and/or detection corpus");
    synth->add_option("spec", sa.spec, "Spec JSON")->required();
    synth->add_option("--out-dir", sa.out_dir, "Output directory")->required();
    auto* sseed = synth->add_option("--seed", synth_seed, "Seed (fallback: spec 'seed', MASKWATCH_SEED, then 1)");

    std::vector<std::string> argv_store{"maskwatch"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return input_error;
    }

    try {
        if (*validate) return cmd_validate(va, out, err);
        if (*aggregate) return cmd_aggregate(ag, out, err);
        if (*rt) return cmd_rt(ra, out, err);
        if (*correlate) {
            if (*cseed) ca.seed = correlate_seed;
            return cmd_correlate(ca, out, err);
        }
        if (*synth) {
            if (*sseed) sa.seed = synth_seed;
            return cmd_synth(sa, out, err);
        }
    } catch (const Exit& e) {
        err << "error: " << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }
    return input_error;
}

} // namespace maskwatch::cli
