#include "maskwatch/records.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "maskwatch/error.hpp"
#include "maskwatch/text.hpp"

namespace maskwatch {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

// Officially assigned ISO 3166-1 alpha-2 codes.
constexpr std::array<std::string_view, 249> kCountryCodes = {
    "AD", "AE", "AF", "AG", "AI", "AL", "AM", "AO", "AQ", "AR", "AS", "AT", "AU", "AW", "AX", "AZ",
    "BA", "BB", "BD", "BE", "BF", "BG", "BH", "BI", "BJ", "BL", "BM", "BN", "BO", "BQ", "BR", "BS",
    "BT", "BV", "BW", "BY", "BZ", "CA", "CC", "CD", "CF", "CG", "CH", "CI", "CK", "CL", "CM", "CN",
    "CO", "CR", "CU", "CV", "CW", "CX", "CY", "CZ", "DE", "DJ", "DK", "DM", "DO", "DZ", "EC", "EE",
    "EG", "EH", "ER", "ES", "ET", "FI", "FJ", "FK", "FM", "FO", "FR", "GA", "GB", "GD", "GE", "GF",
    "GG", "GH", "GI", "GL", "GM", "GN", "GP", "GQ", "GR", "GS", "GT", "GU", "GW", "GY", "HK", "HM",
    "HN", "HR", "HT", "HU", "ID", "IE", "IL", "IM", "IN", "IO", "IQ", "IR", "IS", "IT", "JE", "JM",
    "JO", "JP", "KE", "KG", "KH", "KI", "KM", "KN", "KP", "KR", "KW", "KY", "KZ", "LA", "LB", "LC",
    "LI", "LK", "LR", "LS", "LT", "LU", "LV", "LY", "MA", "MC", "MD", "ME", "MF", "MG", "MH", "MK",
    "ML", "MM", "MN", "MO", "MP", "MQ", "MR", "MS", "MT", "MU", "MV", "MW", "MX", "MY", "MZ", "NA",
    "NC", "NE", "NF", "NG", "NI", "NL", "NO", "NP", "NR", "NU", "NZ", "OM", "PA", "PE", "PF", "PG",
    "PH", "PK", "PL", "PM", "PN", "PR", "PS", "PT", "PW", "PY", "QA", "RE", "RO", "RS", "RU", "RW",
    "SA", "SB", "SC", "SD", "SE", "SG", "SH", "SI", "SJ", "SK", "SL", "SM", "SN", "SO", "SR", "SS",
    "ST", "SV", "SX", "SY", "SZ", "TC", "TD", "TF", "TG", "TH", "TJ", "TK", "TL", "TM", "TN", "TO",
    "TR", "TT", "TV", "TW", "TZ", "UA", "UG", "UM", "US", "UY", "UZ", "VA", "VC", "VE", "VG", "VI",
    "VN", "VU", "WF", "WS", "YE", "YT", "ZA", "ZM", "ZW",
};

constexpr double kBoxSlack = 1e-9;

const json& require(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(line, field, "missing field");
    return *it;
}

double require_number(const json& obj, const char* field, std::size_t line) {
    const auto& v = require(obj, field, line);
    if (!v.is_number()) throw ParseError(line, field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(line, field, "non-finite value");
    return d;
}

std::string require_string(const json& obj, const char* field, std::size_t line) {
    const auto& v = require(obj, field, line);
    if (!v.is_string()) throw ParseError(line, field, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty()) throw ParseError(line, field, "empty string");
    return s;
}

double unit_interval(const json& obj, const char* field, std::size_t line) {
    const double v = require_number(obj, field, line);
    if (v < 0.0 || v > 1.0) throw ParseError(line, field, "value outside [0,1]");
    return v;
}

Embedding parse_embedding(const json& v, std::size_t line, const char* field) {
    if (!v.is_array()) throw ParseError(line, field, "expected an array of numbers");
    Embedding e;
    e.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw ParseError(line, field, "expected an array of numbers");
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw ParseError(line, field, "non-finite value");
        e.push_back(d);
    }
    if (e.empty()) throw ParseError(line, field, "empty embedding");
    return e;
}

json parse_json_line(const std::string& text, std::size_t line) {
    try {
        auto j = json::parse(text);
        if (!j.is_object()) throw ParseError(line, "<record>", "expected a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ParseError(line, "<record>", std::string("invalid JSON: ") + e.what());
    }
}

bool blank(std::string_view s) { return trim(s).empty(); }

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    std::string copy(s);
    char* end = nullptr;
    out = std::strtod(copy.c_str(), &end);
    return end == copy.c_str() + copy.size() && std::isfinite(out);
}

Date require_date(std::string_view s, std::size_t line, const char* field) {
    auto d = Date::parse(trim(s));
    if (!d) throw ParseError(line, field, "unparsable date '" + std::string(trim(s)) + "'");
    return *d;
}

void expect_header(std::istream& in, std::string_view header, std::size_t& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (trim(line) != header)
            throw ParseError(line_no, "<header>", "expected header '" + std::string(header) + "'");
        return;
    }
    throw ParseError(line_no + 1, "<header>", "missing header '" + std::string(header) + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view p) {
    std::filesystem::path path{std::string(trim(p))};
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (base.empty()) return p.generic_string();
    auto rel = p.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") return p.generic_string();
    return rel.generic_string();
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open '" + p.string() + "'");
    return in;
}

SurveyAnswer parse_answer(std::string_view s, std::size_t line) {
    s = trim(s);
    if (s == "Always") return SurveyAnswer::always;
    if (s == "Frequently") return SurveyAnswer::frequently;
    if (s == "Sometimes") return SurveyAnswer::sometimes;
    if (s == "Rarely") return SurveyAnswer::rarely;
    if (s == "Not at all" || s == "NotAtAll") return SurveyAnswer::not_at_all;
    throw ParseError(line, "answer", "unknown answer '" + std::string(s) + "'");
}

} // namespace

const VideoMeta* Corpus::find(const std::string& video_id) const {
    for (const auto& v : videos)
        if (v.video_id == video_id) return &v;
    return nullptr;
}

std::optional<std::size_t> IncidenceSeries::index_of(Date d) const {
    const long off = d - start_date;
    if (off < 0 || off >= static_cast<long>(counts.size())) return std::nullopt;
    return static_cast<std::size_t>(off);
}

bool is_country_code(const std::string& code) {
    return std::binary_search(kCountryCodes.begin(), kCountryCodes.end(), std::string_view(code));
}

const char* to_string(MaskLabel m) { return m == MaskLabel::masked ? "masked" : "unmasked"; }

const char* to_string(WarningKind k) {
    switch (k) {
    case WarningKind::zero_detections: return "zero detections";
    case WarningKind::missing_performer_refs: return "missing performer refs";
    case WarningKind::outside_window: return "outside study window";
    }
    return "?";
}

const char* to_string(SurveyAnswer a) {
    switch (a) {
    case SurveyAnswer::always: return "Always";
    case SurveyAnswer::frequently: return "Frequently";
    case SurveyAnswer::sometimes: return "Sometimes";
    case SurveyAnswer::rarely: return "Rarely";
    case SurveyAnswer::not_at_all: return "Not at all";
    }
    return "?";
}

std::vector<FaceDetection> parse_detections(std::istream& in, std::optional<std::size_t> expected_dim) {
    std::vector<FaceDetection> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const json j = parse_json_line(text, line);

        FaceDetection f;
        f.video_id = require_string(j, "video_id", line);
        f.t = require_number(j, "t", line);
        if (f.t < 0) throw ParseError(line, "t", "negative timestamp");

        const auto& bb = require(j, "bbox", line);
        if (!bb.is_array() || bb.size() != 4) throw ParseError(line, "bbox", "expected [x, y, w, h]");
        std::array<double, 4> v{};
        for (std::size_t i = 0; i < 4; ++i) {
            if (!bb[i].is_number()) throw ParseError(line, "bbox", "expected [x, y, w, h]");
            v[i] = bb[i].get<double>();
        }
        f.bbox = {v[0], v[1], v[2], v[3]};
        if (!(f.bbox.x >= 0 && f.bbox.y >= 0 && f.bbox.w > 0 && f.bbox.h > 0 &&
              f.bbox.x + f.bbox.w <= 1 + kBoxSlack && f.bbox.y + f.bbox.h <= 1 + kBoxSlack))
            throw ParseError(line, "bbox", "box outside the unit frame");

        const auto mask = require_string(j, "mask", line);
        if (mask == "masked") f.mask = MaskLabel::masked;
        else if (mask == "unmasked") f.mask = MaskLabel::unmasked;
        else throw ParseError(line, "mask", "expected 'masked' or 'unmasked'");

        f.det_conf = unit_interval(j, "det_conf", line);
        f.mask_conf = unit_interval(j, "mask_conf", line);

        if (auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
            auto e = parse_embedding(*it, line, "embedding");
            if (!expected_dim) expected_dim = e.size();
            if (e.size() != *expected_dim)
                throw ParseError(line, "embedding",
                                 "length " + std::to_string(e.size()) + " != " + std::to_string(*expected_dim));
            f.embedding = std::move(e);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Embedding> parse_performer_refs(std::istream& in, std::size_t expected_dim,
                                            const std::string& video_id) {
    std::vector<Embedding> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const json j = parse_json_line(text, line);
        const auto vid = require_string(j, "video_id", line);
        if (!video_id.empty() && vid != video_id)
            throw ParseError(line, "video_id", "reference for '" + vid + "' in file of '" + video_id + "'");
        auto e = parse_embedding(require(j, "embedding", line), line, "embedding");
        if (e.size() != expected_dim)
            throw ParseError(line, "embedding",
                             "length " + std::to_string(e.size()) + " != " + std::to_string(expected_dim));
        out.push_back(std::move(e));
    }
    return out;
}

Corpus parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
    static constexpr std::string_view header =
        "video_id,channel_id,country,recorded_date,duration_s,detections_path,performer_refs_path,embedding_dim";
    std::size_t line = 0;
    expect_header(in, header, line);

    Corpus corpus;
    std::optional<std::size_t> dim;
    std::set<std::string> seen;
    std::string text;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const auto f = split_csv(text);
        if (f.size() != 8) throw ParseError(line, "<row>", "expected 8 columns, got " + std::to_string(f.size()));

        VideoMeta v;
        v.video_id = std::string(trim(f[0]));
        if (v.video_id.empty()) throw ParseError(line, "video_id", "empty id");
        if (!seen.insert(v.video_id).second) throw ParseError(line, "video_id", "duplicate id '" + v.video_id + "'");
        v.channel_id = std::string(trim(f[1]));
        v.country = std::string(trim(f[2]));
        if (!is_country_code(v.country))
            throw ParseError(line, "country", "unknown country code '" + v.country + "'");
        v.recorded_date = require_date(f[3], line, "recorded_date");
        if (!parse_double(f[4], v.duration_s) || v.duration_s <= 0)
            throw ParseError(line, "duration_s", "expected a positive number");
        if (blank(f[5])) throw ParseError(line, "detections_path", "empty path");
        v.detections_path = resolve(base_dir, f[5]);
        if (!blank(f[6])) v.performer_refs_path = resolve(base_dir, f[6]);
        if (!blank(f[7])) {
            std::size_t d = 0;
            if (!parse_int(f[7], d) || d == 0) throw ParseError(line, "embedding_dim", "expected a positive integer");
            if (dim && *dim != d) throw ParseError(line, "embedding_dim", "inconsistent embedding dimension");
            dim = d;
        }
        corpus.videos.push_back(std::move(v));
    }
    corpus.embedding_dim = dim.value_or(kDefaultEmbeddingDim);
    return corpus;
}

Corpus load_corpus_data(Corpus corpus) {
    for (const auto& v : corpus.videos) {
        auto din = open_or_throw(v.detections_path);
        std::vector<FaceDetection> dets;
        try {
            dets = parse_detections(din, corpus.embedding_dim);
        } catch (const ParseError& e) {
            throw Error(v.detections_path.string() + ": " + e.what());
        }
        for (const auto& d : dets)
            if (d.video_id != v.video_id)
                throw Error(v.detections_path.string() + ": detection for unknown video '" + d.video_id + "'");
        corpus.detections[v.video_id] = std::move(dets);

        if (v.performer_refs_path) {
            auto rin = open_or_throw(*v.performer_refs_path);
            try {
                corpus.performer_refs[v.video_id] = parse_performer_refs(rin, corpus.embedding_dim, v.video_id);
            } catch (const ParseError& e) {
                throw Error(v.performer_refs_path->string() + ": " + e.what());
            }
        }
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
    auto in = open_or_throw(manifest_path);
    Corpus meta;
    try {
        meta = parse_manifest(in, manifest_path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.field(), manifest_path.string() + ": " + e.what());
    }
    return load_corpus_data(std::move(meta));
}

IncidenceSeries parse_cases(std::istream& in, const std::string& country, bool allow_gaps) {
    std::size_t line = 0;
    expect_header(in, "date,country,new_cases", line);

    std::map<Date, long> rows;
    std::string text;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const auto f = split_csv(text);
        if (f.size() != 3) throw ParseError(line, "<row>", "expected 3 columns");
        if (trim(f[1]) != country) continue;
        const Date d = require_date(f[0], line, "date");
        long n = 0;
        if (!parse_int(f[2], n)) throw ParseError(line, "new_cases", "expected an integer");
        if (n < 0) throw ParseError(line, "new_cases", "negative count");
        if (!rows.emplace(d, n).second) throw ParseError(line, "date", "duplicate date " + d.str());
    }
    if (rows.empty()) throw Error("no case rows for country '" + country + "'");

    IncidenceSeries s;
    s.country = country;
    s.start_date = rows.begin()->first;
    Date expected = s.start_date;
    for (const auto& [d, n] : rows) {
        if (d != expected) {
            if (!allow_gaps) throw Error("gap in case series: missing " + expected.str());
            while (expected < d) {
                s.counts.push_back(0);
                expected = expected + 1;
            }
        }
        s.counts.push_back(n);
        expected = expected + 1;
    }
    return s;
}

SurveyResponses parse_survey(std::istream& in, SurveySource source) {
    SurveyResponses r;
    r.source = source;
    std::size_t line = 0;
    expect_header(in, source == SurveySource::yougov ? "week_start,respondent_id,answer" : "week_start,rate", line);

    std::optional<Date> last;
    std::string text;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const auto f = split_csv(text);
        if (source == SurveySource::yougov) {
            if (f.size() != 3) throw ParseError(line, "<row>", "expected 3 columns");
            YouGovRow row{require_date(f[0], line, "week_start"), std::string(trim(f[1])), parse_answer(f[2], line)};
            // Weeks must be grouped and increasing; rows inside a week share one start.
            if (last && row.week_start < *last) throw ParseError(line, "week_start", "week_start not increasing");
            last = row.week_start;
            r.yougov.push_back(std::move(row));
        } else {
            if (f.size() != 2) throw ParseError(line, "<row>", "expected 2 columns");
            FacebookRow row{require_date(f[0], line, "week_start"), 0.0};
            if (!parse_double(f[1], row.rate) || row.rate < 0 || row.rate > 1)
                throw ParseError(line, "rate", "expected a rate in [0,1]");
            if (last && row.week_start <= *last) throw ParseError(line, "week_start", "week_start not strictly increasing");
            last = row.week_start;
            r.facebook.push_back(row);
        }
    }
    return r;
}

ValidationReport validate_corpus(const Corpus& corpus, const StudyWindow& window) {
    ValidationReport rep;
    rep.video_count = corpus.videos.size();
    double seconds = 0;
    for (const auto& v : corpus.videos) {
        seconds += v.duration_s;
        auto it = corpus.detections.find(v.video_id);
        const std::size_t n = it == corpus.detections.end() ? 0 : it->second.size();
        rep.face_count += n;
        if (n == 0) rep.warnings.push_back({v.video_id, WarningKind::zero_detections, "zero detections"});
        auto rit = corpus.performer_refs.find(v.video_id);
        if (rit == corpus.performer_refs.end() || rit->second.empty())
            rep.warnings.push_back({v.video_id, WarningKind::missing_performer_refs, "missing performer refs"});
        if (!window.contains(v.recorded_date))
            rep.warnings.push_back({v.video_id, WarningKind::outside_window,
                                    "recorded " + v.recorded_date.str() + " outside study window " +
                                        window.first.str() + ".." + window.last.str()});
    }
    rep.hours = seconds / 3600.0;
    return rep;
}

std::string serialize_detection(const FaceDetection& f) {
    ordered_json j;
    j["video_id"] = f.video_id;
    j["t"] = f.t;
    j["bbox"] = {f.bbox.x, f.bbox.y, f.bbox.w, f.bbox.h};
    j["mask"] = to_string(f.mask);
    j["det_conf"] = f.det_conf;
    j["mask_conf"] = f.mask_conf;
    if (f.embedding) j["embedding"] = *f.embedding;
    return j.dump();
}

std::string serialize_performer_ref(const std::string& video_id, const Embedding& e) {
    ordered_json j;
    j["video_id"] = video_id;
    j["embedding"] = e;
    return j.dump();
}

void write_manifest(std::ostream& out, const Corpus& corpus, const std::filesystem::path& base_dir) {
    out << "video_id,channel_id,country,recorded_date,duration_s,detections_path,performer_refs_path,embedding_dim\n";
    for (const auto& v : corpus.videos) {
        out << v.video_id << ',' << v.channel_id << ',' << v.country << ',' << v.recorded_date.str() << ','
            << fmt6(v.duration_s) << ',' << relative_to(v.detections_path, base_dir) << ','
            << (v.performer_refs_path ? relative_to(*v.performer_refs_path, base_dir) : std::string{}) << ','
            << corpus.embedding_dim << '\n';
    }
}

void write_cases(std::ostream& out, const IncidenceSeries& s) {
    out << "date,country,new_cases\n";
    for (std::size_t i = 0; i < s.counts.size(); ++i)
        out << s.date_at(i).str() << ',' << s.country << ',' << s.counts[i] << '\n';
}

} // namespace maskwatch
