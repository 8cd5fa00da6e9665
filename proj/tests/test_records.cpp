#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "maskwatch/error.hpp"
#include "maskwatch/records.hpp"
#include "maskwatch/rng.hpp"

using namespace maskwatch;

namespace {

const char* kLine =
    R"({"video_id": "v1", "t": 12.0, "bbox": [0.10, 0.20, 0.05, 0.08], "mask": "masked", "det_conf": 0.98, "mask_conf": 0.88})";

std::vector<FaceDetection> parse(const std::string& s, std::optional<std::size_t> dim = std::nullopt) {
    std::istringstream in(s);
    return parse_detections(in, dim);
}

Corpus manifest(const std::string& s) {
    std::istringstream in(s);
    return parse_manifest(in);
}

const std::string kHeader =
    "video_id,channel_id,country,recorded_date,duration_s,detections_path,performer_refs_path,embedding_dim\n";

} // namespace

TEST_CASE("dates parse strictly and do calendar arithmetic") {
    CHECK(Date::parse("2020-02-22")->str() == "2020-02-22");
    CHECK_FALSE(Date::parse("2020-13-40"));
    CHECK_FALSE(Date::parse("2020-02-30"));
    CHECK_FALSE(Date::parse("2020-2-22"));
    CHECK(Date::parse("2020-02-29"));
    const Date d{2020, 2, 28};
    CHECK((d + 2).str() == "2020-03-01");
    CHECK((Date{2020, 3, 1} - d) == 2);
    CHECK(Date(2020, 2, 22).week_start(WeekStart::monday).str() == "2020-02-17");  // a Saturday
    CHECK(Date(2020, 2, 22).week_start(WeekStart::sunday).str() == "2020-02-16");
    CHECK(Date(2020, 2, 17).week_start(WeekStart::monday).str() == "2020-02-17");
    CHECK(Date(2020, 2, 22).first_of_month().str() == "2020-02-01");
}

TEST_CASE("parse_detections maps fields") {
    auto d = parse(kLine);
    REQUIRE(d.size() == 1);
    CHECK(d[0].video_id == "v1");
    CHECK(d[0].mask == MaskLabel::masked);
    CHECK(d[0].det_conf == doctest::Approx(0.98));
    CHECK(d[0].t == 12.0);
    CHECK(d[0].bbox.w == doctest::Approx(0.05));
    CHECK_FALSE(d[0].embedding);
}

TEST_CASE("parse_detections on an empty stream") {
    CHECK(parse("").empty());
    CHECK(parse("\n\n").empty());
}

TEST_CASE("missing mask names the field and the line") {
    try {
        parse(R"({"video_id": "v1", "t": 1, "bbox": [0.1,0.1,0.1,0.1], "det_conf": 0.9, "mask_conf": 0.9})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.field() == "mask");
    }
}

TEST_CASE("schema violations") {
    auto field_of = [](const std::string& s) {
        try {
            parse(s);
        } catch (const ParseError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(R"({"video_id": "v", "t": -1, "bbox": [0.1,0.1,0.1,0.1], "mask": "masked", "det_conf": 1, "mask_conf": 1})") == "t");
    CHECK(field_of(R"({"video_id": "v", "t": 1, "bbox": [0.95,0.1,0.1,0.1], "mask": "masked", "det_conf": 1, "mask_conf": 1})") == "bbox");
    CHECK(field_of(R"({"video_id": "v", "t": 1, "bbox": [0.1,0.1,0,0.1], "mask": "masked", "det_conf": 1, "mask_conf": 1})") == "bbox");
    CHECK(field_of(R"({"video_id": "v", "t": 1, "bbox": [0.1,0.1,0.1,0.1], "mask": "maybe", "det_conf": 1, "mask_conf": 1})") == "mask");
    CHECK(field_of(R"({"video_id": "v", "t": 1, "bbox": [0.1,0.1,0.1,0.1], "mask": "masked", "det_conf": 1.2, "mask_conf": 1})") == "det_conf");
    CHECK(field_of("{not json") == "<record>");
}

TEST_CASE("embedding length must be corpus-wide") {
    const std::string a = R"({"video_id": "v", "t": 1, "bbox": [0.1,0.1,0.1,0.1], "mask": "masked", "det_conf": 1, "mask_conf": 1, "embedding": [1, 2, 3]})";
    const std::string b = R"({"video_id": "v", "t": 2, "bbox": [0.1,0.1,0.1,0.1], "mask": "masked", "det_conf": 1, "mask_conf": 1, "embedding": [1, 2]})";
    CHECK(parse(a + "\n" + a).size() == 2);
    try {
        parse(a + "\n" + b);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.field() == "embedding");
    }
    CHECK_THROWS_AS(parse(a, 4), ParseError);
}

TEST_CASE("fault injected at line k is reported at line k") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t lines = 1 + rng.uniform_int(30);
        const std::size_t bad = 1 + rng.uniform_int(lines);
        std::string text;
        for (std::size_t i = 1; i <= lines; ++i) {
            text += i == bad ? R"({"video_id": "v1", "t": 1, "bbox": [0.1,0.1,0.1,0.1], "mask": "masked", "det_conf": 1})"
                             : kLine;
            text += "\n";
        }
        try {
            parse(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == bad);
            CHECK(e.field() == "mask_conf");
        }
    }
}

TEST_CASE("detection serialization round-trips") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        FaceDetection f;
        f.video_id = "vid" + std::to_string(trial);
        f.t = static_cast<double>(rng.uniform_int(3600));
        f.bbox.w = 0.01 + 0.2 * rng.uniform();
        f.bbox.h = 0.01 + 0.2 * rng.uniform();
        f.bbox.x = (1 - f.bbox.w) * rng.uniform();
        f.bbox.y = (1 - f.bbox.h) * rng.uniform();
        f.mask = rng.bernoulli(0.5) ? MaskLabel::masked : MaskLabel::unmasked;
        f.det_conf = rng.uniform();
        f.mask_conf = rng.uniform();
        if (rng.bernoulli(0.7)) {
            Embedding e(8);
            for (auto& v : e) v = rng.normal();
            f.embedding = e;
        }
        const auto line = serialize_detection(f);
        auto back = parse(line, 8);
        REQUIRE(back.size() == 1);
        CHECK(back[0] == f);
        CHECK(serialize_detection(back[0]) == line);
    }
}

TEST_CASE("manifest rows") {
    auto c = manifest(kHeader + "v1,chA,KR,2020-02-08,1800,d1.jsonl,p1.jsonl,\n");
    REQUIRE(c.videos.size() == 1);
    CHECK(c.videos[0].country == "KR");
    CHECK(c.videos[0].recorded_date == Date(2020, 2, 8));
    CHECK(c.videos[0].duration_s == 1800);
    CHECK(c.videos[0].performer_refs_path.has_value());
    CHECK(c.embedding_dim == kDefaultEmbeddingDim);

    auto d = manifest(kHeader + "v1,chA,KR,2020-02-08,1800,d1.jsonl,,64\nv2,chA,US,2020-03-08,60,d2.jsonl,,64\n");
    CHECK(d.embedding_dim == 64);
    CHECK_FALSE(d.videos[0].performer_refs_path);
}

TEST_CASE("manifest errors") {
    auto field_of = [](const std::string& s) {
        try {
            manifest(s);
        } catch (const ParseError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(kHeader + "v1,chA,KR,2020-02-08,1800,d1.jsonl,,\nv1,chB,KR,2020-02-09,10,d2.jsonl,,\n") == "video_id");
    CHECK(field_of(kHeader + "v1,chA,KR,2020-13-40,1800,d1.jsonl,,\n") == "recorded_date");
    CHECK(field_of(kHeader + "v1,chA,XX,2020-02-08,1800,d1.jsonl,,\n") == "country");
    CHECK(field_of(kHeader + "v1,chA,KR,2020-02-08,-5,d1.jsonl,,\n") == "duration_s");
    CHECK(field_of(kHeader + "v1,chA,KR,2020-02-08,5,d1.jsonl,,8\nv2,chA,KR,2020-02-08,5,d2.jsonl,,16\n") == "embedding_dim");
    CHECK(field_of("video_id,country\n") == "<header>");
}

TEST_CASE("parse_cases builds a contiguous series") {
    std::istringstream in("date,country,new_cases\n2020-02-20,KR,53\n2020-02-21,KR,100\n2020-02-22,KR,229\n2020-02-21,JP,5\n");
    auto s = parse_cases(in, "KR");
    CHECK(s.counts == std::vector<long>{53, 100, 229});
    CHECK(s.start_date == Date(2020, 2, 20));
    for (std::size_t i = 0; i < s.counts.size(); ++i) CHECK(s.date_at(i) == s.start_date + static_cast<long>(i));
    CHECK(s.index_of(Date(2020, 2, 22)) == 2u);

    std::istringstream one("date,country,new_cases\n2020-02-20,KR,3\n");
    CHECK(parse_cases(one, "KR").counts.size() == 1);

    // unsorted input is sorted before the contiguity check
    std::istringstream shuffled("date,country,new_cases\n2020-02-22,KR,1\n2020-02-20,KR,2\n2020-02-21,KR,3\n");
    CHECK(parse_cases(shuffled, "KR").counts == std::vector<long>{2, 3, 1});
}

TEST_CASE("parse_cases errors and gap filling") {
    const std::string gap = "date,country,new_cases\n2020-02-20,KR,1\n2020-02-22,KR,2\n";
    std::istringstream a(gap);
    CHECK_THROWS_AS(parse_cases(a, "KR"), Error);
    std::istringstream b(gap);
    CHECK(parse_cases(b, "KR", true).counts == std::vector<long>{1, 0, 2});
    std::istringstream neg("date,country,new_cases\n2020-02-20,KR,-1\n");
    CHECK_THROWS_AS(parse_cases(neg, "KR"), ParseError);
    std::istringstream none("date,country,new_cases\n2020-02-20,JP,1\n");
    CHECK_THROWS_AS(parse_cases(none, "KR"), Error);
}

TEST_CASE("survey parsing") {
    std::istringstream yg("week_start,respondent_id,answer\n2020-04-06,r1,Always\n2020-04-06,r2,Not at all\n2020-04-13,r1,Frequently\n");
    auto r = parse_survey(yg, SurveySource::yougov);
    CHECK(r.yougov.size() == 3);
    CHECK(r.yougov[1].answer == SurveyAnswer::not_at_all);

    std::istringstream back("week_start,respondent_id,answer\n2020-04-13,r1,Always\n2020-04-06,r2,Always\n");
    CHECK_THROWS_AS(parse_survey(back, SurveySource::yougov), ParseError);
    std::istringstream bad("week_start,respondent_id,answer\n2020-04-13,r1,Mostly\n");
    CHECK_THROWS_AS(parse_survey(bad, SurveySource::yougov), ParseError);

    std::istringstream fb("week_start,rate\n2020-04-26,0.93\n2020-05-03,0.95\n");
    CHECK(parse_survey(fb, SurveySource::facebook).facebook.size() == 2);
    std::istringstream fb_dup("week_start,rate\n2020-04-26,0.93\n2020-04-26,0.95\n");
    CHECK_THROWS_AS(parse_survey(fb_dup, SurveySource::facebook), ParseError);
    std::istringstream fb_rate("week_start,rate\n2020-04-26,1.3\n");
    CHECK_THROWS_AS(parse_survey(fb_rate, SurveySource::facebook), ParseError);
}

TEST_CASE("validate_corpus warnings and totals") {
    Corpus c = manifest(kHeader + "v1,chA,KR,2020-02-08,1800,d1.jsonl,,\n");
    auto rep = validate_corpus(c);
    CHECK(rep.video_count == 1);
    CHECK(rep.face_count == 0);
    CHECK(rep.hours == doctest::Approx(0.5));
    bool zero = false;
    for (const auto& w : rep.warnings) zero |= w.kind == WarningKind::zero_detections && w.video_id == "v1";
    CHECK(zero);

    Corpus ok = manifest(kHeader + "v1,chA,KR,2020-02-08,3600,d1.jsonl,p1.jsonl,\n");
    ok.detections["v1"] = parse(kLine);
    ok.performer_refs["v1"] = {Embedding(128, 0.0)};
    auto good = validate_corpus(ok);
    CHECK(good.warnings.empty());
    CHECK(good.face_count == 1);
    CHECK(good.hours == doctest::Approx(1.0));

    Corpus old = manifest(kHeader + "v1,chA,KR,2019-06-01,60,d1.jsonl,,\n");
    old.detections["v1"] = parse(kLine);
    auto rep_old = validate_corpus(old, StudyWindow{Date(2019, 12, 1), Date(2020, 12, 31)});
    bool outside = false;
    for (const auto& w : rep_old.warnings) outside |= w.kind == WarningKind::outside_window;
    CHECK(outside);
}

TEST_CASE("load_corpus resolves paths against the manifest directory") {
    const auto dir = std::filesystem::temp_directory_path() / "maskwatch_test_records";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir / "det");
    {
        std::ofstream(dir / "manifest.csv") << kHeader << "v1,chA,KR,2020-02-08,60,det/v1.jsonl,det/p1.jsonl,3\n";
        std::ofstream(dir / "det" / "v1.jsonl")
            << R"({"video_id": "v1", "t": 0, "bbox": [0.1,0.1,0.1,0.1], "mask": "unmasked", "det_conf": 0.9, "mask_conf": 0.9, "embedding": [0,0,0]})"
            << "\n";
        std::ofstream(dir / "det" / "p1.jsonl") << R"({"video_id": "v1", "embedding": [0,0,1]})" << "\n";
    }
    auto c = load_corpus(dir / "manifest.csv");
    CHECK(c.detections.at("v1").size() == 1);
    CHECK(c.performer_refs.at("v1").size() == 1);

    std::ofstream(dir / "det" / "p1.jsonl") << R"({"video_id": "v1", "embedding": [0,1]})" << "\n";
    CHECK_THROWS_AS(load_corpus(dir / "manifest.csv"), Error);
    std::filesystem::remove_all(dir);
}
