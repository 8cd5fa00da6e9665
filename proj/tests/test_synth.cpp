#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "maskwatch/error.hpp"
#include "maskwatch/performer_filter.hpp"
#include "maskwatch/records.hpp"
#include "maskwatch/synth.hpp"

using namespace maskwatch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("maskwatch_test_synth_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("R = 0 after seeding gives no further cases") {
    EpidemicSpec spec;
    spec.rt_profile = {0.0};
    spec.seed_cases = {10, 5, 3};
    auto r = generate_epidemic(spec);
    REQUIRE(r.incidence.counts.size() == spec.horizon);
    CHECK(r.incidence.counts[0] == 10);
    CHECK(r.incidence.counts[2] == 3);
    for (std::size_t t = 3; t < r.incidence.counts.size(); ++t) CHECK(r.incidence.counts[t] == 0);
    CHECK(r.extinct);
}

TEST_CASE("generate_epidemic is deterministic under a fixed seed") {
    EpidemicSpec spec;
    spec.rt_profile = {1.5};
    spec.seed = 42;
    auto a = generate_epidemic(spec), b = generate_epidemic(spec);
    CHECK(a.incidence.counts == b.incidence.counts);
    spec.seed = 43;
    CHECK(generate_epidemic(spec).incidence.counts != a.incidence.counts);
}

TEST_CASE("generate_epidemic rejects bad specs") {
    EpidemicSpec spec;
    CHECK_THROWS_AS(generate_epidemic(spec), DomainError);  // empty profile
    spec.rt_profile = {-1};
    CHECK_THROWS_AS(generate_epidemic(spec), DomainError);
    spec.rt_profile = {1};
    spec.seed_cases = {-3};
    CHECK_THROWS_AS(generate_epidemic(spec), DomainError);
}

TEST_CASE("pooled I/Lambda recovers R = 1.5") {
    double ratio_sum = 0;
    long cells = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        EpidemicSpec spec;
        spec.rt_profile = {1.5};
        spec.seed = seed;
        const auto r = generate_epidemic(spec);
        const auto& w = spec.si.weights;
        for (std::size_t t = 14; t < r.incidence.counts.size(); ++t) {
            double lambda = 0;
            for (std::size_t k = 1; k <= t && k < w.size(); ++k) lambda += r.incidence.counts[t - k] * w[k];
            if (lambda <= 0) continue;
            ratio_sum += r.incidence.counts[t] / lambda;
            ++cells;
        }
    }
    CHECK(cells > 0);
    CHECK(std::fabs(ratio_sum / cells - 1.5) <= 0.05);
}

TEST_CASE("corpus with p = 1 and no noise is fully masked") {
    CorpusSpec spec;
    spec.days = {{Date(2020, 4, 1), 1.0, 1, 200}};
    spec.performer_spread = 0;
    auto s = generate_corpus(spec);
    const auto& dets = s.corpus.detections.at("v00001");
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (!s.truth.faces[i].is_performer) CHECK(dets[i].mask == MaskLabel::masked);
}

TEST_CASE("ground truth cardinalities match the detections") {
    CorpusSpec spec;
    spec.days = {{Date(2020, 4, 1), 0.3, 3, 50}, {Date(2020, 4, 2), 0.6, 2, 40}};
    spec.seed = 7;
    auto s = generate_corpus(spec);
    CHECK(s.corpus.videos.size() == 5);
    std::size_t total = 0;
    for (const auto& [vid, d] : s.corpus.detections) total += d.size();
    CHECK(s.truth.faces.size() == total);
    CHECK(s.truth.days.size() == 2);
    std::set<std::string> ids;
    for (const auto& f : s.truth.faces) ids.insert(f.face_id);
    CHECK(ids.size() == total);

    // face ids index the per-video detection lists
    std::size_t offset = 0;
    for (const auto& v : s.corpus.videos) {
        const auto& d = s.corpus.detections.at(v.video_id);
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(s.truth.faces[offset + i].face_id == v.video_id + ":" + std::to_string(i));
        offset += d.size();
    }
}

TEST_CASE("clean-mode filtering removes exactly the planted performers") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CorpusSpec spec;
        spec.days = {{Date(2020, 5, 1), 0.5, 4, 60}};
        spec.seed = seed;
        auto s = generate_corpus(spec);
        const auto filtered = filter_corpus(s.corpus);
        std::size_t offset = 0;
        for (const auto& v : s.corpus.videos) {
            const auto& dets = s.corpus.detections.at(v.video_id);
            std::vector<FaceDetection> crowd;
            for (std::size_t i = 0; i < dets.size(); ++i)
                if (!s.truth.faces[offset + i].is_performer) crowd.push_back(dets[i]);
            CHECK(filtered.at(v.video_id).kept == crowd);
            CHECK(filtered.at(v.video_id).excluded_count == spec.performer_faces_per_video);
            offset += dets.size();
        }
    }
}

TEST_CASE("p = 0.7 over ~2000 faces stays within a 3 sigma binomial band") {
    int inside = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        CorpusSpec spec;
        spec.embedding_dim = 4;
        spec.days = {{Date(2020, 6, 1), 0.7, 4, 500}};
        spec.seed = seed;
        const auto s = generate_corpus(spec);
        long m = 0, n = 0;
        for (std::size_t i = 0; i < s.truth.faces.size(); ++i) {
            if (s.truth.faces[i].is_performer) continue;
            ++n;
            m += s.truth.faces[i].true_mask;
        }
        const double sigma = std::sqrt(0.7 * 0.3 / n);
        inside += std::fabs(static_cast<double>(m) / n - 0.7) <= 3 * sigma;
    }
    CHECK(inside >= 49);
}

TEST_CASE("generate_corpus validates its spec") {
    CorpusSpec spec;
    spec.days = {{Date(2020, 1, 1), 1.5, 1, 10}};
    CHECK_THROWS_AS(generate_corpus(spec), DomainError);
    spec.days[0].true_p = 0.5;
    spec.country = "XX";
    CHECK_THROWS_AS(generate_corpus(spec), DomainError);
    spec.country = "KR";
    spec.min_separation = 1.0;  // not > 2 * 0.6
    CHECK_THROWS_AS(generate_corpus(spec), DomainError);
    spec.clean = false;
    CHECK_NOTHROW(generate_corpus(spec));
}

TEST_CASE("written corpus re-parses losslessly") {
    CorpusSpec spec;
    spec.days = {{Date(2020, 4, 1), 0.4, 2, 30}, {Date(2020, 4, 3), 0.8, 1, 25}};
    spec.label_noise = 0.1;
    spec.seed = 5;
    const auto s = generate_corpus(spec);
    const auto dir = scratch("roundtrip");
    const auto manifest = write_synth_corpus(s, dir);
    const auto back = load_corpus(manifest);
    REQUIRE(back.videos.size() == s.corpus.videos.size());
    CHECK(back.embedding_dim == spec.embedding_dim);
    for (std::size_t i = 0; i < back.videos.size(); ++i) {
        const auto& vid = s.corpus.videos[i].video_id;
        CHECK(back.videos[i].video_id == vid);
        CHECK(back.videos[i].recorded_date == s.corpus.videos[i].recorded_date);
        CHECK(back.detections.at(vid) == s.corpus.detections.at(vid));
        CHECK(back.performer_refs.at(vid) == s.corpus.performer_refs.at(vid));
    }

    std::ostringstream faces, days;
    write_ground_truth(faces, days, s.truth);
    CHECK(slurp(dir / "ground_truth.csv") == faces.str());
    CHECK(slurp(dir / "ground_truth_days.csv") == "day,true_p\n2020-04-01,0.4\n2020-04-03,0.8\n");

    // same seed, byte-identical files
    const auto dir2 = scratch("roundtrip2");
    write_synth_corpus(generate_corpus(spec), dir2);
    CHECK(slurp(dir / "manifest.csv") == slurp(dir2 / "manifest.csv"));
    CHECK(slurp(dir / "detections" / "v00002.jsonl") == slurp(dir2 / "detections" / "v00002.jsonl"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("written epidemic re-parses as a cases series") {
    EpidemicSpec spec;
    spec.rt_profile = {1.2};
    spec.horizon = 80;
    const auto epi = generate_epidemic(spec);
    const auto dir = scratch("epi");
    const auto cases = write_synth_epidemic(epi, dir);
    std::ifstream in(cases);
    const auto back = parse_cases(in, "KR");
    CHECK(back.start_date == spec.start_date);
    CHECK(back.counts == epi.incidence.counts);
    fs::remove_all(dir);
}
