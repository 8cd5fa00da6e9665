#include <doctest.h>

#include <cmath>

#include "maskwatch/error.hpp"
#include "maskwatch/performer_filter.hpp"
#include "maskwatch/rng.hpp"
#include "maskwatch/synth.hpp"

using namespace maskwatch;

namespace {

FaceDetection face(std::optional<Embedding> e, MaskLabel m = MaskLabel::unmasked) {
    FaceDetection f;
    f.video_id = "v1";
    f.bbox = {0.1, 0.1, 0.1, 0.1};
    f.det_conf = f.mask_conf = 0.9;
    f.mask = m;
    f.embedding = std::move(e);
    return f;
}

Embedding random_embedding(Rng& rng, std::size_t dim, double scale = 1.0) {
    Embedding e(dim);
    for (auto& v : e) v = rng.normal(0, scale);
    return e;
}

} // namespace

TEST_CASE("embedding_distance") {
    const Embedding a{0.1, 0.2, 0.3, 0.4};
    CHECK(embedding_distance(a, a) == 0.0);
    CHECK(embedding_distance({0, 0}, {3, 4}) == 5.0);
    CHECK_THROWS_AS(embedding_distance({0, 0}, {1, 2, 3}), DomainError);

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_embedding(rng, 16), y = random_embedding(rng, 16);
        CHECK(embedding_distance(x, y) == embedding_distance(y, x));
        CHECK(embedding_distance(x, y) > 0);
    }
}

TEST_CASE("is_performer") {
    const Embedding ref{1, 2, 3};
    CHECK(is_performer(face(ref), {ref}));
    CHECK_FALSE(is_performer(face(ref), {}));
    CHECK_FALSE(is_performer(face(std::nullopt), {ref}));
    CHECK_THROWS_AS(is_performer(face(Embedding{1, 2}), {ref}), DomainError);
    CHECK_THROWS_AS(is_performer(face(ref), {ref}, FilterConfig{-1.0}), DomainError);

    // Boundary is inclusive: 0.6 = 0.36^0.5 exactly
    const Embedding origin{0, 0}, at{0.6, 0};
    REQUIRE(embedding_distance(origin, at) == 0.6);
    CHECK(is_performer(face(at), {origin}, FilterConfig{0.6}));
    CHECK_FALSE(is_performer(face(at), {origin}, FilterConfig{0.5999999}));

    // nearest of several references decides
    CHECK(is_performer(face(Embedding{10, 0}), {origin, Embedding{10.5, 0}}, FilterConfig{0.6}));
}

TEST_CASE("filter_video bookkeeping") {
    const Embedding ref{0, 0, 0};
    std::vector<FaceDetection> faces;
    for (int i = 0; i < 10; ++i) faces.push_back(face(Embedding{i < 3 ? 0.1 : 2.0 + i, 0, 0}));
    faces[5].t = 5;  // mark for order check
    auto out = filter_video(faces, {ref});
    CHECK(out.kept.size() == 7);
    CHECK(out.excluded_count == 3);
    CHECK(out.kept[2].t == 5);

    auto none = filter_video(faces, {});
    CHECK(none.kept.size() == 10);
    CHECK(none.excluded_count == 0);
}

TEST_CASE("faces without embeddings are kept and counted") {
    std::vector<FaceDetection> faces{face(std::nullopt), face(Embedding{0, 0}), face(std::nullopt)};
    auto out = filter_video(faces, {Embedding{0, 0}});
    CHECK(out.kept.size() == 2);
    CHECK(out.excluded_count == 1);
    CHECK(out.unmatched_no_embedding_count == 2);
}

TEST_CASE("partition, idempotence and threshold monotonicity on random inputs") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 4 + rng.uniform_int(8);
        std::vector<Embedding> refs;
        const std::size_t nref = rng.uniform_int(4);
        for (std::size_t i = 0; i < nref; ++i) refs.push_back(random_embedding(rng, dim, 0.3));
        std::vector<FaceDetection> faces;
        const std::size_t n = rng.uniform_int(60);
        for (std::size_t i = 0; i < n; ++i) {
            auto f = face(rng.bernoulli(0.9) ? std::optional<Embedding>(random_embedding(rng, dim, 0.4)) : std::nullopt);
            f.t = static_cast<double>(i);
            faces.push_back(f);
        }

        const FilterConfig cfg{0.3 + rng.uniform()};
        auto out = filter_video(faces, refs, cfg);
        CHECK(out.kept.size() + out.excluded_count == faces.size());
        // kept is an order-preserving subsequence and exactly the non-performers
        std::size_t k = 0;
        for (const auto& f : faces) {
            const bool perf = is_performer(f, refs, cfg);
            if (!perf) {
                REQUIRE(k < out.kept.size());
                CHECK(out.kept[k].t == f.t);
                ++k;
            }
        }
        CHECK(k == out.kept.size());

        CHECK(filter_video(out.kept, refs, cfg).excluded_count == 0);

        std::size_t prev = 0;
        for (double th = 0; th <= 3.0; th += 0.25) {
            const auto ex = filter_video(faces, refs, FilterConfig{th}).excluded_count;
            CHECK(ex >= prev);
            prev = ex;
        }

        FilterConfig serial = cfg;
        serial.parallel = false;
        CHECK(filter_video(faces, refs, serial).excluded_count == out.excluded_count);
    }
}

TEST_CASE("planted performer cluster is excluded exactly") {
    CorpusSpec spec;
    spec.days = {{Date(2020, 3, 1), 0.5, 3, 80}};
    spec.performer_spread = 0.1 / std::sqrt(16.0);
    spec.min_separation = 1.5;
    spec.seed = 99;
    const auto synth = generate_corpus(spec);
    const auto filtered = filter_corpus(synth.corpus);
    std::size_t planted = 0, excluded = 0;
    for (const auto& t : synth.truth.faces) planted += t.is_performer;
    for (const auto& [vid, out] : filtered) excluded += out.excluded_count;
    CHECK(planted == 3 * spec.performer_faces_per_video);
    CHECK(excluded == planted);
    for (const auto& [vid, out] : filtered)
        for (const auto& f : out.kept) CHECK_FALSE(is_performer(f, synth.corpus.performer_refs.at(vid)));
}
