#include "maskwatch/performer_filter.hpp"

#include <algorithm>
#include <limits>

#include "maskwatch/error.hpp"
#include "maskwatch/kernels.hpp"

namespace maskwatch {

namespace {

void check_threshold(const FilterConfig& cfg) {
    if (!(cfg.threshold >= 0)) throw DomainError("performer threshold must be >= 0");
}

std::size_t ref_dim(const std::vector<Embedding>& refs) {
    const std::size_t d = refs.front().size();
    for (const auto& r : refs)
        if (r.size() != d) throw DomainError("performer references differ in length");
    return d;
}

} // namespace

double embedding_distance(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size())
        throw DomainError("embedding length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    return kernels::euclidean(a, b);
}

bool is_performer(const FaceDetection& face, const std::vector<Embedding>& refs, const FilterConfig& cfg) {
    check_threshold(cfg);
    if (refs.empty() || !face.embedding) return false;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : refs) best = std::min(best, embedding_distance(*face.embedding, r));
    return best <= cfg.threshold;
}

FilterOutcome filter_video(const std::vector<FaceDetection>& detections, const std::vector<Embedding>& refs,
                           const FilterConfig& cfg) {
    check_threshold(cfg);
    FilterOutcome out;
    for (const auto& d : detections)
        if (!d.embedding) ++out.unmatched_no_embedding_count;
    if (refs.empty()) {
        out.kept = detections;
        return out;
    }

    const std::size_t dim = ref_dim(refs);
    std::vector<double> ref_buf;
    ref_buf.reserve(refs.size() * dim);
    for (const auto& r : refs) ref_buf.insert(ref_buf.end(), r.begin(), r.end());

    std::vector<double> face_buf;
    std::vector<std::size_t> with_embedding;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const auto& e = detections[i].embedding;
        if (!e) continue;
        if (e->size() != dim)
            throw DomainError("face embedding length " + std::to_string(e->size()) + " != reference length " +
                              std::to_string(dim));
        face_buf.insert(face_buf.end(), e->begin(), e->end());
        with_embedding.push_back(i);
    }

    const auto dist = cfg.parallel ? kernels::omp::min_ref_distances(face_buf, ref_buf, dim)
                                   : kernels::serial::min_ref_distances(face_buf, ref_buf, dim);
    std::vector<bool> excluded(detections.size(), false);
    for (std::size_t j = 0; j < with_embedding.size(); ++j)
        if (dist[j] <= cfg.threshold) excluded[with_embedding[j]] = true;

    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (excluded[i]) ++out.excluded_count;
        else out.kept.push_back(detections[i]);
    }
    return out;
}

std::map<std::string, FilterOutcome> filter_corpus(const Corpus& corpus, const FilterConfig& cfg) {
    static const std::vector<FaceDetection> no_faces;
    static const std::vector<Embedding> no_refs;
    std::map<std::string, FilterOutcome> out;
    for (const auto& v : corpus.videos) {
        auto dit = corpus.detections.find(v.video_id);
        auto rit = corpus.performer_refs.find(v.video_id);
        out.emplace(v.video_id, filter_video(dit == corpus.detections.end() ? no_faces : dit->second,
                                             rit == corpus.performer_refs.end() ? no_refs : rit->second, cfg));
    }
    return out;
}

} // namespace maskwatch
