#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "maskwatch/records.hpp"

namespace maskwatch {

struct FilterConfig {
    double threshold = 0.6;  // Euclidean; a face at distance <= threshold from any reference is excluded
    bool parallel = true;
};

struct FilterOutcome {
    std::vector<FaceDetection> kept;
    std::size_t excluded_count = 0;
    std::size_t unmatched_no_embedding_count = 0;
};

double embedding_distance(const Embedding& a, const Embedding& b);

bool is_performer(const FaceDetection& face, const std::vector<Embedding>& refs, const FilterConfig& cfg = {});

/// Drops performer faces from one video's detections, preserving order. Faces without an
/// embedding are always kept.
FilterOutcome filter_video(const std::vector<FaceDetection>& detections, const std::vector<Embedding>& refs,
                           const FilterConfig& cfg = {});

/// filter_video for every loaded video, keyed by video_id.
std::map<std::string, FilterOutcome> filter_corpus(const Corpus& corpus, const FilterConfig& cfg = {});

} // namespace maskwatch
