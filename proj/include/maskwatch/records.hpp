#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maskwatch/date.hpp"

namespace maskwatch {

using Embedding = std::vector<double>;

inline constexpr std::size_t kDefaultEmbeddingDim = 128;

enum class MaskLabel { masked, unmasked };

struct BoundingBox {
    double x = 0, y = 0, w = 0, h = 0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One detected face in one sampled frame.
struct FaceDetection {
    std::string video_id;
    double t = 0;  // seconds from video start
    BoundingBox bbox;
    MaskLabel mask = MaskLabel::unmasked;
    double det_conf = 0;
    double mask_conf = 0;
    std::optional<Embedding> embedding;

    friend bool operator==(const FaceDetection&, const FaceDetection&) = default;
};

struct VideoMeta {
    std::string video_id;
    std::string channel_id;
    std::string country;  // ISO 3166-1 alpha-2
    Date recorded_date;
    double duration_s = 0;
    std::filesystem::path detections_path;
    std::optional<std::filesystem::path> performer_refs_path;

    friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

/// Video metadata plus (once loaded) per-video detections and performer references.
/// Treated as immutable after construction.
struct Corpus {
    std::vector<VideoMeta> videos;
    std::size_t embedding_dim = kDefaultEmbeddingDim;
    std::map<std::string, std::vector<FaceDetection>> detections;
    std::map<std::string, std::vector<Embedding>> performer_refs;

    const VideoMeta* find(const std::string& video_id) const;
};

struct IncidenceSeries {
    std::string country;
    Date start_date;
    std::vector<long> counts;

    Date date_at(std::size_t i) const { return start_date + static_cast<long>(i); }
    Date end_date() const { return start_date + static_cast<long>(counts.size()) - 1; }
    std::optional<std::size_t> index_of(Date d) const;
};

enum class SurveySource { yougov, facebook };
enum class SurveyAnswer { always, frequently, sometimes, rarely, not_at_all };

struct YouGovRow {
    Date week_start;
    std::string respondent_id;
    SurveyAnswer answer;
};

struct FacebookRow {
    Date week_start;
    double rate;
};

struct SurveyResponses {
    SurveySource source = SurveySource::yougov;
    std::vector<YouGovRow> yougov;
    std::vector<FacebookRow> facebook;
};

struct StudyWindow {
    Date first{2019, 12, 1};
    Date last{2020, 12, 31};

    bool contains(Date d) const { return first <= d && d <= last; }
};

enum class WarningKind { zero_detections, missing_performer_refs, outside_window };

struct VideoWarning {
    std::string video_id;
    WarningKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<VideoWarning> warnings;
    std::size_t video_count = 0;
    std::size_t face_count = 0;
    double hours = 0;
};

bool is_country_code(const std::string& code);

/// Newline-delimited JSON detections. Empty lines are skipped. When `expected_dim` is
/// unset the first embedding fixes the dimension for the rest of the stream.
std::vector<FaceDetection> parse_detections(std::istream& in,
                                            std::optional<std::size_t> expected_dim = std::nullopt);

/// Manifest CSV. Relative paths are resolved against `base_dir`.
Corpus parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});

/// Performer reference JSONL: {"video_id": ..., "embedding": [...]}.
std::vector<Embedding> parse_performer_refs(std::istream& in, std::size_t expected_dim,
                                            const std::string& video_id = {});

IncidenceSeries parse_cases(std::istream& in, const std::string& country, bool allow_gaps = false);

/// yougov: week_start,respondent_id,answer   facebook: week_start,rate
SurveyResponses parse_survey(std::istream& in, SurveySource source);

/// Reads the manifest at `path` and every detection/performer file it names.
Corpus load_corpus(const std::filesystem::path& manifest_path);

/// Fills detections and performer references for all videos in `meta_only`.
Corpus load_corpus_data(Corpus meta_only);

ValidationReport validate_corpus(const Corpus& corpus, const StudyWindow& window = {});

// Canonical serialization; parse(serialize(x)) == x.
std::string serialize_detection(const FaceDetection& face);
std::string serialize_performer_ref(const std::string& video_id, const Embedding& e);
void write_manifest(std::ostream& out, const Corpus& corpus, const std::filesystem::path& base_dir = {});
void write_cases(std::ostream& out, const IncidenceSeries& series);

const char* to_string(MaskLabel m);
const char* to_string(WarningKind k);
const char* to_string(SurveyAnswer a);

} // namespace maskwatch
