#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maskwatch/date.hpp"
#include "maskwatch/records.hpp"
#include "maskwatch/rt.hpp"

namespace maskwatch {

// ---- renewal epidemics -------------------------------------------------------------

struct EpidemicSpec {
    std::vector<double> rt_profile;   // true R_t per day; the last value extends to the horizon
    std::vector<long> seed_cases{10};  // incidence of the first days, copied verbatim
    SerialInterval si = make_serial_interval();
    std::size_t horizon = 120;
    Date start_date{2020, 1, 1};
    std::string country = "KR";
    std::uint64_t seed = 1;

    double true_rt(std::size_t day) const;
};

struct EpidemicResult {
    IncidenceSeries incidence;
    std::vector<double> true_rt;  // per day, same length as incidence
    bool extinct = false;         // no cases over the last SI-support days
};

/// I_t ~ Poisson(R_t * Lambda_t) after the seed days.
EpidemicResult generate_epidemic(const EpidemicSpec& spec);

// ---- detection corpora -------------------------------------------------------------

struct CorpusDay {
    Date date;
    double true_p = 0.5;             // probability a crowd face is masked
    std::size_t videos = 1;
    double faces_per_video = 100;    // Poisson mean of crowd faces per video
};

struct CorpusSpec {
    std::vector<CorpusDay> days;
    std::string country = "KR";
    std::string channel = "synth";
    std::size_t embedding_dim = 16;
    double performer_spread = 0.05;   // sigma of performer offsets from the cluster centre
    std::size_t performer_faces_per_video = 20;
    std::size_t performer_refs_per_video = 3;
    double crowd_spread = 0.5;        // sigma of crowd radius beyond the minimum separation
    double min_separation = 1.5;      // crowd faces sit at least this far from the centre
    double label_noise = 0.0;
    double duration_s = 600;
    bool clean = true;                // clamp performer offsets to threshold/2
    double threshold = 0.6;           // filter threshold the clean-mode geometry is built for
    std::uint64_t seed = 1;
};

struct FaceTruth {
    std::string face_id;  // "<video_id>:<index in the video's detection list>"
    bool is_performer = false;
    bool true_mask = false;  // label before noise
};

struct DayTruth {
    Date date;
    double true_p = 0;
};

struct GroundTruth {
    std::vector<FaceTruth> faces;
    std::vector<DayTruth> days;
};

struct SynthCorpus {
    Corpus corpus;
    GroundTruth truth;
};

/// Crowd faces masked with probability p_d (then flipped with label_noise); performer faces
/// planted in every video around one cluster centre. Detection/ref paths are set relative
/// to the output directory ("detections/<id>.jsonl", "performer_refs/<id>.jsonl").
SynthCorpus generate_corpus(const CorpusSpec& spec);

/// Writes manifest.csv, detection and performer-ref JSONL, ground_truth.csv and
/// ground_truth_days.csv under `dir`. Returns the manifest path.
std::filesystem::path write_synth_corpus(const SynthCorpus& synth, const std::filesystem::path& dir);

/// Writes cases.csv and true_rt.csv under `dir`. Returns the cases path.
std::filesystem::path write_synth_epidemic(const EpidemicResult& epi, const std::filesystem::path& dir);

void write_ground_truth(std::ostream& faces_out, std::ostream& days_out, const GroundTruth& truth);

} // namespace maskwatch
