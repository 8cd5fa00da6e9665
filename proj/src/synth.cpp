#include "maskwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "maskwatch/error.hpp"
#include "maskwatch/rng.hpp"
#include "maskwatch/text.hpp"

namespace maskwatch {

double EpidemicSpec::true_rt(std::size_t day) const {
    if (rt_profile.empty()) throw DomainError("empty R_t profile");
    return rt_profile[std::min(day, rt_profile.size() - 1)];
}

EpidemicResult generate_epidemic(const EpidemicSpec& spec) {
    if (spec.rt_profile.empty()) throw DomainError("empty R_t profile");
    for (double r : spec.rt_profile)
        if (!(r >= 0) || !std::isfinite(r)) throw DomainError("R_t profile must be finite and non-negative");
    for (long c : spec.seed_cases)
        if (c < 0) throw DomainError("negative seed cases");
    if (spec.horizon < spec.seed_cases.size()) throw DomainError("horizon shorter than the seed period");

    Rng rng(spec.seed);
    EpidemicResult out;
    out.incidence.country = spec.country;
    out.incidence.start_date = spec.start_date;
    auto& counts = out.incidence.counts;
    counts.reserve(spec.horizon);
    const auto& w = spec.si.weights;
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        out.true_rt.push_back(spec.true_rt(t));
        if (t < spec.seed_cases.size()) {
            counts.push_back(spec.seed_cases[t]);
            continue;
        }
        double lambda = 0;
        for (std::size_t k = 1; k <= t && k < w.size(); ++k) lambda += static_cast<double>(counts[t - k]) * w[k];
        counts.push_back(rng.poisson(spec.true_rt(t) * lambda));
    }

    const std::size_t tail = std::min(spec.si.support(), spec.horizon - spec.seed_cases.size());
    out.extinct = tail > 0 && std::all_of(counts.end() - static_cast<long>(tail), counts.end(), [](long c) { return c == 0; });
    return out;
}

namespace {

double q6(double v) { return std::strtod(fmt6(v).c_str(), nullptr); }
double q3(double v) { return std::round(v * 1000.0) / 1000.0; }

Embedding unit_direction(Rng& rng, std::size_t dim) {
    Embedding u(dim);
    double norm = 0;
    do {
        norm = 0;
        for (auto& v : u) {
            v = rng.normal();
            norm += v * v;
        }
    } while (norm == 0);
    norm = std::sqrt(norm);
    for (auto& v : u) v /= norm;
    return u;
}

Embedding offset_from(const Embedding& centre, const Embedding& offset) {
    Embedding e(centre.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = q6(centre[i] + offset[i]);
    return e;
}

Embedding performer_embedding(Rng& rng, const Embedding& centre, const CorpusSpec& spec) {
    Embedding off(centre.size());
    double norm = 0;
    for (auto& v : off) {
        v = rng.normal(0, spec.performer_spread);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    // Quantization can move a point by ~1e-6 per coordinate; keep a margin below threshold/2.
    const double cap = 0.45 * spec.threshold;
    if (spec.clean && norm > cap)
        for (auto& v : off) v *= cap / norm;
    return offset_from(centre, off);
}

Embedding crowd_embedding(Rng& rng, const Embedding& centre, const CorpusSpec& spec) {
    const auto u = unit_direction(rng, centre.size());
    const double radius = spec.min_separation + std::fabs(rng.normal(0, spec.crowd_spread));
    Embedding off(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) off[i] = u[i] * radius;
    return offset_from(centre, off);
}

FaceDetection make_face(Rng& rng, const std::string& vid, const CorpusSpec& spec, bool masked, Embedding emb) {
    FaceDetection f;
    f.video_id = vid;
    f.t = static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(std::max(1.0, std::floor(spec.duration_s)))));
    f.bbox.w = q3(0.03 + 0.09 * rng.uniform());
    f.bbox.h = q3(0.03 + 0.09 * rng.uniform());
    f.bbox.x = std::floor(rng.uniform() * (1.0 - f.bbox.w) * 1000.0) / 1000.0;
    f.bbox.y = std::floor(rng.uniform() * (1.0 - f.bbox.h) * 1000.0) / 1000.0;
    f.mask = masked ? MaskLabel::masked : MaskLabel::unmasked;
    f.det_conf = q3(0.5 + 0.5 * rng.uniform());
    f.mask_conf = q3(0.5 + 0.5 * rng.uniform());
    f.embedding = std::move(emb);
    return f;
}

void check_spec(const CorpusSpec& spec) {
    if (spec.embedding_dim == 0) throw DomainError("embedding_dim must be positive");
    if (!(spec.label_noise >= 0 && spec.label_noise <= 1)) throw DomainError("label_noise must lie in [0,1]");
    for (const auto& d : spec.days) {
        if (!(d.true_p >= 0 && d.true_p <= 1)) throw DomainError("true_p must lie in [0,1]");
        if (!(d.faces_per_video >= 0)) throw DomainError("faces_per_video must be >= 0");
    }
    if (!is_country_code(spec.country)) throw DomainError("unknown country code '" + spec.country + "'");
    if (spec.clean && !(spec.min_separation > 2 * spec.threshold))
        throw DomainError("clean mode needs min_separation > 2 * threshold");
    if (!(spec.duration_s > 0)) throw DomainError("duration_s must be positive");
}

} // namespace

SynthCorpus generate_corpus(const CorpusSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    SynthCorpus out;
    out.corpus.embedding_dim = spec.embedding_dim;

    Embedding centre(spec.embedding_dim);
    for (auto& v : centre) v = q6(rng.normal());

    std::size_t video_index = 0;
    for (const auto& day : spec.days) {
        out.truth.days.push_back({day.date, day.true_p});
        for (std::size_t k = 0; k < day.videos; ++k) {
            char id[32];
            std::snprintf(id, sizeof id, "v%05zu", ++video_index);
            const std::string vid = id;

            VideoMeta meta;
            meta.video_id = vid;
            meta.channel_id = spec.channel;
            meta.country = spec.country;
            meta.recorded_date = day.date;
            meta.duration_s = spec.duration_s;
            meta.detections_path = std::filesystem::path("detections") / (vid + ".jsonl");
            meta.performer_refs_path = std::filesystem::path("performer_refs") / (vid + ".jsonl");
            out.corpus.videos.push_back(meta);

            struct Planted {
                FaceDetection face;
                FaceTruth truth;
            };
            std::vector<Planted> faces;
            const long crowd = rng.poisson(day.faces_per_video);
            for (long i = 0; i < crowd; ++i) {
                const bool truth = rng.bernoulli(day.true_p);
                const bool label = rng.bernoulli(spec.label_noise) ? !truth : truth;
                faces.push_back({make_face(rng, vid, spec, label, crowd_embedding(rng, centre, spec)), {{}, false, truth}});
            }
            for (std::size_t i = 0; i < spec.performer_faces_per_video; ++i) {
                const bool label = rng.bernoulli(spec.label_noise);
                faces.push_back({make_face(rng, vid, spec, label, performer_embedding(rng, centre, spec)), {{}, true, false}});
            }
            std::stable_sort(faces.begin(), faces.end(),
                             [](const Planted& a, const Planted& b) { return a.face.t < b.face.t; });

            auto& dets = out.corpus.detections[vid];
            for (std::size_t i = 0; i < faces.size(); ++i) {
                faces[i].truth.face_id = vid + ":" + std::to_string(i);
                dets.push_back(std::move(faces[i].face));
                out.truth.faces.push_back(std::move(faces[i].truth));
            }
            auto& refs = out.corpus.performer_refs[vid];
            for (std::size_t i = 0; i < spec.performer_refs_per_video; ++i)
                refs.push_back(performer_embedding(rng, centre, spec));
        }
    }
    return out;
}

void write_ground_truth(std::ostream& faces_out, std::ostream& days_out, const GroundTruth& truth) {
    faces_out << "face_id,is_performer,true_mask\n";
    for (const auto& f : truth.faces) faces_out << f.face_id << ',' << int(f.is_performer) << ',' << int(f.true_mask) << '\n';
    days_out << "day,true_p\n";
    for (const auto& d : truth.days) days_out << d.date.str() << ',' << fmt6(d.true_p) << '\n';
}

namespace {

std::ofstream create(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    return out;
}

} // namespace

std::filesystem::path write_synth_corpus(const SynthCorpus& synth, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "detections", ec);
    std::filesystem::create_directories(dir / "performer_refs", ec);
    if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());

    for (const auto& v : synth.corpus.videos) {
        auto out = create(dir / v.detections_path);
        if (auto it = synth.corpus.detections.find(v.video_id); it != synth.corpus.detections.end())
            for (const auto& f : it->second) out << serialize_detection(f) << '\n';
        if (v.performer_refs_path) {
            auto rout = create(dir / *v.performer_refs_path);
            if (auto it = synth.corpus.performer_refs.find(v.video_id); it != synth.corpus.performer_refs.end())
                for (const auto& r : it->second) rout << serialize_performer_ref(v.video_id, r) << '\n';
        }
    }
    const auto manifest = dir / "manifest.csv";
    {
        auto out = create(manifest);
        write_manifest(out, synth.corpus);
    }
    auto faces = create(dir / "ground_truth.csv");
    auto days = create(dir / "ground_truth_days.csv");
    write_ground_truth(faces, days, synth.truth);
    return manifest;
}

std::filesystem::path write_synth_epidemic(const EpidemicResult& epi, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
    const auto cases = dir / "cases.csv";
    {
        auto out = create(cases);
        write_cases(out, epi.incidence);
    }
    auto out = create(dir / "true_rt.csv");
    out << "date,true_rt\n";
    for (std::size_t i = 0; i < epi.true_rt.size(); ++i)
        out << epi.incidence.date_at(i).str() << ',' << fmt6(epi.true_rt[i]) << '\n';
    return cases;
}

} // namespace maskwatch
