#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsacap/mil.hpp"
#include "tsacap/tensor.hpp"

namespace tsacap {

// One video: per-frame and per-clip feature vectors, per-frame region grids,
// and at least one reference caption (whitespace-tokenized, lowercase).
struct VideoExample {
    std::string id;
    std::vector<std::vector<double>> frame_features;  // N_v x frame_dim
    std::vector<std::vector<double>> clip_features;   // N_v x clip_dim
    std::vector<RegionGrid> region_grids;             // N_v grids
    std::vector<std::vector<std::string>> captions;
};

struct CorpusHeader {
    std::size_t frames_per_video = 0;  // N_v, constant across the corpus
    std::size_t frame_dim = 0;
    std::size_t clip_dim = 0;
    std::size_t grid_size = 0;
    std::size_t region_dim = 0;
    // Planted attribute words, recorded by the synthetic generator; empty for
    // externally supplied corpora.
    std::vector<std::string> static_words;
    std::vector<std::string> dynamic_words;
};

struct Corpus {
    CorpusHeader header;
    std::vector<VideoExample> videos;
};

// v = concat(mean frame feature, mean clip feature).
Tensor encode_video(std::span<const std::vector<double>> frame_features,
                    std::span<const std::vector<double>> clip_features);
Tensor encode_video(const VideoExample& video);

// Line-delimited self-describing text format: a header record followed by one
// record per video. Loading validates per-record dimensions against the
// header and reports the offending line and field.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Prediction file for evaluation: "id<TAB>token token ..." per line.
void save_predictions(const std::vector<std::pair<std::string, std::vector<std::string>>>& predictions,
                      const std::string& path);
std::vector<std::pair<std::string, std::vector<std::string>>> load_predictions(const std::string& path);

// K most frequent caption tokens across the corpus (ties lexicographic),
// most frequent first. The attribute vocabulary for detector training.
std::vector<std::string> most_common_words(const Corpus& corpus, std::size_t k);

// Presence of each attribute word in any of the video's captions.
std::vector<std::uint8_t> attribute_labels(const VideoExample& video,
                                           std::span<const std::string> attribute_words);

// Image-style bags: one bag per frame, carrying the video-level labels.
std::vector<RegionBag> build_image_bags(const Corpus& corpus,
                                        std::span<const std::string> attribute_words);
// Video-style bags: one bag per video over all of its frames.
std::vector<RegionBag> build_video_bags(const Corpus& corpus,
                                        std::span<const std::string> attribute_words);

// ---------------------------------------------------------------------------
// Synthetic corpus generation.
//
// Each video gets a subject, a verb, and optionally an object. Subjects and
// objects are "static" attributes: every frame carries one strongly
// detectable region. Verbs are "dynamic" attributes: every frame carries one
// weakly detectable region, so a single frame stays below 0.5 under the
// planted detector while the whole-video bag pools above 0.9. Videos that do
// NOT carry a verb still get the same weak evidence in a few frames, which
// makes frames from positive and negative videos identically distributed --
// frame-level labels are inherently noisy while video-level bags separate.
// Captions are deterministic template realizations of the planted attributes.

struct SynthConfig {
    std::size_t n_videos = 20;
    std::size_t frames_per_video = 5;
    std::size_t grid_size = 3;
    std::size_t region_dim = 8;
    std::size_t frame_dim = 16;
    std::size_t clip_dim = 8;
    std::size_t n_subjects = 4;
    std::size_t n_objects = 2;
    std::size_t n_verbs = 2;
    std::size_t distractor_frames = 2;  // weak-evidence frames per absent verb
    std::size_t vocab_size = 0;         // 0 = derived from attribute counts
    double region_noise = 0.02;
    double feature_noise = 0.3;
    std::uint64_t seed = 1;
};

Corpus generate_synthetic_corpus(const SynthConfig& config);

// The generator's ground-truth detector: weight 2 on the attribute's own
// feature axis, bias -6. Attribute order is static_words then dynamic_words.
AttributeDetectors planted_detectors(const CorpusHeader& header);

}  // namespace tsacap
