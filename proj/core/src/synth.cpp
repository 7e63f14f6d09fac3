#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tsacap/corpus.hpp"
#include "tsacap/errors.hpp"
#include "tsacap/rng.hpp"

namespace tsacap {

namespace {

const std::vector<std::string> kSubjectPool = {"dog",    "girl",  "man",   "bird",
                                               "horse",  "monkey", "woman", "boy"};
const std::vector<std::string> kObjectPool = {"ball", "guitar", "piano", "rope", "food", "kite"};
const std::vector<std::string> kVerbPool = {"running", "jumping", "playing",
                                            "dancing", "eating",  "riding"};

constexpr double kPlantedWeight = 2.0;
constexpr double kPlantedBias = -6.0;
constexpr double kStaticProb = 0.98;   // per-region detection of a planted static attribute
constexpr double kDynamicProb = 0.42;  // weak per-region detection of a planted dynamic attribute

double planted_feature_value(double prob) { return (logit(prob) - kPlantedBias) / kPlantedWeight; }

struct Scene {
    std::size_t subject;            // index into subjects
    std::size_t verb;               // index into verbs
    std::size_t object;             // index into objects, or npos
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

std::vector<std::string> caption_for(const Scene& s, const std::vector<std::string>& subjects,
                                     const std::vector<std::string>& verbs,
                                     const std::vector<std::string>& objects) {
    std::vector<std::string> caption = {"a", subjects[s.subject], "is", verbs[s.verb]};
    if (s.object != Scene::npos) {
        caption.push_back("the");
        caption.push_back(objects[s.object]);
    }
    return caption;
}

}  // namespace

AttributeDetectors planted_detectors(const CorpusHeader& header) {
    AttributeDetectors d;
    d.attribute_words = header.static_words;
    d.attribute_words.insert(d.attribute_words.end(), header.dynamic_words.begin(),
                             header.dynamic_words.end());
    const std::size_t attrs = d.attribute_words.size();
    if (attrs > header.region_dim)
        throw DataError("planted_detectors: " + std::to_string(attrs) + " attributes exceed region_dim " +
                        std::to_string(header.region_dim));
    d.weights = Tensor({header.region_dim, attrs});
    for (std::size_t a = 0; a < attrs; ++a) d.weights.at(a, a) = kPlantedWeight;
    d.bias = Tensor::full({attrs}, kPlantedBias);
    return d;
}

Corpus generate_synthetic_corpus(const SynthConfig& config) {
    if (config.n_videos == 0) throw DataError("generate_synthetic_corpus: n_videos must be positive");
    if (config.frames_per_video == 0 || config.grid_size == 0 || config.region_dim == 0 ||
        config.frame_dim == 0 || config.clip_dim == 0)
        throw DataError("generate_synthetic_corpus: dimensions must be positive");
    if (config.n_subjects == 0 || config.n_verbs == 0)
        throw DataError("generate_synthetic_corpus: need at least one subject and one verb");
    if (config.n_subjects > kSubjectPool.size() || config.n_objects > kObjectPool.size() ||
        config.n_verbs > kVerbPool.size())
        throw DataError("generate_synthetic_corpus: attribute count exceeds built-in word pool");
    const std::size_t n_static = config.n_subjects + config.n_objects;
    const std::size_t n_attrs = n_static + config.n_verbs;
    if (n_attrs > config.region_dim)
        throw DataError("generate_synthetic_corpus: " + std::to_string(n_attrs) +
                        " attributes need region_dim >= " + std::to_string(n_attrs) + ", got " +
                        std::to_string(config.region_dim));
    if (config.distractor_frames >= config.frames_per_video)
        throw DataError("generate_synthetic_corpus: distractor_frames must be < frames_per_video");
    // 3 reserved ids, 3 template words, one word per attribute.
    const std::size_t needed_vocab = 3 + 3 + n_attrs;
    if (config.vocab_size != 0 && config.vocab_size < needed_vocab)
        throw DataError("generate_synthetic_corpus: vocab_size " + std::to_string(config.vocab_size) +
                        " cannot hold reserved tokens plus " + std::to_string(n_attrs) + " attributes (need " +
                        std::to_string(needed_vocab) + ")");

    std::vector<std::string> subjects(kSubjectPool.begin(), kSubjectPool.begin() + config.n_subjects);
    std::vector<std::string> objects(kObjectPool.begin(), kObjectPool.begin() + config.n_objects);
    std::vector<std::string> verbs(kVerbPool.begin(), kVerbPool.begin() + config.n_verbs);

    std::vector<Scene> combos;
    for (std::size_t s = 0; s < subjects.size(); ++s)
        for (std::size_t v = 0; v < verbs.size(); ++v) {
            combos.push_back({s, v, Scene::npos});
            for (std::size_t o = 0; o < objects.size(); ++o) combos.push_back({s, v, o});
        }
    if (config.n_videos > combos.size())
        throw DataError("generate_synthetic_corpus: " + std::to_string(config.n_videos) +
                        " videos requested but only " + std::to_string(combos.size()) +
                        " distinct attribute combinations exist");

    Rng rng(config.seed);
    rng.shuffle(combos);
    combos.resize(config.n_videos);

    Corpus corpus;
    corpus.header.frames_per_video = config.frames_per_video;
    corpus.header.frame_dim = config.frame_dim;
    corpus.header.clip_dim = config.clip_dim;
    corpus.header.grid_size = config.grid_size;
    corpus.header.region_dim = config.region_dim;
    corpus.header.static_words = subjects;
    corpus.header.static_words.insert(corpus.header.static_words.end(), objects.begin(), objects.end());
    corpus.header.dynamic_words = verbs;

    const double static_value = planted_feature_value(kStaticProb);
    const double dynamic_value = planted_feature_value(kDynamicProb);
    const std::size_t regions = config.grid_size * config.grid_size;
    // Attribute axes: subjects, then objects, then verbs.
    const auto subject_axis = [&](std::size_t s) { return s; };
    const auto object_axis = [&](std::size_t o) { return config.n_subjects + o; };
    const auto verb_axis = [&](std::size_t v) { return n_static + v; };

    for (std::size_t vi = 0; vi < combos.size(); ++vi) {
        const Scene& scene = combos[vi];
        VideoExample video;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "v%03zu", vi);
        video.id = idbuf;
        video.captions.push_back(caption_for(scene, subjects, verbs, objects));

        // Frames carrying weak evidence for each verb the video does not
        // show. The evidence itself is identical to a positive video's, so a
        // single frame cannot tell them apart; only the count across frames
        // differs.
        std::vector<std::vector<std::size_t>> distractor_frames(verbs.size());
        for (std::size_t v = 0; v < verbs.size(); ++v) {
            if (v == scene.verb) continue;
            std::vector<std::size_t> frames(config.frames_per_video);
            for (std::size_t f = 0; f < frames.size(); ++f) frames[f] = f;
            rng.shuffle(frames);
            frames.resize(config.distractor_frames);
            distractor_frames[v] = std::move(frames);
        }

        for (std::size_t f = 0; f < config.frames_per_video; ++f) {
            RegionGrid grid;
            grid.grid_size = config.grid_size;
            grid.region_dim = config.region_dim;
            grid.features.resize(regions * config.region_dim);
            for (double& x : grid.features) x = rng.normal(0.0, config.region_noise);

            std::vector<std::pair<std::size_t, double>> signals;  // (axis, value)
            signals.emplace_back(subject_axis(scene.subject), static_value);
            if (scene.object != Scene::npos) signals.emplace_back(object_axis(scene.object), static_value);
            signals.emplace_back(verb_axis(scene.verb), dynamic_value);
            for (std::size_t v = 0; v < verbs.size(); ++v)
                for (std::size_t df : distractor_frames[v])
                    if (df == f) signals.emplace_back(verb_axis(v), dynamic_value);

            // Distinct region slot per signal.
            std::vector<std::size_t> slots(regions);
            for (std::size_t r = 0; r < regions; ++r) slots[r] = r;
            rng.shuffle(slots);
            if (signals.size() > slots.size())
                throw DataError("generate_synthetic_corpus: grid too small for planted signals");
            for (std::size_t s = 0; s < signals.size(); ++s)
                grid.region(slots[s])[signals[s].first] += signals[s].second;

            video.region_grids.push_back(std::move(grid));

            std::vector<double> frame_feat(config.frame_dim);
            for (double& x : frame_feat) x = rng.normal(0.0, config.feature_noise);
            video.frame_features.push_back(std::move(frame_feat));
            std::vector<double> clip_feat(config.clip_dim);
            for (double& x : clip_feat) x = rng.normal(0.0, config.feature_noise);
            video.clip_features.push_back(std::move(clip_feat));
        }
        corpus.videos.push_back(std::move(video));
    }

    // Construction check: under the planted detector, a present verb is weak
    // in every single frame but strong over the whole bag.
    AttributeDetectors oracle = planted_detectors(corpus.header);
    for (std::size_t vi = 0; vi < corpus.videos.size(); ++vi) {
        const VideoExample& video = corpus.videos[vi];
        const std::size_t axis = verb_axis(combos[vi].verb);
        double log_miss = 0.0;
        for (const RegionGrid& grid : video.region_grids) {
            Tensor probs = region_probabilities(grid, oracle);
            std::vector<double> column(probs.rows());
            for (std::size_t r = 0; r < probs.rows(); ++r) column[r] = probs.at(r, axis);
            const double frame_prob = noisy_or_image(column);
            if (frame_prob >= 0.5)
                throw NumericError("generate_synthetic_corpus: planted dynamic evidence too strong in one "
                                   "frame of " + video.id);
            for (double p : column) log_miss += std::log(1.0 - std::min(p, 1.0 - kProbFloor));
        }
        if (1.0 - std::exp(log_miss) <= 0.9)
            throw NumericError("generate_synthetic_corpus: planted dynamic evidence too weak over the bag "
                               "of " + video.id);
    }

    return corpus;
}

}  // namespace tsacap
