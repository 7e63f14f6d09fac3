// tsacap: corpus generation, attribute-detector and captioner training,
// decoding, evaluation and gradient checking for the two-source attribute
// captioning pipeline.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsacap/checkpoint.hpp"
#include "tsacap/corpus.hpp"
#include "tsacap/decode.hpp"
#include "tsacap/errors.hpp"
#include "tsacap/metrics.hpp"
#include "tsacap/mil.hpp"
#include "tsacap/model.hpp"
#include "tsacap/optim.hpp"
#include "tsacap/rng.hpp"
#include "tsacap/vocab.hpp"

using json = nlohmann::json;
using namespace tsacap;

namespace {

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// gen-corpus

struct GenCorpusArgs {
    std::string out;
    SynthConfig cfg;
};

int run_gen_corpus(const GenCorpusArgs& a) {
    Corpus corpus = generate_synthetic_corpus(a.cfg);
    save_corpus(corpus, a.out);
    std::printf("videos\t%zu\n", corpus.videos.size());
    std::printf("frames_per_video\t%zu\n", corpus.header.frames_per_video);
    std::printf("static_attributes\t%zu\n", corpus.header.static_words.size());
    std::printf("dynamic_attributes\t%zu\n", corpus.header.dynamic_words.size());
    return 0;
}

// ---------------------------------------------------------------------------
// train-mil

struct TrainMilArgs {
    std::string corpus;
    std::string out;
    std::string domain;  // "image" or "video"
    std::size_t attributes = 16;
    MilConfig cfg;
};

AttributeDetectors detectors_from_checkpoint(const Checkpoint& ckpt) {
    AttributeDetectors d;
    d.attribute_words = ckpt.attribute_words;
    d.weights = ckpt.params.at("mil.weights");
    d.bias = ckpt.params.at("mil.bias");
    if (d.weights.cols() != d.attribute_words.size() || d.bias.size() != d.attribute_words.size())
        throw DataError("detector checkpoint: parameter shapes do not match the attribute list");
    return d;
}

// Accuracy over the model's own bag unit, split by attribute kind when the
// corpus records which words were planted as static/dynamic.
void print_accuracy_report(const std::vector<RegionBag>& bags, const AttributeDetectors& detectors,
                           const CorpusHeader& header) {
    std::printf("bag_accuracy\t%.10g\n", bag_accuracy(bags, detectors));
    std::vector<std::size_t> static_idx, dynamic_idx;
    for (std::size_t a = 0; a < detectors.attribute_words.size(); ++a) {
        const std::string& w = detectors.attribute_words[a];
        for (const auto& s : header.static_words)
            if (s == w) static_idx.push_back(a);
        for (const auto& s : header.dynamic_words)
            if (s == w) dynamic_idx.push_back(a);
    }
    if (!static_idx.empty())
        std::printf("static_bag_accuracy\t%.10g\n", bag_accuracy(bags, detectors, static_idx));
    if (!dynamic_idx.empty())
        std::printf("dynamic_bag_accuracy\t%.10g\n", bag_accuracy(bags, detectors, dynamic_idx));
}

int run_train_mil(const TrainMilArgs& a) {
    if (a.domain != "image" && a.domain != "video")
        throw UsageError("--domain must be 'image' or 'video'");
    Corpus corpus = load_corpus(a.corpus);
    std::vector<std::string> words = most_common_words(corpus, a.attributes);
    std::vector<RegionBag> bags =
        a.domain == "image" ? build_image_bags(corpus, words) : build_video_bags(corpus, words);
    MilTrainResult trained = train_mil(bags, words, corpus.header.region_dim, a.cfg);

    Checkpoint ckpt;
    ckpt.kind = a.domain == "image" ? "mil-image" : "mil-video";
    ckpt.config_json = json{{"command", "train-mil"},
                            {"domain", a.domain},
                            {"attributes", a.attributes},
                            {"epochs", a.cfg.epochs},
                            {"lr", a.cfg.learning_rate},
                            {"clip", a.cfg.clip_norm},
                            {"init_bias", a.cfg.init_bias},
                            {"seed", a.cfg.seed},
                            {"region_dim", corpus.header.region_dim}}
                           .dump();
    ckpt.attribute_words = trained.detectors.attribute_words;
    ckpt.params["mil.weights"] = trained.detectors.weights;
    ckpt.params["mil.bias"] = trained.detectors.bias;
    save_checkpoint(ckpt, a.out);

    std::printf("final_loss\t%.10g\n", trained.epoch_losses.back());
    print_accuracy_report(bags, trained.detectors, corpus.header);
    return 0;
}

// ---------------------------------------------------------------------------
// train-caption

struct TrainCaptionArgs {
    std::string corpus;
    std::string out;
    std::string variant = "iv3";
    std::string mil_image;
    std::string mil_video;
    std::size_t embed = 64;
    std::size_t hidden = 64;
    std::size_t vocab_size = 0;  // 0 = every corpus token
    std::uint64_t seed = 1;
    CaptionTrainConfig cfg;
};

struct LoadedDetectors {
    std::optional<AttributeDetectors> image;
    std::optional<AttributeDetectors> video;
};

LoadedDetectors load_detectors(FusionVariant variant, const std::string& mil_image,
                               const std::string& mil_video, std::size_t region_dim) {
    LoadedDetectors out;
    if (fusion_uses_image(variant)) {
        if (mil_image.empty())
            throw UsageError("variant " + fusion_tag(variant) + " requires --mil-image");
        Checkpoint ckpt = load_checkpoint(mil_image);
        if (ckpt.kind != "mil-image")
            throw DataError("--mil-image checkpoint has kind '" + ckpt.kind + "', expected 'mil-image'");
        out.image = detectors_from_checkpoint(ckpt);
        if (out.image->region_dim() != region_dim)
            throw DataError("--mil-image detectors expect region_dim " +
                            std::to_string(out.image->region_dim()) + ", corpus has " +
                            std::to_string(region_dim));
    }
    if (fusion_uses_video(variant)) {
        if (mil_video.empty())
            throw UsageError("variant " + fusion_tag(variant) + " requires --mil-video");
        Checkpoint ckpt = load_checkpoint(mil_video);
        if (ckpt.kind != "mil-video")
            throw DataError("--mil-video checkpoint has kind '" + ckpt.kind + "', expected 'mil-video'");
        out.video = detectors_from_checkpoint(ckpt);
        if (out.video->region_dim() != region_dim)
            throw DataError("--mil-video detectors expect region_dim " +
                            std::to_string(out.video->region_dim()) + ", corpus has " +
                            std::to_string(region_dim));
    }
    return out;
}

std::vector<TrainingExample> make_examples(const Corpus& corpus, const Vocabulary& vocab,
                                           const LoadedDetectors& det) {
    std::vector<TrainingExample> examples;
    for (const VideoExample& v : corpus.videos) {
        TrainingExample base;
        base.video = encode_video(v);
        if (det.image) base.attr_image = image_attribute_representation(v.region_grids, *det.image);
        if (det.video) base.attr_video = video_attribute_representation(v.region_grids, *det.video);
        for (const auto& caption : v.captions) {
            TrainingExample ex = base;
            ex.caption = vocab.encode(caption);
            examples.push_back(std::move(ex));
        }
    }
    return examples;
}

int run_train_caption(const TrainCaptionArgs& a) {
    const FusionVariant variant = fusion_from_tag(a.variant);
    Corpus corpus = load_corpus(a.corpus);
    LoadedDetectors det = load_detectors(variant, a.mil_image, a.mil_video, corpus.header.region_dim);

    std::vector<std::vector<std::string>> captions;
    for (const VideoExample& v : corpus.videos)
        captions.insert(captions.end(), v.captions.begin(), v.captions.end());
    const std::size_t k = a.vocab_size == 0 ? static_cast<std::size_t>(-1) : a.vocab_size;
    Vocabulary vocab = build_vocabulary(captions, k);

    ModelDims dims;
    dims.embed = a.embed;
    dims.hidden = a.hidden;
    dims.video = corpus.header.frame_dim + corpus.header.clip_dim;
    dims.attr_image = det.image ? det.image->attribute_count() : 0;
    dims.attr_video = det.video ? det.video->attribute_count() : 0;
    dims.vocab = vocab.size();

    CaptionModel model(dims, variant, a.seed);
    std::vector<TrainingExample> examples = make_examples(corpus, vocab, det);
    CaptionTrainResult result = train_captioner(model, examples, a.cfg);

    Checkpoint ckpt;
    ckpt.kind = "caption-model";
    ckpt.config_json = json{{"command", "train-caption"},
                            {"variant", a.variant},
                            {"embed", dims.embed},
                            {"hidden", dims.hidden},
                            {"video_dim", dims.video},
                            {"attr_image", dims.attr_image},
                            {"attr_video", dims.attr_video},
                            {"vocab", dims.vocab},
                            {"vocab_size_flag", a.vocab_size},
                            {"epochs", a.cfg.epochs},
                            {"lr", a.cfg.learning_rate},
                            {"clip", a.cfg.clip_norm},
                            {"seed", a.seed}}
                           .dump();
    ckpt.vocab_words = vocab.tokens();
    ckpt.params = model.params();
    save_checkpoint(ckpt, a.out);

    std::printf("final_loss\t%.10g\n", result.epoch_losses.back());
    std::printf("final_per_token_loss\t%.10g\n", result.epoch_token_losses.back());
    return 0;
}

// ---------------------------------------------------------------------------
// caption

struct CaptionArgs {
    std::string corpus;
    std::string model;
    std::string mil_image;
    std::string mil_video;
    std::string out;
    std::size_t beam = 4;
    std::size_t max_len = 20;
    bool greedy = false;
};

struct LoadedModel {
    ModelDims dims;
    FusionVariant variant = FusionVariant::kNone;
    std::optional<CaptionModel> model;
    Vocabulary vocab;
};

LoadedModel load_caption_model(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.kind != "caption-model")
        throw DataError("checkpoint '" + path + "' has kind '" + ckpt.kind + "', expected 'caption-model'");
    json cfg = json::parse(ckpt.config_json);
    LoadedModel lm;
    lm.variant = fusion_from_tag(cfg.at("variant").get<std::string>());
    lm.dims.embed = cfg.at("embed").get<std::size_t>();
    lm.dims.hidden = cfg.at("hidden").get<std::size_t>();
    lm.dims.video = cfg.at("video_dim").get<std::size_t>();
    lm.dims.attr_image = cfg.at("attr_image").get<std::size_t>();
    lm.dims.attr_video = cfg.at("attr_video").get<std::size_t>();
    lm.dims.vocab = cfg.at("vocab").get<std::size_t>();
    if (ckpt.vocab_words.size() != lm.dims.vocab)
        throw DataError("checkpoint '" + path + "': vocabulary has " +
                        std::to_string(ckpt.vocab_words.size()) + " tokens, config declares " +
                        std::to_string(lm.dims.vocab));
    if (ckpt.vocab_words.size() < 3)
        throw DataError("checkpoint '" + path + "': vocabulary misses reserved tokens");
    lm.vocab = Vocabulary(
        std::vector<std::string>(ckpt.vocab_words.begin() + 3, ckpt.vocab_words.end()));
    lm.model.emplace(lm.dims, lm.variant, ckpt.params);
    return lm;
}

int run_caption(const CaptionArgs& a) {
    if (a.beam < 1) throw UsageError("--beam must be >= 1");
    if (a.max_len < 1) throw UsageError("--max-len must be >= 1");
    Corpus corpus = load_corpus(a.corpus);
    LoadedModel lm = load_caption_model(a.model);
    if (corpus.header.frame_dim + corpus.header.clip_dim != lm.dims.video)
        throw DataError("corpus features have dimension " +
                        std::to_string(corpus.header.frame_dim + corpus.header.clip_dim) +
                        ", model expects " + std::to_string(lm.dims.video));
    LoadedDetectors det = load_detectors(lm.variant, a.mil_image, a.mil_video, corpus.header.region_dim);
    if (det.image && det.image->attribute_count() != lm.dims.attr_image)
        throw DataError("--mil-image detector count does not match the model");
    if (det.video && det.video->attribute_count() != lm.dims.attr_video)
        throw DataError("--mil-video detector count does not match the model");

    std::vector<std::pair<std::string, std::vector<std::string>>> predictions;
    for (const VideoExample& v : corpus.videos) {
        Tensor video = encode_video(v);
        Tensor ai = det.image ? image_attribute_representation(v.region_grids, *det.image) : Tensor();
        Tensor av = det.video ? video_attribute_representation(v.region_grids, *det.video) : Tensor();
        DecodeResult r = a.greedy ? greedy_decode(*lm.model, video, ai, av, a.max_len)
                                  : beam_search(*lm.model, video, ai, av, a.beam, a.max_len);
        std::vector<std::string> tokens = lm.vocab.decode(r.caption);
        std::printf("%s\t", v.id.c_str());
        for (std::size_t i = 0; i < tokens.size(); ++i)
            std::printf("%s%s", i ? " " : "", tokens[i].c_str());
        std::printf("\n");
        predictions.emplace_back(v.id, std::move(tokens));
    }
    if (!a.out.empty()) save_predictions(predictions, a.out);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string corpus;
    std::string predictions;
};

int run_evaluate(const EvaluateArgs& a) {
    Corpus corpus = load_corpus(a.corpus);
    auto predictions = load_predictions(a.predictions);
    if (predictions.empty()) throw DataError("evaluate: prediction file is empty");
    std::map<std::string, const VideoExample*> by_id;
    for (const VideoExample& v : corpus.videos) by_id[v.id] = &v;
    std::vector<EvaluationRecord> records;
    for (auto& [id, tokens] : predictions) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("evaluate: prediction for unknown video '" + id + "'");
        records.push_back({id, tokens, it->second->captions});
    }
    for (const auto& [name, value] : score_all(records)) std::printf("%s\t%.10g\n", name.c_str(), value);
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
    std::size_t embed = 4;
    std::size_t hidden = 4;
    std::size_t vocab = 5;
    double eps = 1e-5;
    double tol = 1e-4;
    std::uint64_t seed = 7;
};

Tensor random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

int run_gradcheck(const GradcheckArgs& a) {
    bool ok = true;

    const std::vector<std::string> tags = {"none", "i", "v", "iv0", "iv1", "iv2", "iv3"};
    Rng rng(a.seed);
    for (const std::string& tag : tags) {
        ModelDims dims;
        dims.embed = a.embed;
        dims.hidden = a.hidden;
        dims.vocab = a.vocab;
        dims.video = 6;
        dims.attr_image = 3;
        dims.attr_video = 3;
        CaptionModel model(dims, fusion_from_tag(tag), rng.next_u64());

        std::vector<TrainingExample> batch;
        for (int i = 0; i < 2; ++i) {
            TrainingExample ex;
            ex.video = random_vector(rng, dims.video, -1.0, 1.0);
            ex.attr_image = random_vector(rng, dims.attr_image, 0.0, 1.0);
            ex.attr_video = random_vector(rng, dims.attr_video, 0.0, 1.0);
            const std::size_t content = 1 + static_cast<std::size_t>(i);
            for (std::size_t t = 0; t < content; ++t)
                ex.caption.push_back(static_cast<int>(3 + rng.uniform_index(dims.vocab - 3)));
            ex.caption.push_back(Vocabulary::kEos);
            batch.push_back(std::move(ex));
        }

        std::map<std::string, double> by_param = check_caption_gradients(model, batch, a.eps);
        std::map<std::string, double> by_group;
        for (const auto& [name, err] : by_param) {
            const std::string group = name.substr(0, name.find('.'));
            by_group[group] = std::max(by_group[group], err);
        }
        for (const auto& [group, err] : by_group) {
            std::printf("gradcheck\tcaption:%s\t%s\t%.3e\n", tag.c_str(), group.c_str(), err);
            if (err >= a.tol) ok = false;
        }
    }

    // Both detector styles: the bag graph over one frame (image) and over
    // several stacked frames (video).
    for (const std::string& domain : {std::string("image"), std::string("video")}) {
        const std::size_t h = 3, attrs = 2, grid = 2;
        const std::size_t frames = domain == "image" ? 1 : 3;
        const std::size_t total_regions = frames * grid * grid;

        ParamMap params;
        Rng init(rng.next_u64());
        params["mil.weights"] = glorot_uniform(init, h, attrs);
        params["mil.bias"] = Tensor::full({attrs}, -1.0);

        Graph g;
        NodeId regions = g.input("regions", {total_regions, h});
        NodeId labels = g.input("labels", {attrs});
        NodeId w = g.param("mil.weights", {h, attrs});
        NodeId bias = g.param("mil.bias", {attrs});
        NodeId probs = g.sigmoid(g.add_row(g.matmul(regions, w), bias));
        NodeId miss = g.log(g.affine(g.clamp(probs, kProbFloor, 1.0 - kProbFloor), -1.0, 1.0));
        NodeId bagp =
            g.clamp(g.affine(g.exp(g.sum_axis(miss, 0)), -1.0, 1.0), kProbFloor, 1.0 - kProbFloor);
        NodeId pos = g.mul(labels, g.log(bagp));
        NodeId neg = g.mul(g.affine(labels, -1.0, 1.0), g.log(g.affine(bagp, -1.0, 1.0)));
        NodeId loss = g.affine(g.mean(g.add(pos, neg)), -1.0, 0.0);

        Tensor stacked({total_regions, h});
        for (std::size_t i = 0; i < stacked.size(); ++i) stacked[i] = init.uniform(-1.0, 1.0);
        Tensor y({attrs});
        y[0] = 1.0;
        NamedTensors inputs{{"regions", stacked}, {"labels", y}};

        Evaluation ev = evaluate(g, params, inputs);
        GradMap analytic = ev.gradients(loss);
        GradMap numeric = finite_difference_gradient(
            [&](const ParamMap& p) { return evaluate(g, p, inputs).value(loss)[0]; }, params, a.eps);
        const double err = max_relative_error(analytic, numeric);
        std::printf("gradcheck\tmil-%s\tmil\t%.3e\n", domain.c_str(), err);
        if (err >= a.tol) ok = false;
    }

    if (!ok) {
        std::fprintf(stderr, "gradcheck: relative error above %.3e\n", a.tol);
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale video captioner with image- and video-derived semantic attributes"};
    app.require_subcommand(1);

    GenCorpusArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus file");
    cmd_gen->add_option("--out", gen.out, "Output corpus path")->required();
    cmd_gen->add_option("--videos", gen.cfg.n_videos, "Number of videos");
    cmd_gen->add_option("--frames", gen.cfg.frames_per_video, "Frames (and clips) per video");
    cmd_gen->add_option("--grid", gen.cfg.grid_size, "Region grid side length");
    cmd_gen->add_option("--region-dim", gen.cfg.region_dim, "Region feature length");
    cmd_gen->add_option("--frame-dim", gen.cfg.frame_dim, "Frame feature length");
    cmd_gen->add_option("--clip-dim", gen.cfg.clip_dim, "Clip feature length");
    cmd_gen->add_option("--subjects", gen.cfg.n_subjects, "Subject attribute count");
    cmd_gen->add_option("--objects", gen.cfg.n_objects, "Object attribute count");
    cmd_gen->add_option("--verbs", gen.cfg.n_verbs, "Verb attribute count");
    cmd_gen->add_option("--distractor-frames", gen.cfg.distractor_frames,
                        "Weak-evidence frames per absent verb");
    cmd_gen->add_option("--vocab-size", gen.cfg.vocab_size, "Cap on the implied vocabulary (0 = derived)");
    cmd_gen->add_option("--region-noise", gen.cfg.region_noise, "Region feature noise sigma");
    cmd_gen->add_option("--feature-noise", gen.cfg.feature_noise, "Frame/clip feature noise sigma");
    cmd_gen->add_option("--seed", gen.cfg.seed, "RNG seed");

    TrainMilArgs mil;
    CLI::App* cmd_mil = app.add_subcommand("train-mil", "Train noisy-OR attribute detectors");
    cmd_mil->add_option("--corpus", mil.corpus, "Corpus path")->required();
    cmd_mil->add_option("--out", mil.out, "Output checkpoint path")->required();
    cmd_mil->add_option("--domain", mil.domain, "Bag style: image (per frame) or video (per video)")
        ->required();
    cmd_mil->add_option("--attributes", mil.attributes, "Attribute vocabulary size (most common words)");
    cmd_mil->add_option("--epochs", mil.cfg.epochs, "Training epochs");
    cmd_mil->add_option("--lr", mil.cfg.learning_rate, "Learning rate");
    cmd_mil->add_option("--clip", mil.cfg.clip_norm, "Gradient norm clip");
    cmd_mil->add_option("--init-bias", mil.cfg.init_bias, "Initial detector bias");
    cmd_mil->add_option("--seed", mil.cfg.seed, "RNG seed");
    cmd_mil->add_flag("--log", mil.cfg.log_epochs, "Log per-epoch loss to stderr");

    TrainCaptionArgs cap;
    CLI::App* cmd_cap = app.add_subcommand("train-caption", "Train the captioning model");
    cmd_cap->add_option("--corpus", cap.corpus, "Corpus path")->required();
    cmd_cap->add_option("--out", cap.out, "Output checkpoint path")->required();
    cmd_cap->add_option("--variant", cap.variant, "Fusion variant: none|i|v|iv0|iv1|iv2|iv3");
    cmd_cap->add_option("--mil-image", cap.mil_image, "Image-domain detector checkpoint");
    cmd_cap->add_option("--mil-video", cap.mil_video, "Video-domain detector checkpoint");
    cmd_cap->add_option("--embed", cap.embed, "Recurrent input width");
    cmd_cap->add_option("--hidden", cap.hidden, "Second-layer hidden width");
    cmd_cap->add_option("--vocab-size", cap.vocab_size, "Most-common-word vocabulary size (0 = all)");
    cmd_cap->add_option("--epochs", cap.cfg.epochs, "Training epochs");
    cmd_cap->add_option("--lr", cap.cfg.learning_rate, "Learning rate");
    cmd_cap->add_option("--clip", cap.cfg.clip_norm, "Gradient norm clip");
    cmd_cap->add_option("--seed", cap.seed, "RNG seed");
    cmd_cap->add_flag("--log", cap.cfg.log_epochs, "Log per-epoch loss to stderr");

    CaptionArgs dec;
    CLI::App* cmd_dec = app.add_subcommand("caption", "Decode captions for every video in a corpus");
    cmd_dec->add_option("--corpus", dec.corpus, "Corpus path")->required();
    cmd_dec->add_option("--model", dec.model, "Caption model checkpoint")->required();
    cmd_dec->add_option("--mil-image", dec.mil_image, "Image-domain detector checkpoint");
    cmd_dec->add_option("--mil-video", dec.mil_video, "Video-domain detector checkpoint");
    cmd_dec->add_option("--out", dec.out, "Prediction file to write");
    cmd_dec->add_option("--beam", dec.beam, "Beam size");
    cmd_dec->add_option("--max-len", dec.max_len, "Maximum caption length including EOS");
    cmd_dec->add_flag("--greedy", dec.greedy, "Greedy decoding instead of beam search");

    EvaluateArgs ev;
    CLI::App* cmd_ev = app.add_subcommand("evaluate", "Score predictions against corpus references");
    cmd_ev->add_option("--corpus", ev.corpus, "Corpus path")->required();
    cmd_ev->add_option("--predictions", ev.predictions, "Prediction file")->required();

    GradcheckArgs gc;
    CLI::App* cmd_gc = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    cmd_gc->add_option("--embed", gc.embed, "Recurrent input width");
    cmd_gc->add_option("--hidden", gc.hidden, "Second-layer hidden width");
    cmd_gc->add_option("--vocab", gc.vocab, "Vocabulary size");
    cmd_gc->add_option("--eps", gc.eps, "Finite-difference step");
    cmd_gc->add_option("--tol", gc.tol, "Maximum allowed relative error");
    cmd_gc->add_option("--seed", gc.seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_gen->parsed()) return run_gen_corpus(gen);
        if (cmd_mil->parsed()) return run_train_mil(mil);
        if (cmd_cap->parsed()) return run_train_caption(cap);
        if (cmd_dec->parsed()) return run_caption(dec);
        if (cmd_ev->parsed()) return run_evaluate(ev);
        if (cmd_gc->parsed()) return run_gradcheck(gc);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
