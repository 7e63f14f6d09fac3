#include "tsacap/model.hpp"

#include <cmath>
#include <cstdio>

#include "tsacap/errors.hpp"
#include "tsacap/optim.hpp"
#include "tsacap/rng.hpp"

namespace tsacap {

std::string fusion_tag(FusionVariant v) {
    switch (v) {
        case FusionVariant::kNone: return "none";
        case FusionVariant::kImage: return "i";
        case FusionVariant::kVideo: return "v";
        case FusionVariant::kSum: return "iv0";
        case FusionVariant::kGateImage: return "iv1";
        case FusionVariant::kGateVideo: return "iv2";
        case FusionVariant::kGateBlend: return "iv3";
    }
    throw DataError("fusion_tag: bad variant");
}

FusionVariant fusion_from_tag(const std::string& tag) {
    if (tag == "none") return FusionVariant::kNone;
    if (tag == "i") return FusionVariant::kImage;
    if (tag == "v") return FusionVariant::kVideo;
    if (tag == "iv0") return FusionVariant::kSum;
    if (tag == "iv1") return FusionVariant::kGateImage;
    if (tag == "iv2") return FusionVariant::kGateVideo;
    if (tag == "iv3") return FusionVariant::kGateBlend;
    throw DataError("unknown fusion variant '" + tag + "' (expected none|i|v|iv0|iv1|iv2|iv3)");
}

bool fusion_uses_image(FusionVariant v) {
    return v == FusionVariant::kImage || v == FusionVariant::kSum || v == FusionVariant::kGateImage ||
           v == FusionVariant::kGateVideo || v == FusionVariant::kGateBlend;
}

bool fusion_uses_video(FusionVariant v) {
    return v == FusionVariant::kVideo || v == FusionVariant::kSum || v == FusionVariant::kGateImage ||
           v == FusionVariant::kGateVideo || v == FusionVariant::kGateBlend;
}

bool fusion_uses_gate(FusionVariant v) {
    return v == FusionVariant::kGateImage || v == FusionVariant::kGateVideo ||
           v == FusionVariant::kGateBlend;
}

void validate_caption(const Caption& caption, std::size_t vocab_size) {
    if (caption.empty()) throw DataError("caption: empty token sequence");
    for (std::size_t i = 0; i < caption.size(); ++i) {
        if (caption[i] < 0 || static_cast<std::size_t>(caption[i]) >= vocab_size)
            throw DataError("caption: token id " + std::to_string(caption[i]) +
                            " out of range for vocabulary of " + std::to_string(vocab_size));
        if (caption[i] == Vocabulary::kEos && i + 1 != caption.size())
            throw DataError("caption: EOS before the final position");
    }
    if (caption.back() != Vocabulary::kEos) throw DataError("caption: missing terminal EOS");
}

// ---------------------------------------------------------------------------
// Graph construction

namespace {

struct CellOut {
    NodeId h, c;
};

CellOut build_lstm_cell(Graph& g, const std::string& prefix, std::size_t hidden, std::size_t input,
                        NodeId x, NodeId h_prev, NodeId c_prev) {
    const auto gate = [&](const char* w, const char* u, const char* b) {
        return g.add(g.add(g.matmul(g.param(prefix + w, {hidden, input}), x),
                           g.matmul(g.param(prefix + u, {hidden, hidden}), h_prev)),
                     g.param(prefix + b, {hidden}));
    };
    NodeId i = g.sigmoid(gate(".wi", ".ui", ".bi"));
    NodeId f = g.sigmoid(gate(".wf", ".uf", ".bf"));
    NodeId o = g.sigmoid(gate(".wo", ".uo", ".bo"));
    NodeId cand = g.tanh(gate(".wc", ".uc", ".bc"));
    NodeId c = g.add(g.mul(f, c_prev), g.mul(i, cand));
    NodeId h = g.mul(o, g.tanh(c));
    return {h, c};
}

struct StepIn {
    NodeId x_embed;    // first-layer input, already transformed to embed width
    NodeId gate_word;  // one-hot word for the gate (zeros at the video step)
    NodeId attr_image = kNoNode;
    NodeId attr_video = kNoNode;
    NodeId h1, c1, h2, c2;
};

struct StepOut {
    NodeId h1, c1, h2, c2;
    NodeId log_probs = kNoNode;
};

NodeId build_fusion(Graph& g, const ModelDims& d, FusionVariant variant, const StepIn& in) {
    if (variant == FusionVariant::kNone) return kNoNode;
    NodeId ti = kNoNode, tv = kNoNode;
    if (fusion_uses_image(variant))
        ti = g.matmul(g.param("fusion.image", {d.embed, d.attr_image}), in.attr_image);
    if (fusion_uses_video(variant))
        tv = g.matmul(g.param("fusion.video", {d.embed, d.attr_video}), in.attr_video);
    if (variant == FusionVariant::kImage) return ti;
    if (variant == FusionVariant::kVideo) return tv;
    if (variant == FusionVariant::kSum) return g.add(ti, tv);

    NodeId gate = g.sigmoid(g.add(
        g.add(g.add(g.add(g.matmul(g.param("gate.word", {d.embed, d.vocab}), in.gate_word),
                          g.matmul(g.param("gate.hidden", {d.embed, d.hidden}), in.h2)),
                    g.matmul(g.param("gate.image", {d.embed, d.attr_image}), in.attr_image)),
              g.matmul(g.param("gate.video", {d.embed, d.attr_video}), in.attr_video)),
        g.param("gate.bias", {d.embed})));
    switch (variant) {
        case FusionVariant::kGateImage: return g.add(g.mul(ti, gate), tv);
        case FusionVariant::kGateVideo: return g.add(ti, g.mul(tv, gate));
        case FusionVariant::kGateBlend:
            return g.add(g.mul(ti, g.affine(gate, -1.0, 1.0)), g.mul(tv, gate));
        default: throw DataError("build_fusion: bad variant");
    }
}

StepOut build_caption_step(Graph& g, const ModelDims& d, FusionVariant variant, const StepIn& in,
                           bool with_logits) {
    CellOut first = build_lstm_cell(g, "lstm1", d.embed, d.embed, in.x_embed, in.h1, in.c1);
    NodeId fused = build_fusion(g, d, variant, in);
    NodeId x_t = fused == kNoNode ? first.h : g.add(first.h, fused);
    CellOut second = build_lstm_cell(g, "lstm2", d.hidden, d.embed, x_t, in.h2, in.c2);
    StepOut out{first.h, first.c, second.h, second.c, kNoNode};
    if (with_logits) {
        NodeId logits =
            g.add(g.matmul(g.param("out.weight", {d.vocab, d.hidden}), second.h), g.param("out.bias", {d.vocab}));
        out.log_probs = g.log_softmax(logits);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model

CaptionModel::CaptionModel(ModelDims dims, FusionVariant variant, std::uint64_t seed)
    : dims_(dims), variant_(variant) {
    validate_dims();
    init_params(seed);
    build_step_graphs();
}

CaptionModel::CaptionModel(ModelDims dims, FusionVariant variant, ParamMap params)
    : dims_(dims), variant_(variant), params_(std::move(params)) {
    validate_dims();
    build_step_graphs();
    // One forward declaration pass catches missing or misshaped tensors.
    SequenceGraph sg = build_sequence_graph(1);
    for (const auto& [name, node] : sg.graph.params()) {
        auto it = params_.find(name);
        if (it == params_.end()) throw DataError("caption model: missing parameter '" + name + "'");
        if (it->second.shape() != sg.graph.shape(node))
            throw DataError("caption model: parameter '" + name + "' has shape " +
                            shape_str(it->second.shape()) + ", expected " +
                            shape_str(sg.graph.shape(node)));
    }
}

void CaptionModel::validate_dims() const {
    if (dims_.embed == 0 || dims_.hidden == 0 || dims_.vocab == 0 || dims_.video == 0)
        throw DataError("caption model: embed/hidden/vocab/video dims must be positive");
    if (fusion_uses_image(variant_) && dims_.attr_image == 0)
        throw DataError("caption model: variant " + fusion_tag(variant_) +
                        " needs an image attribute dimension");
    if (fusion_uses_video(variant_) && dims_.attr_video == 0)
        throw DataError("caption model: variant " + fusion_tag(variant_) +
                        " needs a video attribute dimension");
}

void CaptionModel::init_params(std::uint64_t seed) {
    Rng rng(seed);
    const auto mat = [&](const std::string& name, std::size_t r, std::size_t c) {
        params_[name] = glorot_uniform(rng, r, c);
    };
    const auto vec = [&](const std::string& name, std::size_t n, double fill = 0.0) {
        params_[name] = Tensor::full({n}, fill);
    };

    mat("embed.video", dims_.embed, dims_.video);
    mat("embed.word", dims_.embed, dims_.vocab);
    if (fusion_uses_image(variant_)) mat("fusion.image", dims_.embed, dims_.attr_image);
    if (fusion_uses_video(variant_)) mat("fusion.video", dims_.embed, dims_.attr_video);
    if (fusion_uses_gate(variant_)) {
        mat("gate.word", dims_.embed, dims_.vocab);
        mat("gate.hidden", dims_.embed, dims_.hidden);
        mat("gate.image", dims_.embed, dims_.attr_image);
        mat("gate.video", dims_.embed, dims_.attr_video);
        vec("gate.bias", dims_.embed);
    }
    for (const auto& [prefix, hidden, input] :
         {std::tuple<std::string, std::size_t, std::size_t>{"lstm1", dims_.embed, dims_.embed},
          std::tuple<std::string, std::size_t, std::size_t>{"lstm2", dims_.hidden, dims_.embed}}) {
        for (const char* gate : {".wi", ".wf", ".wo", ".wc"}) mat(prefix + gate, hidden, input);
        for (const char* gate : {".ui", ".uf", ".uo", ".uc"}) mat(prefix + gate, hidden, hidden);
        // Forget gates start open so early gradients reach across steps.
        vec(prefix + ".bi", hidden);
        vec(prefix + ".bf", hidden, 1.0);
        vec(prefix + ".bo", hidden);
        vec(prefix + ".bc", hidden);
    }
    mat("out.weight", dims_.vocab, dims_.hidden);
    vec("out.bias", dims_.vocab);
}

void CaptionModel::build_step_graphs() {
    {
        Graph& g = video_graph_.graph;
        StepIn in;
        in.x_embed = g.matmul(g.param("embed.video", {dims_.embed, dims_.video}),
                              g.input("video", {dims_.video}));
        in.gate_word = g.constant(Tensor({dims_.vocab}));  // no word at the video step
        if (fusion_uses_image(variant_)) in.attr_image = g.input("attr_image", {dims_.attr_image});
        if (fusion_uses_video(variant_)) in.attr_video = g.input("attr_video", {dims_.attr_video});
        in.h1 = g.constant(Tensor({dims_.embed}));
        in.c1 = g.constant(Tensor({dims_.embed}));
        in.h2 = g.constant(Tensor({dims_.hidden}));
        in.c2 = g.constant(Tensor({dims_.hidden}));
        StepOut out = build_caption_step(g, dims_, variant_, in, false);
        video_graph_.h1 = out.h1;
        video_graph_.c1 = out.c1;
        video_graph_.h2 = out.h2;
        video_graph_.c2 = out.c2;
    }
    {
        Graph& g = word_graph_.graph;
        StepIn in;
        NodeId word = g.input("word", {dims_.vocab});
        in.x_embed = g.matmul(g.param("embed.word", {dims_.embed, dims_.vocab}), word);
        in.gate_word = word;
        if (fusion_uses_image(variant_)) in.attr_image = g.input("attr_image", {dims_.attr_image});
        if (fusion_uses_video(variant_)) in.attr_video = g.input("attr_video", {dims_.attr_video});
        in.h1 = g.input("h1", {dims_.embed});
        in.c1 = g.input("c1", {dims_.embed});
        in.h2 = g.input("h2", {dims_.hidden});
        in.c2 = g.input("c2", {dims_.hidden});
        StepOut out = build_caption_step(g, dims_, variant_, in, true);
        word_graph_.h1 = out.h1;
        word_graph_.c1 = out.c1;
        word_graph_.h2 = out.h2;
        word_graph_.c2 = out.c2;
        word_graph_.log_probs = out.log_probs;
    }
}

namespace {

void bind_attrs(NamedTensors& inputs, FusionVariant variant, const Tensor& attr_image,
                const Tensor& attr_video) {
    if (fusion_uses_image(variant)) {
        if (attr_image.empty()) throw DataError("caption model: image attribute vector required");
        inputs["attr_image"] = attr_image;
    }
    if (fusion_uses_video(variant)) {
        if (attr_video.empty()) throw DataError("caption model: video attribute vector required");
        inputs["attr_video"] = attr_video;
    }
}

}  // namespace

StepState CaptionModel::video_step(const Tensor& video, const Tensor& attr_image,
                                   const Tensor& attr_video) const {
    NamedTensors inputs{{"video", video}};
    bind_attrs(inputs, variant_, attr_image, attr_video);
    Evaluation ev = evaluate(video_graph_.graph, params_, inputs);
    return {ev.value(video_graph_.h1), ev.value(video_graph_.c1), ev.value(video_graph_.h2),
            ev.value(video_graph_.c2)};
}

StepOutput CaptionModel::word_step(const StepState& state, int token, const Tensor& attr_image,
                                   const Tensor& attr_video) const {
    NamedTensors inputs{{"word", Tensor::vector(one_hot(token, dims_.vocab))},
                        {"h1", state.h1},
                        {"c1", state.c1},
                        {"h2", state.h2},
                        {"c2", state.c2}};
    bind_attrs(inputs, variant_, attr_image, attr_video);
    Evaluation ev = evaluate(word_graph_.graph, params_, inputs);
    return {{ev.value(word_graph_.h1), ev.value(word_graph_.c1), ev.value(word_graph_.h2),
             ev.value(word_graph_.c2)},
            ev.value(word_graph_.log_probs)};
}

Tensor CaptionModel::transfer_gate(const Tensor& word_one_hot, const Tensor& h_prev,
                                   const Tensor& attr_image, const Tensor& attr_video) const {
    if (!fusion_uses_gate(variant_))
        throw DataError("transfer_gate: variant " + fusion_tag(variant_) + " has no gate");
    const auto& p = params_;
    Tensor z = matmul(p.at("gate.word"), word_one_hot);
    z = add(z, matmul(p.at("gate.hidden"), h_prev));
    z = add(z, matmul(p.at("gate.image"), attr_image));
    z = add(z, matmul(p.at("gate.video"), attr_video));
    z = add(z, p.at("gate.bias"));
    return map_sigmoid(z);
}

Tensor CaptionModel::fuse_attributes(const Tensor& attr_image, const Tensor& attr_video,
                                     const std::optional<Tensor>& gate) const {
    if (fusion_uses_gate(variant_) && !gate)
        throw DataError("fuse_attributes: variant " + fusion_tag(variant_) + " requires a gate vector");
    if (!fusion_uses_gate(variant_) && gate)
        throw DataError("fuse_attributes: variant " + fusion_tag(variant_) + " takes no gate vector");
    switch (variant_) {
        case FusionVariant::kNone: return Tensor({dims_.embed});
        case FusionVariant::kImage: return matmul(params_.at("fusion.image"), attr_image);
        case FusionVariant::kVideo: return matmul(params_.at("fusion.video"), attr_video);
        default: break;
    }
    Tensor ti = matmul(params_.at("fusion.image"), attr_image);
    Tensor tv = matmul(params_.at("fusion.video"), attr_video);
    switch (variant_) {
        case FusionVariant::kSum: return add(ti, tv);
        case FusionVariant::kGateImage: return add(hadamard(ti, *gate), tv);
        case FusionVariant::kGateVideo: return add(ti, hadamard(tv, *gate));
        case FusionVariant::kGateBlend:
            return add(hadamard(ti, affine(*gate, -1.0, 1.0)), hadamard(tv, *gate));
        default: throw DataError("fuse_attributes: bad variant");
    }
}

CaptionModel::SequenceGraph CaptionModel::build_sequence_graph(std::size_t caption_len) const {
    if (caption_len == 0) throw DataError("build_sequence_graph: caption length must be >= 1");
    SequenceGraph sg;
    Graph& g = sg.graph;
    StepIn in;
    in.x_embed = g.matmul(g.param("embed.video", {dims_.embed, dims_.video}),
                          g.input("video", {dims_.video}));
    in.gate_word = g.constant(Tensor({dims_.vocab}));
    if (fusion_uses_image(variant_)) in.attr_image = g.input("attr_image", {dims_.attr_image});
    if (fusion_uses_video(variant_)) in.attr_video = g.input("attr_video", {dims_.attr_video});
    in.h1 = g.constant(Tensor({dims_.embed}));
    in.c1 = g.constant(Tensor({dims_.embed}));
    in.h2 = g.constant(Tensor({dims_.hidden}));
    in.c2 = g.constant(Tensor({dims_.hidden}));
    StepOut prev = build_caption_step(g, dims_, variant_, in, false);

    NodeId total = kNoNode;
    for (std::size_t t = 0; t < caption_len; ++t) {
        StepIn step = in;  // keeps attribute nodes
        NodeId word = g.input("word_" + std::to_string(t), {dims_.vocab});
        step.x_embed = g.matmul(g.param("embed.word", {dims_.embed, dims_.vocab}), word);
        step.gate_word = word;
        step.h1 = prev.h1;
        step.c1 = prev.c1;
        step.h2 = prev.h2;
        step.c2 = prev.c2;
        StepOut out = build_caption_step(g, dims_, variant_, step, true);
        sg.step_log_probs.push_back(out.log_probs);
        NodeId picked = g.sum(g.mul(out.log_probs, g.input("target_" + std::to_string(t), {dims_.vocab})));
        total = total == kNoNode ? picked : g.add(total, picked);
        prev = out;
    }
    sg.sequence_log_prob = total;
    sg.loss = g.affine(total, -1.0, 0.0);
    return sg;
}

NamedTensors CaptionModel::sequence_bindings(const TrainingExample& example) const {
    validate_caption(example.caption, dims_.vocab);
    NamedTensors inputs{{"video", example.video}};
    bind_attrs(inputs, variant_, example.attr_image, example.attr_video);
    for (std::size_t t = 0; t < example.caption.size(); ++t) {
        const int input_token = t == 0 ? Vocabulary::kBos : example.caption[t - 1];
        inputs["word_" + std::to_string(t)] = Tensor::vector(one_hot(input_token, dims_.vocab));
        inputs["target_" + std::to_string(t)] =
            Tensor::vector(one_hot(example.caption[t], dims_.vocab));
    }
    return inputs;
}

double CaptionModel::sequence_log_prob(const Tensor& video, const Tensor& attr_image,
                                       const Tensor& attr_video, const Caption& caption) const {
    TrainingExample ex{video, attr_image, attr_video, caption};
    SequenceGraph sg = build_sequence_graph(caption.size());
    Evaluation ev = evaluate(sg.graph, params_, sequence_bindings(ex));
    return ev.value(sg.sequence_log_prob)[0];
}

double CaptionModel::training_loss(std::span<const TrainingExample> batch, const ParamMap& params) const {
    if (batch.empty()) throw DataError("training_loss: empty batch");
    double total = 0.0;
    for (const TrainingExample& ex : batch) {
        SequenceGraph sg = build_sequence_graph(ex.caption.size());
        Evaluation ev = evaluate(sg.graph, params, sequence_bindings(ex));
        total += ev.value(sg.loss)[0];
    }
    return total / static_cast<double>(batch.size());
}

GradMap CaptionModel::training_gradients(std::span<const TrainingExample> batch) const {
    if (batch.empty()) throw DataError("training_gradients: empty batch");
    GradMap total;
    for (const TrainingExample& ex : batch) {
        SequenceGraph sg = build_sequence_graph(ex.caption.size());
        Evaluation ev = evaluate(sg.graph, params_, sequence_bindings(ex));
        GradMap grads = ev.gradients(sg.loss);
        if (total.empty()) {
            total = std::move(grads);
        } else {
            for (auto& [name, g] : total) {
                const Tensor& other = grads.at(name);
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += other[i];
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (auto& [name, g] : total)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale;
    return total;
}

CaptionTrainResult train_captioner(CaptionModel& model, std::span<const TrainingExample> examples,
                                   const CaptionTrainConfig& config) {
    if (examples.empty()) throw DataError("train_captioner: no training examples");

    // Unrolled graphs only depend on caption length; share them across
    // examples and epochs.
    std::map<std::size_t, CaptionModel::SequenceGraph> graphs;
    const auto graph_for = [&](std::size_t len) -> CaptionModel::SequenceGraph& {
        auto it = graphs.find(len);
        if (it == graphs.end()) it = graphs.emplace(len, model.build_sequence_graph(len)).first;
        return it->second;
    };
    std::vector<NamedTensors> bindings;
    bindings.reserve(examples.size());
    std::size_t total_tokens = 0;
    for (const TrainingExample& ex : examples) {
        bindings.push_back(model.sequence_bindings(ex));
        total_tokens += ex.caption.size();
    }

    CaptionTrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < examples.size(); ++i) {
            CaptionModel::SequenceGraph& sg = graph_for(examples[i].caption.size());
            Evaluation ev = evaluate(sg.graph, model.params(), bindings[i]);
            GradMap grads = ev.gradients(sg.loss);
            clip_gradients(grads, config.clip_norm);
            sgd_step(model.params(), grads, config.learning_rate);
        }
        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            CaptionModel::SequenceGraph& sg = graph_for(examples[i].caption.size());
            Evaluation ev = evaluate(sg.graph, model.params(), bindings[i]);
            epoch_loss += ev.value(sg.loss)[0];
        }
        if (!std::isfinite(epoch_loss))
            throw NumericError("train_captioner: loss diverged at epoch " + std::to_string(epoch + 1));
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(examples.size()));
        result.epoch_token_losses.push_back(epoch_loss / static_cast<double>(total_tokens));
        if (config.log_epochs)
            std::fprintf(stderr, "epoch %zu loss %.6f per-token %.6f\n", epoch + 1,
                         result.epoch_losses.back(), result.epoch_token_losses.back());
    }
    return result;
}

std::map<std::string, double> check_caption_gradients(const CaptionModel& model,
                                                      std::span<const TrainingExample> batch,
                                                      double epsilon) {
    GradMap analytic = model.training_gradients(batch);
    GradMap numeric = finite_difference_gradient(
        [&](const ParamMap& params) { return model.training_loss(batch, params); }, model.params(),
        epsilon);
    std::map<std::string, double> report;
    for (const auto& [name, a] : analytic) {
        const Tensor& n = numeric.at(name);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = std::max({std::abs(a[i]), std::abs(n[i]), 1e-8});
            worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
        }
        report[name] = worst;
    }
    return report;
}

}  // namespace tsacap
