#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsacap/autodiff.hpp"
#include "tsacap/tensor.hpp"
#include "tsacap/vocab.hpp"

namespace tsacap {

// How the two attribute sources enter the second recurrent layer.
enum class FusionVariant {
    kNone,       // no attribute input
    kImage,      // transformed image attributes only
    kVideo,      // transformed video attributes only
    kSum,        // ungated sum of both transforms
    kGateImage,  // gate scales the image path, video path passes through
    kGateVideo,  // gate scales the video path, image path passes through
    kGateBlend,  // convex blend: (1-g) on image path, g on video path
};

// CLI/checkpoint tags: none, i, v, iv0, iv1, iv2, iv3.
std::string fusion_tag(FusionVariant v);
FusionVariant fusion_from_tag(const std::string& tag);
bool fusion_uses_image(FusionVariant v);
bool fusion_uses_video(FusionVariant v);
bool fusion_uses_gate(FusionVariant v);

struct ModelDims {
    std::size_t embed = 64;       // recurrent input width (first-layer hidden)
    std::size_t hidden = 64;      // second-layer hidden width
    std::size_t video = 0;        // video representation length
    std::size_t attr_image = 0;   // image attribute vector length
    std::size_t attr_video = 0;   // video attribute vector length
    std::size_t vocab = 0;
};

// A caption as token ids with a single terminal EOS.
using Caption = std::vector<int>;

void validate_caption(const Caption& caption, std::size_t vocab_size);

struct StepState {
    Tensor h1, c1, h2, c2;
};

struct StepOutput {
    StepState state;
    Tensor log_probs;  // log-softmax over the vocabulary
};

struct TrainingExample {
    Tensor video;       // encoded video representation
    Tensor attr_image;  // may be empty when the variant ignores it
    Tensor attr_video;
    Caption caption;
};

// Two-layer recurrent captioner. The first LSTM embeds the input (video at
// the initial step, previous word afterwards); its output plus the fused
// attribute vector feeds the second LSTM, whose hidden state projects to
// vocabulary log-probabilities. Training unrolls the same per-step graph the
// decoder evaluates, so teacher-forced scores and stepwise decoding agree.
//
// A model being trained has a single owner. A frozen model is immutable and
// may be shared across threads for decoding.
class CaptionModel {
  public:
    CaptionModel(ModelDims dims, FusionVariant variant, std::uint64_t seed);
    // For checkpoint loading: adopts the given parameter values.
    CaptionModel(ModelDims dims, FusionVariant variant, ParamMap params);

    const ModelDims& dims() const { return dims_; }
    FusionVariant variant() const { return variant_; }
    const ParamMap& params() const { return params_; }
    ParamMap& params() { return params_; }

    // Runs the initial step on the video representation. No vocabulary
    // distribution is produced here.
    StepState video_step(const Tensor& video, const Tensor& attr_image, const Tensor& attr_video) const;

    // Consumes one word and returns the next-word distribution.
    StepOutput word_step(const StepState& state, int token, const Tensor& attr_image,
                         const Tensor& attr_video) const;

    // Gate vector for the current word/state/attributes; gated variants only.
    Tensor transfer_gate(const Tensor& word_one_hot, const Tensor& h_prev, const Tensor& attr_image,
                         const Tensor& attr_video) const;

    // Fused attribute vector. `gate` is required for gated variants and
    // rejected otherwise.
    Tensor fuse_attributes(const Tensor& attr_image, const Tensor& attr_video,
                           const std::optional<Tensor>& gate) const;

    // Teacher-forced log probability of the caption (<= 0): the video step,
    // then one word step per caption token starting from BOS.
    double sequence_log_prob(const Tensor& video, const Tensor& attr_image, const Tensor& attr_video,
                             const Caption& caption) const;

    // Mean over the batch of -sequence_log_prob, evaluated at `params`
    // (pass params() for the current model).
    double training_loss(std::span<const TrainingExample> batch, const ParamMap& params) const;

    // Analytic gradient of training_loss at the current parameters.
    GradMap training_gradients(std::span<const TrainingExample> batch) const;

    // Unrolled teacher-forcing graph for a caption of the given length.
    // Exposed for training and gradient checking.
    struct SequenceGraph {
        Graph graph;
        NodeId sequence_log_prob = kNoNode;
        NodeId loss = kNoNode;
        std::vector<NodeId> step_log_probs;
    };
    SequenceGraph build_sequence_graph(std::size_t caption_len) const;
    NamedTensors sequence_bindings(const TrainingExample& example) const;

  private:
    void validate_dims() const;
    void init_params(std::uint64_t seed);
    void build_step_graphs();

    ModelDims dims_;
    FusionVariant variant_;
    ParamMap params_;

    struct StepGraph {
        Graph graph;
        NodeId h1 = kNoNode, c1 = kNoNode, h2 = kNoNode, c2 = kNoNode, log_probs = kNoNode;
    };
    StepGraph video_graph_;
    StepGraph word_graph_;
};

struct CaptionTrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 0.1;
    double clip_norm = 5.0;
    bool log_epochs = false;
};

struct CaptionTrainResult {
    std::vector<double> epoch_losses;       // full-corpus mean sequence loss per epoch
    std::vector<double> epoch_token_losses; // same, divided by total token count
};

// SGD with gradient clipping, one step per example in corpus order.
// Deterministic given the model's initialization and the example order.
CaptionTrainResult train_captioner(CaptionModel& model, std::span<const TrainingExample> examples,
                                   const CaptionTrainConfig& config);

// Reverse-mode vs central-difference gradients of the batch loss; returns the
// worst relative error per parameter.
std::map<std::string, double> check_caption_gradients(const CaptionModel& model,
                                                      std::span<const TrainingExample> batch,
                                                      double epsilon);

}  // namespace tsacap
