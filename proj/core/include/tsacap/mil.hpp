#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsacap/tensor.hpp"

namespace tsacap {

// Probabilities are clamped into this band before any log, so noisy-OR over
// large bags and cross entropy at hard 0/1 predictions stay finite.
inline constexpr double kProbFloor = 1e-7;

// An x-by-x grid of region feature vectors for one frame, row-major.
struct RegionGrid {
    std::size_t grid_size = 0;   // x
    std::size_t region_dim = 0;  // h
    std::vector<double> features;  // grid_size*grid_size*region_dim

    std::size_t region_count() const { return grid_size * grid_size; }
    std::span<const double> region(std::size_t i) const {
        return std::span<const double>(features).subspan(i * region_dim, region_dim);
    }
    std::span<double> region(std::size_t i) {
        return std::span<double>(features).subspan(i * region_dim, region_dim);
    }
};

// A multiple-instance bag: one grid for an image-style bag, several for a
// video-style bag, with one binary label per attribute.
struct RegionBag {
    std::vector<RegionGrid> frames;
    std::vector<std::uint8_t> labels;
};

// One linear detector per attribute over region features; the weights matrix
// is [region_dim x n_attributes] so region responses come out of a single
// matrix product.
struct AttributeDetectors {
    std::vector<std::string> attribute_words;
    Tensor weights;  // [h, A]
    Tensor bias;     // [A]

    std::size_t attribute_count() const { return attribute_words.size(); }
    std::size_t region_dim() const { return weights.rows(); }
};

// sigmoid(w.r + b) for every region/attribute pair; [regions x A].
Tensor region_probabilities(const RegionGrid& grid, const AttributeDetectors& detectors);

// 1 - prod(1 - p_i) over one frame's region probabilities for one attribute,
// computed in log space. Inputs outside [0,1] are rejected.
double noisy_or_image(std::span<const double> region_probs);

// Same pooling over every region of every frame. Empty bags are rejected;
// a single-frame bag reduces exactly to noisy_or_image.
double noisy_or_video(const std::vector<std::vector<double>>& frame_region_probs);

// Noisy-OR bag probability per attribute over all frames of the bag.
Tensor bag_probabilities(const RegionBag& bag, const AttributeDetectors& detectors);

// Mean over attributes of binary cross entropy, probabilities clamped to
// [kProbFloor, 1-kProbFloor].
double mil_loss(std::span<const double> bag_probs, std::span<const std::uint8_t> labels);

struct MilConfig {
    std::size_t epochs = 60;
    double learning_rate = 0.5;
    double clip_norm = 5.0;
    double init_bias = -4.0;  // low prior keeps large bags unsaturated at start
    std::uint64_t seed = 1;
    bool log_epochs = false;
};

struct MilTrainResult {
    AttributeDetectors detectors;
    std::vector<double> epoch_losses;
};

// SGD on mil_loss through the noisy-OR pooling, one gradient step per bag.
MilTrainResult train_mil(const std::vector<RegionBag>& bags, std::vector<std::string> attribute_words,
                         std::size_t region_dim, const MilConfig& config);

// Fraction of (bag, attribute) pairs where thresholding the bag probability
// at 0.5 matches the label, restricted to the attribute indices given.
double bag_accuracy(const std::vector<RegionBag>& bags, const AttributeDetectors& detectors,
                    std::span<const std::size_t> attribute_indices);
double bag_accuracy(const std::vector<RegionBag>& bags, const AttributeDetectors& detectors);

// Image-style representation: mean over frames of the per-frame noisy-OR
// distribution. Entries in [0,1].
Tensor image_attribute_representation(std::span<const RegionGrid> frames,
                                      const AttributeDetectors& detectors);

// Video-style representation: noisy-OR over the regions of all frames jointly.
Tensor video_attribute_representation(std::span<const RegionGrid> frames,
                                      const AttributeDetectors& detectors);

}  // namespace tsacap
