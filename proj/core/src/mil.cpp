#include "tsacap/mil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "tsacap/autodiff.hpp"
#include "tsacap/errors.hpp"
#include "tsacap/optim.hpp"

namespace tsacap {

Tensor region_probabilities(const RegionGrid& grid, const AttributeDetectors& detectors) {
    if (grid.region_dim != detectors.region_dim())
        throw ShapeError("region_probabilities: region dim " + std::to_string(grid.region_dim) +
                         " does not match detector dim " + std::to_string(detectors.region_dim()));
    const std::size_t regions = grid.region_count();
    const std::size_t attrs = detectors.attribute_count();
    Tensor probs({regions, attrs});
    for (std::size_t r = 0; r < regions; ++r) {
        auto feat = grid.region(r);
        for (std::size_t a = 0; a < attrs; ++a) {
            double z = detectors.bias[a];
            for (std::size_t k = 0; k < grid.region_dim; ++k) z += detectors.weights.at(k, a) * feat[k];
            probs.at(r, a) = sigmoid(z);
        }
    }
    return probs;
}

namespace {

double clamp_prob(double p) { return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor); }

double check_prob(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw NumericError("noisy_or: probability " + std::to_string(p) + " outside [0,1]");
    return p;
}

}  // namespace

double noisy_or_image(std::span<const double> region_probs) {
    double log_miss = 0.0;
    for (double p : region_probs) log_miss += std::log(1.0 - clamp_prob(check_prob(p)));
    return 1.0 - std::exp(log_miss);
}

double noisy_or_video(const std::vector<std::vector<double>>& frame_region_probs) {
    if (frame_region_probs.empty()) throw NumericError("noisy_or_video: empty bag");
    double log_miss = 0.0;
    for (const auto& frame : frame_region_probs)
        for (double p : frame) log_miss += std::log(1.0 - clamp_prob(check_prob(p)));
    return 1.0 - std::exp(log_miss);
}

Tensor bag_probabilities(const RegionBag& bag, const AttributeDetectors& detectors) {
    if (bag.frames.empty()) throw NumericError("bag_probabilities: bag has no frames");
    const std::size_t attrs = detectors.attribute_count();
    Tensor log_miss({attrs});
    for (const RegionGrid& frame : bag.frames) {
        Tensor probs = region_probabilities(frame, detectors);
        for (std::size_t r = 0; r < probs.rows(); ++r)
            for (std::size_t a = 0; a < attrs; ++a) log_miss[a] += std::log(1.0 - clamp_prob(probs.at(r, a)));
    }
    Tensor out({attrs});
    for (std::size_t a = 0; a < attrs; ++a) out[a] = 1.0 - std::exp(log_miss[a]);
    return out;
}

double mil_loss(std::span<const double> bag_probs, std::span<const std::uint8_t> labels) {
    if (bag_probs.size() != labels.size())
        throw ShapeError("mil_loss: " + std::to_string(bag_probs.size()) + " probabilities vs " +
                         std::to_string(labels.size()) + " labels");
    if (bag_probs.empty()) throw ShapeError("mil_loss: empty attribute set");
    double total = 0.0;
    for (std::size_t a = 0; a < bag_probs.size(); ++a) {
        const double p = clamp_prob(check_prob(bag_probs[a]));
        total -= labels[a] ? std::log(p) : std::log(1.0 - p);
    }
    return total / static_cast<double>(bag_probs.size());
}

namespace {

struct MilGraph {
    Graph graph;
    NodeId loss = kNoNode;
};

// Region features for all frames of one bag stacked into a single matrix, so
// the video pooling is the same product over a larger bag. A one-frame bag
// builds the identical node sequence as the image case.
MilGraph build_mil_graph(std::size_t total_regions, std::size_t region_dim, std::size_t attrs) {
    MilGraph mg;
    Graph& g = mg.graph;
    NodeId regions = g.input("regions", {total_regions, region_dim});
    NodeId labels = g.input("labels", {attrs});
    NodeId w = g.param("mil.weights", {region_dim, attrs});
    NodeId b = g.param("mil.bias", {attrs});

    NodeId probs = g.sigmoid(g.add_row(g.matmul(regions, w), b));
    NodeId miss = g.log(g.affine(g.clamp(probs, kProbFloor, 1.0 - kProbFloor), -1.0, 1.0));
    NodeId bagp = g.affine(g.exp(g.sum_axis(miss, 0)), -1.0, 1.0);
    NodeId bagp_cl = g.clamp(bagp, kProbFloor, 1.0 - kProbFloor);

    NodeId pos = g.mul(labels, g.log(bagp_cl));
    NodeId neg = g.mul(g.affine(labels, -1.0, 1.0), g.log(g.affine(bagp_cl, -1.0, 1.0)));
    mg.loss = g.affine(g.mean(g.add(pos, neg)), -1.0, 0.0);
    return mg;
}

Tensor stack_bag_regions(const RegionBag& bag, std::size_t region_dim) {
    std::size_t total = 0;
    for (const RegionGrid& f : bag.frames) total += f.region_count();
    Tensor regions({total, region_dim});
    std::size_t row = 0;
    for (const RegionGrid& f : bag.frames) {
        if (f.region_dim != region_dim)
            throw ShapeError("train_mil: bag frame region dim " + std::to_string(f.region_dim) +
                             " differs from detector dim " + std::to_string(region_dim));
        std::copy(f.features.begin(), f.features.end(), regions.data().begin() + row * region_dim);
        row += f.region_count();
    }
    return regions;
}

}  // namespace

MilTrainResult train_mil(const std::vector<RegionBag>& bags, std::vector<std::string> attribute_words,
                         std::size_t region_dim, const MilConfig& config) {
    if (bags.empty()) throw NumericError("train_mil: no bags");
    const std::size_t attrs = attribute_words.size();
    for (const RegionBag& bag : bags) {
        if (bag.frames.empty()) throw NumericError("train_mil: bag with no frames");
        if (bag.labels.size() != attrs)
            throw ShapeError("train_mil: bag has " + std::to_string(bag.labels.size()) + " labels for " +
                             std::to_string(attrs) + " attributes");
    }

    Rng rng(config.seed);
    ParamMap params;
    params["mil.weights"] = glorot_uniform(rng, region_dim, attrs);
    params["mil.bias"] = Tensor::full({attrs}, config.init_bias);

    // Graphs only differ by total region count; cache per count.
    std::map<std::size_t, MilGraph> graphs;
    const auto graph_for = [&](std::size_t total_regions) -> MilGraph& {
        auto it = graphs.find(total_regions);
        if (it == graphs.end())
            it = graphs.emplace(total_regions, build_mil_graph(total_regions, region_dim, attrs)).first;
        return it->second;
    };

    std::vector<Tensor> stacked;
    std::vector<Tensor> labels;
    stacked.reserve(bags.size());
    labels.reserve(bags.size());
    for (const RegionBag& bag : bags) {
        stacked.push_back(stack_bag_regions(bag, region_dim));
        Tensor y({attrs});
        for (std::size_t a = 0; a < attrs; ++a) y[a] = bag.labels[a];
        labels.push_back(std::move(y));
    }

    MilTrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < bags.size(); ++i) {
            MilGraph& mg = graph_for(stacked[i].rows());
            Evaluation ev =
                evaluate(mg.graph, params, {{"regions", stacked[i]}, {"labels", labels[i]}});
            GradMap grads = ev.gradients(mg.loss);
            clip_gradients(grads, config.clip_norm);
            sgd_step(params, grads, config.learning_rate);
        }
        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < bags.size(); ++i) {
            MilGraph& mg = graph_for(stacked[i].rows());
            Evaluation ev =
                evaluate(mg.graph, params, {{"regions", stacked[i]}, {"labels", labels[i]}});
            epoch_loss += ev.value(mg.loss)[0];
        }
        epoch_loss /= static_cast<double>(bags.size());
        if (!std::isfinite(epoch_loss))
            throw NumericError("train_mil: loss diverged at epoch " + std::to_string(epoch + 1));
        result.epoch_losses.push_back(epoch_loss);
        if (config.log_epochs)
            std::fprintf(stderr, "mil epoch %zu loss %.6f\n", epoch + 1, epoch_loss);
    }

    result.detectors.attribute_words = std::move(attribute_words);
    result.detectors.weights = params["mil.weights"];
    result.detectors.bias = params["mil.bias"];
    return result;
}

double bag_accuracy(const std::vector<RegionBag>& bags, const AttributeDetectors& detectors,
                    std::span<const std::size_t> attribute_indices) {
    if (bags.empty() || attribute_indices.empty()) throw NumericError("bag_accuracy: nothing to score");
    std::size_t hits = 0;
    for (const RegionBag& bag : bags) {
        Tensor probs = bag_probabilities(bag, detectors);
        for (std::size_t a : attribute_indices)
            if ((probs[a] > 0.5) == (bag.labels[a] != 0)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(bags.size() * attribute_indices.size());
}

double bag_accuracy(const std::vector<RegionBag>& bags, const AttributeDetectors& detectors) {
    std::vector<std::size_t> all(detectors.attribute_count());
    for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
    return bag_accuracy(bags, detectors, all);
}

Tensor image_attribute_representation(std::span<const RegionGrid> frames,
                                      const AttributeDetectors& detectors) {
    if (frames.empty()) throw NumericError("image_attribute_representation: video has no region grids");
    const std::size_t attrs = detectors.attribute_count();
    Tensor mean({attrs});
    for (const RegionGrid& frame : frames) {
        Tensor probs = region_probabilities(frame, detectors);
        for (std::size_t a = 0; a < attrs; ++a) {
            double log_miss = 0.0;
            for (std::size_t r = 0; r < probs.rows(); ++r)
                log_miss += std::log(1.0 - clamp_prob(probs.at(r, a)));
            mean[a] += 1.0 - std::exp(log_miss);
        }
    }
    for (std::size_t a = 0; a < attrs; ++a) mean[a] /= static_cast<double>(frames.size());
    return mean;
}

Tensor video_attribute_representation(std::span<const RegionGrid> frames,
                                      const AttributeDetectors& detectors) {
    if (frames.empty()) throw NumericError("video_attribute_representation: video has no region grids");
    RegionBag bag;
    bag.frames.assign(frames.begin(), frames.end());
    bag.labels.assign(detectors.attribute_count(), 0);
    return bag_probabilities(bag, detectors);
}

}  // namespace tsacap
