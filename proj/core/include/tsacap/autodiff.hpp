#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tsacap/tensor.hpp"

namespace tsacap {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

using NamedTensors = std::map<std::string, Tensor>;
using ParamMap = NamedTensors;
using GradMap = NamedTensors;

// A static computation graph over tensors. Nodes are appended in evaluation
// order, so the node list is always topologically sorted. Parameters and
// inputs are declared by name; their values are supplied at evaluation time,
// which lets one graph be evaluated against perturbed parameter sets (the
// finite-difference oracle relies on this).
//
// Output shapes are inferred and checked at construction, so shape errors
// surface where the graph is built, naming the offending node.
class Graph {
  public:
    enum class Op : std::uint8_t {
        kInput,
        kParam,
        kConst,
        kMatMul,
        kAdd,
        kAddRow,  // [m,n] + [n], broadcast over rows
        kSub,
        kMul,
        kAffine,  // scale * x + shift
        kSigmoid,
        kTanh,
        kExp,
        kLog,
        kClamp,
        kSoftmax,
        kLogSoftmax,
        kConcat,   // rank-1 chain, or rank-2 stacked along rows
        kSum,      // all elements -> [1]
        kMean,     // all elements -> [1]
        kSumAxis,  // rank-2, axis 0 or 1 -> rank-1
        kMeanAxis,
    };

    struct Node {
        Op op;
        Shape shape;
        std::vector<NodeId> args;
        std::string name;       // input/param name, or empty
        double a = 0, b = 0;    // affine scale/shift, clamp lo/hi
        int axis = -1;          // axis reductions
        Tensor constant;        // kConst payload
    };

    NodeId input(const std::string& name, Shape shape);
    // Declaring the same parameter name again returns the existing node, so a
    // weight shared across time steps is a single node.
    NodeId param(const std::string& name, Shape shape);
    NodeId constant(Tensor value);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId add_row(NodeId matrix, NodeId row);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId affine(NodeId x, double scale, double shift);
    NodeId sigmoid(NodeId x);
    NodeId tanh(NodeId x);
    NodeId exp(NodeId x);
    NodeId log(NodeId x);
    NodeId clamp(NodeId x, double lo, double hi);
    NodeId softmax(NodeId x);
    NodeId log_softmax(NodeId x);
    NodeId concat(const std::vector<NodeId>& parts);
    NodeId sum(NodeId x);
    NodeId mean(NodeId x);
    NodeId sum_axis(NodeId x, int axis);
    NodeId mean_axis(NodeId x, int axis);

    const Shape& shape(NodeId id) const { return nodes_[id].shape; }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id]; }
    const std::map<std::string, NodeId>& params() const { return param_nodes_; }
    const std::map<std::string, NodeId>& inputs() const { return input_nodes_; }

    std::string describe(NodeId id) const;

  private:
    NodeId push(Node n);
    const Shape& arg_shape(NodeId id) const;

    std::vector<Node> nodes_;
    std::map<std::string, NodeId> param_nodes_;
    std::map<std::string, NodeId> input_nodes_;
};

// Forward-pass result: the value of every node. gradients() runs the reverse
// pass for a scalar output and returns one gradient per declared parameter
// (zero-filled for parameters the output does not depend on).
//
// An Evaluation borrows the Graph it came from; keep the graph alive.
class Evaluation {
  public:
    const Tensor& value(NodeId id) const { return values_[id]; }
    GradMap gradients(NodeId scalar_output) const;

  private:
    friend Evaluation evaluate(const Graph&, const NamedTensors&, const NamedTensors&);
    const Graph* graph_ = nullptr;
    std::vector<Tensor> values_;
};

// Computes every node. All declared inputs must be bound and every bound
// tensor must match its declared shape; a missing binding names the input.
// Evaluation is pure: identical bindings give bitwise-identical values.
Evaluation evaluate(const Graph& graph, const NamedTensors& params, const NamedTensors& inputs = {});

}  // namespace tsacap
