#include "tsacap/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "tsacap/errors.hpp"

namespace tsacap {

namespace {

const char* op_name(Graph::Op op) {
    switch (op) {
        case Graph::Op::kInput: return "input";
        case Graph::Op::kParam: return "param";
        case Graph::Op::kConst: return "const";
        case Graph::Op::kMatMul: return "matmul";
        case Graph::Op::kAdd: return "add";
        case Graph::Op::kAddRow: return "add_row";
        case Graph::Op::kSub: return "sub";
        case Graph::Op::kMul: return "mul";
        case Graph::Op::kAffine: return "affine";
        case Graph::Op::kSigmoid: return "sigmoid";
        case Graph::Op::kTanh: return "tanh";
        case Graph::Op::kExp: return "exp";
        case Graph::Op::kLog: return "log";
        case Graph::Op::kClamp: return "clamp";
        case Graph::Op::kSoftmax: return "softmax";
        case Graph::Op::kLogSoftmax: return "log_softmax";
        case Graph::Op::kConcat: return "concat";
        case Graph::Op::kSum: return "sum";
        case Graph::Op::kMean: return "mean";
        case Graph::Op::kSumAxis: return "sum_axis";
        case Graph::Op::kMeanAxis: return "mean_axis";
    }
    return "?";
}

}  // namespace

std::string Graph::describe(NodeId id) const {
    const Node& n = nodes_[id];
    std::string s = "node " + std::to_string(id) + ":" + op_name(n.op);
    if (!n.name.empty()) s += "(" + n.name + ")";
    return s;
}

NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

const Shape& Graph::arg_shape(NodeId id) const {
    if (id >= nodes_.size()) throw ShapeError("graph: operand node id out of range");
    return nodes_[id].shape;
}

NodeId Graph::input(const std::string& name, Shape shape) {
    if (input_nodes_.count(name) || param_nodes_.count(name))
        throw ShapeError("graph: duplicate declaration of '" + name + "'");
    NodeId id = push({Op::kInput, std::move(shape), {}, name});
    input_nodes_[name] = id;
    return id;
}

NodeId Graph::param(const std::string& name, Shape shape) {
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) {
        if (nodes_[it->second].shape != shape)
            throw ShapeError("graph: parameter '" + name + "' redeclared with shape " + shape_str(shape) +
                             ", was " + shape_str(nodes_[it->second].shape));
        return it->second;
    }
    if (input_nodes_.count(name)) throw ShapeError("graph: '" + name + "' already declared as input");
    NodeId id = push({Op::kParam, std::move(shape), {}, name});
    param_nodes_[name] = id;
    return id;
}

NodeId Graph::constant(Tensor value) {
    Node n{Op::kConst, value.shape(), {}, ""};
    n.constant = std::move(value);
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Shape& sa = arg_shape(a);
    const Shape& sb = arg_shape(b);
    if (sa.size() != 2)
        throw ShapeError("matmul at node " + std::to_string(node_count()) +
                         ": left operand must be rank 2, got " + shape_str(sa));
    Shape out;
    if (sb.size() == 2) {
        if (sa[1] != sb[0])
            throw ShapeError("matmul at node " + std::to_string(node_count()) + ": " + shape_str(sa) +
                             " x " + shape_str(sb));
        out = {sa[0], sb[1]};
    } else if (sb.size() == 1) {
        if (sa[1] != sb[0])
            throw ShapeError("matmul at node " + std::to_string(node_count()) + ": " + shape_str(sa) +
                             " x " + shape_str(sb));
        out = {sa[0]};
    } else {
        throw ShapeError("matmul: right operand must be rank 1 or 2, got " + shape_str(sb));
    }
    return push({Op::kMatMul, std::move(out), {a, b}});
}

NodeId Graph::add(NodeId a, NodeId b) {
    if (arg_shape(a) != arg_shape(b))
        throw ShapeError("add at node " + std::to_string(node_count()) + ": shape mismatch " +
                         shape_str(arg_shape(a)) + " vs " + shape_str(arg_shape(b)));
    return push({Op::kAdd, arg_shape(a), {a, b}});
}

NodeId Graph::add_row(NodeId matrix, NodeId row) {
    const Shape& sm = arg_shape(matrix);
    const Shape& sr = arg_shape(row);
    if (sm.size() != 2 || sr.size() != 1 || sm[1] != sr[0])
        throw ShapeError("add_row at node " + std::to_string(node_count()) + ": " + shape_str(sm) + " + " +
                         shape_str(sr));
    return push({Op::kAddRow, sm, {matrix, row}});
}

NodeId Graph::sub(NodeId a, NodeId b) {
    if (arg_shape(a) != arg_shape(b))
        throw ShapeError("sub at node " + std::to_string(node_count()) + ": shape mismatch " +
                         shape_str(arg_shape(a)) + " vs " + shape_str(arg_shape(b)));
    return push({Op::kSub, arg_shape(a), {a, b}});
}

NodeId Graph::mul(NodeId a, NodeId b) {
    if (arg_shape(a) != arg_shape(b))
        throw ShapeError("mul at node " + std::to_string(node_count()) + ": shape mismatch " +
                         shape_str(arg_shape(a)) + " vs " + shape_str(arg_shape(b)));
    return push({Op::kMul, arg_shape(a), {a, b}});
}

NodeId Graph::affine(NodeId x, double scale, double shift) {
    Node n{Op::kAffine, arg_shape(x), {x}};
    n.a = scale;
    n.b = shift;
    return push(std::move(n));
}

NodeId Graph::sigmoid(NodeId x) { return push({Op::kSigmoid, arg_shape(x), {x}}); }
NodeId Graph::tanh(NodeId x) { return push({Op::kTanh, arg_shape(x), {x}}); }
NodeId Graph::exp(NodeId x) { return push({Op::kExp, arg_shape(x), {x}}); }
NodeId Graph::log(NodeId x) { return push({Op::kLog, arg_shape(x), {x}}); }

NodeId Graph::clamp(NodeId x, double lo, double hi) {
    Node n{Op::kClamp, arg_shape(x), {x}};
    n.a = lo;
    n.b = hi;
    return push(std::move(n));
}

NodeId Graph::softmax(NodeId x) {
    if (arg_shape(x).size() != 1) throw ShapeError("softmax: expected rank-1 operand");
    return push({Op::kSoftmax, arg_shape(x), {x}});
}

NodeId Graph::log_softmax(NodeId x) {
    if (arg_shape(x).size() != 1) throw ShapeError("log_softmax: expected rank-1 operand");
    return push({Op::kLogSoftmax, arg_shape(x), {x}});
}

NodeId Graph::concat(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    const Shape& first = arg_shape(parts[0]);
    Shape out = first;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const Shape& s = arg_shape(parts[i]);
        if (s.size() != first.size() || (first.size() == 2 && s[1] != first[1]))
            throw ShapeError("concat at node " + std::to_string(node_count()) + ": incompatible part " +
                             shape_str(s) + " vs " + shape_str(first));
        out[0] += s[0];
    }
    return push({Op::kConcat, std::move(out), parts});
}

NodeId Graph::sum(NodeId x) { return push({Op::kSum, Shape{1}, {x}}); }
NodeId Graph::mean(NodeId x) { return push({Op::kMean, Shape{1}, {x}}); }

NodeId Graph::sum_axis(NodeId x, int axis) {
    const Shape& s = arg_shape(x);
    if (s.size() != 2 || (axis != 0 && axis != 1))
        throw ShapeError("sum_axis: rank-2 operand and axis 0/1 required");
    Node n{Op::kSumAxis, Shape{axis == 0 ? s[1] : s[0]}, {x}};
    n.axis = axis;
    return push(std::move(n));
}

NodeId Graph::mean_axis(NodeId x, int axis) {
    NodeId id = sum_axis(x, axis);
    nodes_[id].op = Op::kMeanAxis;
    return id;
}

// ---------------------------------------------------------------------------
// Forward

Evaluation evaluate(const Graph& graph, const NamedTensors& params, const NamedTensors& inputs) {
    Evaluation ev;
    ev.graph_ = &graph;
    ev.values_.resize(graph.node_count());

    for (NodeId id = 0; id < graph.node_count(); ++id) {
        const Graph::Node& n = graph.node(id);
        const auto arg = [&](std::size_t i) -> const Tensor& { return ev.values_[n.args[i]]; };
        Tensor out;
        switch (n.op) {
            case Graph::Op::kInput: {
                auto it = inputs.find(n.name);
                if (it == inputs.end()) throw ShapeError("evaluate: unbound input '" + n.name + "'");
                if (it->second.shape() != n.shape)
                    throw ShapeError("evaluate: input '" + n.name + "' has shape " +
                                     shape_str(it->second.shape()) + ", declared " + shape_str(n.shape));
                out = it->second;
                break;
            }
            case Graph::Op::kParam: {
                auto it = params.find(n.name);
                if (it == params.end()) throw ShapeError("evaluate: unbound parameter '" + n.name + "'");
                if (it->second.shape() != n.shape)
                    throw ShapeError("evaluate: parameter '" + n.name + "' has shape " +
                                     shape_str(it->second.shape()) + ", declared " + shape_str(n.shape));
                out = it->second;
                break;
            }
            case Graph::Op::kConst: out = n.constant; break;
            case Graph::Op::kMatMul: out = matmul(arg(0), arg(1)); break;
            case Graph::Op::kAdd: out = add(arg(0), arg(1)); break;
            case Graph::Op::kAddRow: {
                out = arg(0);
                const Tensor& row = arg(1);
                for (std::size_t r = 0; r < out.rows(); ++r)
                    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) += row[c];
                break;
            }
            case Graph::Op::kSub: out = sub(arg(0), arg(1)); break;
            case Graph::Op::kMul: out = hadamard(arg(0), arg(1)); break;
            case Graph::Op::kAffine: out = affine(arg(0), n.a, n.b); break;
            case Graph::Op::kSigmoid: out = map_sigmoid(arg(0)); break;
            case Graph::Op::kTanh: out = map_tanh(arg(0)); break;
            case Graph::Op::kExp: out = map_exp(arg(0)); break;
            case Graph::Op::kLog: out = map_log(arg(0)); break;
            case Graph::Op::kClamp: out = map_clamp(arg(0), n.a, n.b); break;
            case Graph::Op::kSoftmax: out = softmax_vec(arg(0)); break;
            case Graph::Op::kLogSoftmax: out = log_softmax_vec(arg(0)); break;
            case Graph::Op::kConcat: {
                out = Tensor(n.shape);
                std::size_t off = 0;
                for (NodeId a : n.args) {
                    const Tensor& part = ev.values_[a];
                    std::copy(part.data().begin(), part.data().end(), out.data().begin() + off);
                    off += part.size();
                }
                break;
            }
            case Graph::Op::kSum:
            case Graph::Op::kMean: {
                double acc = 0.0;
                for (double v : arg(0).data()) acc += v;
                if (n.op == Graph::Op::kMean) acc /= static_cast<double>(arg(0).size());
                out = Tensor::scalar(acc);
                break;
            }
            case Graph::Op::kSumAxis:
            case Graph::Op::kMeanAxis: {
                const Tensor& x = arg(0);
                out = Tensor(n.shape);
                for (std::size_t r = 0; r < x.rows(); ++r)
                    for (std::size_t c = 0; c < x.cols(); ++c) out[n.axis == 0 ? c : r] += x.at(r, c);
                if (n.op == Graph::Op::kMeanAxis) {
                    const double denom = static_cast<double>(n.axis == 0 ? x.rows() : x.cols());
                    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= denom;
                }
                break;
            }
        }
        if (!out.all_finite())
            throw NumericError("evaluate: non-finite value at " + graph.describe(id));
        ev.values_[id] = std::move(out);
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Reverse pass

namespace {

void accumulate(Tensor& slot, const Shape& shape, const Tensor& delta) {
    if (slot.empty()) slot = Tensor(shape);
    for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += delta[i];
}

}  // namespace

GradMap Evaluation::gradients(NodeId scalar_output) const {
    const Graph& g = *graph_;
    if (scalar_output >= g.node_count()) throw ShapeError("gradients: node id out of range");
    if (g.shape(scalar_output) != Shape{1})
        throw ShapeError("gradients: output " + g.describe(scalar_output) + " is not scalar, shape " +
                         shape_str(g.shape(scalar_output)));

    std::vector<Tensor> adj(g.node_count());
    adj[scalar_output] = Tensor::scalar(1.0);

    for (NodeId id = scalar_output + 1; id-- > 0;) {
        if (adj[id].empty()) continue;
        const Graph::Node& n = g.node(id);
        const Tensor& d = adj[id];
        const auto val = [&](std::size_t i) -> const Tensor& { return values_[n.args[i]]; };
        const auto push = [&](std::size_t i, const Tensor& delta) {
            accumulate(adj[n.args[i]], g.shape(n.args[i]), delta);
        };
        switch (n.op) {
            case Graph::Op::kInput:
            case Graph::Op::kParam:
            case Graph::Op::kConst: break;
            case Graph::Op::kMatMul: {
                const Tensor& a = val(0);
                const Tensor& b = val(1);
                Tensor da(a.shape());
                Tensor db(b.shape());
                if (b.rank() == 2) {
                    for (std::size_t i = 0; i < a.rows(); ++i)
                        for (std::size_t j = 0; j < b.cols(); ++j) {
                            const double dij = d.at(i, j);
                            if (dij == 0.0) continue;
                            for (std::size_t k = 0; k < a.cols(); ++k) {
                                da.at(i, k) += dij * b.at(k, j);
                                db.at(k, j) += a.at(i, k) * dij;
                            }
                        }
                } else {
                    for (std::size_t i = 0; i < a.rows(); ++i) {
                        const double di = d[i];
                        if (di == 0.0) continue;
                        for (std::size_t k = 0; k < a.cols(); ++k) {
                            da.at(i, k) += di * b[k];
                            db[k] += a.at(i, k) * di;
                        }
                    }
                }
                push(0, da);
                push(1, db);
                break;
            }
            case Graph::Op::kAdd:
                push(0, d);
                push(1, d);
                break;
            case Graph::Op::kAddRow: {
                push(0, d);
                Tensor drow(g.shape(n.args[1]));
                for (std::size_t r = 0; r < d.rows(); ++r)
                    for (std::size_t c = 0; c < d.cols(); ++c) drow[c] += d.at(r, c);
                push(1, drow);
                break;
            }
            case Graph::Op::kSub: {
                push(0, d);
                push(1, affine(d, -1.0, 0.0));
                break;
            }
            case Graph::Op::kMul:
                push(0, hadamard(d, val(1)));
                push(1, hadamard(d, val(0)));
                break;
            case Graph::Op::kAffine: push(0, affine(d, n.a, 0.0)); break;
            case Graph::Op::kSigmoid: {
                const Tensor& y = values_[id];
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
                push(0, dx);
                break;
            }
            case Graph::Op::kTanh: {
                const Tensor& y = values_[id];
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= 1.0 - y[i] * y[i];
                push(0, dx);
                break;
            }
            case Graph::Op::kExp: push(0, hadamard(d, values_[id])); break;
            case Graph::Op::kLog: {
                const Tensor& x = val(0);
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] /= x[i];
                push(0, dx);
                break;
            }
            case Graph::Op::kClamp: {
                const Tensor& x = val(0);
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i)
                    if (x[i] < n.a || x[i] > n.b) dx[i] = 0.0;
                push(0, dx);
                break;
            }
            case Graph::Op::kSoftmax: {
                const Tensor& y = values_[id];
                double dot = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) dot += d[i] * y[i];
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = y[i] * (d[i] - dot);
                push(0, dx);
                break;
            }
            case Graph::Op::kLogSoftmax: {
                const Tensor& y = values_[id];
                double dsum = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) dsum += d[i];
                Tensor dx = d;
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] -= std::exp(y[i]) * dsum;
                push(0, dx);
                break;
            }
            case Graph::Op::kConcat: {
                std::size_t off = 0;
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    const Shape& ps = g.shape(n.args[i]);
                    Tensor part(ps);
                    std::copy(d.data().begin() + off, d.data().begin() + off + part.size(),
                              part.data().begin());
                    off += part.size();
                    push(i, part);
                }
                break;
            }
            case Graph::Op::kSum:
            case Graph::Op::kMean: {
                double dv = d[0];
                if (n.op == Graph::Op::kMean) dv /= static_cast<double>(val(0).size());
                push(0, Tensor::full(g.shape(n.args[0]), dv));
                break;
            }
            case Graph::Op::kSumAxis:
            case Graph::Op::kMeanAxis: {
                const Shape& xs = g.shape(n.args[0]);
                Tensor dx(xs);
                const double denom =
                    n.op == Graph::Op::kMeanAxis ? static_cast<double>(n.axis == 0 ? xs[0] : xs[1]) : 1.0;
                for (std::size_t r = 0; r < xs[0]; ++r)
                    for (std::size_t c = 0; c < xs[1]; ++c)
                        dx[r * xs[1] + c] = d[n.axis == 0 ? c : r] / denom;
                push(0, dx);
                break;
            }
        }
    }

    GradMap grads;
    for (const auto& [name, id] : g.params()) {
        if (adj[id].empty())
            grads[name] = Tensor(g.shape(id));
        else
            grads[name] = std::move(adj[id]);
    }
    return grads;
}

}  // namespace tsacap
