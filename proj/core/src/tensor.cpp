#include "tsacap/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "tsacap/errors.hpp"

namespace tsacap {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << "]";
    return os.str();
}

namespace {

std::size_t shape_count(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
        n *= d;
    }
    return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_count(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_count(shape_) != data_.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_str(shape_));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows(): tensor is not rank 2, shape " + shape_str(shape_));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols(): tensor is not rank 2, shape " + shape_str(shape_));
    return shape_[1];
}

double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
double& Tensor::at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2)
        throw ShapeError("matmul: left operand must be rank 2, got " + shape_str(a.shape()));
    const std::size_t m = a.rows(), n = a.cols();
    if (b.rank() == 2) {
        if (b.rows() != n)
            throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
        const std::size_t p = b.cols();
        Tensor c({m, p});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double aik = a.at(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < p; ++j) c.at(i, j) += aik * b.at(k, j);
            }
        return c;
    }
    if (b.rank() == 1) {
        if (b.size() != n)
            throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
        Tensor c({m});
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += a.at(i, k) * b[k];
            c[i] = acc;
        }
        return c;
    }
    throw ShapeError("matmul: right operand must be rank 1 or 2, got " + shape_str(b.shape()));
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

Tensor affine(const Tensor& x, double scale, double shift) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = scale * y[i] + shift;
    return y;
}

Tensor map_sigmoid(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid(y[i]);
    return y;
}

Tensor map_tanh(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
    return y;
}

Tensor map_exp(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(y[i]);
    return y;
}

Tensor map_log(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(y[i]);
    return y;
}

Tensor map_clamp(const Tensor& x, double lo, double hi) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::min(std::max(y[i], lo), hi);
    return y;
}

Tensor softmax_vec(const Tensor& x) {
    if (x.rank() != 1) throw ShapeError("softmax: expected rank-1 tensor, got " + shape_str(x.shape()));
    double mx = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
    Tensor y = x;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::exp(y[i] - mx);
        sum += y[i];
    }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] /= sum;
    return y;
}

Tensor log_softmax_vec(const Tensor& x) {
    if (x.rank() != 1) throw ShapeError("log_softmax: expected rank-1 tensor, got " + shape_str(x.shape()));
    double mx = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::exp(x[i] - mx);
    const double lse = mx + std::log(sum);
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= lse;
    return y;
}

}  // namespace tsacap
