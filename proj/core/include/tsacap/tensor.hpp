#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsacap {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of doubles. Rank 1 (vectors) and rank 2 (matrices)
// cover everything in this codebase; a scalar is a rank-1 tensor of size 1.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape);  // zero-filled
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> v);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Tensor full(Shape shape, double value);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }
    bool empty() const { return data_.empty(); }

    // Rank-2 accessors; throw on rank mismatch.
    std::size_t rows() const;
    std::size_t cols() const;
    double at(std::size_t r, std::size_t c) const;
    double& at(std::size_t r, std::size_t c);

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

  private:
    Shape shape_;
    std::vector<double> data_;
};

// Elementwise and linear-algebra kernels shared by the autodiff graph and the
// plain (gradient-free) forward paths, so both compute identical values.
Tensor matmul(const Tensor& a, const Tensor& b);  // [m,n]x[n,p] or [m,n]x[n]
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& x, double scale, double shift);  // scale*x + shift

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

Tensor map_sigmoid(const Tensor& x);
Tensor map_tanh(const Tensor& x);
Tensor map_exp(const Tensor& x);
Tensor map_log(const Tensor& x);
Tensor map_clamp(const Tensor& x, double lo, double hi);
Tensor softmax_vec(const Tensor& x);      // rank 1
Tensor log_softmax_vec(const Tensor& x);  // rank 1

}  // namespace tsacap
