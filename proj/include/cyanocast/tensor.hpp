#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace cyano::nn {

// A node in a dynamically built computation graph. Matrices are row-major
// doubles. Leaves (no parents) are parameters or inputs; their gradients
// accumulate across backward calls until zero_grad. Non-leaf gradients are
// scratch space that backward re-zeroes on every call.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::shared_ptr<Tensor>> parents;
    std::function<void()> backprop;

    Tensor(int r, int c)
        : rows(r),
          cols(c),
          value(static_cast<std::size_t>(r) * c, 0.0),
          grad(static_cast<std::size_t>(r) * c, 0.0) {}

    std::size_t size() const { return value.size(); }
    double& at(int r, int c) {
        return value[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        return value[static_cast<std::size_t>(r) * cols + c];
    }
    bool leaf() const { return parents.empty(); }
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr leaf(int rows, int cols);
TensorPtr leaf_from(int rows, int cols, std::vector<double> values);

// Elementwise and broadcast arithmetic.
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr add_rowvec(const TensorPtr& x, const TensorPtr& row);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul_rowvec(const TensorPtr& x, const TensorPtr& row);
TensorPtr affine(const TensorPtr& x, double scale, double shift);

// Linear algebra.
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr transpose(const TensorPtr& x);

// Nonlinearities.
TensorPtr sigmoid(const TensorPtr& x);
TensorPtr tanh_op(const TensorPtr& x);
TensorPtr leaky_relu(const TensorPtr& x, double slope);
TensorPtr log_op(const TensorPtr& x);
TensorPtr clamp_op(const TensorPtr& x, double lo, double hi);
TensorPtr softmax_rows(const TensorPtr& x);

// Per-row standardization with no learned parameters; eps sits inside the
// square root.
TensorPtr layer_norm_rows(const TensorPtr& x, double eps = 1e-5);

// Inverted dropout: scales surviving entries by 1/(1-rate) during training,
// identity otherwise. The rng reference makes mask draws reproducible.
TensorPtr dropout(const TensorPtr& x, double rate, bool training,
                  std::mt19937_64& rng);

// Structure ops.
TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b);
TensorPtr slice_row(const TensorPtr& x, int row);
TensorPtr slice_cols(const TensorPtr& x, int col_begin, int col_end);
TensorPtr mean_all(const TensorPtr& x);

// Reverse-mode sweep from a scalar loss: zeroes every non-leaf gradient in
// the reachable graph, seeds the loss gradient with 1, then runs the nodes
// in reverse topological order. Leaf gradients accumulate, so two calls
// yield exactly twice the parameter gradient.
void backward(const TensorPtr& loss);

void zero_grad(const std::vector<TensorPtr>& params);

}  // namespace cyano::nn
