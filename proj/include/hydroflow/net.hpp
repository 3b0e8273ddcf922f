#pragma once

#include <cstdint>
#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Building blocks for the small networks used here: dense layers with manual
// reverse-mode gradients, a single-channel 1-D convolution, softmax
// cross-entropy, and the RBF distance head with its margin losses.  Every
// analytic gradient in this header is covered by finite-difference checks in
// the test suite.

enum class Activation { relu, identity };

struct DenseLayer {
  Matrix weights;            // out_dim x in_dim
  std::vector<double> bias;  // out_dim
  Activation act = Activation::relu;

  size_t in_dim() const { return weights.cols; }
  size_t out_dim() const { return weights.rows; }
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  size_t in_dim() const { return layers.front().in_dim(); }
  size_t out_dim() const { return layers.back().out_dim(); }
};

// Builds a chain in_dim -> dims[0] -> ... -> dims.back() with relu on every
// layer except the last, which is identity.  Weights are Glorot-uniform from
// the given seed, biases zero; construction is deterministic per seed.
MlpParams make_mlp(size_t in_dim, const std::vector<size_t>& dims,
                   std::uint64_t seed);

// Per-layer values recorded by the forward pass; backward consumes them.
struct MlpCache {
  std::vector<std::vector<double>> inputs;   // input seen by each layer
  std::vector<std::vector<double>> preacts;  // affine outputs before activation
  std::vector<double> output;
};

// Runs the affine+activation chain.  Throws a data error on a dimension
// mismatch or a non-finite input value.  Pass a cache to enable backward.
std::vector<double> mlp_forward(const MlpParams& params, const double* x,
                                size_t dim, MlpCache* cache = nullptr);

// Gradient accumulators shaped like the parameters they mirror.
struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;

  void zero();
};

MlpGrads make_mlp_grads(const MlpParams& params);

// Exact reverse-mode pass.  Adds this sample's contributions into `grads`
// (callers zero them per batch) and, when `input_grad` is non-null, writes
// the loss gradient with respect to the network input there.  Throws a data
// error if the cache does not match the parameter shapes.
void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const double* output_grad, MlpGrads& grads,
                  double* input_grad = nullptr);

// Valid (no padding) strided cross-correlation over one input channel.
struct Conv1dLayer {
  Matrix kernels;            // n_kernels x kernel_len
  std::vector<double> bias;  // n_kernels
  size_t stride = 1;

  size_t out_len(size_t input_len) const {
    return (input_len - kernels.cols) / stride + 1;
  }
};

Conv1dLayer make_conv1d(size_t n_kernels, size_t kernel_len, size_t stride,
                        std::uint64_t seed);

// out[k][t] = bias[k] + sum_u kernels[k][u] * x[t*stride + u].
// Throws a data error when the kernel is longer than the input.
Matrix conv1d_forward(const Conv1dLayer& layer, const double* x, size_t len);

struct Conv1dGrads {
  Matrix kernels;
  std::vector<double> bias;

  void zero();
};

Conv1dGrads make_conv1d_grads(const Conv1dLayer& layer);

// Accumulates kernel/bias gradients for one sample and, when `input_grad` is
// non-null (size len, caller-zeroed), adds the input gradient.
void conv1d_backward(const Conv1dLayer& layer, const double* x, size_t len,
                     const Matrix& out_grad, Conv1dGrads& grads,
                     double* input_grad = nullptr);

// Numerically safe softmax (max-subtracted); probabilities sum to 1.
std::vector<double> softmax(const std::vector<double>& logits);

// Cross-entropy -log softmax(logits)[y].  When `logit_grad` is non-null it
// receives the exact gradient p - onehot(y).
double softmax_cross_entropy(const std::vector<double>& logits, size_t y,
                             std::vector<double>* logit_grad = nullptr);

// RBF head: K centers with per-dimension learned scales, parameterized as
// log-scales so the scales stay strictly positive.
struct GrbfHead {
  Matrix centers;     // K x dim
  Matrix log_scales;  // K x dim
  double lambda = 1.0;

  size_t n_centers() const { return centers.rows; }
  size_t dim() const { return centers.cols; }
};

// d_j = sum_i (exp(log_scales[j][i]) * (e[i] - centers[j][i]))^2.
// Non-negative by construction; zero exactly when e equals the center.
std::vector<double> rbf_distances(const GrbfHead& head, const double* e,
                                  size_t dim);

// Chain rule through the distances: given dL/dd_j, accumulates center and
// log-scale gradients and, when `embed_grad` is non-null (caller-zeroed),
// adds dL/de.
void rbf_backward(const GrbfHead& head, const double* e, size_t dim,
                  const std::vector<double>& d_grad, Matrix& centers_grad,
                  Matrix& log_scales_grad, double* embed_grad = nullptr);

// Margin losses over RBF distances.  For the true class y the distance is
// pulled down; every other class pays when it sits inside the margin lambda.
//   loss_ml:     d_y + sum_{j != y} max(0, lambda - d_j)
//   loss_softml: d_y + sum_{j != y} softplus(lambda - d_j)
// With a single center the sums are empty and both reduce to d_0.
double loss_ml(const std::vector<double>& d, size_t y, double lambda);

// Smooth variant with exact gradient (dL/dd_y = 1, dL/dd_j = -sigmoid(lambda
// - d_j) for j != y) written into `d_grad` when non-null.
double loss_softml(const std::vector<double>& d, size_t y, double lambda,
                   std::vector<double>* d_grad = nullptr);

// log(1 + exp(z)) evaluated without overflow for large |z|.
double softplus(double z);
double sigmoid(double z);

}  // namespace hydroflow
