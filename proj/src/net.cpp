#include "hydroflow/net.hpp"

#include <algorithm>
#include <cmath>

#include "hydroflow/error.hpp"
#include "hydroflow/kernels.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

void glorot_fill(Matrix& w, Rng& rng) {
  double limit = std::sqrt(6.0 / double(w.rows + w.cols));
  for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * limit;
}

double activate(Activation act, double z) {
  return act == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

double activate_grad(Activation act, double z) {
  return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

}  // namespace

MlpParams make_mlp(size_t in_dim, const std::vector<size_t>& dims,
                   std::uint64_t seed) {
  if (in_dim == 0 || dims.empty())
    fail(ErrorKind::param, "make_mlp: empty architecture");
  Rng rng(seed);
  MlpParams params;
  size_t prev = in_dim;
  for (size_t l = 0; l < dims.size(); ++l) {
    if (dims[l] == 0) fail(ErrorKind::param, "make_mlp: zero-width layer");
    DenseLayer layer;
    layer.weights = Matrix(dims[l], prev);
    glorot_fill(layer.weights, rng);
    layer.bias.assign(dims[l], 0.0);
    layer.act = l + 1 < dims.size() ? Activation::relu : Activation::identity;
    params.layers.push_back(std::move(layer));
    prev = dims[l];
  }
  return params;
}

std::vector<double> mlp_forward(const MlpParams& params, const double* x,
                                size_t dim, MlpCache* cache) {
  if (params.layers.empty()) fail(ErrorKind::data, "mlp_forward: no layers");
  if (dim != params.in_dim())
    fail(ErrorKind::data, "mlp_forward: input dimension mismatch");
  for (size_t i = 0; i < dim; ++i)
    if (!std::isfinite(x[i]))
      fail(ErrorKind::data, "mlp_forward: non-finite input");

  if (cache) {
    cache->inputs.resize(params.layers.size());
    cache->preacts.resize(params.layers.size());
  }
  std::vector<double> cur(x, x + dim);
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    if (cache) cache->inputs[l] = cur;
    std::vector<double> z(layer.out_dim());
    kern::matvec(layer.weights, cur.data(), layer.bias.data(), z.data());
    if (cache) cache->preacts[l] = z;
    for (double& v : z) v = activate(layer.act, v);
    cur = std::move(z);
  }
  if (cache) cache->output = cur;
  return cur;
}

void MlpGrads::zero() {
  for (Matrix& w : weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

MlpGrads make_mlp_grads(const MlpParams& params) {
  MlpGrads grads;
  for (const DenseLayer& layer : params.layers) {
    grads.weights.emplace_back(layer.out_dim(), layer.in_dim());
    grads.bias.emplace_back(layer.out_dim(), 0.0);
  }
  return grads;
}

void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const double* output_grad, MlpGrads& grads,
                  double* input_grad) {
  size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.preacts.size() != n_layers)
    fail(ErrorKind::data, "mlp_backward: cache does not match network");
  for (size_t l = 0; l < n_layers; ++l)
    if (cache.inputs[l].size() != params.layers[l].in_dim() ||
        cache.preacts[l].size() != params.layers[l].out_dim())
      fail(ErrorKind::data, "mlp_backward: cache does not match network");

  std::vector<double> delta(output_grad,
                            output_grad + params.layers.back().out_dim());
  for (size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    for (size_t i = 0; i < layer.out_dim(); ++i)
      delta[i] *= activate_grad(layer.act, cache.preacts[l][i]);

    const std::vector<double>& in = cache.inputs[l];
    Matrix& wg = grads.weights[l];
    for (size_t i = 0; i < layer.out_dim(); ++i) {
      kern::axpy(delta[i], in.data(), wg.row(i), layer.in_dim());
      grads.bias[l][i] += delta[i];
    }

    if (l > 0 || input_grad) {
      std::vector<double> prev(layer.in_dim(), 0.0);
      kern::matvec_t(layer.weights, delta.data(), prev.data());
      if (l == 0) {
        for (size_t i = 0; i < layer.in_dim(); ++i) input_grad[i] += prev[i];
        break;
      }
      delta = std::move(prev);
    }
  }
}

Conv1dLayer make_conv1d(size_t n_kernels, size_t kernel_len, size_t stride,
                        std::uint64_t seed) {
  if (n_kernels == 0 || kernel_len == 0 || stride == 0)
    fail(ErrorKind::param, "make_conv1d: zero-sized configuration");
  Rng rng(seed);
  Conv1dLayer layer;
  layer.kernels = Matrix(n_kernels, kernel_len);
  glorot_fill(layer.kernels, rng);
  layer.bias.assign(n_kernels, 0.0);
  layer.stride = stride;
  return layer;
}

Matrix conv1d_forward(const Conv1dLayer& layer, const double* x, size_t len) {
  size_t klen = layer.kernels.cols;
  if (klen > len)
    fail(ErrorKind::data, "conv1d_forward: kernel longer than input");
  size_t out_len = layer.out_len(len);
  Matrix out(layer.kernels.rows, out_len);
  for (size_t k = 0; k < layer.kernels.rows; ++k) {
    const double* w = layer.kernels.row(k);
    for (size_t t = 0; t < out_len; ++t)
      out.at(k, t) = layer.bias[k] + kern::dot(w, x + t * layer.stride, klen);
  }
  return out;
}

void Conv1dGrads::zero() {
  std::fill(kernels.data.begin(), kernels.data.end(), 0.0);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Conv1dGrads make_conv1d_grads(const Conv1dLayer& layer) {
  Conv1dGrads grads;
  grads.kernels = Matrix(layer.kernels.rows, layer.kernels.cols);
  grads.bias.assign(layer.bias.size(), 0.0);
  return grads;
}

void conv1d_backward(const Conv1dLayer& layer, const double* x, size_t len,
                     const Matrix& out_grad, Conv1dGrads& grads,
                     double* input_grad) {
  size_t klen = layer.kernels.cols;
  size_t out_len = layer.out_len(len);
  if (out_grad.rows != layer.kernels.rows || out_grad.cols != out_len)
    fail(ErrorKind::data, "conv1d_backward: gradient shape mismatch");
  for (size_t k = 0; k < layer.kernels.rows; ++k) {
    const double* g = out_grad.row(k);
    double* wg = grads.kernels.row(k);
    for (size_t t = 0; t < out_len; ++t) {
      const double* seg = x + t * layer.stride;
      kern::axpy(g[t], seg, wg, klen);
      grads.bias[k] += g[t];
      if (input_grad)
        kern::axpy(g[t], layer.kernels.row(k),
                   input_grad + t * layer.stride, klen);
    }
  }
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) fail(ErrorKind::data, "softmax: empty input");
  double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double softmax_cross_entropy(const std::vector<double>& logits, size_t y,
                             std::vector<double>* logit_grad) {
  if (y >= logits.size())
    fail(ErrorKind::param, "softmax_cross_entropy: class index out of range");
  std::vector<double> p = softmax(logits);
  if (logit_grad) {
    *logit_grad = p;
    (*logit_grad)[y] -= 1.0;
  }
  // clamp away from zero so a hard-wrong prediction stays finite
  return -std::log(std::max(p[y], 1e-300));
}

std::vector<double> rbf_distances(const GrbfHead& head, const double* e,
                                  size_t dim) {
  if (dim != head.dim())
    fail(ErrorKind::data, "rbf_distances: embedding dimension mismatch");
  std::vector<double> d(head.n_centers());
  std::vector<double> scales(dim);
  for (size_t j = 0; j < head.n_centers(); ++j) {
    const double* ls = head.log_scales.row(j);
    for (size_t i = 0; i < dim; ++i) scales[i] = std::exp(ls[i]);
    d[j] = kern::scaled_squared_distance(e, head.centers.row(j),
                                         scales.data(), dim);
  }
  return d;
}

void rbf_backward(const GrbfHead& head, const double* e, size_t dim,
                  const std::vector<double>& d_grad, Matrix& centers_grad,
                  Matrix& log_scales_grad, double* embed_grad) {
  if (dim != head.dim())
    fail(ErrorKind::data, "rbf_backward: embedding dimension mismatch");
  if (d_grad.size() != head.n_centers())
    fail(ErrorKind::data, "rbf_backward: distance gradient size mismatch");
  for (size_t j = 0; j < head.n_centers(); ++j) {
    double g = d_grad[j];
    if (g == 0.0) continue;
    const double* c = head.centers.row(j);
    const double* ls = head.log_scales.row(j);
    double* cg = centers_grad.row(j);
    double* lsg = log_scales_grad.row(j);
    for (size_t i = 0; i < dim; ++i) {
      double s2 = std::exp(2.0 * ls[i]);
      double diff = e[i] - c[i];
      double de = 2.0 * s2 * diff;       // dd_j / de_i
      cg[i] -= g * de;                   // dd_j / dc_i = -dd_j / de_i
      lsg[i] += g * 2.0 * s2 * diff * diff;
      if (embed_grad) embed_grad[i] += g * de;
    }
  }
}

double loss_ml(const std::vector<double>& d, size_t y, double lambda) {
  if (y >= d.size()) fail(ErrorKind::param, "loss_ml: class index out of range");
  if (lambda <= 0.0) fail(ErrorKind::param, "loss_ml: lambda must be positive");
  double loss = d[y];
  for (size_t j = 0; j < d.size(); ++j)
    if (j != y) loss += std::max(0.0, lambda - d[j]);
  return loss;
}

double loss_softml(const std::vector<double>& d, size_t y, double lambda,
                   std::vector<double>* d_grad) {
  if (y >= d.size())
    fail(ErrorKind::param, "loss_softml: class index out of range");
  if (lambda <= 0.0)
    fail(ErrorKind::param, "loss_softml: lambda must be positive");
  if (d_grad) d_grad->assign(d.size(), 0.0);
  double loss = d[y];
  if (d_grad) (*d_grad)[y] = 1.0;
  for (size_t j = 0; j < d.size(); ++j) {
    if (j == y) continue;
    loss += softplus(lambda - d[j]);
    if (d_grad) (*d_grad)[j] = -sigmoid(lambda - d[j]);
  }
  return loss;
}

double softplus(double z) {
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace hydroflow
