#include "hydroflow/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hydroflow/error.hpp"
#include "hydroflow/eval.hpp"
#include "hydroflow/log.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

// keeps batch shuffling independent of the weight-init stream
constexpr std::uint64_t kShuffleSalt = 0x517cc1b727220a95ull;
// separates the dense-stage init from the conv-stage init
constexpr std::uint64_t kDenseSalt = 0x9e3779b97f4a7c15ull;

struct ParamView {
  double* value;
  double* grad;
  size_t size;
};

// SGD / Adam over a set of parameter tensors.  step() consumes and clears
// the accumulated gradients.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, std::vector<ParamView> views)
      : config_(config), views_(std::move(views)) {
    if (config_.optimizer == TrainConfig::Optimizer::adam) {
      m_.reserve(views_.size());
      v_.reserve(views_.size());
      for (const ParamView& view : views_) {
        m_.emplace_back(view.size, 0.0);
        v_.emplace_back(view.size, 0.0);
      }
    }
  }

  void step() {
    ++t_;
    if (config_.optimizer == TrainConfig::Optimizer::sgd) {
      for (ParamView& view : views_)
        for (size_t i = 0; i < view.size; ++i) {
          view.value[i] -= config_.learning_rate * view.grad[i];
          view.grad[i] = 0.0;
        }
      return;
    }
    double bc1 = 1.0 - std::pow(config_.adam_beta1, double(t_));
    double bc2 = 1.0 - std::pow(config_.adam_beta2, double(t_));
    for (size_t k = 0; k < views_.size(); ++k) {
      ParamView& view = views_[k];
      for (size_t i = 0; i < view.size; ++i) {
        double g = view.grad[i];
        m_[k][i] = config_.adam_beta1 * m_[k][i] +
                   (1.0 - config_.adam_beta1) * g;
        v_[k][i] = config_.adam_beta2 * v_[k][i] +
                   (1.0 - config_.adam_beta2) * g * g;
        view.value[i] -= config_.learning_rate * (m_[k][i] / bc1) /
                         (std::sqrt(v_[k][i] / bc2) + config_.adam_eps);
        view.grad[i] = 0.0;
      }
    }
  }

 private:
  TrainConfig config_;
  std::vector<ParamView> views_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

void check_config(const TrainConfig& config) {
  if (config.learning_rate <= 0.0)
    fail(ErrorKind::param, "learning_rate must be positive");
  if (config.batch_size == 0)
    fail(ErrorKind::param, "batch_size must be positive");
  if (config.epochs <= 0) fail(ErrorKind::param, "epochs must be positive");
  if (config.early_stop_patience <= 0)
    fail(ErrorKind::param, "early_stop_patience must be positive");
}

void require_both_classes(const std::vector<int>& labels, const char* who) {
  bool idle = false, flow = false;
  for (int v : labels) (v == 0 ? idle : flow) = true;
  if (!idle || !flow)
    fail(ErrorKind::data,
         std::string(who) + ": need both idle and flow frames");
}

std::vector<ParamView> mlp_views(MlpParams& params, MlpGrads& grads) {
  std::vector<ParamView> views;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    views.push_back({params.layers[l].weights.data.data(),
                     grads.weights[l].data.data(),
                     params.layers[l].weights.data.size()});
    views.push_back({params.layers[l].bias.data(), grads.bias[l].data(),
                     params.layers[l].bias.size()});
  }
  return views;
}

// Tracks the best validation score and says when to give up.
struct EarlyStop {
  double best = -1.0;
  int best_epoch = -1;
  int stale = 0;

  // true when this epoch strictly improved on the best so far
  bool improved(double score, int epoch) {
    if (score > best) {
      best = score;
      best_epoch = epoch;
      stale = 0;
      return true;
    }
    ++stale;
    return false;
  }
};

}  // namespace

double grbf_d_zero(const GrbfModel& model, const double* x, size_t dim) {
  std::vector<double> e = mlp_forward(model.trunk, x, dim);
  return rbf_distances(model.head, e.data(), e.size())[0];
}

Detection detect(const GrbfModel& model, const double* x, size_t dim,
                 double tau) {
  double d0 = grbf_d_zero(model, x, dim);
  return {d0 <= tau ? FlowDecision::no_flow : FlowDecision::flow, d0};
}

double calibrate_tau(const std::vector<double>& d_zero,
                     const std::vector<int>& labels, double fallback) {
  if (d_zero.size() != labels.size())
    fail(ErrorKind::data, "calibrate_tau: length mismatch");
  bool idle = false, flow = false;
  for (int v : labels) (v == 0 ? idle : flow) = true;
  if (!idle || !flow) return fallback;

  std::vector<double> candidates = d_zero;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  double best_tau = fallback, best_f1 = -1.0;
  std::vector<int> preds(labels.size());
  for (double tau : candidates) {  // ascending, so ties keep the smaller tau
    for (size_t i = 0; i < d_zero.size(); ++i)
      preds[i] = d_zero[i] > tau ? 1 : 0;
    double f1 = f1_binary(preds, labels);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

GrbfModel train_grbf(const SessionDataset& train, const SessionDataset& val,
                     const TrainConfig& config, const GrbfArch& arch,
                     FeatureMethod method, TrainDiagnostics* diag) {
  check_config(config);
  if (arch.trunk_dims.empty())
    fail(ErrorKind::param, "train_grbf: empty trunk architecture");
  if (arch.lambda <= 0.0)
    fail(ErrorKind::param, "train_grbf: lambda must be positive");
  if (train.size() == 0 || val.size() == 0)
    fail(ErrorKind::data, "train_grbf: empty split");
  require_both_classes(train.labels, "train_grbf");

  GrbfModel model;
  model.norm = fit_norm(train.features, method);
  Matrix xtr = apply_norm(model.norm, train.features);
  Matrix xval = apply_norm(model.norm, val.features);

  model.trunk = make_mlp(train.dim(), arch.trunk_dims, config.seed);
  size_t edim = arch.trunk_dims.back();
  model.head.centers = Matrix(1, edim);     // idle center starts at origin
  model.head.log_scales = Matrix(1, edim);  // unit scales
  model.head.lambda = arch.lambda;
  model.tau = arch.lambda;

  MlpGrads trunk_grads = make_mlp_grads(model.trunk);
  Matrix centers_grad(1, edim), log_scales_grad(1, edim);
  std::vector<ParamView> views = mlp_views(model.trunk, trunk_grads);
  views.push_back(
      {model.head.centers.data.data(), centers_grad.data.data(), edim});
  views.push_back(
      {model.head.log_scales.data.data(), log_scales_grad.data.data(), edim});
  Optimizer opt(config, std::move(views));

  Rng shuffle_rng(config.seed ^ kShuffleSalt);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t(0));

  MlpParams best_trunk = model.trunk;
  GrbfHead best_head = model.head;
  EarlyStop stop;
  MlpCache cache;
  std::vector<double> d_grad(1), embed_grad(edim);
  std::vector<int> val_preds(val.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < train.size()) {
      size_t batch = std::min(config.batch_size, train.size() - done);
      for (size_t b = 0; b < batch; ++b) {
        size_t idx = order[done + b];
        std::vector<double> e =
            mlp_forward(model.trunk, xtr.row(idx), xtr.cols, &cache);
        std::vector<double> d = rbf_distances(model.head, e.data(), edim);
        if (train.labels[idx] == 0) {
          epoch_loss += d[0];  // idle frames pull toward the center
          d_grad[0] = 1.0;
        } else {
          epoch_loss += softplus(arch.lambda - d[0]);  // flow pushed past it
          d_grad[0] = -sigmoid(arch.lambda - d[0]);
        }
        std::fill(embed_grad.begin(), embed_grad.end(), 0.0);
        rbf_backward(model.head, e.data(), edim, d_grad, centers_grad,
                     log_scales_grad, embed_grad.data());
        mlp_backward(model.trunk, cache, embed_grad.data(), trunk_grads);
      }
      opt.step();
      done += batch;
    }

    for (size_t i = 0; i < val.size(); ++i)
      val_preds[i] =
          grbf_d_zero(model, xval.row(i), xval.cols) > arch.lambda ? 1 : 0;
    double f1 = f1_binary(val_preds, val.labels);
    logx::debug("grbf epoch %d loss %.4f val_f1 %.4f", epoch, epoch_loss, f1);
    if (diag) {
      diag->epoch_loss.push_back(epoch_loss);
      diag->val_f1.push_back(f1);
    }
    if (stop.improved(f1, epoch)) {
      best_trunk = model.trunk;
      best_head = model.head;
    } else if (stop.stale >= config.early_stop_patience) {
      break;
    }
  }

  model.trunk = std::move(best_trunk);
  model.head = std::move(best_head);
  if (diag) diag->best_epoch = stop.best_epoch;

  std::vector<double> d0(val.size());
  for (size_t i = 0; i < val.size(); ++i)
    d0[i] = grbf_d_zero(model, xval.row(i), xval.cols);
  model.tau = calibrate_tau(d0, val.labels, arch.lambda);
  logx::info("grbf: best epoch %d val_f1 %.4f tau %.4f", stop.best_epoch,
             stop.best, model.tau);
  return model;
}

GrbfModel fine_tune(const GrbfModel& model, const SessionDataset& calib,
                    const TrainConfig& config, TrainDiagnostics* diag) {
  check_config(config);
  if (calib.size() == 0) fail(ErrorKind::data, "fine_tune: empty set");
  require_both_classes(calib.labels, "fine_tune");
  if (calib.dim() != model.norm.mean.size())
    fail(ErrorKind::data, "fine_tune: feature dimension mismatch");

  GrbfModel tuned = model;  // trunk and stored statistics stay frozen
  Matrix x = apply_norm(tuned.norm, calib.features);
  size_t edim = tuned.head.dim();
  double lambda = tuned.head.lambda;

  // the trunk never moves, so embeddings can be computed once up front
  Matrix emb(calib.size(), edim);
  for (size_t i = 0; i < calib.size(); ++i) {
    std::vector<double> e = mlp_forward(tuned.trunk, x.row(i), x.cols);
    std::copy(e.begin(), e.end(), emb.row(i));
  }

  Matrix centers_grad(1, edim), log_scales_grad(1, edim);
  std::vector<ParamView> views = {
      {tuned.head.centers.data.data(), centers_grad.data.data(), edim},
      {tuned.head.log_scales.data.data(), log_scales_grad.data.data(), edim},
  };
  Optimizer opt(config, std::move(views));

  Rng shuffle_rng(config.seed ^ kShuffleSalt);
  std::vector<size_t> order(calib.size());
  std::iota(order.begin(), order.end(), size_t(0));

  GrbfHead best_head = tuned.head;
  EarlyStop stop;
  std::vector<double> d_grad(1);
  std::vector<int> preds(calib.size());
  int epochs = std::max(1, config.epochs / 5);  // small-set adaptation budget

  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < calib.size()) {
      size_t batch = std::min(config.batch_size, calib.size() - done);
      for (size_t b = 0; b < batch; ++b) {
        size_t idx = order[done + b];
        std::vector<double> d =
            rbf_distances(tuned.head, emb.row(idx), edim);
        if (calib.labels[idx] == 0) {
          epoch_loss += d[0];
          d_grad[0] = 1.0;
        } else {
          epoch_loss += softplus(lambda - d[0]);
          d_grad[0] = -sigmoid(lambda - d[0]);
        }
        rbf_backward(tuned.head, emb.row(idx), edim, d_grad, centers_grad,
                     log_scales_grad);
      }
      opt.step();
      done += batch;
    }

    for (size_t i = 0; i < calib.size(); ++i)
      preds[i] =
          rbf_distances(tuned.head, emb.row(i), edim)[0] > lambda ? 1 : 0;
    double f1 = f1_binary(preds, calib.labels);
    logx::debug("fine_tune epoch %d loss %.4f calib_f1 %.4f", epoch,
                epoch_loss, f1);
    if (diag) {
      diag->epoch_loss.push_back(epoch_loss);
      diag->val_f1.push_back(f1);
    }
    if (stop.improved(f1, epoch)) {
      best_head = tuned.head;
    } else if (stop.stale >= config.early_stop_patience) {
      break;
    }
  }

  tuned.head = std::move(best_head);
  if (diag) diag->best_epoch = stop.best_epoch;

  std::vector<double> d0(calib.size());
  for (size_t i = 0; i < calib.size(); ++i)
    d0[i] = rbf_distances(tuned.head, emb.row(i), edim)[0];
  tuned.tau = calibrate_tau(d0, calib.labels, lambda);
  logx::info("fine_tune: best epoch %d calib_f1 %.4f tau %.4f",
             stop.best_epoch, stop.best, tuned.tau);
  return tuned;
}

namespace {

// Shared epoch loop for the two softmax baselines.  `forward` fills logits
// (returning the loss contribution is left to softmax_cross_entropy),
// `backward` routes the logit gradient into the parameter accumulators.
template <typename ForwardFn, typename BackwardFn, typename PredictFn>
void run_softmax_training(const SessionDataset& train,
                          const SessionDataset& val, const Matrix& xtr,
                          const Matrix& xval, const TrainConfig& config,
                          Optimizer& opt, ForwardFn&& forward,
                          BackwardFn&& backward, PredictFn&& predict,
                          std::function<void()> snapshot,
                          TrainDiagnostics* diag, EarlyStop& stop) {
  Rng shuffle_rng(config.seed ^ kShuffleSalt);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::vector<double> logit_grad;
  std::vector<int> val_preds(val.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < train.size()) {
      size_t batch = std::min(config.batch_size, train.size() - done);
      for (size_t b = 0; b < batch; ++b) {
        size_t idx = order[done + b];
        std::vector<double> logits = forward(xtr.row(idx));
        size_t y = train.labels[idx] != 0 ? 1 : 0;
        epoch_loss += softmax_cross_entropy(logits, y, &logit_grad);
        backward(xtr.row(idx), logit_grad);
      }
      opt.step();
      done += batch;
    }

    for (size_t i = 0; i < val.size(); ++i) val_preds[i] = predict(xval.row(i));
    double f1 = f1_binary(val_preds, val.labels);
    logx::debug("softmax epoch %d loss %.4f val_f1 %.4f", epoch, epoch_loss,
                f1);
    if (diag) {
      diag->epoch_loss.push_back(epoch_loss);
      diag->val_f1.push_back(f1);
    }
    if (stop.improved(f1, epoch)) {
      snapshot();
    } else if (stop.stale >= config.early_stop_patience) {
      break;
    }
  }
  if (diag) diag->best_epoch = stop.best_epoch;
}

}  // namespace

FcModel train_fc_softmax(const SessionDataset& train, const SessionDataset& val,
                         const TrainConfig& config, FeatureMethod method,
                         TrainDiagnostics* diag) {
  check_config(config);
  if (train.size() == 0 || val.size() == 0)
    fail(ErrorKind::data, "train_fc_softmax: empty split");
  require_both_classes(train.labels, "train_fc_softmax");

  FcModel model;
  model.norm = fit_norm(train.features, method);
  Matrix xtr = apply_norm(model.norm, train.features);
  Matrix xval = apply_norm(model.norm, val.features);

  model.net = make_mlp(train.dim(), {64, 32, 8, 2}, config.seed);
  model.net.layers[2].act = Activation::identity;  // keep the bottleneck linear

  MlpGrads grads = make_mlp_grads(model.net);
  Optimizer opt(config, mlp_views(model.net, grads));

  MlpParams best_net = model.net;
  EarlyStop stop;
  MlpCache cache;
  run_softmax_training(
      train, val, xtr, xval, config, opt,
      [&](const double* x) {
        return mlp_forward(model.net, x, xtr.cols, &cache);
      },
      [&](const double*, const std::vector<double>& lg) {
        mlp_backward(model.net, cache, lg.data(), grads);
      },
      [&](const double* x) { return fc_predict(model, x, xval.cols); },
      [&] { best_net = model.net; }, diag, stop);

  model.net = std::move(best_net);
  logx::info("fc: best epoch %d val_f1 %.4f", stop.best_epoch, stop.best);
  return model;
}

std::vector<double> fc_probabilities(const FcModel& model, const double* x,
                                     size_t dim) {
  return softmax(mlp_forward(model.net, x, dim));
}

int fc_predict(const FcModel& model, const double* x, size_t dim) {
  std::vector<double> p = fc_probabilities(model, x, dim);
  return p[1] > p[0] ? 1 : 0;
}

ConvModel train_conv_softmax(const SessionDataset& train,
                             const SessionDataset& val,
                             const TrainConfig& config, FeatureMethod method,
                             TrainDiagnostics* diag) {
  check_config(config);
  if (train.size() == 0 || val.size() == 0)
    fail(ErrorKind::data, "train_conv_softmax: empty split");
  require_both_classes(train.labels, "train_conv_softmax");
  if (train.dim() < 9)
    fail(ErrorKind::data, "train_conv_softmax: need at least 9 feature dims");

  ConvModel model;
  model.norm = fit_norm(train.features, method);
  Matrix xtr = apply_norm(model.norm, train.features);
  Matrix xval = apply_norm(model.norm, val.features);

  model.conv = make_conv1d(8, 9, 2, config.seed);
  size_t out_len = model.conv.out_len(train.dim());
  size_t flat = model.conv.kernels.rows * out_len;
  model.dense = make_mlp(flat, {32, 2}, config.seed ^ kDenseSalt);

  Conv1dGrads conv_grads = make_conv1d_grads(model.conv);
  MlpGrads dense_grads = make_mlp_grads(model.dense);
  std::vector<ParamView> views = mlp_views(model.dense, dense_grads);
  views.push_back({model.conv.kernels.data.data(),
                   conv_grads.kernels.data.data(),
                   model.conv.kernels.data.size()});
  views.push_back({model.conv.bias.data(), conv_grads.bias.data(),
                   model.conv.bias.size()});
  Optimizer opt(config, std::move(views));

  Conv1dLayer best_conv = model.conv;
  MlpParams best_dense = model.dense;
  EarlyStop stop;
  MlpCache cache;
  Matrix pre;                 // conv outputs before relu, kept for backward
  Matrix out_grad(model.conv.kernels.rows, out_len);
  std::vector<double> act(flat);
  run_softmax_training(
      train, val, xtr, xval, config, opt,
      [&](const double* x) {
        pre = conv1d_forward(model.conv, x, xtr.cols);
        for (size_t i = 0; i < flat; ++i)
          act[i] = pre.data[i] > 0.0 ? pre.data[i] : 0.0;
        return mlp_forward(model.dense, act.data(), flat, &cache);
      },
      [&](const double* x, const std::vector<double>& lg) {
        std::fill(out_grad.data.begin(), out_grad.data.end(), 0.0);
        mlp_backward(model.dense, cache, lg.data(), dense_grads,
                     out_grad.data.data());
        for (size_t i = 0; i < flat; ++i)
          if (pre.data[i] <= 0.0) out_grad.data[i] = 0.0;  // relu mask
        conv1d_backward(model.conv, x, xtr.cols, out_grad, conv_grads);
      },
      [&](const double* x) { return conv_predict(model, x, xval.cols); },
      [&] {
        best_conv = model.conv;
        best_dense = model.dense;
      },
      diag, stop);

  model.conv = std::move(best_conv);
  model.dense = std::move(best_dense);
  logx::info("conv: best epoch %d val_f1 %.4f", stop.best_epoch, stop.best);
  return model;
}

std::vector<double> conv_probabilities(const ConvModel& model, const double* x,
                                       size_t dim) {
  Matrix pre = conv1d_forward(model.conv, x, dim);
  for (double& v : pre.data) v = v > 0.0 ? v : 0.0;
  return softmax(
      mlp_forward(model.dense, pre.data.data(), pre.data.size()));
}

int conv_predict(const ConvModel& model, const double* x, size_t dim) {
  std::vector<double> p = conv_probabilities(model, x, dim);
  return p[1] > p[0] ? 1 : 0;
}

}  // namespace hydroflow
