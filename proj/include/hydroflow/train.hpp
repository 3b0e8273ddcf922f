#pragma once

#include <cstdint>
#include <vector>

#include "hydroflow/dataset.hpp"
#include "hydroflow/features.hpp"
#include "hydroflow/net.hpp"

namespace hydroflow {

// Trainers for the leak detector and its learned baselines.  All of them
// binarize flow labels internally (0 = idle, anything else = flow), fit
// feature standardization on the training split only, and are deterministic
// functions of (data, config, seed): two identical runs produce identical
// parameters.

struct TrainConfig {
  double learning_rate = 1e-3;
  size_t batch_size = 64;
  int epochs = 100;
  std::uint64_t seed = 0;
  enum class Optimizer { sgd, adam } optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int early_stop_patience = 10;  // epochs without validation-F1 improvement
};

// Trunk shape and margin for the RBF-head detector.
struct GrbfArch {
  std::vector<size_t> trunk_dims = {64, 32, 8};
  double lambda = 1.0;
};

// Embedding trunk plus a single RBF center describing the idle class.
// Frames whose distance to the center exceeds tau are rejected as flow.
struct GrbfModel {
  MlpParams trunk;
  GrbfHead head;
  double tau = 1.0;
  NormStats norm;  // fitted on the training split; apply before inference
};

enum class FlowDecision { no_flow, flow };

struct Detection {
  FlowDecision decision;
  double d_zero;  // distance of the embedding to the idle center
};

// Distance of a standardized feature row to the idle center.
double grbf_d_zero(const GrbfModel& model, const double* x, size_t dim);

// NoFlow iff d_zero <= tau; equality counts as NoFlow, so raising tau can
// only move verdicts toward NoFlow.  The input must already be standardized
// with model.norm.
Detection detect(const GrbfModel& model, const double* x, size_t dim,
                 double tau);
inline Detection detect(const GrbfModel& model, const double* x, size_t dim) {
  return detect(model, x, dim, model.tau);
}

// Optional per-epoch training record, for curve inspection in tests.
struct TrainDiagnostics {
  std::vector<double> epoch_loss;  // summed training loss
  std::vector<double> val_f1;
  int best_epoch = -1;             // epoch whose snapshot was returned
};

// Trains trunk + head with the smooth margin loss: idle frames minimize
// d_zero, flow frames pay softplus(lambda - d_zero) until pushed past the
// margin.  Keeps the snapshot with the best validation F1 (evaluated at
// tau = lambda), then calibrates tau on the validation distances.  Throws a
// data error when the training split lacks either class.
GrbfModel train_grbf(const SessionDataset& train, const SessionDataset& val,
                     const TrainConfig& config = {}, const GrbfArch& arch = {},
                     FeatureMethod method = FeatureMethod::fbank,
                     TrainDiagnostics* diag = nullptr);

// Adapts a trained model to a new installation from a small calibration set
// containing both idle and flow frames.  The trunk and the stored feature
// statistics are frozen bit-for-bit; only the head (center, scales) and tau
// move, for at most config.epochs / 5 epochs.
GrbfModel fine_tune(const GrbfModel& model, const SessionDataset& calib,
                    const TrainConfig& config = {},
                    TrainDiagnostics* diag = nullptr);

// Dense softmax baseline: the same trunk shape feeding two logits.
struct FcModel {
  MlpParams net;
  NormStats norm;
};

FcModel train_fc_softmax(const SessionDataset& train, const SessionDataset& val,
                         const TrainConfig& config = {},
                         FeatureMethod method = FeatureMethod::fbank,
                         TrainDiagnostics* diag = nullptr);

// Class probabilities {idle, flow} for a standardized row; sums to 1.
std::vector<double> fc_probabilities(const FcModel& model, const double* x,
                                     size_t dim);
int fc_predict(const FcModel& model, const double* x, size_t dim);  // 0 or 1

// Convolutional softmax baseline: the feature vector is treated as a short
// 1-D signal (8 kernels of length 9, stride 2 -> relu -> dense).
struct ConvModel {
  Conv1dLayer conv;
  MlpParams dense;
  NormStats norm;
};

ConvModel train_conv_softmax(const SessionDataset& train,
                             const SessionDataset& val,
                             const TrainConfig& config = {},
                             FeatureMethod method = FeatureMethod::fbank,
                             TrainDiagnostics* diag = nullptr);

std::vector<double> conv_probabilities(const ConvModel& model, const double* x,
                                       size_t dim);
int conv_predict(const ConvModel& model, const double* x, size_t dim);

// Smallest threshold maximizing flow-vs-zero F1 of the rule
// "flow iff d_zero > tau" over the given scored frames.  Candidates are the
// observed distances, so the result is always attainable.  Returns
// `fallback` when the frames do not contain both classes.
double calibrate_tau(const std::vector<double>& d_zero,
                     const std::vector<int>& labels, double fallback);

}  // namespace hydroflow
