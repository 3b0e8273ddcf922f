#pragma once

#include <cstdint>
#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

struct SvmParams {
  double C = 1.0;
  double gamma = 0.0;  // <= 0 means 1/dim
  double tol = 1e-3;
  int max_passes = 10;  // consecutive sweeps without an update before stopping
  uint64_t seed = 0;    // pair-selection shuffle
};

struct SvmModel {
  Matrix support_vectors;       // n_sv x dim
  std::vector<double> alpha_y;  // alpha_i * y_i per support vector
  double bias = 0.0;
  double gamma = 0.0;
  double C = 1.0;
};

struct SvmDecision {
  int label;     // +1 / -1 (score 0 counts as +1)
  double score;  // signed margin
};

struct SvmTrainInfo {
  int sweeps = 0;
  double max_kkt_violation = 0.0;  // max |y f(x) - 1| over non-bound alphas
};

// Binary soft-margin SVM with an RBF kernel, trained by sequential minimal
// optimization (random-partner pair steps over shuffled sweeps; deterministic
// for a given seed). Labels must be +-1 with both classes present
// (degenerate-labels data error otherwise).
SvmModel train_svm(const Matrix& X, const std::vector<int>& y,
                   const SvmParams& params = {}, SvmTrainInfo* info = nullptr);

SvmDecision svm_predict(const SvmModel& m, const double* x, size_t dim);

// One-vs-rest ensemble over the distinct labels (ascending); prediction is
// the member with the largest margin, ties to the smaller label.
struct OvrSvmModel {
  std::vector<int> classes;
  std::vector<SvmModel> members;
};

OvrSvmModel train_svm_ovr(const Matrix& X, const std::vector<int>& labels,
                          const SvmParams& params = {});
int ovr_predict(const OvrSvmModel& m, const double* x, size_t dim);

}  // namespace hydroflow
