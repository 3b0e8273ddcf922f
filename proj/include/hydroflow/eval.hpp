#pragma once

#include <functional>
#include <vector>

#include "hydroflow/dataset.hpp"

namespace hydroflow {

// Metrics and the session-wise evaluation protocol.  Throughout this header
// labels are flow classes in mL/min and "positive" means any non-zero flow,
// so precision/recall describe how well leaks are caught.

// 2PR / (P + R) with flow as the positive class; returns 0 when P + R = 0
// (no true positives anywhere).  Throws a data error on length mismatch or
// empty input.
double f1_binary(const std::vector<int>& preds, const std::vector<int>& labels);

// counts[actual][predicted] over the union of observed label values.
struct ConfusionMatrix {
  std::vector<int> classes;                  // ascending
  std::vector<std::vector<size_t>> counts;   // classes.size() squared

  size_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels);

// Flow-vs-zero F1 recovered from the matrix; agrees with f1_binary exactly.
double f1_from_confusion(const ConfusionMatrix& cm);

// Fraction of exactly-equal predictions.
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

// Disjoint session sets; together they cover the sessions of the dataset
// they were derived from.
struct SplitPlan {
  std::vector<int> train_sessions;
  std::vector<int> val_sessions;
  std::vector<int> test_sessions;
};

// Leave-one-session-out: the test session is held out entirely, the highest
// remaining session becomes validation, the rest train.  Requires at least
// three distinct sessions and the test session present.
SplitPlan loso_split(const SessionDataset& data, int test_session = 9);

// Trains on `train`, scores on `heldout`, returns flow-vs-zero F1 for one
// hyperparameter point.  Implementations must be deterministic.
using FoldEvalFn = std::function<double(
    const SessionDataset& train, const SessionDataset& heldout,
    const std::vector<double>& point)>;

struct CrossValResult {
  std::vector<double> best_point;
  std::vector<double> fold_f1;  // per-fold scores of the best point
  double mean_f1 = 0.0;
};

// Session-wise k-fold selection: fold i holds out the i-th smallest session
// id.  Picks the grid point with the highest mean F1; exact ties resolve to
// the lexicographically smallest point, so grid order never matters.
// Throws a param error on an empty grid and a data error when fewer than k
// sessions are available.
CrossValResult cross_validate(const SessionDataset& data,
                              const FoldEvalFn& eval_fn,
                              const std::vector<std::vector<double>>& grid,
                              size_t k = 8);

// Trains a binary classifier on {flow_a vs zero} rows of the non-test
// sessions and returns predicted labels for the given feature rows.
using BinaryClassifierFn = std::function<std::vector<int>(
    const SessionDataset& train, const Matrix& test_features)>;

// Single-rate detectability probe: keeps only labels {0, flow_a}, holds out
// `test_session`, trains the classifier on everything else, and returns the
// held-out flow-vs-zero F1.  flow_a must be a non-zero class present in the
// data alongside zero-flow rows.
double binary_flow_experiment(const SessionDataset& data, int flow_a,
                              const BinaryClassifierFn& classifier,
                              int test_session = 9);

}  // namespace hydroflow
