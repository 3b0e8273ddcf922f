#include "hydroflow/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hydroflow/error.hpp"
#include "hydroflow/log.hpp"

namespace hydroflow {

double f1_binary(const std::vector<int>& preds,
                 const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::data, "f1_binary: length mismatch");
  if (preds.empty()) fail(ErrorKind::data, "f1_binary: empty input");
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    bool pred_flow = preds[i] != 0;
    bool is_flow = labels[i] != 0;
    if (pred_flow && is_flow)
      ++tp;
    else if (pred_flow && !is_flow)
      ++fp;
    else if (!pred_flow && is_flow)
      ++fn;
  }
  // 2PR/(P+R) simplifies to 2TP / (2TP + FP + FN); zero if no TP share
  size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return 2.0 * double(tp) / double(denom);
}

size_t ConfusionMatrix::total() const {
  size_t n = 0;
  for (const auto& row : counts)
    for (size_t c : row) n += c;
  return n;
}

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::data, "confusion: length mismatch");
  if (preds.empty()) fail(ErrorKind::data, "confusion: empty input");
  std::set<int> values(labels.begin(), labels.end());
  values.insert(preds.begin(), preds.end());

  ConfusionMatrix cm;
  cm.classes.assign(values.begin(), values.end());
  cm.counts.assign(cm.classes.size(),
                   std::vector<size_t>(cm.classes.size(), 0));
  auto index = [&](int v) {
    return size_t(std::lower_bound(cm.classes.begin(), cm.classes.end(), v) -
                  cm.classes.begin());
  };
  for (size_t i = 0; i < preds.size(); ++i)
    ++cm.counts[index(labels[i])][index(preds[i])];
  return cm;
}

double f1_from_confusion(const ConfusionMatrix& cm) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t a = 0; a < cm.classes.size(); ++a) {
    for (size_t p = 0; p < cm.classes.size(); ++p) {
      bool actual_flow = cm.classes[a] != 0;
      bool pred_flow = cm.classes[p] != 0;
      if (actual_flow && pred_flow)
        tp += cm.counts[a][p];
      else if (!actual_flow && pred_flow)
        fp += cm.counts[a][p];
      else if (actual_flow && !pred_flow)
        fn += cm.counts[a][p];
    }
  }
  size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return 2.0 * double(tp) / double(denom);
}

double accuracy(const std::vector<int>& preds,
                const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::data, "accuracy: length mismatch");
  if (preds.empty()) fail(ErrorKind::data, "accuracy: empty input");
  size_t hit = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++hit;
  return double(hit) / double(preds.size());
}

SplitPlan loso_split(const SessionDataset& data, int test_session) {
  std::vector<int> sessions = session_ids(data);
  if (sessions.size() < 3)
    fail(ErrorKind::data, "loso_split: need at least three sessions");
  if (!std::binary_search(sessions.begin(), sessions.end(), test_session))
    fail(ErrorKind::data, "loso_split: test session absent from data");

  SplitPlan plan;
  plan.test_sessions = {test_session};
  std::vector<int> rest;
  for (int s : sessions)
    if (s != test_session) rest.push_back(s);
  plan.val_sessions = {rest.back()};  // highest remaining session
  rest.pop_back();
  plan.train_sessions = rest;
  return plan;
}

CrossValResult cross_validate(const SessionDataset& data,
                              const FoldEvalFn& eval_fn,
                              const std::vector<std::vector<double>>& grid,
                              size_t k) {
  if (grid.empty()) fail(ErrorKind::param, "cross_validate: empty grid");
  if (k == 0) fail(ErrorKind::param, "cross_validate: k must be positive");
  std::vector<int> sessions = session_ids(data);
  if (sessions.size() < k)
    fail(ErrorKind::data, "cross_validate: fewer sessions than folds");

  CrossValResult result;
  bool have_best = false;
  std::vector<double> fold_scores(k);
  for (const std::vector<double>& point : grid) {
    double mean = 0.0;
    for (size_t f = 0; f < k; ++f) {
      int held = sessions[f];  // fold f holds out the f-th smallest session
      std::vector<int> train_ids;
      for (int s : sessions)
        if (s != held) train_ids.push_back(s);
      SessionDataset train = filter_sessions(data, train_ids);
      SessionDataset heldout = filter_sessions(data, {held});
      fold_scores[f] = eval_fn(train, heldout, point);
      mean += fold_scores[f];
    }
    mean /= double(k);
    logx::debug("cross_validate: point[0]=%g mean_f1=%.4f",
                point.empty() ? 0.0 : point[0], mean);
    bool better = !have_best || mean > result.mean_f1 ||
                  (mean == result.mean_f1 && point < result.best_point);
    if (better) {
      have_best = true;
      result.best_point = point;
      result.fold_f1 = fold_scores;
      result.mean_f1 = mean;
    }
  }
  return result;
}

double binary_flow_experiment(const SessionDataset& data, int flow_a,
                              const BinaryClassifierFn& classifier,
                              int test_session) {
  if (flow_a == 0)
    fail(ErrorKind::data, "binary_flow_experiment: flow class missing (0 vs 0)");
  SessionDataset pair = filter_labels(data, {0, flow_a});
  bool has_zero = false, has_flow = false;
  for (int v : pair.labels) (v == 0 ? has_zero : has_flow) = true;
  if (!has_zero || !has_flow)
    fail(ErrorKind::data, "binary_flow_experiment: class missing from data");

  SplitPlan plan = loso_split(pair, test_session);
  std::vector<int> fit_ids = plan.train_sessions;
  fit_ids.insert(fit_ids.end(), plan.val_sessions.begin(),
                 plan.val_sessions.end());
  SessionDataset train = filter_sessions(pair, fit_ids);
  SessionDataset test = filter_sessions(pair, plan.test_sessions);

  std::vector<int> preds = classifier(train, test.features);
  if (preds.size() != test.size())
    fail(ErrorKind::data, "binary_flow_experiment: prediction count mismatch");
  return f1_binary(preds, test.labels);
}

}  // namespace hydroflow
