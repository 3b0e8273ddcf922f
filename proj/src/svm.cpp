#include "hydroflow/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hydroflow/error.hpp"
#include "hydroflow/kernels.hpp"
#include "hydroflow/log.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

// Sequential minimal optimization on the RBF-kernel dual.  Decision values
// (the kernel expansion without the bias term) are kept incrementally so a
// violation check is O(1) and a successful step is O(n * dim).
struct Smo {
  const Matrix& X;
  const std::vector<int>& y;
  double C, gamma, tol;
  std::vector<double> alpha;
  std::vector<double> f;  // sum_j alpha_j y_j K(j, i), bias excluded
  double b = 0.0;

  Smo(const Matrix& X_, const std::vector<int>& y_, double C_, double gamma_,
      double tol_)
      : X(X_), y(y_), C(C_), gamma(gamma_), tol(tol_), alpha(X_.rows, 0.0),
        f(X_.rows, 0.0) {}

  double kernel(size_t i, size_t j) const {
    return std::exp(-gamma * kern::squared_distance(X.row(i), X.row(j), X.cols));
  }

  double error(size_t i) const { return f[i] + b - double(y[i]); }

  bool take_step(size_t i, size_t j) {
    if (i == j) return false;
    double ei = error(i), ej = error(j);
    double ai = alpha[i], aj = alpha[j];
    double L, H;
    if (y[i] != y[j]) {
      L = std::max(0.0, aj - ai);
      H = std::min(C, C + aj - ai);
    } else {
      L = std::max(0.0, ai + aj - C);
      H = std::min(C, ai + aj);
    }
    if (L >= H) return false;
    double kij = kernel(i, j);
    double eta = 2.0 * kij - 2.0;  // K(i,i) = K(j,j) = 1 for the RBF kernel
    if (eta >= 0.0) return false;
    double aj_new = aj - double(y[j]) * (ei - ej) / eta;
    aj_new = std::clamp(aj_new, L, H);
    // tight acceptance threshold so the post-training KKT check holds
    if (std::abs(aj_new - aj) < 1e-12) return false;
    double ai_new = ai + double(y[i] * y[j]) * (aj - aj_new);

    double di = (ai_new - ai) * double(y[i]);
    double dj = (aj_new - aj) * double(y[j]);
    double b1 = b - ei - di - dj * kij;        // K(i,i) = 1
    double b2 = b - ej - di * kij - dj;        // K(j,j) = 1
    alpha[i] = ai_new;
    alpha[j] = aj_new;
    for (size_t k = 0; k < f.size(); ++k)
      f[k] += di * kernel(i, k) + dj * kernel(j, k);
    if (ai_new > 0.0 && ai_new < C)
      b = b1;
    else if (aj_new > 0.0 && aj_new < C)
      b = b2;
    else
      b = 0.5 * (b1 + b2);
    return true;
  }
};

}  // namespace

SvmModel train_svm(const Matrix& X, const std::vector<int>& y,
                   const SvmParams& params, SvmTrainInfo* info) {
  size_t n = X.rows;
  if (n == 0 || X.cols == 0) fail(ErrorKind::data, "empty training set");
  if (y.size() != n) fail(ErrorKind::data, "label count mismatch");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1)
      has_pos = true;
    else if (v == -1)
      has_neg = true;
    else
      fail(ErrorKind::data, "labels must be +-1");
  }
  if (!has_pos || !has_neg)
    fail(ErrorKind::data, "degenerate labels: need both classes");

  double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / double(X.cols);
  Smo smo(X, y, params.C, gamma, params.tol);
  Rng rng(params.seed);

  std::vector<size_t> order(n), partners(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::iota(partners.begin(), partners.end(), size_t(0));

  int quiet_sweeps = 0;
  int sweeps = 0;
  while (quiet_sweeps < params.max_passes) {
    ++sweeps;
    size_t num_changed = 0;
    rng.shuffle(order);
    for (size_t i : order) {
      double r = smo.error(i) * double(y[i]);
      bool violates = (r < -params.tol && smo.alpha[i] < params.C) ||
                      (r > params.tol && smo.alpha[i] > 0.0);
      if (!violates) continue;
      // random partner first, then a shuffled scan until some step succeeds
      bool stepped = smo.take_step(i, rng.uniform_index(n));
      if (!stepped) {
        rng.shuffle(partners);
        for (size_t cand : partners)
          if (smo.take_step(i, cand)) {
            stepped = true;
            break;
          }
      }
      if (stepped) ++num_changed;
    }
    if (num_changed == 0)
      ++quiet_sweeps;
    else
      quiet_sweeps = 0;
  }

  SvmModel model;
  model.gamma = gamma;
  model.C = params.C;
  model.bias = smo.b;
  size_t n_sv = 0;
  for (double a : smo.alpha)
    if (a > 0.0) ++n_sv;
  model.support_vectors = Matrix(n_sv, X.cols);
  model.alpha_y.reserve(n_sv);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    if (smo.alpha[i] <= 0.0) continue;
    std::copy(X.row(i), X.row(i) + X.cols, model.support_vectors.row(k++));
    model.alpha_y.push_back(smo.alpha[i] * double(y[i]));
  }

  if (info) {
    info->sweeps = sweeps;
    info->max_kkt_violation = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (smo.alpha[i] <= 0.0 || smo.alpha[i] >= params.C) continue;
      double v = std::abs(double(y[i]) * (smo.f[i] + smo.b) - 1.0);
      info->max_kkt_violation = std::max(info->max_kkt_violation, v);
    }
  }
  logx::debug("svm: %zu support vectors after %d sweeps", n_sv, sweeps);
  return model;
}

SvmDecision svm_predict(const SvmModel& m, const double* x, size_t dim) {
  if (dim != m.support_vectors.cols)
    fail(ErrorKind::data, "feature dimension mismatch in svm_predict");
  double score = m.bias;
  for (size_t i = 0; i < m.support_vectors.rows; ++i)
    score += m.alpha_y[i] *
             std::exp(-m.gamma *
                      kern::squared_distance(m.support_vectors.row(i), x, dim));
  return {score >= 0.0 ? 1 : -1, score};
}

OvrSvmModel train_svm_ovr(const Matrix& X, const std::vector<int>& labels,
                          const SvmParams& params) {
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    fail(ErrorKind::data, "degenerate labels: need at least two classes");

  OvrSvmModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  std::vector<int> y(labels.size());
  for (size_t c = 0; c < model.classes.size(); ++c) {
    for (size_t i = 0; i < labels.size(); ++i)
      y[i] = labels[i] == model.classes[c] ? 1 : -1;
    SvmParams member = params;
    member.seed = params.seed + c;  // per-member stream
    model.members.push_back(train_svm(X, y, member));
  }
  return model;
}

int ovr_predict(const OvrSvmModel& m, const double* x, size_t dim) {
  if (m.members.empty()) fail(ErrorKind::data, "empty ensemble");
  int best = m.classes[0];
  double best_score = svm_predict(m.members[0], x, dim).score;
  for (size_t c = 1; c < m.members.size(); ++c) {
    double s = svm_predict(m.members[c], x, dim).score;
    if (s > best_score) {  // ties keep the smaller label
      best_score = s;
      best = m.classes[c];
    }
  }
  return best;
}

}  // namespace hydroflow
