#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "hydroflow/error.hpp"
#include "hydroflow/rng.hpp"
#include "hydroflow/svm.hpp"

using namespace hydroflow;

namespace {

double rbf_kernel(const double* a, const double* b, size_t dim, double gamma) {
  double s = 0.0;
  for (size_t i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * s);
}

// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij, evaluated directly.
double dual_objective(const Matrix& X, const std::vector<int>& y,
                      const std::vector<double>& alpha, double gamma) {
  double obj = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) obj += alpha[i];
  for (size_t i = 0; i < alpha.size(); ++i)
    for (size_t j = 0; j < alpha.size(); ++j)
      obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] *
             rbf_kernel(X.row(i), X.row(j), X.cols, gamma);
  return obj;
}

// two interleaved Gaussian blobs, one per class
void make_blobs(Rng& rng, size_t per_class, double separation, Matrix& X,
                std::vector<int>& y) {
  X = Matrix(2 * per_class, 2);
  y.resize(2 * per_class);
  for (size_t i = 0; i < 2 * per_class; ++i) {
    int label = i % 2 == 0 ? 1 : -1;
    y[i] = label;
    X.at(i, 0) = label * separation + 0.6 * rng.gaussian();
    X.at(i, 1) = 0.6 * rng.gaussian();
  }
}

}  // namespace

TEST_CASE("two points: optimizer reaches the closed-form dual solution") {
  // one point per class; by symmetry a1 = a2 = a and the dual reduces to
  // 2a - a^2 (1 - K12), maximized at a* = 1 / (1 - K12) when below C.
  Matrix X(2, 1);
  X.at(0, 0) = 1.0;
  X.at(1, 0) = -1.0;
  std::vector<int> y = {1, -1};
  SvmParams params;
  params.C = 10.0;
  params.gamma = 0.5;
  params.tol = 1e-6;
  SvmModel m = train_svm(X, y, params);

  double k12 = rbf_kernel(X.row(0), X.row(1), 1, 0.5);  // exp(-2)
  double a_star = 1.0 / (1.0 - k12);
  REQUIRE(m.alpha_y.size() == 2);
  CHECK(std::abs(m.alpha_y[0]) == doctest::Approx(a_star).epsilon(1e-6));
  CHECK(std::abs(m.alpha_y[1]) == doctest::Approx(a_star).epsilon(1e-6));
  CHECK(m.bias == doctest::Approx(0.0).epsilon(1e-9));

  // both points end up exactly on the margin
  CHECK(svm_predict(m, X.row(0), 1).score == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(svm_predict(m, X.row(1), 1).score == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(svm_predict(m, X.row(0), 1).label == 1);
  CHECK(svm_predict(m, X.row(1), 1).label == -1);
}

TEST_CASE("small problems: trained alphas beat a brute-force dual grid") {
  Rng rng(17);
  Matrix X(6, 2);
  std::vector<int> y(6);
  for (size_t i = 0; i < 6; ++i) {
    y[i] = i < 3 ? 1 : -1;
    X.at(i, 0) = (i < 3 ? 1.0 : -1.0) + 0.4 * rng.gaussian();
    X.at(i, 1) = 0.4 * rng.gaussian();
  }
  SvmParams params;
  params.C = 2.0;
  params.gamma = 0.7;
  params.tol = 1e-5;
  SvmTrainInfo info;
  SvmModel m = train_svm(X, y, params, &info);

  // reconstruct the full alpha vector (zeros for non-SVs are absent)
  std::vector<double> alpha(6, 0.0);
  size_t sv = 0;
  for (size_t i = 0; i < 6; ++i) {
    // match support vectors back to training rows by coordinates
    if (sv < m.support_vectors.rows &&
        m.support_vectors.at(sv, 0) == X.at(i, 0) &&
        m.support_vectors.at(sv, 1) == X.at(i, 1)) {
      alpha[i] = std::abs(m.alpha_y[sv]);
      ++sv;
    }
  }
  REQUIRE(sv == m.support_vectors.rows);
  double trained = dual_objective(X, y, alpha, params.gamma);

  // random feasible competitors (box + equality constraint via projection)
  Rng comp(5);
  double best_random = -1e300;
  for (int trial = 0; trial < 20000; ++trial) {
    std::vector<double> a(6);
    for (double& v : a) v = comp.uniform(0.0, 2.0);
    // project onto sum_i a_i y_i = 0 by shifting each class equally
    double drift = 0.0;
    for (size_t i = 0; i < 6; ++i) drift += a[i] * y[i];
    for (size_t i = 0; i < 6; ++i) {
      a[i] -= y[i] * drift / 6.0;
      if (a[i] < 0.0 || a[i] > 2.0) {
        drift = 1e300;  // projection left the box: discard this draw
        break;
      }
    }
    if (drift == 1e300) continue;
    best_random = std::max(best_random, dual_objective(X, y, a, params.gamma));
  }
  CHECK(trained >= best_random - 1e-3);
  CHECK(info.sweeps >= 10);               // ends on a quiet streak
  CHECK(info.max_kkt_violation < 0.05);   // margins honored at optimum
}

TEST_CASE("separable blobs are classified cleanly and deterministically") {
  Rng rng(99);
  Matrix X;
  std::vector<int> y;
  make_blobs(rng, 60, 2.5, X, y);
  SvmParams params;
  params.C = 1.0;
  params.seed = 3;
  SvmModel a = train_svm(X, y, params);
  SvmModel b = train_svm(X, y, params);

  CHECK(a.alpha_y == b.alpha_y);  // same seed, bit-identical run
  CHECK(a.bias == b.bias);

  size_t correct = 0;
  for (size_t i = 0; i < X.rows; ++i)
    correct += svm_predict(a, X.row(i), 2).label == y[i] ? 1 : 0;
  CHECK(double(correct) / double(X.rows) >= 0.97);

  // a different shuffle seed may reorder updates but not flip predictions
  params.seed = 4;
  SvmModel c = train_svm(X, y, params);
  size_t agree = 0;
  for (size_t i = 0; i < X.rows; ++i)
    agree += svm_predict(a, X.row(i), 2).label ==
                     svm_predict(c, X.row(i), 2).label
                 ? 1
                 : 0;
  CHECK(double(agree) / double(X.rows) >= 0.97);
}

TEST_CASE("degenerate training inputs are data errors") {
  Matrix X(4, 2, 1.0);
  std::vector<int> same = {1, 1, 1, 1};
  try {
    train_svm(X, same, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::data);
  }
  std::vector<int> bad = {1, -1, 2, 1};
  CHECK_THROWS_AS(train_svm(X, bad, {}), Error);
  Matrix empty;
  std::vector<int> none;
  CHECK_THROWS_AS(train_svm(empty, none, {}), Error);
}

TEST_CASE("one-vs-rest: multi-class routing and smaller-label ties") {
  Rng rng(12);
  // three well-separated blobs labeled 0, 100, 500
  Matrix X(90, 2);
  std::vector<int> labels(90);
  const double centers[3][2] = {{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}};
  const int names[3] = {0, 100, 500};
  for (size_t i = 0; i < 90; ++i) {
    size_t c = i % 3;
    labels[i] = names[c];
    X.at(i, 0) = centers[c][0] + 0.5 * rng.gaussian();
    X.at(i, 1) = centers[c][1] + 0.5 * rng.gaussian();
  }
  SvmParams params;
  params.C = 5.0;
  OvrSvmModel ovr = train_svm_ovr(X, labels, params);
  CHECK(ovr.classes == std::vector<int>{0, 100, 500});
  REQUIRE(ovr.members.size() == 3);
  size_t correct = 0;
  for (size_t i = 0; i < X.rows; ++i)
    correct += ovr_predict(ovr, X.row(i), 2) == labels[i] ? 1 : 0;
  CHECK(double(correct) / double(X.rows) >= 0.95);

  // hand-built tie: two members with identical decision functions
  OvrSvmModel tie;
  tie.classes = {100, 500};
  SvmModel flat;
  flat.support_vectors = Matrix(1, 1, 0.0);
  flat.alpha_y = {0.0};
  flat.bias = 0.25;
  flat.gamma = 1.0;
  tie.members = {flat, flat};
  double x0 = 3.0;
  CHECK(ovr_predict(tie, &x0, 1) == 100);
}
