#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "hydroflow/error.hpp"
#include "hydroflow/eval.hpp"
#include "hydroflow/rng.hpp"
#include "hydroflow/train.hpp"

using namespace hydroflow;

namespace {

// Two Gaussian feature clusters: "idle" near the origin, "flow" shifted.
// Sessions alternate so the set can be split session-wise.
SessionDataset blob_dataset(uint64_t seed, size_t per_class, double shift,
                            size_t dim, const std::vector<int>& sessions) {
  Rng rng(seed);
  SessionDataset data;
  data.features = Matrix(2 * per_class, dim);
  for (size_t i = 0; i < 2 * per_class; ++i) {
    bool flow = i % 2 == 1;
    data.labels.push_back(flow ? 500 : 0);
    data.sessions.push_back(sessions[i % sessions.size()]);
    for (size_t j = 0; j < dim; ++j) {
      double base = flow && j < 4 ? shift : 0.0;
      data.features.at(i, j) = base + rng.gaussian();
    }
  }
  return data;
}

double detector_f1(const GrbfModel& model, const SessionDataset& data) {
  Matrix x = apply_norm(model.norm, data.features);
  std::vector<int> preds(x.rows);
  for (size_t i = 0; i < x.rows; ++i)
    preds[i] =
        detect(model, x.row(i), x.cols).decision == FlowDecision::flow ? 1 : 0;
  return f1_binary(preds, data.labels);
}

TrainConfig quick_config(int epochs = 30) {
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = 16;
  return config;
}

}  // namespace

TEST_CASE("threshold calibration maximizes F1 over observed distances") {
  // flow iff d > tau; candidates are the observed values
  std::vector<double> d = {1.0, 2.0, 3.0, 4.0};
  std::vector<int> labels = {0, 0, 500, 500};
  CHECK(calibrate_tau(d, labels, 9.0) == 2.0);

  // all thresholds tie at F1 = 0 -> the smallest candidate wins
  std::vector<double> rev = {1.0, 2.0};
  std::vector<int> inverted = {500, 0};
  CHECK(calibrate_tau(rev, inverted, 9.0) == 1.0);

  // single-class input falls back
  std::vector<int> only_idle = {0, 0};
  CHECK(calibrate_tau(rev, only_idle, 9.0) == 9.0);

  // perfect separation keeps every idle frame below tau
  std::vector<double> clean = {0.1, 0.2, 5.0, 6.0, 7.0};
  std::vector<int> cl = {0, 0, 100, 100, 100};
  double tau = calibrate_tau(clean, cl, 1.0);
  CHECK(tau >= 0.2);
  CHECK(tau < 5.0);
}

TEST_CASE("decision rule: distances at or below tau are no-flow") {
  // identity trunk (one identity layer), center at origin, unit scales
  GrbfModel model;
  DenseLayer layer;
  layer.weights = Matrix(2, 2);
  layer.weights.at(0, 0) = 1.0;
  layer.weights.at(1, 1) = 1.0;
  layer.bias = {0.0, 0.0};
  layer.act = Activation::identity;
  model.trunk.layers = {layer};
  model.head.centers = Matrix(1, 2, 0.0);
  model.head.log_scales = Matrix(1, 2, 0.0);
  model.tau = 25.0;

  double on_boundary[2] = {3.0, 4.0};  // d_zero = 25 exactly
  CHECK(grbf_d_zero(model, on_boundary, 2) == 25.0);
  CHECK(detect(model, on_boundary, 2).decision == FlowDecision::no_flow);
  CHECK(detect(model, on_boundary, 2).d_zero == 25.0);

  double outside[2] = {3.0, 4.1};
  CHECK(detect(model, outside, 2).decision == FlowDecision::flow);
  double inside[2] = {0.1, -0.2};
  CHECK(detect(model, inside, 2).decision == FlowDecision::no_flow);

  // explicit threshold override
  CHECK(detect(model, outside, 2, 1e6).decision == FlowDecision::no_flow);
}

TEST_CASE("detector training separates clean clusters") {
  SessionDataset train = blob_dataset(1, 150, 6.0, 10, {1, 2, 3});
  SessionDataset val = blob_dataset(2, 40, 6.0, 10, {4});

  TrainDiagnostics diag;
  GrbfModel model =
      train_grbf(train, val, quick_config(), GrbfArch{}, FeatureMethod::fbank,
                 &diag);
  CHECK(model.head.n_centers() == 1);
  CHECK(model.trunk.out_dim() == 8);
  CHECK(model.tau > 0.0);
  REQUIRE(!diag.epoch_loss.empty());
  CHECK(diag.best_epoch >= 0);

  SessionDataset test = blob_dataset(3, 40, 6.0, 10, {5});
  CHECK(detector_f1(model, test) >= 0.95);

  // the loss actually decreased while training
  CHECK(diag.epoch_loss.back() < diag.epoch_loss.front());
}

TEST_CASE("detector training is deterministic per seed") {
  SessionDataset train = blob_dataset(7, 60, 5.0, 8, {1, 2});
  SessionDataset val = blob_dataset(8, 20, 5.0, 8, {3});
  GrbfModel a = train_grbf(train, val, quick_config(10));
  GrbfModel b = train_grbf(train, val, quick_config(10));
  CHECK(a.tau == b.tau);
  CHECK(a.head.centers.data == b.head.centers.data);
  CHECK(a.head.log_scales.data == b.head.log_scales.data);
  for (size_t l = 0; l < a.trunk.layers.size(); ++l)
    CHECK(a.trunk.layers[l].weights.data == b.trunk.layers[l].weights.data);

  TrainConfig other = quick_config(10);
  other.seed = 99;
  GrbfModel c = train_grbf(train, val, other);
  bool differs = c.trunk.layers[0].weights.data != a.trunk.layers[0].weights.data;
  CHECK(differs);
}

TEST_CASE("training requires both classes") {
  SessionDataset train = blob_dataset(1, 30, 4.0, 6, {1, 2});
  SessionDataset idle_only = filter_labels(train, {0});
  SessionDataset val = blob_dataset(2, 10, 4.0, 6, {3});
  try {
    train_grbf(idle_only, val, quick_config(5));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::data);
  }
}

TEST_CASE("fine-tuning moves the head but never the trunk") {
  SessionDataset train = blob_dataset(11, 120, 5.0, 10, {1, 2});
  SessionDataset val = blob_dataset(12, 30, 5.0, 10, {3});
  GrbfModel base = train_grbf(train, val, quick_config());

  // a shifted installation: clusters drift, the old threshold misfires
  SessionDataset calib = blob_dataset(13, 25, 5.0, 10, {4});
  for (size_t i = 0; i < calib.size(); ++i)
    for (size_t j = 0; j < calib.dim(); ++j) calib.features.at(i, j) += 1.5;

  GrbfModel tuned = fine_tune(base, calib, quick_config());

  for (size_t l = 0; l < base.trunk.layers.size(); ++l) {
    CHECK(tuned.trunk.layers[l].weights.data ==
          base.trunk.layers[l].weights.data);
    CHECK(tuned.trunk.layers[l].bias == base.trunk.layers[l].bias);
  }
  CHECK(tuned.norm.mean == base.norm.mean);
  CHECK(tuned.norm.std == base.norm.std);
  bool head_moved = tuned.head.centers.data != base.head.centers.data ||
                    tuned.tau != base.tau;
  CHECK(head_moved);
  CHECK(detector_f1(tuned, calib) >= detector_f1(base, calib));

  SessionDataset idle_only = filter_labels(calib, {0});
  CHECK_THROWS_AS(fine_tune(base, idle_only, quick_config()), Error);
}

TEST_CASE("dense softmax baseline fits clean clusters") {
  SessionDataset train = blob_dataset(21, 120, 5.0, 12, {1, 2});
  SessionDataset val = blob_dataset(22, 30, 5.0, 12, {3});
  FcModel model = train_fc_softmax(train, val, quick_config());

  Matrix x = apply_norm(model.norm, val.features);
  size_t correct = 0;
  for (size_t i = 0; i < x.rows; ++i) {
    std::vector<double> p = fc_probabilities(model, x.row(i), x.cols);
    REQUIRE(p.size() == 2);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));
    int want = val.labels[i] != 0 ? 1 : 0;
    correct += fc_predict(model, x.row(i), x.cols) == want ? 1 : 0;
  }
  CHECK(double(correct) / double(x.rows) >= 0.95);

  FcModel again = train_fc_softmax(train, val, quick_config());
  CHECK(model.net.layers[0].weights.data == again.net.layers[0].weights.data);
}

TEST_CASE("convolutional softmax baseline fits clean clusters") {
  SessionDataset train = blob_dataset(31, 120, 5.0, 24, {1, 2});
  SessionDataset val = blob_dataset(32, 30, 5.0, 24, {3});
  ConvModel model = train_conv_softmax(train, val, quick_config());
  CHECK(model.conv.kernels.rows == 8);
  CHECK(model.conv.kernels.cols == 9);
  CHECK(model.conv.stride == 2);

  Matrix x = apply_norm(model.norm, val.features);
  size_t correct = 0;
  for (size_t i = 0; i < x.rows; ++i) {
    std::vector<double> p = conv_probabilities(model, x.row(i), x.cols);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));
    int want = val.labels[i] != 0 ? 1 : 0;
    correct += conv_predict(model, x.row(i), x.cols) == want ? 1 : 0;
  }
  CHECK(double(correct) / double(x.rows) >= 0.95);

  // a feature vector shorter than one kernel cannot be convolved
  SessionDataset tiny = blob_dataset(33, 20, 5.0, 6, {1, 2});
  SessionDataset tiny_val = blob_dataset(34, 8, 5.0, 6, {3});
  CHECK_THROWS_AS(train_conv_softmax(tiny, tiny_val, quick_config(5)), Error);
}

TEST_CASE("optimizer choice changes the path but both converge") {
  SessionDataset train = blob_dataset(41, 100, 5.0, 8, {1, 2});
  SessionDataset val = blob_dataset(42, 30, 5.0, 8, {3});
  TrainConfig adam = quick_config();
  TrainConfig sgd = quick_config(60);
  sgd.optimizer = TrainConfig::Optimizer::sgd;
  sgd.learning_rate = 1e-2;
  GrbfModel ma = train_grbf(train, val, adam);
  GrbfModel ms = train_grbf(train, val, sgd);
  SessionDataset test = blob_dataset(43, 30, 5.0, 8, {5});
  CHECK(detector_f1(ma, test) >= 0.9);
  CHECK(detector_f1(ms, test) >= 0.9);
  CHECK(ma.head.centers.data != ms.head.centers.data);
}

TEST_CASE("invalid training configuration is a parameter error") {
  SessionDataset train = blob_dataset(51, 20, 4.0, 6, {1, 2});
  SessionDataset val = blob_dataset(52, 8, 4.0, 6, {3});
  TrainConfig bad = quick_config();
  bad.learning_rate = 0.0;
  try {
    train_grbf(train, val, bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::param);
  }
  TrainConfig zero_batch = quick_config();
  zero_batch.batch_size = 0;
  CHECK_THROWS_AS(train_grbf(train, val, zero_batch), Error);
  TrainConfig no_epochs = quick_config(0);
  CHECK_THROWS_AS(train_grbf(train, val, no_epochs), Error);
}
