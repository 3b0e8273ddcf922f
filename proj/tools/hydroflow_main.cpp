// hydroflow: acoustic water-flow detection pipeline.
//
// Subcommands cover the full workflow: synthesizing labeled recordings,
// extracting per-second features, training the detector and its baselines,
// evaluating on a held-out session, calibrating a deployed model from a
// small sample, batch-monitoring a recording for flow, and 2-D embedding
// exports.  Exit codes are stable for scripting: 0 success, 2 usage,
// 3 data/format, 4 I/O.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hydroflow/audio.hpp"
#include "hydroflow/csv.hpp"
#include "hydroflow/dataset.hpp"
#include "hydroflow/error.hpp"
#include "hydroflow/eval.hpp"
#include "hydroflow/features.hpp"
#include "hydroflow/forest.hpp"
#include "hydroflow/log.hpp"
#include "hydroflow/model_json.hpp"
#include "hydroflow/svm.hpp"
#include "hydroflow/synth.hpp"
#include "hydroflow/train.hpp"
#include "hydroflow/tsne.hpp"

namespace hf = hydroflow;
using ordered_json = nlohmann::ordered_json;

namespace {

hf::SessionDataset load_csvs(const std::vector<std::string>& paths) {
  hf::SessionDataset all;
  bool first = true;
  for (const std::string& path : paths) {
    hf::SessionDataset part = hf::read_feature_csv(path);
    if (first) {
      all = std::move(part);
      first = false;
    } else {
      hf::append_rows(all, part);
    }
  }
  if (all.size() == 0) hf::fail(hf::ErrorKind::data, "no feature rows loaded");
  return all;
}

hf::FeatureMethod resolve_method(const std::string& flag, size_t dim) {
  if (!flag.empty()) return hf::method_from_name(flag);
  return hf::method_from_dim(dim);
}

std::vector<int> to_flow01(const std::vector<int>& labels) {
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] != 0 ? 1 : 0;
  return out;
}

// Deterministic per-label evenly spaced subsample used to cap SVM training
// cost; keeps the class mix of the full set.
std::vector<size_t> stratified_indices(const std::vector<int>& labels,
                                       size_t cap) {
  std::vector<size_t> keep;
  if (labels.size() <= cap) {
    keep.resize(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) keep[i] = i;
    return keep;
  }
  std::map<int, std::vector<size_t>> groups;
  for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  for (const auto& [label, idx] : groups) {
    (void)label;
    size_t want =
        std::max<size_t>(1, idx.size() * cap / labels.size());
    for (size_t k = 0; k < want; ++k)
      keep.push_back(idx[k * idx.size() / want]);
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

hf::SessionDataset take_rows(const hf::SessionDataset& data,
                             const std::vector<size_t>& idx) {
  hf::SessionDataset out;
  out.features = hf::Matrix(idx.size(), data.dim());
  out.labels.reserve(idx.size());
  out.sessions.reserve(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    std::copy(data.features.row(idx[k]),
              data.features.row(idx[k]) + data.dim(), out.features.row(k));
    out.labels.push_back(data.labels[idx[k]]);
    out.sessions.push_back(data.sessions[idx[k]]);
  }
  return out;
}

ordered_json confusion_to_json(const hf::ConfusionMatrix& cm) {
  ordered_json counts = ordered_json::array();
  for (const auto& row : cm.counts) counts.push_back(row);
  return {{"classes", cm.classes}, {"counts", std::move(counts)}};
}

ordered_json split_to_json(const hf::SplitPlan& plan) {
  return {{"train", plan.train_sessions},
          {"val", plan.val_sessions},
          {"test", plan.test_sessions}};
}

void write_report(const std::string& path, const std::vector<double>& per_fold,
                  double mean_f1, const std::vector<int>& preds01,
                  const std::vector<int>& labels01, const hf::SplitPlan& plan,
                  const ordered_json& hyper) {
  ordered_json j{{"per_fold", per_fold},
                 {"mean_f1", mean_f1},
                 {"accuracy", hf::accuracy(preds01, labels01)},
                 {"confusion", confusion_to_json(hf::confusion(preds01, labels01))},
                 {"split_plan", split_to_json(plan)},
                 {"hyperparameters", hyper}};
  std::ofstream out(path);
  if (!out) hf::fail(hf::ErrorKind::io, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) hf::fail(hf::ErrorKind::io, "failed writing " + path);
}

// Flow/no-flow predictions (1 = flow) for raw feature rows under any saved
// model kind.
std::vector<int> predict_rows(const std::string& model_path,
                              const hf::Matrix& raw) {
  std::string kind = hf::model_kind(model_path);
  std::vector<int> preds(raw.rows);
  if (kind == "grbf") {
    hf::GrbfModel model = hf::load_grbf(model_path);
    hf::Matrix x = hf::apply_norm(model.norm, raw);
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::detect(model, x.row(i), x.cols).decision ==
                         hf::FlowDecision::flow
                     ? 1
                     : 0;
  } else if (kind == "fc") {
    hf::FcModel model = hf::load_fc(model_path);
    hf::Matrix x = hf::apply_norm(model.norm, raw);
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::fc_predict(model, x.row(i), x.cols);
  } else if (kind == "conv") {
    hf::ConvModel model = hf::load_conv(model_path);
    hf::Matrix x = hf::apply_norm(model.norm, raw);
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::conv_predict(model, x.row(i), x.cols);
  } else if (kind == "svm") {
    hf::SvmBundle bundle = hf::load_svm(model_path);
    hf::Matrix x = hf::apply_norm(bundle.norm, raw);
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::svm_predict(bundle.model, x.row(i), x.cols).label > 0 ? 1 : 0;
  } else if (kind == "forest") {
    hf::ForestBundle bundle = hf::load_forest(model_path);
    hf::Matrix x = hf::apply_norm(bundle.norm, raw);
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::forest_predict(bundle.model, x.row(i), x.cols) != 0 ? 1 : 0;
  } else {
    hf::fail(hf::ErrorKind::data, "unknown model kind: " + kind);
  }
  return preds;
}

struct TrainFlags {
  std::string model = "grbf";
  std::vector<std::string> features;
  std::string out;
  std::string report;
  std::string method;  // empty -> inferred from the feature dimension
  std::string optimizer = "adam";
  int test_session = 9;
  std::uint64_t seed = 0;
  int epochs = 100;
  size_t batch = 64;
  double lr = 1e-3;
  int patience = 10;
  double lambda = 1.0;
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0 -> 1/dim
  int trees = 100;
  size_t max_train_rows = 4000;  // SVM cost guard
  bool cv = false;
};

hf::TrainConfig make_config(const TrainFlags& f) {
  hf::TrainConfig config;
  config.learning_rate = f.lr;
  config.batch_size = f.batch;
  config.epochs = f.epochs;
  config.seed = f.seed;
  config.optimizer = f.optimizer == "sgd" ? hf::TrainConfig::Optimizer::sgd
                                          : hf::TrainConfig::Optimizer::adam;
  config.early_stop_patience = f.patience;
  return config;
}

// Binary SVM on capped, standardized rows; shared by cmd_train and the
// cross-validation folds.
hf::SvmBundle fit_svm(const hf::SessionDataset& fit, hf::FeatureMethod method,
                      double c, double gamma, std::uint64_t seed, size_t cap) {
  hf::SvmBundle bundle;
  std::vector<size_t> idx = stratified_indices(fit.labels, cap);
  hf::SessionDataset capped = take_rows(fit, idx);
  bundle.norm = hf::fit_norm(capped.features, method);
  hf::Matrix x = hf::apply_norm(bundle.norm, capped.features);
  std::vector<int> y(capped.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = capped.labels[i] != 0 ? 1 : -1;
  hf::SvmParams params;
  params.C = c;
  params.gamma = gamma;
  params.seed = seed;
  bundle.model = hf::train_svm(x, y, params);
  return bundle;
}

void cmd_train(const TrainFlags& f) {
  hf::SessionDataset data = load_csvs(f.features);
  hf::FeatureMethod method = resolve_method(f.method, data.dim());
  hf::SplitPlan plan = hf::loso_split(data, f.test_session);
  hf::SessionDataset train_set = hf::filter_sessions(data, plan.train_sessions);
  hf::SessionDataset val_set = hf::filter_sessions(data, plan.val_sessions);
  hf::SessionDataset test_set = hf::filter_sessions(data, plan.test_sessions);
  std::vector<int> fit_ids = plan.train_sessions;
  fit_ids.insert(fit_ids.end(), plan.val_sessions.begin(),
                 plan.val_sessions.end());
  hf::SessionDataset fit_set = hf::filter_sessions(data, fit_ids);
  hf::TrainConfig config = make_config(f);

  std::vector<int> preds;
  std::vector<double> per_fold;
  ordered_json hyper{{"model", f.model},
                     {"seed", f.seed},
                     {"feature_method", hf::method_name(method)}};

  if (f.model == "grbf") {
    hf::GrbfArch arch;
    arch.lambda = f.lambda;
    if (f.cv) {
      std::vector<std::vector<double>> grid{{0.5}, {1.0}, {2.0}};
      auto fold = [&](const hf::SessionDataset& tr,
                      const hf::SessionDataset& ho,
                      const std::vector<double>& pt) {
        std::vector<int> ids = hf::session_ids(tr);
        hf::SessionDataset inner_train =
            hf::filter_sessions(tr, {ids.begin(), ids.end() - 1});
        hf::SessionDataset inner_val = hf::filter_sessions(tr, {ids.back()});
        hf::GrbfArch a;
        a.lambda = pt[0];
        hf::GrbfModel m = hf::train_grbf(inner_train, inner_val, config, a,
                                         method);
        hf::Matrix x = hf::apply_norm(m.norm, ho.features);
        std::vector<int> p(ho.size());
        for (size_t i = 0; i < x.rows; ++i)
          p[i] = hf::detect(m, x.row(i), x.cols).decision ==
                         hf::FlowDecision::flow
                     ? 1
                     : 0;
        return hf::f1_binary(p, ho.labels);
      };
      hf::CrossValResult cvres = hf::cross_validate(
          fit_set, fold, grid, hf::session_ids(fit_set).size());
      arch.lambda = cvres.best_point[0];
      per_fold = cvres.fold_f1;
      hyper["cv_mean_f1"] = cvres.mean_f1;
    }
    hyper["lambda"] = arch.lambda;
    hyper["epochs"] = f.epochs;
    hyper["learning_rate"] = f.lr;
    hyper["optimizer"] = f.optimizer;
    hf::GrbfModel model = hf::train_grbf(train_set, val_set, config, arch,
                                         method);
    hyper["tau"] = model.tau;
    hf::save_grbf(model, f.out);
    hf::Matrix x = hf::apply_norm(model.norm, test_set.features);
    preds.resize(test_set.size());
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::detect(model, x.row(i), x.cols).decision ==
                         hf::FlowDecision::flow
                     ? 1
                     : 0;
  } else if (f.model == "fc") {
    hyper["epochs"] = f.epochs;
    hyper["learning_rate"] = f.lr;
    hyper["optimizer"] = f.optimizer;
    hf::FcModel model = hf::train_fc_softmax(train_set, val_set, config,
                                             method);
    hf::save_fc(model, f.out);
    hf::Matrix x = hf::apply_norm(model.norm, test_set.features);
    preds.resize(test_set.size());
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::fc_predict(model, x.row(i), x.cols);
  } else if (f.model == "conv") {
    hyper["epochs"] = f.epochs;
    hyper["learning_rate"] = f.lr;
    hyper["optimizer"] = f.optimizer;
    hf::ConvModel model = hf::train_conv_softmax(train_set, val_set, config,
                                                 method);
    hf::save_conv(model, f.out);
    hf::Matrix x = hf::apply_norm(model.norm, test_set.features);
    preds.resize(test_set.size());
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::conv_predict(model, x.row(i), x.cols);
  } else if (f.model == "svm") {
    double c = f.svm_c, gamma = f.svm_gamma;
    if (f.cv) {
      double g0 = 1.0 / double(data.dim());
      std::vector<std::vector<double>> grid;
      for (double cc : {0.1, 1.0, 10.0})
        for (double gm : {0.5 * g0, g0, 2.0 * g0}) grid.push_back({cc, gm});
      auto fold = [&](const hf::SessionDataset& tr,
                      const hf::SessionDataset& ho,
                      const std::vector<double>& pt) {
        hf::SvmBundle b = fit_svm(tr, method, pt[0], pt[1], f.seed,
                                  f.max_train_rows);
        hf::Matrix x = hf::apply_norm(b.norm, ho.features);
        std::vector<int> p(ho.size());
        for (size_t i = 0; i < x.rows; ++i)
          p[i] = hf::svm_predict(b.model, x.row(i), x.cols).label > 0 ? 1 : 0;
        return hf::f1_binary(p, ho.labels);
      };
      hf::CrossValResult cvres = hf::cross_validate(
          fit_set, fold, grid, hf::session_ids(fit_set).size());
      c = cvres.best_point[0];
      gamma = cvres.best_point[1];
      per_fold = cvres.fold_f1;
      hyper["cv_mean_f1"] = cvres.mean_f1;
    }
    hyper["C"] = c;
    hyper["gamma"] = gamma;
    hf::SvmBundle bundle = fit_svm(fit_set, method, c, gamma, f.seed,
                                   f.max_train_rows);
    hf::save_svm(bundle, f.out);
    hf::Matrix x = hf::apply_norm(bundle.norm, test_set.features);
    preds.resize(test_set.size());
    for (size_t i = 0; i < x.rows; ++i)
      preds[i] = hf::svm_predict(bundle.model, x.row(i), x.cols).label > 0
                     ? 1
                     : 0;
  } else {  // forest
    hyper["n_trees"] = f.trees;
    hf::ForestBundle bundle;
    bundle.norm = hf::fit_norm(fit_set.features, method);
    hf::Matrix x = hf::apply_norm(bundle.norm, fit_set.features);
    hf::ForestParams params;
    params.n_trees = f.trees;
    params.seed = f.seed;
    bundle.model = hf::train_forest(x, to_flow01(fit_set.labels), params);
    hf::save_forest(bundle, f.out);
    hf::Matrix xt = hf::apply_norm(bundle.norm, test_set.features);
    preds.resize(test_set.size());
    for (size_t i = 0; i < xt.rows; ++i)
      preds[i] = hf::forest_predict(bundle.model, xt.row(i), xt.cols) != 0
                     ? 1
                     : 0;
  }

  double test_f1 = hf::f1_binary(preds, test_set.labels);
  if (per_fold.empty()) per_fold = {test_f1};
  if (!f.report.empty())
    write_report(f.report, per_fold, test_f1, preds,
                 to_flow01(test_set.labels), plan, hyper);
  std::printf("mean_f1 %.6f\n", test_f1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic water-flow detection pipeline"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a labeled recording");
  hf::SynthSpec spec;
  double duration = 10.0;
  std::string synth_out;
  synth->add_option("--flow", spec.flow_mlpm,
                    "flow rate in mL/min: 0, 50, 100, 250, 500, 1000 or 2000")
      ->required();
  synth->add_option("--duration", duration, "length in seconds (minimum 1)")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed, "generator seed")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "output WAV path")->required();
  synth->add_option("--session", spec.session_id, "session id stamped on the clip")
      ->capture_default_str();
  synth->add_option("--noise-floor", spec.noise_floor_rms,
                    "background RMS level")
      ->capture_default_str();
  synth->add_option("--band-lo", spec.band_lo_hz, "flow band lower edge, Hz")
      ->capture_default_str();
  synth->add_option("--band-hi", spec.band_hi_hz, "flow band upper edge, Hz")
      ->capture_default_str();
  synth->add_option("--gain-ref", spec.gain_ref,
                    "flow RMS at 1000 mL/min")
      ->capture_default_str();
  synth->add_option("--gain-exponent", spec.gain_exponent,
                    "flow-to-RMS power law exponent")
      ->capture_default_str();
  synth->add_option("--rate", spec.sample_rate_hz, "sample rate, Hz")
      ->capture_default_str();
  synth->callback([&] {
    if (!hf::is_flow_class(spec.flow_mlpm))
      hf::fail(hf::ErrorKind::param,
               "--flow must be one of 0, 50, 100, 250, 500, 1000, 2000");
    if (duration < 1.0)
      hf::fail(hf::ErrorKind::param, "--duration must be at least 1 second");
    spec.duration_s = duration;
    hf::AudioClip clip = hf::synthesize_flow(spec);
    hf::write_wav(clip, synth_out);
    ordered_json echo{{"flow_mlpm", spec.flow_mlpm},
                      {"duration_s", spec.duration_s},
                      {"seed", spec.seed},
                      {"noise_floor_rms", spec.noise_floor_rms},
                      {"band_lo_hz", spec.band_lo_hz},
                      {"band_hi_hz", spec.band_hi_hz},
                      {"gain_ref", spec.gain_ref},
                      {"gain_exponent", spec.gain_exponent},
                      {"sample_rate_hz", spec.sample_rate_hz},
                      {"session_id", spec.session_id}};
    std::cout << echo.dump() << '\n';
  });

  // ---- featurize ----
  auto* feat = app.add_subcommand("featurize",
                                  "extract per-second features from a WAV");
  std::string feat_method = "fbank", feat_in, feat_out;
  int feat_label = 0, feat_session = 0;
  feat->add_option("--method", feat_method, "feature extractor")
      ->check(CLI::IsMember({"stft", "dwt", "mfcc", "fbank"}))
      ->capture_default_str();
  feat->add_option("--in", feat_in, "input WAV path")->required();
  feat->add_option("--label", feat_label, "flow class of the recording")
      ->required();
  feat->add_option("--session", feat_session, "recording session id")
      ->required();
  feat->add_option("--out", feat_out, "output CSV path")->required();
  feat->callback([&] {
    hf::FlowClass label = hf::FlowClass::make(feat_label);
    hf::AudioClip clip = hf::load_wav(feat_in, label, feat_session);
    hf::FrameSeries frames = hf::frame_clip(clip, 1.0);
    hf::FeatureMethod method = hf::method_from_name(feat_method);
    hf::SessionDataset data;
    data.features = hf::extract_features(method, frames);
    data.labels.assign(data.features.rows, feat_label);
    data.sessions.assign(data.features.rows, feat_session);
    hf::write_feature_csv(feat_out, data);
    std::printf("frames %zu dims %zu\n", data.features.rows,
                data.features.cols);
  });

  // ---- train ----
  auto* train = app.add_subcommand("train",
                                   "train a detector on feature CSVs");
  TrainFlags tf;
  train->add_option("--model", tf.model, "detector family")
      ->check(CLI::IsMember({"svm", "forest", "fc", "conv", "grbf"}))
      ->capture_default_str();
  train->add_option("--features", tf.features, "feature CSV paths")
      ->required()
      ->expected(-1);
  train->add_option("--out", tf.out, "output model JSON path")->required();
  train->add_option("--report", tf.report, "optional report JSON path");
  train->add_option("--method", tf.method,
                    "feature method (default: inferred from dimension)")
      ->check(CLI::IsMember({"stft", "dwt", "mfcc", "fbank"}));
  train->add_option("--test-session", tf.test_session,
                    "held-out session id")
      ->capture_default_str();
  train->add_option("--seed", tf.seed, "training seed")->capture_default_str();
  train->add_option("--epochs", tf.epochs)->capture_default_str();
  train->add_option("--batch", tf.batch)->capture_default_str();
  train->add_option("--lr", tf.lr, "learning rate")->capture_default_str();
  train->add_option("--optimizer", tf.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  train->add_option("--patience", tf.patience, "early-stop patience, epochs")
      ->capture_default_str();
  train->add_option("--lambda", tf.lambda, "margin for the RBF head")
      ->capture_default_str();
  train->add_option("--svm-c", tf.svm_c, "SVM box constraint")
      ->capture_default_str();
  train->add_option("--svm-gamma", tf.svm_gamma,
                    "SVM RBF gamma (0 = 1/dim)")
      ->capture_default_str();
  train->add_option("--trees", tf.trees, "forest size")->capture_default_str();
  train->add_option("--max-train-rows", tf.max_train_rows,
                    "SVM training row cap (stratified)")
      ->capture_default_str();
  train->add_flag("--cv", tf.cv,
                  "pick hyperparameters by session-wise cross-validation "
                  "(svm: C/gamma, grbf: lambda)");
  train->callback([&] {
    if (tf.cv && tf.model != "svm" && tf.model != "grbf")
      hf::fail(hf::ErrorKind::param, "--cv supports svm and grbf only");
    cmd_train(tf);
  });

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "score a saved model on feature CSVs");
  std::string eval_model, eval_report;
  std::vector<std::string> eval_features;
  eval->add_option("--model", eval_model, "model JSON path")->required();
  eval->add_option("--features", eval_features, "feature CSV paths")
      ->required()
      ->expected(-1);
  eval->add_option("--report", eval_report, "optional report JSON path");
  eval->callback([&] {
    hf::SessionDataset data = load_csvs(eval_features);
    std::vector<int> preds = predict_rows(eval_model, data.features);
    double f1 = hf::f1_binary(preds, data.labels);
    if (!eval_report.empty()) {
      hf::SplitPlan plan;  // evaluation only touches the given sessions
      plan.test_sessions = hf::session_ids(data);
      write_report(eval_report, {f1}, f1, preds, to_flow01(data.labels), plan,
                   ordered_json{{"model_file", eval_model}});
    }
    std::printf("mean_f1 %.6f\n", f1);
  });

  // ---- calibrate ----
  auto* calib = app.add_subcommand(
      "calibrate", "fine-tune a detector on a small labeled sample");
  std::string calib_model, calib_out;
  std::vector<std::string> calib_features;
  TrainFlags cf;
  calib->add_option("--model", calib_model, "input model JSON (grbf)")
      ->required();
  calib->add_option("--features", calib_features,
                    "calibration feature CSV paths")
      ->required()
      ->expected(-1);
  calib->add_option("--out", calib_out, "output model JSON path")->required();
  calib->add_option("--seed", cf.seed)->capture_default_str();
  calib->add_option("--epochs", cf.epochs,
                    "budget; adaptation runs at most epochs/5")
      ->capture_default_str();
  calib->add_option("--batch", cf.batch)->capture_default_str();
  calib->add_option("--lr", cf.lr)->capture_default_str();
  calib->add_option("--optimizer", cf.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  calib->add_option("--patience", cf.patience)->capture_default_str();
  calib->callback([&] {
    hf::GrbfModel model = hf::load_grbf(calib_model);
    hf::SessionDataset data = load_csvs(calib_features);
    hf::GrbfModel tuned = hf::fine_tune(model, data, make_config(cf));
    hf::save_grbf(tuned, calib_out);
    std::printf("tau %.6f\n", tuned.tau);
  });

  // ---- monitor ----
  auto* monitor = app.add_subcommand(
      "monitor", "scan a recording and emit one alert per second");
  std::string mon_model, mon_in, mon_alerts;
  double mon_tau = 0.0;
  monitor->add_option("--model", mon_model, "model JSON path (grbf)")
      ->required();
  monitor->add_option("--in", mon_in, "input WAV path")->required();
  monitor->add_option("--alerts", mon_alerts, "output JSON-lines path")
      ->required();
  auto* tau_opt =
      monitor->add_option("--tau", mon_tau, "decision threshold override");
  monitor->callback([&] {
    hf::GrbfModel model = hf::load_grbf(mon_model);
    std::string model_id = hf::file_fingerprint(mon_model);
    hf::AudioClip clip = hf::load_wav(mon_in);
    hf::FrameSeries frames = hf::frame_clip(clip, 1.0);
    hf::Matrix x = hf::extract_features(model.norm.method, frames);
    x = hf::apply_norm(model.norm, x);
    double tau = tau_opt->count() > 0 ? mon_tau : model.tau;

    std::ofstream alerts(mon_alerts);
    if (!alerts)
      hf::fail(hf::ErrorKind::io, "cannot open " + mon_alerts + " for writing");
    size_t flow_frames = 0;
    for (size_t i = 0; i < x.rows; ++i) {
      hf::Detection det = hf::detect(model, x.row(i), x.cols, tau);
      bool is_flow = det.decision == hf::FlowDecision::flow;
      flow_frames += is_flow ? 1 : 0;
      ordered_json rec{{"t_start_s", double(i)},
                       {"decision", is_flow ? "flow" : "no_flow"},
                       {"d_zero", det.d_zero},
                       {"tau", tau},
                       {"model_id", model_id}};
      alerts << rec.dump() << '\n';
    }
    if (!alerts) hf::fail(hf::ErrorKind::io, "failed writing " + mon_alerts);
    std::printf("flow_fraction %.6f\n",
                double(flow_frames) / double(x.rows));
  });

  // ---- embed ----
  auto* embed = app.add_subcommand(
      "embed", "project feature rows to 2-D for inspection");
  std::vector<std::string> embed_features;
  std::string embed_out, embed_svg;
  hf::TsneConfig tsne_config;
  embed->add_option("--features", embed_features, "feature CSV paths")
      ->required()
      ->expected(-1);
  embed->add_option("--out", embed_out, "output points CSV path")->required();
  embed->add_option("--svg", embed_svg, "optional scatter SVG path");
  embed->add_option("--perplexity", tsne_config.perplexity)
      ->capture_default_str();
  embed->add_option("--iters", tsne_config.n_iter)->capture_default_str();
  embed->add_option("--seed", tsne_config.seed)->capture_default_str();
  embed->callback([&] {
    hf::SessionDataset data = load_csvs(embed_features);
    hf::Embedding2D emb = hf::tsne(data.features, data.labels, tsne_config);
    hf::write_points_csv(emb, data.sessions, embed_out);
    if (!embed_svg.empty()) hf::export_scatter_svg(emb, embed_svg);
    std::printf("kl %.6f\n", emb.final_kl);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // 2 for every usage problem, 0 for --help
  } catch (const hf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind) {
      case hf::ErrorKind::param:
        return 2;
      case hf::ErrorKind::io:
        return 4;
      default:
        return 3;  // format, unsupported, data
    }
  }
  return 0;
}
