#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "hydroflow/error.hpp"
#include "hydroflow/model_json.hpp"
#include "hydroflow/rng.hpp"

using namespace hydroflow;
namespace stdfs = std::filesystem;

namespace {

stdfs::path temp_file(const std::string& name) {
  return stdfs::temp_directory_path() / ("hydroflow_model_" + name);
}

std::string slurp(const stdfs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_text(const stdfs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

Matrix random_matrix(Rng& rng, size_t r, size_t c) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
  return m;
}

NormStats random_norm(Rng& rng, size_t dim, FeatureMethod method) {
  NormStats norm;
  norm.method = method;
  norm.mean.resize(dim);
  norm.std.resize(dim);
  for (size_t i = 0; i < dim; ++i) {
    norm.mean[i] = rng.uniform(-1.0, 1.0);
    norm.std[i] = rng.uniform(0.5, 2.0);
  }
  return norm;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind;
  }
  FAIL("expected an error");
  return ErrorKind::param;
}

}  // namespace

TEST_CASE("SVM bundle round-trips exactly") {
  Rng rng(1);
  SvmBundle bundle;
  bundle.model.support_vectors = random_matrix(rng, 5, 3);
  bundle.model.alpha_y = {0.5, -1.25, 2.0, -0.125, 0.75};
  bundle.model.bias = -0.3125;
  bundle.model.gamma = 1.0 / 3.0;
  bundle.model.C = 10.0;
  bundle.norm = random_norm(rng, 3, FeatureMethod::mfcc);

  stdfs::path path = temp_file("svm.json");
  save_svm(bundle, path.string());
  CHECK(model_kind(path.string()) == "svm");

  SvmBundle back = load_svm(path.string());
  CHECK(back.model.support_vectors.data == bundle.model.support_vectors.data);
  CHECK(back.model.alpha_y == bundle.model.alpha_y);
  CHECK(back.model.bias == bundle.model.bias);
  CHECK(back.model.gamma == bundle.model.gamma);
  CHECK(back.model.C == bundle.model.C);
  CHECK(back.norm.mean == bundle.norm.mean);
  CHECK(back.norm.std == bundle.norm.std);
  CHECK(back.norm.method == FeatureMethod::mfcc);

  // save(load(save(x))) is byte-identical: serialization is canonical
  stdfs::path path2 = temp_file("svm2.json");
  save_svm(back, path2.string());
  CHECK(slurp(path) == slurp(path2));
  stdfs::remove(path);
  stdfs::remove(path2);
}

TEST_CASE("forest bundle round-trips exactly") {
  Rng rng(2);
  ForestBundle bundle;
  bundle.model.classes = {0, 1};
  bundle.model.seed = 42;
  bundle.model.max_depth = 7;
  bundle.model.min_leaf = 2;
  bundle.model.n_candidates = 3;
  Tree tree;
  TreeNode split;
  split.feature = 1;
  split.threshold = 0.625;
  split.left = 1;
  split.right = 2;
  TreeNode leaf_a;
  leaf_a.label = 0;
  TreeNode leaf_b;
  leaf_b.label = 1;
  tree.nodes = {split, leaf_a, leaf_b};
  bundle.model.trees = {tree, tree};
  bundle.norm = random_norm(rng, 4, FeatureMethod::fbank);

  stdfs::path path = temp_file("forest.json");
  save_forest(bundle, path.string());
  CHECK(model_kind(path.string()) == "forest");
  ForestBundle back = load_forest(path.string());
  REQUIRE(back.model.trees.size() == 2);
  CHECK(back.model.trees[0].nodes.size() == 3);
  CHECK(back.model.trees[0].nodes[0].feature == 1);
  CHECK(back.model.trees[0].nodes[0].threshold == 0.625);
  CHECK(back.model.trees[0].nodes[1].label == 0);
  CHECK(back.model.classes == bundle.model.classes);
  CHECK(back.model.seed == 42);

  double probe[4] = {0.0, 1.0, 0.0, 0.0};
  CHECK(forest_predict(back.model, probe, 4) ==
        forest_predict(bundle.model, probe, 4));
  stdfs::remove(path);
}

TEST_CASE("dense and convolutional baselines round-trip exactly") {
  Rng rng(3);
  FcModel fc;
  fc.net = make_mlp(6, {4, 2}, 9);
  fc.norm = random_norm(rng, 6, FeatureMethod::dwt);
  stdfs::path fc_path = temp_file("fc.json");
  save_fc(fc, fc_path.string());
  CHECK(model_kind(fc_path.string()) == "fc");
  FcModel fc_back = load_fc(fc_path.string());
  REQUIRE(fc_back.net.layers.size() == 2);
  for (size_t l = 0; l < 2; ++l) {
    CHECK(fc_back.net.layers[l].weights.data == fc.net.layers[l].weights.data);
    CHECK(fc_back.net.layers[l].bias == fc.net.layers[l].bias);
    CHECK(fc_back.net.layers[l].act == fc.net.layers[l].act);
  }
  stdfs::remove(fc_path);

  ConvModel conv;
  conv.conv = make_conv1d(2, 3, 2, 11);
  conv.dense = make_mlp(4, {3, 2}, 12);
  conv.norm = random_norm(rng, 8, FeatureMethod::fbank);
  stdfs::path conv_path = temp_file("conv.json");
  save_conv(conv, conv_path.string());
  CHECK(model_kind(conv_path.string()) == "conv");
  ConvModel conv_back = load_conv(conv_path.string());
  CHECK(conv_back.conv.kernels.data == conv.conv.kernels.data);
  CHECK(conv_back.conv.bias == conv.conv.bias);
  CHECK(conv_back.conv.stride == 2);
  CHECK(conv_back.dense.layers.size() == 2);
  stdfs::remove(conv_path);
}

TEST_CASE("detector model round-trips exactly, with stable key order") {
  Rng rng(4);
  GrbfModel model;
  model.trunk = make_mlp(5, {4, 3}, 21);
  model.head.centers = random_matrix(rng, 1, 3);
  model.head.log_scales = random_matrix(rng, 1, 3);
  model.head.lambda = 1.5;
  model.tau = 2.25;
  model.norm = random_norm(rng, 5, FeatureMethod::fbank);

  stdfs::path path = temp_file("grbf.json");
  save_grbf(model, path.string());
  CHECK(model_kind(path.string()) == "grbf");
  GrbfModel back = load_grbf(path.string());
  CHECK(back.head.centers.data == model.head.centers.data);
  CHECK(back.head.log_scales.data == model.head.log_scales.data);
  CHECK(back.head.lambda == 1.5);
  CHECK(back.tau == 2.25);
  CHECK(back.norm.method == FeatureMethod::fbank);
  for (size_t l = 0; l < model.trunk.layers.size(); ++l)
    CHECK(back.trunk.layers[l].weights.data ==
          model.trunk.layers[l].weights.data);

  // key order is pinned so identical models give identical bytes
  std::string text = slurp(path);
  size_t at_format = text.find("\"format\"");
  size_t at_version = text.find("\"version\"");
  size_t at_norm = text.find("\"norm_stats\"");
  size_t at_trunk = text.find("\"trunk\"");
  size_t at_head = text.find("\"head\"");
  size_t at_tau = text.find("\"tau\"");
  size_t at_method = text.find("\"feature_method\"");
  CHECK(at_format < at_version);
  CHECK(at_version < at_norm);
  CHECK(at_norm < at_trunk);
  CHECK(at_trunk < at_head);
  CHECK(at_head < at_tau);
  CHECK(at_tau < at_method);
  CHECK(text.back() == '\n');
  stdfs::remove(path);
}

TEST_CASE("malformed model files raise the documented error kinds") {
  stdfs::path path = temp_file("broken.json");

  CHECK(kind_of([] { load_grbf("/nonexistent/model.json"); }) == ErrorKind::io);
  CHECK(kind_of([] { model_kind("/nonexistent/model.json"); }) == ErrorKind::io);

  write_text(path, "{ not json");
  CHECK(kind_of([&] { load_grbf(path.string()); }) == ErrorKind::format);
  CHECK(kind_of([&] { model_kind(path.string()); }) == ErrorKind::format);

  // valid JSON, wrong format tag for the requested loader
  Rng rng(5);
  SvmBundle bundle;
  bundle.model.support_vectors = random_matrix(rng, 2, 2);
  bundle.model.alpha_y = {1.0, -1.0};
  bundle.model.gamma = 0.5;
  bundle.norm = random_norm(rng, 2, FeatureMethod::stft);
  save_svm(bundle, path.string());
  CHECK(kind_of([&] { load_grbf(path.string()); }) == ErrorKind::format);

  // future version
  std::string text = slurp(path);
  size_t pos = text.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"version\": 2");
  write_text(path, text);
  CHECK(kind_of([&] { load_svm(path.string()); }) == ErrorKind::unsupported);

  // structurally valid JSON with missing keys
  write_text(path, "{\"format\": \"grbf\", \"version\": 1}\n");
  CHECK(kind_of([&] { load_grbf(path.string()); }) == ErrorKind::format);

  stdfs::remove(path);
}

TEST_CASE("file fingerprints: stable, content-addressed, 16 hex chars") {
  stdfs::path a = temp_file("fp_a.bin");
  stdfs::path b = temp_file("fp_b.bin");
  write_text(a, "identical content");
  write_text(b, "identical content");
  std::string fa = file_fingerprint(a.string());
  std::string fb = file_fingerprint(b.string());
  CHECK(fa == fb);
  CHECK(fa.size() == 16);
  for (char c : fa) CHECK(std::isxdigit(static_cast<unsigned char>(c)));

  write_text(b, "different content");
  CHECK(file_fingerprint(b.string()) != fa);
  CHECK(kind_of([] { file_fingerprint("/nonexistent/x"); }) == ErrorKind::io);
  stdfs::remove(a);
  stdfs::remove(b);
}
