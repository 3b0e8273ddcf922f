#include "hydroflow/model_json.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hydroflow/error.hpp"

namespace hydroflow {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<size_t>(), j.at("cols").get<size_t>());
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows * m.cols)
    fail(ErrorKind::format, "matrix data length disagrees with its shape");
  m.data = std::move(data);
  return m;
}

ordered_json norm_to_json(const NormStats& norm) {
  return {{"mean", norm.mean}, {"std", norm.std}};
}

NormStats norm_from_json(const nlohmann::json& j, const std::string& method) {
  NormStats norm;
  norm.mean = j.at("mean").get<std::vector<double>>();
  norm.std = j.at("std").get<std::vector<double>>();
  if (norm.mean.size() != norm.std.size())
    fail(ErrorKind::format, "norm_stats mean/std length mismatch");
  norm.method = method_from_name(method);
  return norm;
}

const char* act_name(Activation act) {
  return act == Activation::relu ? "relu" : "identity";
}

Activation act_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  fail(ErrorKind::format, "unknown activation: " + name);
}

ordered_json mlp_to_json(const MlpParams& params) {
  ordered_json layers = ordered_json::array();
  for (const DenseLayer& layer : params.layers)
    layers.push_back({{"weights", matrix_to_json(layer.weights)},
                      {"bias", layer.bias},
                      {"activation", act_name(layer.act)}});
  return layers;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
  MlpParams params;
  for (const auto& lj : j) {
    DenseLayer layer;
    layer.weights = matrix_from_json(lj.at("weights"));
    layer.bias = lj.at("bias").get<std::vector<double>>();
    layer.act = act_from_name(lj.at("activation").get<std::string>());
    if (layer.bias.size() != layer.weights.rows)
      fail(ErrorKind::format, "layer bias length disagrees with weights");
    params.layers.push_back(std::move(layer));
  }
  if (params.layers.empty()) fail(ErrorKind::format, "model has no layers");
  return params;
}

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
  return j;
}

// checks format/version and returns the parsed document
nlohmann::json read_model_file(const std::string& path,
                               const std::string& expect_format) {
  nlohmann::json j = read_json_file(path);
  try {
    std::string format = j.at("format").get<std::string>();
    if (format != expect_format)
      fail(ErrorKind::format,
           path + ": expected " + expect_format + ", found " + format);
    int version = j.at("version").get<int>();
    if (version != kFormatVersion)
      fail(ErrorKind::unsupported,
           path + ": unsupported version " + std::to_string(version));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
  return j;
}

// loaders below share this guard so nlohmann errors surface as format errors
template <typename Fn>
auto parse_guard(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
}

}  // namespace

void save_svm(const SvmBundle& bundle, const std::string& path) {
  ordered_json j{{"format", "hydroflow-svm"},
                 {"version", kFormatVersion},
                 {"norm_stats", norm_to_json(bundle.norm)},
                 {"feature_method", method_name(bundle.norm.method)},
                 {"support_vectors", matrix_to_json(bundle.model.support_vectors)},
                 {"alpha_y", bundle.model.alpha_y},
                 {"bias", bundle.model.bias},
                 {"gamma", bundle.model.gamma},
                 {"C", bundle.model.C}};
  write_json_file(j, path);
}

SvmBundle load_svm(const std::string& path) {
  nlohmann::json j = read_model_file(path, "hydroflow-svm");
  return parse_guard(path, [&] {
    SvmBundle bundle;
    bundle.norm = norm_from_json(j.at("norm_stats"),
                                 j.at("feature_method").get<std::string>());
    bundle.model.support_vectors = matrix_from_json(j.at("support_vectors"));
    bundle.model.alpha_y = j.at("alpha_y").get<std::vector<double>>();
    bundle.model.bias = j.at("bias").get<double>();
    bundle.model.gamma = j.at("gamma").get<double>();
    bundle.model.C = j.at("C").get<double>();
    if (bundle.model.alpha_y.size() != bundle.model.support_vectors.rows)
      fail(ErrorKind::format, path + ": alpha_y/support vector count mismatch");
    return bundle;
  });
}

void save_forest(const ForestBundle& bundle, const std::string& path) {
  ordered_json trees = ordered_json::array();
  for (const Tree& tree : bundle.model.trees) {
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& node : tree.nodes)
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"label", node.label}});
    trees.push_back(std::move(nodes));
  }
  ordered_json j{{"format", "hydroflow-forest"},
                 {"version", kFormatVersion},
                 {"norm_stats", norm_to_json(bundle.norm)},
                 {"feature_method", method_name(bundle.norm.method)},
                 {"classes", bundle.model.classes},
                 {"seed", bundle.model.seed},
                 {"max_depth", bundle.model.max_depth},
                 {"min_leaf", bundle.model.min_leaf},
                 {"n_candidates", bundle.model.n_candidates},
                 {"trees", std::move(trees)}};
  write_json_file(j, path);
}

ForestBundle load_forest(const std::string& path) {
  nlohmann::json j = read_model_file(path, "hydroflow-forest");
  return parse_guard(path, [&] {
    ForestBundle bundle;
    bundle.norm = norm_from_json(j.at("norm_stats"),
                                 j.at("feature_method").get<std::string>());
    bundle.model.classes = j.at("classes").get<std::vector<int>>();
    bundle.model.seed = j.at("seed").get<std::uint64_t>();
    bundle.model.max_depth = j.at("max_depth").get<int>();
    bundle.model.min_leaf = j.at("min_leaf").get<size_t>();
    bundle.model.n_candidates = j.at("n_candidates").get<size_t>();
    for (const auto& tj : j.at("trees")) {
      Tree tree;
      for (const auto& nj : tj) {
        TreeNode node;
        node.feature = nj.at("feature").get<int>();
        node.threshold = nj.at("threshold").get<double>();
        node.left = nj.at("left").get<int>();
        node.right = nj.at("right").get<int>();
        node.label = nj.at("label").get<int>();
        tree.nodes.push_back(node);
      }
      if (tree.nodes.empty())
        fail(ErrorKind::format, path + ": empty tree");
      bundle.model.trees.push_back(std::move(tree));
    }
    if (bundle.model.trees.empty())
      fail(ErrorKind::format, path + ": forest has no trees");
    return bundle;
  });
}

void save_fc(const FcModel& model, const std::string& path) {
  ordered_json j{{"format", "hydroflow-fc"},
                 {"version", kFormatVersion},
                 {"norm_stats", norm_to_json(model.norm)},
                 {"feature_method", method_name(model.norm.method)},
                 {"layers", mlp_to_json(model.net)}};
  write_json_file(j, path);
}

FcModel load_fc(const std::string& path) {
  nlohmann::json j = read_model_file(path, "hydroflow-fc");
  return parse_guard(path, [&] {
    FcModel model;
    model.norm = norm_from_json(j.at("norm_stats"),
                                j.at("feature_method").get<std::string>());
    model.net = mlp_from_json(j.at("layers"));
    return model;
  });
}

void save_conv(const ConvModel& model, const std::string& path) {
  ordered_json j{{"format", "hydroflow-conv"},
                 {"version", kFormatVersion},
                 {"norm_stats", norm_to_json(model.norm)},
                 {"feature_method", method_name(model.norm.method)},
                 {"conv",
                  {{"kernels", matrix_to_json(model.conv.kernels)},
                   {"bias", model.conv.bias},
                   {"stride", model.conv.stride}}},
                 {"dense", mlp_to_json(model.dense)}};
  write_json_file(j, path);
}

ConvModel load_conv(const std::string& path) {
  nlohmann::json j = read_model_file(path, "hydroflow-conv");
  return parse_guard(path, [&] {
    ConvModel model;
    model.norm = norm_from_json(j.at("norm_stats"),
                                j.at("feature_method").get<std::string>());
    model.conv.kernels = matrix_from_json(j.at("conv").at("kernels"));
    model.conv.bias = j.at("conv").at("bias").get<std::vector<double>>();
    model.conv.stride = j.at("conv").at("stride").get<size_t>();
    if (model.conv.stride == 0)
      fail(ErrorKind::format, path + ": zero conv stride");
    model.dense = mlp_from_json(j.at("dense"));
    return model;
  });
}

void save_grbf(const GrbfModel& model, const std::string& path) {
  ordered_json j{{"format", "hydroflow-grbf"},
                 {"version", kFormatVersion},
                 {"norm_stats", norm_to_json(model.norm)},
                 {"trunk", mlp_to_json(model.trunk)},
                 {"head",
                  {{"centers", matrix_to_json(model.head.centers)},
                   {"log_scales", matrix_to_json(model.head.log_scales)},
                   {"lambda", model.head.lambda}}},
                 {"tau", model.tau},
                 {"feature_method", method_name(model.norm.method)}};
  write_json_file(j, path);
}

GrbfModel load_grbf(const std::string& path) {
  nlohmann::json j = read_model_file(path, "hydroflow-grbf");
  return parse_guard(path, [&] {
    GrbfModel model;
    model.norm = norm_from_json(j.at("norm_stats"),
                                j.at("feature_method").get<std::string>());
    model.trunk = mlp_from_json(j.at("trunk"));
    model.head.centers = matrix_from_json(j.at("head").at("centers"));
    model.head.log_scales = matrix_from_json(j.at("head").at("log_scales"));
    model.head.lambda = j.at("head").at("lambda").get<double>();
    model.tau = j.at("tau").get<double>();
    if (model.head.centers.rows != model.head.log_scales.rows ||
        model.head.centers.cols != model.head.log_scales.cols)
      fail(ErrorKind::format, path + ": head shape mismatch");
    if (model.head.lambda <= 0.0)
      fail(ErrorKind::format, path + ": lambda must be positive");
    return model;
  });
}

std::string model_kind(const std::string& path) {
  nlohmann::json j = read_json_file(path);
  std::string format;
  try {
    format = j.at("format").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
  const std::string prefix = "hydroflow-";
  if (format.rfind(prefix, 0) != 0)
    fail(ErrorKind::format, path + ": not a model file (format " + format + ")");
  return format.substr(prefix.size());
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::uint64_t h = 14695981039346656037ull;
  char c;
  while (in.get(c)) {
    h ^= std::uint8_t(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hydroflow
