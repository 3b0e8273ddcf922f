#pragma once

#include <string>

#include "hydroflow/features.hpp"
#include "hydroflow/forest.hpp"
#include "hydroflow/svm.hpp"
#include "hydroflow/train.hpp"

namespace hydroflow {

// Versioned JSON round-trips for every trained model kind.  Writers emit
// keys in a fixed order and rely on shortest-round-trip float formatting,
// so identical models serialize to identical bytes.  Readers throw io
// errors for unreadable files, format errors for malformed or mislabeled
// JSON, and unsupported errors for unknown versions.

// Binary flow-vs-idle SVM with the preprocessing it was trained under.
struct SvmBundle {
  SvmModel model;
  NormStats norm;
};

struct ForestBundle {
  ForestModel model;
  NormStats norm;
};

void save_svm(const SvmBundle& bundle, const std::string& path);
SvmBundle load_svm(const std::string& path);

void save_forest(const ForestBundle& bundle, const std::string& path);
ForestBundle load_forest(const std::string& path);

void save_fc(const FcModel& model, const std::string& path);
FcModel load_fc(const std::string& path);

void save_conv(const ConvModel& model, const std::string& path);
ConvModel load_conv(const std::string& path);

void save_grbf(const GrbfModel& model, const std::string& path);
GrbfModel load_grbf(const std::string& path);

// Reads only the `format` key: "svm", "forest", "fc", "conv" or "grbf".
std::string model_kind(const std::string& path);

// 64-bit FNV-1a over the file bytes as 16 hex chars; stamps alert records
// with the exact model that produced them.
std::string file_fingerprint(const std::string& path);

}  // namespace hydroflow
