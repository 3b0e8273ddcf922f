#pragma once

#include <string>

#include "hydroflow/dataset.hpp"

namespace hydroflow {

// Feature CSV interchange: header "label,session,f0,...,f{D-1}", one row per
// frame, values printed with 12 significant digits. Malformed headers, ragged
// rows, or non-numeric cells raise format errors; unreadable/unwritable paths
// raise io errors.
void write_feature_csv(const std::string& path, const SessionDataset& data);
SessionDataset read_feature_csv(const std::string& path);

}  // namespace hydroflow
