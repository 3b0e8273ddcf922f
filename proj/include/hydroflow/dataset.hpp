#pragma once

#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Feature rows with aligned flow labels (mL/min) and recording-session ids.
struct SessionDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<int> sessions;

  size_t size() const { return features.rows; }
  size_t dim() const { return features.cols; }
};

// Distinct session ids in ascending order.
std::vector<int> session_ids(const SessionDataset& data);

// Rows whose session id is in `keep` (order preserved).
SessionDataset filter_sessions(const SessionDataset& data,
                               const std::vector<int>& keep);

// Rows whose label is in `keep`.
SessionDataset filter_labels(const SessionDataset& data,
                             const std::vector<int>& keep);

void append_rows(SessionDataset& dst, const SessionDataset& src);  // dim check

}  // namespace hydroflow
