#include "hydroflow/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>

#include "hydroflow/error.hpp"

namespace hydroflow {

std::vector<int> session_ids(const SessionDataset& data) {
  std::set<int> ids(data.sessions.begin(), data.sessions.end());
  return std::vector<int>(ids.begin(), ids.end());
}

namespace {

SessionDataset filter_rows(const SessionDataset& data,
                           const std::vector<int>& keep, bool by_session) {
  SessionDataset out;
  out.features = Matrix(0, data.features.cols);
  for (size_t i = 0; i < data.size(); ++i) {
    int key = by_session ? data.sessions[i] : data.labels[i];
    if (std::find(keep.begin(), keep.end(), key) == keep.end()) continue;
    out.labels.push_back(data.labels[i]);
    out.sessions.push_back(data.sessions[i]);
    out.features.data.insert(out.features.data.end(), data.features.row(i),
                             data.features.row(i) + data.features.cols);
    ++out.features.rows;
  }
  return out;
}

}  // namespace

SessionDataset filter_sessions(const SessionDataset& data,
                               const std::vector<int>& keep) {
  return filter_rows(data, keep, true);
}

SessionDataset filter_labels(const SessionDataset& data,
                             const std::vector<int>& keep) {
  return filter_rows(data, keep, false);
}

void append_rows(SessionDataset& dst, const SessionDataset& src) {
  if (dst.size() == 0 && dst.features.cols == 0) {
    dst = src;
    return;
  }
  if (dst.features.cols != src.features.cols)
    fail(ErrorKind::data, "feature dimension mismatch when merging datasets");
  dst.features.data.insert(dst.features.data.end(), src.features.data.begin(),
                           src.features.data.end());
  dst.features.rows += src.features.rows;
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.sessions.insert(dst.sessions.end(), src.sessions.begin(),
                      src.sessions.end());
}

void write_feature_csv(const std::string& path, const SessionDataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open for writing: " + path);

  out << "label,session";
  for (size_t j = 0; j < data.features.cols; ++j) out << ",f" << j;
  out << "\n";

  char buf[40];
  for (size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i] << ',' << data.sessions[i];
    const double* row = data.features.row(i);
    for (size_t j = 0; j < data.features.cols; ++j) {
      std::snprintf(buf, sizeof buf, ",%.12g", row[j]);
      out << buf;
    }
    out << "\n";
  }
  out.flush();
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

SessionDataset read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::format, "empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("label,session", 0) != 0)
    fail(ErrorKind::format, "bad CSV header in " + path);
  size_t dim = 0;
  {
    size_t pos = 13;  // after "label,session"
    while (pos < line.size() && line[pos] == ',') {
      size_t next = line.find(',', pos + 1);
      ++dim;
      pos = next == std::string::npos ? line.size() : next;
    }
  }
  if (dim == 0) fail(ErrorKind::format, "CSV header has no feature columns");

  SessionDataset data;
  data.features = Matrix(0, dim);
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    long label = std::strtol(p, &end, 10);
    if (end == p || *end != ',')
      fail(ErrorKind::format, path + ": bad label on line " + std::to_string(line_no));
    p = end + 1;
    long session = std::strtol(p, &end, 10);
    if (end == p) fail(ErrorKind::format, path + ": bad session on line " + std::to_string(line_no));
    p = end;
    size_t got = 0;
    size_t base = data.features.data.size();
    data.features.data.resize(base + dim);
    while (*p == ',') {
      ++p;
      double v = std::strtod(p, &end);
      if (end == p)
        fail(ErrorKind::format, path + ": bad value on line " + std::to_string(line_no));
      if (got >= dim)
        fail(ErrorKind::format, path + ": too many columns on line " + std::to_string(line_no));
      data.features.data[base + got++] = v;
      p = end;
    }
    if (*p != '\0' || got != dim)
      fail(ErrorKind::format, path + ": ragged row on line " + std::to_string(line_no));
    data.labels.push_back(int(label));
    data.sessions.push_back(int(session));
    ++data.features.rows;
  }
  if (in.bad()) fail(ErrorKind::io, "read failed: " + path);
  if (data.size() == 0)
    fail(ErrorKind::data, "no feature rows in " + path);
  return data;
}

}  // namespace hydroflow
