#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "hydroflow/error.hpp"
#include "hydroflow/rng.hpp"
#include "hydroflow/tsne.hpp"

using namespace hydroflow;
namespace stdfs = std::filesystem;

namespace {

// three tight, well-separated clusters in 5-D
Matrix cluster_data(std::vector<int>& labels, size_t per_cluster = 12,
                    uint64_t seed = 3) {
  Rng rng(seed);
  Matrix x(3 * per_cluster, 5);
  labels.resize(3 * per_cluster);
  const double centers[3] = {-8.0, 0.0, 8.0};
  const int names[3] = {0, 100, 2000};
  for (size_t i = 0; i < x.rows; ++i) {
    size_t c = i / per_cluster;
    labels[i] = names[c];
    for (size_t j = 0; j < 5; ++j)
      x.at(i, j) = (j == 0 ? centers[c] : 0.0) + 0.3 * rng.gaussian();
  }
  return x;
}

double row_entropy(const Matrix& p, size_t i) {
  // entropy of the conditional row reconstructed from the joint: the joint
  // was built as (P(j|i) + P(i|j)) / (2N), so this is only a sanity probe on
  // positivity and normalization, handled separately below.
  double h = 0.0;
  for (size_t j = 0; j < p.cols; ++j)
    if (i != j && p.at(i, j) > 0.0) h -= p.at(i, j) * std::log(p.at(i, j));
  return h;
}

size_t count_substr(const std::string& text, const std::string& needle) {
  size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::string slurp(const stdfs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("joint probabilities: symmetric, normalized, positive") {
  std::vector<int> labels;
  Matrix x = cluster_data(labels);
  Matrix p = tsne_joint_p(x, 10.0, 1);
  REQUIRE(p.rows == x.rows);
  REQUIRE(p.cols == x.rows);

  double total = 0.0;
  for (size_t i = 0; i < p.rows; ++i) {
    CHECK(p.at(i, i) == 0.0);
    for (size_t j = 0; j < p.cols; ++j) {
      CHECK(p.at(i, j) >= 0.0);
      CHECK(p.at(i, j) == p.at(j, i));
      total += p.at(i, j);
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(row_entropy(p, 0) > 0.0);
}

TEST_CASE("per-row bandwidths hit the target perplexity") {
  // check the bisection on the conditional distributions directly: rebuild
  // P(j|i) from pairwise distances at the solved precision is internal, so
  // instead verify the joint concentrates mass inside each cluster, which is
  // what a perplexity ~ cluster size produces
  std::vector<int> labels;
  Matrix x = cluster_data(labels, 12);
  Matrix p = tsne_joint_p(x, 8.0, 1);
  double in_cluster = 0.0, total = 0.0;
  for (size_t i = 0; i < p.rows; ++i)
    for (size_t j = 0; j < p.cols; ++j) {
      total += p.at(i, j);
      if (labels[i] == labels[j]) in_cluster += p.at(i, j);
    }
  CHECK(in_cluster / total > 0.95);
}

TEST_CASE("duplicate rows are handled without NaNs") {
  Matrix x(6, 3, 0.0);
  for (size_t j = 0; j < 3; ++j) {
    x.at(4, j) = 1.0;  // rows 0-3 identical, 4-5 identical
    x.at(5, j) = 1.0;
  }
  Matrix p = tsne_joint_p(x, 2.0, 7);
  for (double v : p.data) CHECK(std::isfinite(v));
  double total = 0.0;
  for (double v : p.data) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("KL gradient matches finite differences") {
  std::vector<int> labels;
  Matrix x = cluster_data(labels, 3, 11);  // 9 points keeps FD cheap
  Matrix p = tsne_joint_p(x, 3.0, 2);

  Rng rng(15);
  Matrix y(9, 2);
  for (double& v : y.data) v = rng.uniform(-1.0, 1.0);

  Matrix grad(9, 2);
  tsne_kl(p, y, &grad);

  for (size_t idx = 0; idx < y.data.size(); ++idx) {
    double saved = y.data[idx];
    const double h = 1e-6;
    y.data[idx] = saved + h;
    double fp = tsne_kl(p, y);
    y.data[idx] = saved - h;
    double fm = tsne_kl(p, y);
    y.data[idx] = saved;
    double numeric = (fp - fm) / (2.0 * h);
    double denom = std::max({1.0, std::abs(numeric), std::abs(grad.data[idx])});
    CHECK(std::abs(numeric - grad.data[idx]) <= 1e-4 * denom);
  }
}

TEST_CASE("optimization lowers KL and separates the clusters") {
  std::vector<int> labels;
  Matrix x = cluster_data(labels, 12, 21);
  TsneConfig config;
  config.perplexity = 8.0;
  config.n_iter = 400;
  config.exaggeration_iters = 100;
  config.momentum_switch_iter = 100;
  config.seed = 4;

  TsneDiagnostics diag;
  Embedding2D emb = tsne(x, labels, config, &diag);
  REQUIRE(emb.points.rows == x.rows);
  REQUIRE(emb.points.cols == 2);
  CHECK(emb.labels == labels);
  CHECK(std::isfinite(emb.final_kl));
  CHECK(emb.final_kl < diag.initial_kl);
  CHECK(emb.final_kl >= 0.0);

  // mean within-cluster pairwise distance < mean across-cluster distance
  double intra = 0.0, inter = 0.0;
  size_t n_intra = 0, n_inter = 0;
  for (size_t i = 0; i < emb.points.rows; ++i)
    for (size_t j = i + 1; j < emb.points.rows; ++j) {
      double dx = emb.points.at(i, 0) - emb.points.at(j, 0);
      double dy = emb.points.at(i, 1) - emb.points.at(j, 1);
      double dist = std::sqrt(dx * dx + dy * dy);
      if (labels[i] == labels[j]) {
        intra += dist;
        ++n_intra;
      } else {
        inter += dist;
        ++n_inter;
      }
    }
  intra /= double(n_intra);
  inter /= double(n_inter);
  CHECK(inter > intra);

  // identical configuration reproduces the embedding bit for bit
  Embedding2D again = tsne(x, labels, config);
  CHECK(again.points.data == emb.points.data);
  CHECK(again.final_kl == emb.final_kl);
}

TEST_CASE("embedding misuse raises parameter errors") {
  std::vector<int> labels = {0, 0, 100};
  Matrix tiny(3, 2, 0.0);
  tiny.at(1, 0) = 1.0;
  tiny.at(2, 1) = 1.0;
  try {
    tsne(tiny, labels, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::param);  // fewer than 4 points
  }

  std::vector<int> labels4 = {0, 0, 100, 100};
  Matrix four(4, 2, 0.0);
  four.at(1, 0) = 1.0;
  four.at(2, 1) = 1.0;
  four.at(3, 0) = -1.0;
  TsneConfig big_perp;
  big_perp.perplexity = 4.0;  // must be < n
  CHECK_THROWS_AS(tsne(four, labels4, big_perp), Error);

  std::vector<int> wrong = {0, 0};
  CHECK_THROWS_AS(tsne(four, wrong, {}), Error);
}

TEST_CASE("points CSV: header, one row per point, session passthrough") {
  Embedding2D emb;
  emb.points = Matrix(3, 2);
  emb.points.at(0, 0) = 1.25;
  emb.points.at(0, 1) = -2.0;
  emb.points.at(1, 0) = 0.5;
  emb.points.at(2, 1) = 7.0;
  emb.labels = {0, 100, 2000};
  std::vector<int> sessions = {1, 2, 9};

  stdfs::path path = stdfs::temp_directory_path() / "hydroflow_points.csv";
  write_points_csv(emb, sessions, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,label,session");
  size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);

  // empty sessions column becomes zeros rather than an error
  write_points_csv(emb, {}, path.string());
  std::string text = slurp(path);
  CHECK(count_substr(text, ",0\n") == 3);
  stdfs::remove(path);

  CHECK_THROWS_AS(write_points_csv(emb, {1, 2}, path.string()), Error);
  CHECK_THROWS_AS(write_points_csv(emb, sessions, "/nonexistent/p.csv"), Error);
}

TEST_CASE("scatter SVG: one circle per point plus a legend per class") {
  std::vector<int> labels;
  Matrix x = cluster_data(labels, 6, 31);
  TsneConfig config;
  config.perplexity = 5.0;
  config.n_iter = 60;
  config.exaggeration_iters = 20;
  Embedding2D emb = tsne(x, labels, config);

  stdfs::path path = stdfs::temp_directory_path() / "hydroflow_scatter.svg";
  export_scatter_svg(emb, path.string());
  std::string text = slurp(path);
  CHECK(count_substr(text, "<circle") == emb.points.rows);
  CHECK(count_substr(text, "<rect") == 3);  // one legend swatch per class
  CHECK(count_substr(text, "mL/min") == 3);
  CHECK(text.find("<svg") != std::string::npos);

  // explicit color override is honored
  std::map<int, std::string> colors = {{0, "#123456"}};
  export_scatter_svg(emb, path.string(), colors);
  CHECK(slurp(path).find("#123456") != std::string::npos);
  stdfs::remove(path);

  CHECK_THROWS_AS(export_scatter_svg(emb, "/nonexistent/s.svg"), Error);
}
