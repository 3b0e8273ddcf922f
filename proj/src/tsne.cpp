#include "hydroflow/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "hydroflow/error.hpp"
#include "hydroflow/kernels.hpp"
#include "hydroflow/log.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kDupThreshold = 1e-18;  // squared distance
constexpr std::uint64_t kJitterSalt = 0xc2b2ae3d27d4eb4full;

// Student-t numerators 1/(1 + |y_i - y_j|^2) with zero diagonal; returns the
// normalizer Z = sum over ordered pairs.
double student_t_numerators(const Matrix& y, Matrix& qnum) {
  size_t n = y.rows;
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    qnum.at(i, i) = 0.0;
    for (size_t j = i + 1; j < n; ++j) {
      double dx = y.at(i, 0) - y.at(j, 0);
      double dy = y.at(i, 1) - y.at(j, 1);
      double v = 1.0 / (1.0 + dx * dx + dy * dy);
      qnum.at(i, j) = v;
      qnum.at(j, i) = v;
      z += 2.0 * v;
    }
  }
  return z;
}

// dKL/dy for P scaled by `p_scale` (early exaggeration); grad is overwritten.
void kl_gradient(const Matrix& p, const Matrix& y, double p_scale,
                 Matrix& qnum, Matrix& grad) {
  size_t n = y.rows;
  double z = student_t_numerators(y, qnum);
  std::fill(grad.data.begin(), grad.data.end(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double coef =
          4.0 * (p_scale * p.at(i, j) - qnum.at(i, j) / z) * qnum.at(i, j);
      grad.at(i, 0) += coef * (y.at(i, 0) - y.at(j, 0));
      grad.at(i, 1) += coef * (y.at(i, 1) - y.at(j, 1));
    }
  }
}

}  // namespace

Matrix tsne_joint_p(const Matrix& x, double perplexity, std::uint64_t seed) {
  size_t n = x.rows;
  if (n < 2) fail(ErrorKind::param, "tsne: need at least 2 rows");
  if (perplexity <= 0.0)
    fail(ErrorKind::param, "tsne: perplexity must be positive");
  if (perplexity >= double(n))
    fail(ErrorKind::param, "tsne: perplexity must be below the row count");

  Matrix work = x;
  Matrix d2(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double v = kern::squared_distance(work.row(i), work.row(j), work.cols);
      d2.at(i, j) = v;
      d2.at(j, i) = v;
    }

  // exact duplicates break the bandwidth search; nudge later copies apart
  Rng jitter_rng(seed ^ kJitterSalt);
  for (size_t j = 1; j < n; ++j) {
    bool dup = false;
    for (size_t i = 0; i < j && !dup; ++i) dup = d2.at(i, j) < kDupThreshold;
    if (!dup) continue;
    for (size_t c = 0; c < work.cols; ++c)
      work.at(j, c) += (2.0 * jitter_rng.uniform() - 1.0) * 1e-9;
    for (size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      double v = kern::squared_distance(work.row(i), work.row(j), work.cols);
      d2.at(i, j) = v;
      d2.at(j, i) = v;
    }
  }

  // per-row bandwidth beta_i by bisection to entropy log(perplexity)
  double target = std::log(perplexity);
  Matrix cond(n, n);
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d2.at(i, j));
    for (int step = 0; step < 50; ++step) {
      double total = 0.0, avg = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) {
          w[j] = 0.0;
          continue;
        }
        w[j] = std::exp(-beta * (d2.at(i, j) - dmin));  // shifted for range
        total += w[j];
      }
      for (size_t j = 0; j < n; ++j)
        if (j != i) avg += w[j] * (d2.at(i, j) - dmin);
      avg /= total;
      double entropy = std::log(total) + beta * avg;
      if (std::abs(entropy - target) <= 1e-5) break;
      if (entropy > target) {  // too flat: sharpen
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    double total = 0.0;
    for (size_t j = 0; j < n; ++j) total += w[j];
    for (size_t j = 0; j < n; ++j) cond.at(i, j) = w[j] / total;
  }

  Matrix p(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      p.at(i, j) = std::max((cond.at(i, j) + cond.at(j, i)) / (2.0 * double(n)),
                            kProbFloor);
    }
  return p;
}

double tsne_kl(const Matrix& p, const Matrix& y, Matrix* grad) {
  size_t n = y.rows;
  if (p.rows != n || p.cols != n)
    fail(ErrorKind::data, "tsne_kl: P must be N x N");
  if (y.cols != 2) fail(ErrorKind::data, "tsne_kl: embedding must be N x 2");

  Matrix qnum(n, n);
  double z = student_t_numerators(y, qnum);
  double kl = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double pij = p.at(i, j);
      if (pij <= 0.0) continue;
      double qij = std::max(qnum.at(i, j) / z, kProbFloor);
      kl += pij * std::log(pij / qij);
    }
  if (grad) {
    *grad = Matrix(n, 2);
    kl_gradient(p, y, 1.0, qnum, *grad);
  }
  return kl;
}

Embedding2D tsne(const Matrix& x, const std::vector<int>& labels,
                 const TsneConfig& config, TsneDiagnostics* diag) {
  size_t n = x.rows;
  if (n < 4) fail(ErrorKind::param, "tsne: need at least 4 rows");
  if (labels.size() != n)
    fail(ErrorKind::param, "tsne: one label per row required");
  if (config.n_iter < 1) fail(ErrorKind::param, "tsne: n_iter must be positive");

  Matrix p = tsne_joint_p(x, config.perplexity, config.seed);

  Rng rng(config.seed);
  Matrix y(n, 2);
  for (double& v : y.data) v = rng.gaussian() * 1e-2;  // N(0, 1e-4)

  if (diag) diag->initial_kl = tsne_kl(p, y);

  Matrix vel(n, 2), grad(n, 2), qnum(n, n);
  for (int iter = 0; iter < config.n_iter; ++iter) {
    double p_scale =
        iter < config.exaggeration_iters ? config.early_exaggeration : 1.0;
    kl_gradient(p, y, p_scale, qnum, grad);
    double momentum = iter < config.momentum_switch_iter
                          ? config.momentum_start
                          : config.momentum_final;
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < n; ++i) {
      vel.at(i, 0) = momentum * vel.at(i, 0) -
                     config.learning_rate * grad.at(i, 0);
      vel.at(i, 1) = momentum * vel.at(i, 1) -
                     config.learning_rate * grad.at(i, 1);
      y.at(i, 0) += vel.at(i, 0);
      y.at(i, 1) += vel.at(i, 1);
      mean_x += y.at(i, 0);
      mean_y += y.at(i, 1);
    }
    mean_x /= double(n);
    mean_y /= double(n);
    for (size_t i = 0; i < n; ++i) {  // keep the cloud centered
      y.at(i, 0) -= mean_x;
      y.at(i, 1) -= mean_y;
    }
  }

  Embedding2D emb;
  emb.points = std::move(y);
  emb.labels = labels;
  emb.final_kl = tsne_kl(p, emb.points);
  logx::info("tsne: %zu points, final KL %.4f", n, emb.final_kl);
  return emb;
}

namespace {

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                            "#bcbd22", "#17becf"};

}  // namespace

void export_scatter_svg(const Embedding2D& emb, const std::string& path,
                        const std::map<int, std::string>& colors) {
  size_t n = emb.points.rows;
  if (n == 0) fail(ErrorKind::data, "export_scatter_svg: empty embedding");
  if (emb.labels.size() != n)
    fail(ErrorKind::data, "export_scatter_svg: label count mismatch");

  double xmin = emb.points.at(0, 0), xmax = xmin;
  double ymin = emb.points.at(0, 1), ymax = ymin;
  for (size_t i = 1; i < n; ++i) {
    xmin = std::min(xmin, emb.points.at(i, 0));
    xmax = std::max(xmax, emb.points.at(i, 0));
    ymin = std::min(ymin, emb.points.at(i, 1));
    ymax = std::max(ymax, emb.points.at(i, 1));
  }

  const double width = 640.0, height = 480.0, inset = 0.05;
  double px0 = width * inset, px1 = width * (1.0 - inset);
  double py0 = height * inset, py1 = height * (1.0 - inset);
  auto map_coord = [](double v, double lo, double hi, double a, double b) {
    if (hi <= lo) return 0.5 * (a + b);  // degenerate spread: center it
    return a + (v - lo) / (hi - lo) * (b - a);
  };

  std::set<int> distinct(emb.labels.begin(), emb.labels.end());
  std::vector<int> classes(distinct.begin(), distinct.end());
  auto color_of = [&](int label) -> std::string {
    auto it = colors.find(label);
    if (it != colors.end()) return it->second;
    size_t rank = size_t(std::lower_bound(classes.begin(), classes.end(),
                                          label) -
                         classes.begin());
    return kPalette[rank % 10];
  };

  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";

  char buf[160];
  for (size_t i = 0; i < n; ++i) {
    double cx = map_coord(emb.points.at(i, 0), xmin, xmax, px0, px1);
    double cy = map_coord(emb.points.at(i, 1), ymin, ymax, py1, py0);
    std::snprintf(buf, sizeof buf,
                  "  <circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" "
                  "fill-opacity=\"0.7\"/>\n",
                  cx, cy, color_of(emb.labels[i]).c_str());
    out << buf;
  }

  // legend uses rects so the circle count equals the point count exactly
  for (size_t k = 0; k < classes.size(); ++k) {
    double ly = 10.0 + 20.0 * double(k);
    std::snprintf(buf, sizeof buf,
                  "  <rect x=\"10\" y=\"%.0f\" width=\"12\" height=\"12\" "
                  "fill=\"%s\"/>\n",
                  ly, color_of(classes[k]).c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"28\" y=\"%.0f\" font-size=\"12\" "
                  "font-family=\"sans-serif\">%d mL/min</text>\n",
                  ly + 11.0, classes[k]);
    out << buf;
  }
  out << "</svg>\n";
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

void write_points_csv(const Embedding2D& emb, const std::vector<int>& sessions,
                      const std::string& path) {
  size_t n = emb.points.rows;
  if (emb.labels.size() != n)
    fail(ErrorKind::data, "write_points_csv: label count mismatch");
  if (!sessions.empty() && sessions.size() != n)
    fail(ErrorKind::data, "write_points_csv: session count mismatch");

  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << "x,y,label,session\n";
  char buf[128];
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%d,%d\n", emb.points.at(i, 0),
                  emb.points.at(i, 1), emb.labels[i],
                  sessions.empty() ? 0 : sessions[i]);
    out << buf;
  }
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

}  // namespace hydroflow
