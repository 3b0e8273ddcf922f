#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Exact O(N^2) t-SNE, sized for desk-scale diagnostics (a few thousand
// frames).  Deterministic per seed.

struct TsneConfig {
  double perplexity = 30.0;
  int n_iter = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;  // applied to P for the first phase
  int exaggeration_iters = 250;
  int momentum_switch_iter = 250;    // momentum 0.5 before, 0.8 after
  double momentum_start = 0.5;
  double momentum_final = 0.8;
};

struct Embedding2D {
  Matrix points;            // N x 2
  std::vector<int> labels;  // flow class per point
  double final_kl = 0.0;
};

struct TsneDiagnostics {
  double initial_kl = 0.0;  // KL of the random init, before any update
};

// Symmetrized joint probabilities: per-row Gaussian bandwidths found by
// bisection so each conditional distribution has entropy log(perplexity)
// (within 1e-5, at most 50 steps), then p_ij = (p_{j|i} + p_{i|j}) / 2N,
// floored at 1e-12.  Duplicate rows (squared distance < 1e-18) are perturbed
// by a seeded jitter of magnitude 1e-9 first.  Exposed for verification.
Matrix tsne_joint_p(const Matrix& x, double perplexity, std::uint64_t seed);

// KL(P || Q) at embedding `y` with the Student-t Q of t-SNE.  When `grad`
// is non-null it receives the exact dKL/dy (N x 2).  Exposed for
// verification against finite differences.
double tsne_kl(const Matrix& p, const Matrix& y, Matrix* grad = nullptr);

// Full embedding run: N(0, 1e-4) init, gradient descent with momentum and
// early exaggeration.  Requires N >= 4, perplexity < N, and one label per
// row.  Throws param errors otherwise.
Embedding2D tsne(const Matrix& x, const std::vector<int>& labels,
                 const TsneConfig& config = {},
                 TsneDiagnostics* diag = nullptr);

// Standalone scatter plot: one circle per point, a legend entry (rect
// swatch + text) per distinct class, coordinates affinely mapped so the
// data extremes touch a box inset 5% from the canvas edge.  Classes absent
// from `colors` get palette colors by rank.  Throws a data error on an
// empty embedding and an io error when the file cannot be written.
void export_scatter_svg(const Embedding2D& emb, const std::string& path,
                        const std::map<int, std::string>& colors = {});

// "x,y,label,session" rows at full precision; `sessions` may be empty
// (column written as 0) or must match the point count.
void write_points_csv(const Embedding2D& emb, const std::vector<int>& sessions,
                      const std::string& path);

}  // namespace hydroflow
