#include "hydroflow/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hydroflow/error.hpp"
#include "hydroflow/log.hpp"
#include "hydroflow/rng.hpp"

namespace hydroflow {

namespace {

// Decorrelates the per-tree feature-sampling stream from the bootstrap
// stream that out-of-bag evaluation later replays.
constexpr std::uint64_t kSplitStreamSalt = 0x9E3779B97F4A7C15ull;

double gini(const std::vector<size_t>& counts, size_t total) {
  double g = 1.0;
  for (size_t c : counts) {
    double p = double(c) / double(total);
    g -= p * p;
  }
  return g;
}

int majority(const std::vector<size_t>& counts, const std::vector<int>& classes) {
  size_t best = 0;
  for (size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;  // ties keep the smaller label
  return classes[best];
}

struct TreeGrower {
  const Matrix& X;
  const std::vector<size_t>& class_idx;  // label -> index into classes
  const std::vector<int>& classes;
  const ForestParams& params;
  size_t n_candidates;
  Rng& split_rng;
  Tree tree;
  std::vector<size_t> feature_pool;  // reshuffled prefix picks candidates

  TreeGrower(const Matrix& X_, const std::vector<size_t>& ci,
             const std::vector<int>& classes_, const ForestParams& p,
             size_t n_cand, Rng& rng)
      : X(X_), class_idx(ci), classes(classes_), params(p),
        n_candidates(n_cand), split_rng(rng), feature_pool(X_.cols) {
    std::iota(feature_pool.begin(), feature_pool.end(), size_t(0));
  }

  int make_leaf(const std::vector<size_t>& counts) {
    TreeNode node;
    node.label = majority(counts, classes);
    tree.nodes.push_back(node);
    return int(tree.nodes.size()) - 1;
  }

  // rows: sample indices reaching this node (bootstrap indices into X)
  int grow(std::vector<size_t>& rows, int depth) {
    std::vector<size_t> counts(classes.size(), 0);
    for (size_t r : rows) ++counts[class_idx[r]];
    size_t n = rows.size();
    double node_gini = gini(counts, n);
    if (depth >= params.max_depth || n < 2 * params.min_leaf ||
        node_gini == 0.0)
      return make_leaf(counts);

    // sample candidate features without replacement
    for (size_t k = 0; k < n_candidates; ++k) {
      size_t pick = k + split_rng.uniform_index(feature_pool.size() - k);
      std::swap(feature_pool[k], feature_pool[pick]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_decrease = 1e-12;  // require a real impurity improvement
    std::vector<std::pair<double, size_t>> ordered(n);  // (value, class idx)
    std::vector<size_t> left_counts(classes.size());
    for (size_t k = 0; k < n_candidates; ++k) {
      size_t feat = feature_pool[k];
      for (size_t i = 0; i < n; ++i)
        ordered[i] = {X.at(rows[i], feat), class_idx[rows[i]]};
      std::sort(ordered.begin(), ordered.end());
      std::fill(left_counts.begin(), left_counts.end(), size_t(0));
      for (size_t i = 0; i + 1 < n; ++i) {
        ++left_counts[ordered[i].second];
        size_t nl = i + 1, nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        if (ordered[i].first == ordered[i + 1].first) continue;
        double gl = 1.0, gr = 1.0;
        for (size_t c = 0; c < classes.size(); ++c) {
          double pl = double(left_counts[c]) / double(nl);
          double pr = double(counts[c] - left_counts[c]) / double(nr);
          gl -= pl * pl;
          gr -= pr * pr;
        }
        double decrease =
            node_gini - (double(nl) * gl + double(nr) * gr) / double(n);
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = int(feat);
          best_threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return make_leaf(counts);

    std::vector<size_t> left_rows, right_rows;
    for (size_t r : rows) {
      if (X.at(r, size_t(best_feature)) <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    int self = int(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_feature;
    tree.nodes[self].threshold = best_threshold;
    int left = grow(left_rows, depth + 1);
    int right = grow(right_rows, depth + 1);
    tree.nodes[self].left = left;
    tree.nodes[self].right = right;
    return self;
  }
};

}  // namespace

ForestModel train_forest(const Matrix& X, const std::vector<int>& labels,
                         const ForestParams& params) {
  size_t n = X.rows;
  if (n == 0 || X.cols == 0) fail(ErrorKind::data, "empty training set");
  if (labels.size() != n) fail(ErrorKind::data, "label count mismatch");
  if (params.n_trees < 1) fail(ErrorKind::param, "n_trees must be positive");
  if (params.min_leaf < 1) fail(ErrorKind::param, "min_leaf must be positive");

  std::set<int> distinct(labels.begin(), labels.end());
  ForestModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  model.seed = params.seed;
  model.max_depth = params.max_depth;
  model.min_leaf = params.min_leaf;

  std::vector<size_t> class_idx(n);
  for (size_t i = 0; i < n; ++i) {
    auto it = std::lower_bound(model.classes.begin(), model.classes.end(),
                               labels[i]);
    class_idx[i] = size_t(it - model.classes.begin());
  }

  size_t n_cand = params.n_candidates > 0
                      ? std::min(params.n_candidates, X.cols)
                      : size_t(std::floor(std::sqrt(double(X.cols))));
  if (n_cand == 0) n_cand = 1;
  model.n_candidates = n_cand;

  model.trees.reserve(size_t(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng bootstrap_rng(params.seed + std::uint64_t(t));
    Rng split_rng((params.seed + std::uint64_t(t)) ^ kSplitStreamSalt);
    std::vector<size_t> rows(n);
    for (size_t i = 0; i < n; ++i) rows[i] = bootstrap_rng.uniform_index(n);
    TreeGrower grower(X, class_idx, model.classes, params, n_cand, split_rng);
    grower.grow(rows, 0);
    model.trees.push_back(std::move(grower.tree));
  }
  logx::debug("forest: %d trees, %zu classes, %zu candidate features",
              params.n_trees, model.classes.size(), n_cand);
  return model;
}

int tree_predict(const Tree& tree, const double* x) {
  int node = 0;
  while (tree.nodes[size_t(node)].feature >= 0) {
    const TreeNode& nd = tree.nodes[size_t(node)];
    node = x[size_t(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[size_t(node)].label;
}

std::vector<double> forest_vote_distribution(const ForestModel& model,
                                             const double* x, size_t dim) {
  if (model.trees.empty()) fail(ErrorKind::data, "empty forest");
  (void)dim;
  std::vector<double> votes(model.classes.size(), 0.0);
  for (const Tree& tree : model.trees) {
    int label = tree_predict(tree, x);
    auto it = std::lower_bound(model.classes.begin(), model.classes.end(),
                               label);
    votes[size_t(it - model.classes.begin())] += 1.0;
  }
  for (double& v : votes) v /= double(model.trees.size());
  return votes;
}

int forest_predict(const ForestModel& model, const double* x, size_t dim) {
  std::vector<double> votes = forest_vote_distribution(model, x, dim);
  size_t best = 0;
  for (size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;  // ties keep the smaller label
  return model.classes[best];
}

double forest_oob_accuracy(const ForestModel& model, const Matrix& X,
                           const std::vector<int>& labels) {
  size_t n = X.rows;
  if (labels.size() != n) fail(ErrorKind::data, "label count mismatch");
  if (model.trees.empty()) fail(ErrorKind::data, "empty forest");

  Matrix votes(n, model.classes.size());  // zero-initialized
  std::vector<char> in_bag(n);
  for (size_t t = 0; t < model.trees.size(); ++t) {
    Rng bootstrap_rng(model.seed + std::uint64_t(t));
    std::fill(in_bag.begin(), in_bag.end(), char(0));
    for (size_t i = 0; i < n; ++i) in_bag[bootstrap_rng.uniform_index(n)] = 1;
    for (size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      int label = tree_predict(model.trees[t], X.row(i));
      auto it = std::lower_bound(model.classes.begin(), model.classes.end(),
                                 label);
      votes.at(i, size_t(it - model.classes.begin())) += 1.0;
    }
  }

  size_t scored = 0, correct = 0;
  for (size_t i = 0; i < n; ++i) {
    const double* row = votes.row(i);
    double total = 0.0;
    size_t best = 0;
    for (size_t c = 0; c < model.classes.size(); ++c) {
      total += row[c];
      if (row[c] > row[best]) best = c;
    }
    if (total == 0.0) continue;  // never out of bag
    ++scored;
    if (model.classes[best] == labels[i]) ++correct;
  }
  if (scored == 0) fail(ErrorKind::data, "no out-of-bag samples");
  return double(correct) / double(scored);
}

}  // namespace hydroflow
