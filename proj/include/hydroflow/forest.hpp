#pragma once

#include <cstdint>
#include <vector>

#include "hydroflow/linalg.hpp"

namespace hydroflow {

// Random forest of CART trees on Gini impurity.  Each tree draws its own
// bootstrap sample and considers a random subset of features at every split.
// Training is deterministic for a fixed seed: tree t uses one RNG stream for
// the bootstrap draw and an independent stream for feature sampling, so
// out-of-bag membership can be reconstructed later from the stored seed
// without replaying the split decisions.
struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;      // root is depth 0
  size_t min_leaf = 2;     // smallest sample count allowed in a leaf
  size_t n_candidates = 0; // features tried per split; 0 -> floor(sqrt(dim))
  std::uint64_t seed = 0;
};

// Flat node storage; feature == -1 marks a leaf and then label is valid.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<int> classes;  // distinct training labels, ascending
  std::uint64_t seed = 0;
  int max_depth = 0;
  size_t min_leaf = 0;
  size_t n_candidates = 0;
};

// Grows the ensemble.  Throws a data error for an empty set or mismatched
// label count.  Ties in leaf majorities and in the final vote both resolve
// to the smaller label.
ForestModel train_forest(const Matrix& X, const std::vector<int>& labels,
                         const ForestParams& params = {});

int tree_predict(const Tree& tree, const double* x);

// Fraction of trees voting for each entry of model.classes; sums to 1.
std::vector<double> forest_vote_distribution(const ForestModel& model,
                                             const double* x, size_t dim);

int forest_predict(const ForestModel& model, const double* x, size_t dim);

// Out-of-bag accuracy over the original training set: every sample is scored
// by the trees whose bootstrap missed it.  Bootstraps are re-drawn from the
// seed stored in the model, so X and labels must be the training inputs.
double forest_oob_accuracy(const ForestModel& model, const Matrix& X,
                           const std::vector<int>& labels);

}  // namespace hydroflow
