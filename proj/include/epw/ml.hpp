#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace epw::ml {

/// Binary-labeled feature rows. Labels are 0 (negative / control) and
/// 1 (positive / drugged).
struct LabeledDataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return feature_names.size(); }
    void validate() const;

    /// Dataset restricted to the given feature columns, in the given order.
    LabeledDataset select_features(const std::vector<std::size_t>& indices) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // root at index 0
    std::size_t min_leaf = 1;

    int predict(const std::vector<double>& row) const;
};

/// Greedy CART with Gini impurity. Split thresholds are midpoints of adjacent
/// sorted unique feature values; rows go left when value < threshold. Splits
/// must strictly decrease impurity and leave >= min_leaf rows per side; ties
/// resolve to the lowest feature index, then the lowest threshold (the scan
/// runs in that order and only a strict improvement replaces the incumbent).
/// Leaves predict the majority class, ties resolving to 0.
DecisionTree train_tree(const LabeledDataset& data, std::size_t min_leaf = 1);

struct BaggedEnsemble {
    std::vector<DecisionTree> trees;
    std::uint64_t seed = 0;
    std::size_t min_leaf = 1;

    /// Majority vote; an exact tie resolves to class 0.
    int predict(const std::vector<double>& row) const;
    /// Fraction of trees voting class 1.
    double vote_fraction(const std::vector<double>& row) const;
};

/// Trains n_trees CART trees, each on its own bootstrap resample of the full
/// dataset (size-n draws with replacement from substream(seed, tree_index)),
/// so the ensemble is identical for any worker count.
BaggedEnsemble bagging_train(const LabeledDataset& data, std::size_t n_trees,
                             std::size_t min_leaf, std::uint64_t seed, int workers = 1);

/// Pooled confusion counts with the derived rates. Degenerate denominators
/// (for instance sensitivity with no positives) score 0.
struct ClassificationReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    double sensitivity() const;
    double specificity() const;
    double ppv() const;
    double npv() const;
    double accuracy() const;
    double error_rate() const;
};

using PredictorFn = std::function<int(const std::vector<double>&)>;
using TrainerFn = std::function<PredictorFn(const LabeledDataset&)>;

/// Stratified fold assignment: each class is shuffled independently
/// (substream per class label) and dealt round-robin, so every fold holds
/// floor or ceil of count/k rows of each class. Throws when a class has
/// fewer than k rows.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed);

ClassificationReport kfold_cv(const LabeledDataset& data,
                              const std::vector<std::vector<std::size_t>>& folds,
                              const TrainerFn& trainer);

/// Convenience overload: derives stratified folds from `seed` first.
ClassificationReport kfold_cv(const LabeledDataset& data, std::size_t k,
                              const TrainerFn& trainer, std::uint64_t seed);

struct SfsConfig {
    std::size_t k_folds = 10;
    std::size_t n_trees = 30;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct SfsStep {
    std::size_t feature = 0;
    double accuracy = 0.0;
};

struct SfsResult {
    std::vector<std::size_t> selected;
    std::vector<SfsStep> trace;
};

/// Greedy forward selection maximizing stratified k-fold CV accuracy of the
/// bagged ensemble. Folds are drawn once from the seed and shared by every
/// evaluation; each (step, candidate) evaluation trains with its own derived
/// seed. The step's best candidate (ties to the lowest feature index) is kept
/// only if it strictly improves on the running best accuracy; otherwise
/// selection stops. Candidate evaluations within a step run in parallel.
SfsResult sfs(const LabeledDataset& data, const std::vector<std::size_t>& candidates,
              const SfsConfig& config);

/// All features as candidates.
SfsResult sfs(const LabeledDataset& data, const SfsConfig& config);

struct SavedModel {
    BaggedEnsemble ensemble;
    std::vector<std::string> feature_names;
    std::string registry_version;
};

/// JSON schema "epw-tree-ensemble" v1: registry version, feature names, and
/// per-tree node arrays.
void save_model_json(const std::string& path, const SavedModel& model);
SavedModel load_model_json(const std::string& path);

}  // namespace epw::ml
