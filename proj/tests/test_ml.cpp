#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "epw/errors.hpp"
#include "epw/ml.hpp"
#include "epw/rng.hpp"

using epw::ml::BaggedEnsemble;
using epw::ml::ClassificationReport;
using epw::ml::DecisionTree;
using epw::ml::LabeledDataset;
using epw::ml::TreeNode;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "epw_ml_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

LabeledDataset random_dataset(std::size_t n_rows, std::size_t n_features, std::uint64_t seed) {
    LabeledDataset data;
    for (std::size_t f = 0; f < n_features; ++f) data.feature_names.push_back("f" + std::to_string(f));
    epw::SplitMixRng rng(seed);
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<double> row(n_features);
        for (double& v : row) v = rng.next_double();
        data.rows.push_back(std::move(row));
        data.labels.push_back(static_cast<int>(rng.next_below(2)));
    }
    return data;
}

/// Reference CART built by exhaustive search: every candidate threshold is
/// re-partitioned from scratch, no incremental count bookkeeping. Scan order
/// and tie rules match the production contract (feature ascending, threshold
/// ascending, strict impurity decrease required).
struct OracleNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<OracleNode> left, right;
    int leaf_class = 0;
};

double oracle_gini(double a0, double a1) {
    const double n = a0 + a1;
    if (n == 0.0) return 0.0;
    const double p0 = a0 / n;
    const double p1 = a1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::unique_ptr<OracleNode> oracle_build(const LabeledDataset& data, std::vector<std::size_t> idx,
                                         std::size_t min_leaf) {
    auto node = std::make_unique<OracleNode>();
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i : idx) (data.labels[i] == 1 ? n1 : n0)++;
    node->leaf_class = n1 > n0 ? 1 : 0;
    if (n0 == 0 || n1 == 0 || idx.size() < 2 * min_leaf) return node;

    const double parent = oracle_gini(static_cast<double>(n0), static_cast<double>(n1));
    int best_f = -1;
    double best_t = 0.0;
    double best_dec = 0.0;
    for (std::size_t f = 0; f < data.n_features(); ++f) {
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (std::size_t i : idx) vals.push_back(data.rows[i][f]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t u = 0; u + 1 < vals.size(); ++u) {
            const double threshold = 0.5 * (vals[u] + vals[u + 1]);
            if (!(vals[u] < threshold) || !(threshold <= vals[u + 1])) continue;
            double l0 = 0.0, l1 = 0.0, r0 = 0.0, r1 = 0.0;
            std::size_t n_left = 0;
            for (std::size_t i : idx) {
                if (data.rows[i][f] < threshold) {
                    ++n_left;
                    (data.labels[i] == 1 ? l1 : l0) += 1.0;
                } else {
                    (data.labels[i] == 1 ? r1 : r0) += 1.0;
                }
            }
            const std::size_t n_right = idx.size() - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double child = (static_cast<double>(n_left) * oracle_gini(l0, l1) +
                                  static_cast<double>(n_right) * oracle_gini(r0, r1)) /
                                 static_cast<double>(idx.size());
            if (parent - child > best_dec) {
                best_dec = parent - child;
                best_f = static_cast<int>(f);
                best_t = threshold;
            }
        }
    }
    if (best_f < 0) return node;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx)
        (data.rows[i][static_cast<std::size_t>(best_f)] < best_t ? left_idx : right_idx).push_back(i);
    node->feature = best_f;
    node->threshold = best_t;
    node->left = oracle_build(data, std::move(left_idx), min_leaf);
    node->right = oracle_build(data, std::move(right_idx), min_leaf);
    return node;
}

int oracle_predict(const OracleNode* node, const std::vector<double>& row) {
    while (node->feature >= 0)
        node = (row[static_cast<std::size_t>(node->feature)] < node->threshold ? node->left
                                                                               : node->right)
                   .get();
    return node->leaf_class;
}

/// Number of training rows routed to each node of a trained tree.
std::vector<std::size_t> rows_per_node(const DecisionTree& tree, const LabeledDataset& data) {
    std::vector<std::size_t> counts(tree.nodes.size(), 0);
    for (const auto& row : data.rows) {
        std::size_t at = 0;
        while (true) {
            counts[at]++;
            const TreeNode& node = tree.nodes[at];
            if (node.feature < 0) break;
            at = static_cast<std::size_t>(
                row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                             : node.right);
        }
    }
    return counts;
}

bool trees_equal(const DecisionTree& a, const DecisionTree& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const TreeNode& x = a.nodes[i];
        const TreeNode& y = b.nodes[i];
        if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
            x.right != y.right || x.leaf_class != y.leaf_class)
            return false;
    }
    return true;
}

DecisionTree leaf_tree(int cls) {
    DecisionTree tree;
    TreeNode leaf;
    leaf.leaf_class = cls;
    tree.nodes.push_back(leaf);
    return tree;
}

}  // namespace

TEST_SUITE("ml_tree") {

TEST_CASE("a separable single feature yields one split at the midpoint") {
    LabeledDataset data;
    data.feature_names = {"x"};
    for (double v : {0.1, 0.2, 0.3}) {
        data.rows.push_back({v});
        data.labels.push_back(0);
    }
    for (double v : {0.7, 0.8, 0.9}) {
        data.rows.push_back({v});
        data.labels.push_back(1);
    }
    const DecisionTree tree = epw::ml::train_tree(data);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == doctest::Approx(0.5).epsilon(1e-12));
    const TreeNode& left = tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)];
    const TreeNode& right = tree.nodes[static_cast<std::size_t>(tree.nodes[0].right)];
    CHECK(left.feature == -1);
    CHECK(right.feature == -1);
    CHECK(left.leaf_class == 0);
    CHECK(right.leaf_class == 1);
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        CHECK(tree.predict(data.rows[i]) == data.labels[i]);
}

TEST_CASE("a pure dataset trains to a single leaf") {
    LabeledDataset data;
    data.feature_names = {"a", "b"};
    for (int i = 0; i < 5; ++i) {
        data.rows.push_back({static_cast<double>(i), static_cast<double>(-i)});
        data.labels.push_back(1);
    }
    const DecisionTree tree = epw::ml::train_tree(data);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].leaf_class == 1);
}

TEST_CASE("training matches an exhaustive split search on random data") {
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
        const LabeledDataset data = random_dataset(20, 3, seed);
        for (std::size_t min_leaf : {std::size_t{1}, std::size_t{3}}) {
            const DecisionTree tree = epw::ml::train_tree(data, min_leaf);
            std::vector<std::size_t> all(data.n_rows());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            const auto oracle = oracle_build(data, all, min_leaf);

            for (const auto& row : data.rows)
                REQUIRE(tree.predict(row) == oracle_predict(oracle.get(), row));
            epw::SplitMixRng probe(seed + 1000);
            for (int k = 0; k < 200; ++k) {
                const std::vector<double> row = {probe.next_double(), probe.next_double(),
                                                 probe.next_double()};
                REQUIRE(tree.predict(row) == oracle_predict(oracle.get(), row));
            }
        }
    }
}

TEST_CASE("repeated feature values never produce a degenerate split") {
    LabeledDataset data;
    data.feature_names = {"x"};
    for (int i = 0; i < 4; ++i) {
        data.rows.push_back({1.0});
        data.labels.push_back(i % 2);
    }
    const DecisionTree tree = epw::ml::train_tree(data);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].leaf_class == 0);  // 2-2 tie resolves to 0
}

TEST_CASE("every split side holds at least min_leaf training rows") {
    const LabeledDataset data = random_dataset(30, 2, 99);
    for (std::size_t min_leaf : {std::size_t{2}, std::size_t{4}, std::size_t{7}}) {
        const DecisionTree tree = epw::ml::train_tree(data, min_leaf);
        const auto counts = rows_per_node(tree, data);
        for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] >= min_leaf);

        // each leaf predicts the majority label of the rows routed to it
        for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
            if (tree.nodes[node].feature >= 0) continue;
            std::size_t n0 = 0, n1 = 0;
            for (std::size_t i = 0; i < data.n_rows(); ++i) {
                std::size_t at = 0;
                while (tree.nodes[at].feature >= 0)
                    at = static_cast<std::size_t>(
                        data.rows[i][static_cast<std::size_t>(tree.nodes[at].feature)] <
                                tree.nodes[at].threshold
                            ? tree.nodes[at].left
                            : tree.nodes[at].right);
                if (at == node) (data.labels[i] == 1 ? n1 : n0)++;
            }
            CHECK(tree.nodes[node].leaf_class == (n1 > n0 ? 1 : 0));
        }
    }
}

TEST_CASE("dataset validation rejects malformed inputs") {
    LabeledDataset data;
    data.feature_names = {"x"};
    data.rows = {{1.0}, {2.0}};
    data.labels = {0};
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    data.labels = {0, 2};
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    data.labels = {0, 1};
    data.rows[1] = {2.0, 3.0};
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    data.rows[1] = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    data.rows[1] = {2.0};
    CHECK_NOTHROW(data.validate());

    CHECK_THROWS_AS(epw::ml::train_tree(LabeledDataset{}), std::invalid_argument);
    CHECK_THROWS_AS(epw::ml::train_tree(data, 0), std::invalid_argument);
}

TEST_CASE("feature selection reorders and duplicates columns") {
    LabeledDataset data;
    data.feature_names = {"a", "b", "c"};
    data.rows = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
    data.labels = {0, 1};
    const LabeledDataset view = data.select_features({2, 0, 2});
    REQUIRE(view.feature_names == std::vector<std::string>{"c", "a", "c"});
    CHECK(view.rows[0] == std::vector<double>{3.0, 1.0, 3.0});
    CHECK(view.rows[1] == std::vector<double>{6.0, 4.0, 6.0});
    CHECK(view.labels == data.labels);
    CHECK_THROWS_AS(data.select_features({3}), std::out_of_range);
}

}  // TEST_SUITE

TEST_SUITE("ml_bagging") {

TEST_CASE("a bagged ensemble classifies separable data perfectly") {
    LabeledDataset data;
    data.feature_names = {"x", "noise"};
    epw::SplitMixRng rng(5);
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        data.rows.push_back({label + 0.4 * rng.next_double(), rng.next_double()});
        data.labels.push_back(label);
    }
    const BaggedEnsemble ensemble = epw::ml::bagging_train(data, 30, 1, 77);
    REQUIRE(ensemble.trees.size() == 30);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        CHECK(ensemble.predict(data.rows[i]) == data.labels[i]);
        const double frac = ensemble.vote_fraction(data.rows[i]);
        CHECK(frac >= 0.0);
        CHECK(frac <= 1.0);
        CHECK((frac > 0.5) == (data.labels[i] == 1));
    }
}

TEST_CASE("the same seed reproduces the ensemble and worker count is irrelevant") {
    const LabeledDataset data = random_dataset(25, 3, 42);
    const BaggedEnsemble a = epw::ml::bagging_train(data, 12, 2, 9001, 1);
    const BaggedEnsemble b = epw::ml::bagging_train(data, 12, 2, 9001, 4);
    const BaggedEnsemble c = epw::ml::bagging_train(data, 12, 2, 9001, 7);
    REQUIRE(a.trees.size() == b.trees.size());
    REQUIRE(a.trees.size() == c.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        CHECK(trees_equal(a.trees[t], b.trees[t]));
        CHECK(trees_equal(a.trees[t], c.trees[t]));
    }
}

TEST_CASE("an exact vote tie resolves to class zero") {
    BaggedEnsemble ensemble;
    ensemble.trees.push_back(leaf_tree(0));
    ensemble.trees.push_back(leaf_tree(1));
    CHECK(ensemble.predict({0.0}) == 0);
    CHECK(ensemble.vote_fraction({0.0}) == doctest::Approx(0.5));

    ensemble.trees.push_back(leaf_tree(1));
    CHECK(ensemble.predict({0.0}) == 1);
    CHECK(ensemble.vote_fraction({0.0}) == doctest::Approx(2.0 / 3.0));

    BaggedEnsemble empty;
    CHECK(empty.vote_fraction({0.0}) == 0.0);
}

TEST_CASE("bagging rejects degenerate configurations") {
    const LabeledDataset data = random_dataset(10, 2, 3);
    CHECK_THROWS_AS(epw::ml::bagging_train(data, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(epw::ml::bagging_train(LabeledDataset{}, 3, 1, 1), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("ml_metrics") {

TEST_CASE("report rates follow directly from the confusion counts") {
    ClassificationReport report;
    report.tp = 97;
    report.fn = 3;
    report.tn = 84;
    report.fp = 16;
    CHECK(report.total() == 200);
    CHECK(report.sensitivity() == doctest::Approx(0.97));
    CHECK(report.specificity() == doctest::Approx(0.84));
    CHECK(report.ppv() == doctest::Approx(97.0 / 113.0));
    CHECK(report.npv() == doctest::Approx(84.0 / 87.0));
    CHECK(report.accuracy() == doctest::Approx(181.0 / 200.0));
    CHECK(report.error_rate() == doctest::Approx(19.0 / 200.0));
    CHECK(report.accuracy() + report.error_rate() == doctest::Approx(1.0));
}

TEST_CASE("degenerate denominators score zero instead of dividing by zero") {
    ClassificationReport report;
    CHECK(report.sensitivity() == 0.0);
    CHECK(report.specificity() == 0.0);
    CHECK(report.ppv() == 0.0);
    CHECK(report.npv() == 0.0);
    CHECK(report.accuracy() == 0.0);
    CHECK(report.error_rate() == 0.0);

    report.tn = 5;  // no positives at all
    CHECK(report.sensitivity() == 0.0);
    CHECK(report.specificity() == 1.0);
    CHECK(report.accuracy() == 1.0);
}

}  // TEST_SUITE

TEST_SUITE("ml_cv") {

TEST_CASE("stratified folds balance both classes and partition the rows") {
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(0);
    for (int i = 0; i < 20; ++i) labels.push_back(1);
    const auto folds = epw::ml::stratified_folds(labels, 5, 31);
    REQUIRE(folds.size() == 5);

    std::vector<int> seen(labels.size(), 0);
    for (const auto& fold : folds) {
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i : fold) {
            REQUIRE(i < labels.size());
            seen[i]++;
            (labels[i] == 1 ? n1 : n0)++;
        }
        CHECK(n0 == 6);
        CHECK(n1 == 4);
    }
    for (int count : seen) CHECK(count == 1);

    const auto again = epw::ml::stratified_folds(labels, 5, 31);
    CHECK(again == folds);
    const auto other = epw::ml::stratified_folds(labels, 5, 32);
    CHECK(other != folds);
}

TEST_CASE("uneven class counts split into floor or ceil sized fold shares") {
    std::vector<int> labels;
    for (int i = 0; i < 13; ++i) labels.push_back(0);
    for (int i = 0; i < 7; ++i) labels.push_back(1);
    const auto folds = epw::ml::stratified_folds(labels, 3, 8);
    std::size_t total = 0;
    for (const auto& fold : folds) {
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i : fold) (labels[i] == 1 ? n1 : n0)++;
        CHECK(n0 >= 4);
        CHECK(n0 <= 5);
        CHECK(n1 >= 2);
        CHECK(n1 <= 3);
        total += fold.size();
    }
    CHECK(total == labels.size());
}

TEST_CASE("fold construction rejects undersized classes and tiny k") {
    std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1};
    CHECK_THROWS_AS(epw::ml::stratified_folds(labels, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(epw::ml::stratified_folds(labels, 1, 1), std::invalid_argument);
    CHECK_NOTHROW(epw::ml::stratified_folds(labels, 3, 1));
}

TEST_CASE("cross validation pools confusion counts over every held out row") {
    const LabeledDataset data = [] {
        LabeledDataset d;
        d.feature_names = {"a", "b"};
        epw::SplitMixRng rng(17);
        for (int i = 0; i < 24; ++i) {
            d.rows.push_back({rng.next_double(), rng.next_double()});
            d.labels.push_back(i % 2);
        }
        return d;
    }();

    SUBCASE("a perfect lookup classifier scores every rate at one") {
        const epw::ml::TrainerFn lookup = [&data](const LabeledDataset&) -> epw::ml::PredictorFn {
            return [&data](const std::vector<double>& row) {
                for (std::size_t i = 0; i < data.n_rows(); ++i)
                    if (data.rows[i] == row) return data.labels[i];
                return -1;
            };
        };
        const ClassificationReport report = epw::ml::kfold_cv(data, 4, lookup, 5);
        CHECK(report.total() == data.n_rows());
        CHECK(report.tp == 12);
        CHECK(report.tn == 12);
        CHECK(report.fp == 0);
        CHECK(report.fn == 0);
        CHECK(report.sensitivity() == 1.0);
        CHECK(report.specificity() == 1.0);
        CHECK(report.accuracy() == 1.0);
    }

    SUBCASE("a constant positive classifier has full sensitivity and zero specificity") {
        const epw::ml::TrainerFn always_one = [](const LabeledDataset&) -> epw::ml::PredictorFn {
            return [](const std::vector<double>&) { return 1; };
        };
        const ClassificationReport report = epw::ml::kfold_cv(data, 4, always_one, 5);
        CHECK(report.tp == 12);
        CHECK(report.fp == 12);
        CHECK(report.tn == 0);
        CHECK(report.fn == 0);
        CHECK(report.sensitivity() == 1.0);
        CHECK(report.specificity() == 0.0);
        CHECK(report.ppv() == doctest::Approx(0.5));
        CHECK(report.npv() == 0.0);
        CHECK(report.accuracy() == doctest::Approx(0.5));
    }

    SUBCASE("the seed overload equals explicit folds from the same seed") {
        const epw::ml::TrainerFn always_one = [](const LabeledDataset&) -> epw::ml::PredictorFn {
            return [](const std::vector<double>&) { return 1; };
        };
        const auto folds = epw::ml::stratified_folds(data.labels, 4, 5);
        const ClassificationReport a = epw::ml::kfold_cv(data, folds, always_one);
        const ClassificationReport b = epw::ml::kfold_cv(data, 4, always_one, 5);
        CHECK(a.tp == b.tp);
        CHECK(a.fp == b.fp);
        CHECK(a.tn == b.tn);
        CHECK(a.fn == b.fn);
    }

    SUBCASE("trainers never see their held out fold") {
        const auto folds = epw::ml::stratified_folds(data.labels, 4, 5);
        std::size_t call = 0;
        const epw::ml::TrainerFn checking = [&](const LabeledDataset& train) -> epw::ml::PredictorFn {
            REQUIRE(train.n_rows() == data.n_rows() - folds[call].size());
            for (std::size_t held : folds[call])
                for (const auto& row : train.rows) CHECK(row != data.rows[held]);
            ++call;
            return [](const std::vector<double>&) { return 0; };
        };
        epw::ml::kfold_cv(data, folds, checking);
        CHECK(call == folds.size());
    }
}

}  // TEST_SUITE

TEST_SUITE("ml_sfs") {

namespace {

/// 40 rows, feature 1 separates the classes with a wide margin, features 0
/// and 2 are uniform noise.
LabeledDataset one_informative_feature() {
    LabeledDataset data;
    data.feature_names = {"noise_a", "signal", "noise_b"};
    epw::SplitMixRng rng(923);
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        data.rows.push_back({rng.next_double(), label + 0.2 * rng.next_double(), rng.next_double()});
        data.labels.push_back(label);
    }
    return data;
}

}  // namespace

TEST_CASE("selection finds a single perfect feature and then stops") {
    const LabeledDataset data = one_informative_feature();
    epw::ml::SfsConfig config;
    config.k_folds = 10;
    config.n_trees = 15;
    config.seed = 7;
    const epw::ml::SfsResult result = epw::ml::sfs(data, config);
    REQUIRE(result.selected.size() == result.trace.size());
    REQUIRE_FALSE(result.selected.empty());
    CHECK(result.selected[0] == 1);
    CHECK(result.trace[0].feature == 1);
    CHECK(result.trace[0].accuracy == 1.0);
    CHECK(result.selected.size() == 1);  // nothing can strictly beat perfect accuracy
}

TEST_CASE("duplicate candidates collapse to a single selection") {
    const LabeledDataset data = one_informative_feature();
    epw::ml::SfsConfig config;
    config.k_folds = 10;
    config.n_trees = 15;
    config.seed = 7;
    const epw::ml::SfsResult result = epw::ml::sfs(data, {2, 1, 1}, config);
    CHECK(result.selected == std::vector<std::size_t>{1});
}

TEST_CASE("a conjunction needs both coordinates and selection finds them in two steps") {
    LabeledDataset data;
    data.feature_names = {"x0", "x1", "noise"};
    epw::SplitMixRng rng(555);
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double x0 = 0.05 + 0.1 * i;
            const double x1 = 0.05 + 0.1 * j;
            data.rows.push_back({x0, x1, rng.next_double()});
            data.labels.push_back((x0 > 0.5 && x1 > 0.5) ? 1 : 0);
        }
    }
    epw::ml::SfsConfig config;
    config.k_folds = 5;
    config.n_trees = 15;
    config.seed = 21;
    const epw::ml::SfsResult result = epw::ml::sfs(data, config);
    REQUIRE(result.selected.size() >= 2);
    CHECK(((result.selected[0] == 0 && result.selected[1] == 1) ||
           (result.selected[0] == 1 && result.selected[1] == 0)));
    CHECK(result.trace[1].accuracy > result.trace[0].accuracy);
    CHECK(result.trace[1].accuracy >= 0.95);
}

TEST_CASE("selection is identical for any worker count") {
    const LabeledDataset data = one_informative_feature();
    epw::ml::SfsConfig config;
    config.k_folds = 10;
    config.n_trees = 10;
    config.seed = 33;
    config.workers = 1;
    const epw::ml::SfsResult a = epw::ml::sfs(data, config);
    config.workers = 4;
    const epw::ml::SfsResult b = epw::ml::sfs(data, config);
    REQUIRE(a.selected == b.selected);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].feature == b.trace[i].feature);
        CHECK(a.trace[i].accuracy == b.trace[i].accuracy);
    }
}

TEST_CASE("selection rejects empty or out of range candidate sets") {
    const LabeledDataset data = one_informative_feature();
    epw::ml::SfsConfig config;
    CHECK_THROWS_AS(epw::ml::sfs(data, {}, config), std::invalid_argument);
    CHECK_THROWS_AS(epw::ml::sfs(data, {0, 3}, config), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("ml_model_io") {

TEST_CASE("a saved model loads back with identical structure and predictions") {
    const LabeledDataset data = random_dataset(20, 3, 77);
    epw::ml::SavedModel model;
    model.ensemble = epw::ml::bagging_train(data, 8, 2, 123);
    model.feature_names = data.feature_names;
    model.registry_version = "egm-features/1";

    const auto path = temp_path("model.json");
    epw::ml::save_model_json(path.string(), model);
    const epw::ml::SavedModel loaded = epw::ml::load_model_json(path.string());

    CHECK(loaded.registry_version == model.registry_version);
    CHECK(loaded.feature_names == model.feature_names);
    CHECK(loaded.ensemble.seed == model.ensemble.seed);
    CHECK(loaded.ensemble.min_leaf == model.ensemble.min_leaf);
    REQUIRE(loaded.ensemble.trees.size() == model.ensemble.trees.size());
    for (std::size_t t = 0; t < model.ensemble.trees.size(); ++t)
        CHECK(trees_equal(loaded.ensemble.trees[t], model.ensemble.trees[t]));

    epw::SplitMixRng probe(5150);
    for (int k = 0; k < 50; ++k) {
        const std::vector<double> row = {probe.next_double(), probe.next_double(),
                                         probe.next_double()};
        CHECK(loaded.ensemble.predict(row) == model.ensemble.predict(row));
        CHECK(loaded.ensemble.vote_fraction(row) == model.ensemble.vote_fraction(row));
    }
    std::filesystem::remove(path);
}

TEST_CASE("loading rejects missing files and foreign formats") {
    CHECK_THROWS_AS(epw::ml::load_model_json(temp_path("absent.json").string()), epw::io_error);

    const auto bad = temp_path("bad_format.json");
    {
        std::ofstream out(bad);
        out << R"({"format":"something-else","version":1})" << '\n';
    }
    CHECK_THROWS_AS(epw::ml::load_model_json(bad.string()), epw::io_error);

    const auto garbled = temp_path("garbled.json");
    {
        std::ofstream out(garbled);
        out << "{not json at all";
    }
    CHECK_THROWS_AS(epw::ml::load_model_json(garbled.string()), epw::io_error);
    std::filesystem::remove(bad);
    std::filesystem::remove(garbled);
}

}  // TEST_SUITE
