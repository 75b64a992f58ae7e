#include "epw/ml.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "epw/errors.hpp"
#include "epw/parallel.hpp"
#include "epw/rng.hpp"

namespace epw::ml {

void LabeledDataset::validate() const {
    if (rows.size() != labels.size())
        throw std::invalid_argument("LabeledDataset: rows/labels size mismatch");
    for (const auto& row : rows) {
        if (row.size() != feature_names.size())
            throw std::invalid_argument("LabeledDataset: row width mismatch");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("LabeledDataset: non-finite feature");
    }
    for (int label : labels)
        if (label != 0 && label != 1)
            throw std::invalid_argument("LabeledDataset: labels must be 0 or 1");
}

LabeledDataset LabeledDataset::select_features(const std::vector<std::size_t>& indices) const {
    LabeledDataset out;
    out.labels = labels;
    for (std::size_t f : indices) out.feature_names.push_back(feature_names.at(f));
    out.rows.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<double> r;
        r.reserve(indices.size());
        for (std::size_t f : indices) r.push_back(row.at(f));
        out.rows.push_back(std::move(r));
    }
    return out;
}

int DecisionTree::predict(const std::vector<double>& row) const {
    int at = 0;
    while (true) {
        const TreeNode& node = nodes.at(static_cast<std::size_t>(at));
        if (node.feature < 0) return node.leaf_class;
        at = row.at(static_cast<std::size_t>(node.feature)) < node.threshold ? node.left
                                                                             : node.right;
    }
}

namespace {

double gini(std::size_t n0, std::size_t n1) {
    const auto n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(n0) / n;
    const double p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

int majority_class(std::size_t n0, std::size_t n1) { return n1 > n0 ? 1 : 0; }

struct TreeBuilder {
    const LabeledDataset& data;
    std::size_t min_leaf;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t> indices) {
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i : indices) (data.labels[i] ? n1 : n0)++;

        const auto make_leaf = [&] {
            TreeNode leaf;
            leaf.leaf_class = majority_class(n0, n1);
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        };
        if (n0 == 0 || n1 == 0 || indices.size() < 2 * min_leaf) return make_leaf();

        const double parent_impurity = gini(n0, n1);
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_decrease = 0.0;

        std::vector<std::size_t> order;
        for (std::size_t f = 0; f < data.n_features(); ++f) {
            order = indices;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return data.rows[a][f] < data.rows[b][f];
            });
            std::size_t l0 = 0, l1 = 0;
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                (data.labels[order[pos]] ? l1 : l0)++;
                const double lo = data.rows[order[pos]][f];
                const double hi = data.rows[order[pos + 1]][f];
                if (!(lo < hi)) continue;
                const double threshold = 0.5 * (lo + hi);
                if (!(lo < threshold) || !(threshold <= hi)) continue;  // rounding collapse
                const std::size_t left = pos + 1, right = order.size() - left;
                if (left < min_leaf || right < min_leaf) continue;
                const double child = (static_cast<double>(left) * gini(l0, l1) +
                                      static_cast<double>(right) * gini(n0 - l0, n1 - l1)) /
                                     static_cast<double>(order.size());
                const double decrease = parent_impurity - child;
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_feature = static_cast<int>(f);
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices)
            (data.rows[i][static_cast<std::size_t>(best_feature)] < best_threshold ? left_idx
                                                                                   : right_idx)
                .push_back(i);
        indices.clear();
        indices.shrink_to_fit();

        const auto self = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(self)].feature = best_feature;
        nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
        const int left = build(std::move(left_idx));
        const int right = build(std::move(right_idx));
        nodes[static_cast<std::size_t>(self)].left = left;
        nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }
};

}  // namespace

DecisionTree train_tree(const LabeledDataset& data, std::size_t min_leaf) {
    data.validate();
    if (data.rows.empty()) throw std::invalid_argument("train_tree: empty dataset");
    if (min_leaf < 1) throw std::invalid_argument("train_tree: min_leaf must be >= 1");

    TreeBuilder builder{data, min_leaf, {}};
    std::vector<std::size_t> all(data.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    builder.build(std::move(all));

    DecisionTree tree;
    tree.nodes = std::move(builder.nodes);
    tree.min_leaf = min_leaf;
    return tree;
}

int BaggedEnsemble::predict(const std::vector<double>& row) const {
    std::size_t votes1 = 0;
    for (const auto& tree : trees) votes1 += static_cast<std::size_t>(tree.predict(row));
    return 2 * votes1 > trees.size() ? 1 : 0;
}

double BaggedEnsemble::vote_fraction(const std::vector<double>& row) const {
    if (trees.empty()) return 0.0;
    std::size_t votes1 = 0;
    for (const auto& tree : trees) votes1 += static_cast<std::size_t>(tree.predict(row));
    return static_cast<double>(votes1) / static_cast<double>(trees.size());
}

BaggedEnsemble bagging_train(const LabeledDataset& data, std::size_t n_trees,
                             std::size_t min_leaf, std::uint64_t seed, int workers) {
    data.validate();
    if (n_trees < 1) throw std::invalid_argument("bagging_train: need at least one tree");
    if (data.rows.empty()) throw std::invalid_argument("bagging_train: empty dataset");

    BaggedEnsemble ensemble;
    ensemble.seed = seed;
    ensemble.min_leaf = min_leaf;
    ensemble.trees.resize(n_trees);

    const std::size_t n = data.n_rows();
    parallel_for(n_trees, workers, [&](std::size_t t) {
        SplitMixRng rng = SplitMixRng::substream(seed, t);
        LabeledDataset boot;
        boot.feature_names = data.feature_names;
        boot.rows.reserve(n);
        boot.labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pick = rng.next_below(n);
            boot.rows.push_back(data.rows[pick]);
            boot.labels.push_back(data.labels[pick]);
        }
        ensemble.trees[t] = train_tree(boot, min_leaf);
    });
    return ensemble;
}

namespace {

double safe_rate(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double ClassificationReport::sensitivity() const { return safe_rate(tp, tp + fn); }
double ClassificationReport::specificity() const { return safe_rate(tn, tn + fp); }
double ClassificationReport::ppv() const { return safe_rate(tp, tp + fp); }
double ClassificationReport::npv() const { return safe_rate(tn, tn + fn); }
double ClassificationReport::accuracy() const { return safe_rate(tp + tn, total()); }
double ClassificationReport::error_rate() const { return safe_rate(fp + fn, total()); }

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<std::vector<std::size_t>> folds(k);
    for (auto& [label, members] : by_class) {
        if (members.size() < k)
            throw std::invalid_argument("stratified_folds: a class has fewer rows than folds");
        SplitMixRng rng = SplitMixRng::substream(seed, static_cast<std::uint64_t>(label));
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.next_below(i)]);
        for (std::size_t i = 0; i < members.size(); ++i) folds[i % k].push_back(members[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

ClassificationReport kfold_cv(const LabeledDataset& data,
                              const std::vector<std::vector<std::size_t>>& folds,
                              const TrainerFn& trainer) {
    data.validate();
    ClassificationReport report;
    std::vector<bool> held_out(data.n_rows());
    for (const auto& fold : folds) {
        std::fill(held_out.begin(), held_out.end(), false);
        for (std::size_t i : fold) held_out.at(i) = true;

        LabeledDataset train;
        train.feature_names = data.feature_names;
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            if (held_out[i]) continue;
            train.rows.push_back(data.rows[i]);
            train.labels.push_back(data.labels[i]);
        }
        const PredictorFn predict = trainer(train);
        for (std::size_t i : fold) {
            const int predicted = predict(data.rows[i]);
            if (data.labels[i] == 1)
                (predicted == 1 ? report.tp : report.fn)++;
            else
                (predicted == 0 ? report.tn : report.fp)++;
        }
    }
    return report;
}

ClassificationReport kfold_cv(const LabeledDataset& data, std::size_t k,
                              const TrainerFn& trainer, std::uint64_t seed) {
    return kfold_cv(data, stratified_folds(data.labels, k, seed), trainer);
}

namespace {

constexpr std::uint64_t kFoldTag = 0x464F4C4453ULL;  // "FOLDS"

double evaluate_subset(const LabeledDataset& data,
                       const std::vector<std::vector<std::size_t>>& folds,
                       const std::vector<std::size_t>& features, const SfsConfig& config,
                       std::uint64_t eval_seed) {
    const LabeledDataset view = data.select_features(features);
    const TrainerFn trainer = [&](const LabeledDataset& train) -> PredictorFn {
        auto ensemble = std::make_shared<BaggedEnsemble>(
            bagging_train(train, config.n_trees, config.min_leaf, eval_seed, 1));
        return [ensemble](const std::vector<double>& row) { return ensemble->predict(row); };
    };
    return kfold_cv(view, folds, trainer).accuracy();
}

}  // namespace

SfsResult sfs(const LabeledDataset& data, const std::vector<std::size_t>& candidates,
              const SfsConfig& config) {
    data.validate();
    if (candidates.empty()) throw std::invalid_argument("sfs: no candidate features");
    for (std::size_t f : candidates)
        if (f >= data.n_features()) throw std::invalid_argument("sfs: candidate index out of range");

    const auto folds = stratified_folds(data.labels, config.k_folds,
                                        SplitMixRng::substream(config.seed, kFoldTag).next_u64());

    SfsResult result;
    double best_accuracy = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> remaining = candidates;

    for (std::size_t step = 0; !remaining.empty(); ++step) {
        std::vector<double> accuracy(remaining.size());
        parallel_for(remaining.size(), config.workers, [&](std::size_t c) {
            std::vector<std::size_t> trial = result.selected;
            trial.push_back(remaining[c]);
            const std::uint64_t eval_seed =
                SplitMixRng::substream(config.seed, (static_cast<std::uint64_t>(step) << 32) |
                                                        remaining[c])
                    .next_u64();
            accuracy[c] = evaluate_subset(data, folds, trial, config, eval_seed);
        });

        std::size_t best_c = 0;
        for (std::size_t c = 1; c < remaining.size(); ++c) {
            if (accuracy[c] > accuracy[best_c] ||
                (accuracy[c] == accuracy[best_c] && remaining[c] < remaining[best_c]))
                best_c = c;
        }
        if (!(accuracy[best_c] > best_accuracy)) break;
        best_accuracy = accuracy[best_c];
        result.selected.push_back(remaining[best_c]);
        result.trace.push_back({remaining[best_c], best_accuracy});
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_c));
    }
    return result;
}

SfsResult sfs(const LabeledDataset& data, const SfsConfig& config) {
    std::vector<std::size_t> all(data.n_features());
    for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
    return sfs(data, all, config);
}

void save_model_json(const std::string& path, const SavedModel& model) {
    nlohmann::ordered_json doc;
    doc["format"] = "epw-tree-ensemble";
    doc["version"] = 1;
    doc["registry_version"] = model.registry_version;
    doc["feature_names"] = model.feature_names;
    doc["seed"] = model.ensemble.seed;
    doc["min_leaf"] = model.ensemble.min_leaf;
    auto& trees = doc["trees"] = nlohmann::ordered_json::array();
    for (const auto& tree : model.ensemble.trees) {
        auto nodes = nlohmann::ordered_json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"leaf_class", node.leaf_class}});
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw io_error("write failed: " + path);
}

SavedModel load_model_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    nlohmann::ordered_json doc;
    try {
        in >> doc;
        SavedModel model;
        if (doc.at("format").get<std::string>() != "epw-tree-ensemble" ||
            doc.at("version").get<int>() != 1)
            throw io_error("unsupported model format: " + path);
        model.registry_version = doc.at("registry_version").get<std::string>();
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        model.ensemble.seed = doc.at("seed").get<std::uint64_t>();
        model.ensemble.min_leaf = doc.at("min_leaf").get<std::size_t>();
        for (const auto& tree_doc : doc.at("trees")) {
            DecisionTree tree;
            tree.min_leaf = model.ensemble.min_leaf;
            for (const auto& node_doc : tree_doc.at("nodes")) {
                TreeNode node;
                node.feature = node_doc.at("feature").get<int>();
                node.threshold = node_doc.at("threshold").get<double>();
                node.left = node_doc.at("left").get<int>();
                node.right = node_doc.at("right").get<int>();
                node.leaf_class = node_doc.at("leaf_class").get<int>();
                tree.nodes.push_back(node);
            }
            model.ensemble.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad model JSON " + path + ": " + e.what());
    }
}

}  // namespace epw::ml
