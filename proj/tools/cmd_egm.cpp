#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "common.hpp"
#include "epw/csv.hpp"
#include "epw/egm.hpp"
#include "epw/errors.hpp"
#include "epw/ml.hpp"
#include "epw/parallel.hpp"
#include "epw/rng.hpp"

namespace epwcli {

namespace {

int label_from_name(const std::string& name) {
    if (name.find("control") != std::string::npos) return 0;
    if (name.find("cbx") != std::string::npos) return 1;
    return -1;
}

struct ExtractFlags {
    std::string config_path;
    std::string out = "egm_out";
    std::string input;
    std::size_t synthetic = 0;
    std::uint64_t seed = 1;
    int workers = 0;
};

void run_extract(const ExtractFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    const auto input = r.get<std::string>("input", "input", flags.input);
    const auto synthetic = r.get<std::size_t>("synthetic", "synthetic", flags.synthetic);
    const auto seed = r.seed("seed", flags.seed, 1);
    auto workers = r.get<int>("workers", "workers", flags.workers);
    if (workers <= 0) workers = epw::default_workers();
    r.finish();

    std::vector<std::string> names;
    std::vector<epw::ElectrogramRecording> recordings;
    if (!input.empty()) {
        std::vector<std::filesystem::path> files;
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(input, ec)) {
            const auto ext = entry.path().extension().string();
            if (ext == ".csv" || ext == ".egr") files.push_back(entry.path());
        }
        if (ec) throw epw::io_error("cannot list " + input + ": " + ec.message());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            auto rec = file.extension() == ".csv" ? epw::read_recording_csv(file.string())
                                                  : epw::read_recording_raw(file.string());
            rec.label = label_from_name(file.filename().string());
            names.push_back(file.filename().string());
            recordings.push_back(std::move(rec));
        }
    } else {
        const std::size_t per_class = synthetic > 0 ? synthetic : 20;
        for (std::size_t i = 0; i < per_class; ++i) {
            auto spec = epw::control_preset(epw::SplitMixRng::substream(seed, 2 * i).next_u64());
            auto rec = epw::synth_electrogram(spec);
            rec.label = 0;
            names.push_back("control_" + std::to_string(i));
            recordings.push_back(std::move(rec));

            spec = epw::cbx_preset(epw::SplitMixRng::substream(seed, 2 * i + 1).next_u64());
            rec = epw::synth_electrogram(spec);
            rec.label = 1;
            names.push_back("cbx_" + std::to_string(i));
            recordings.push_back(std::move(rec));
        }
    }
    if (recordings.empty()) throw CLI::ValidationError("no recordings to extract from");

    const auto& registry = epw::FeatureRegistry::standard();
    std::vector<epw::FeatureVector> features(recordings.size());
    epw::parallel_for(recordings.size(), workers,
                      [&](std::size_t i) { features[i] = registry.extract(recordings[i]); });

    std::vector<std::string> header = {"recording", "label"};
    header.insert(header.end(), registry.names().begin(), registry.names().end());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < recordings.size(); ++i) {
        std::vector<std::string> row = {names[i], std::to_string(recordings[i].label)};
        for (double v : features[i].values) row.push_back(epw::csv::format_double(v));
        rows.push_back(std::move(row));
    }

    ensure_dir(out_dir);
    epw::csv::write(out_dir + "/features.csv", header, rows);
    Json meta;
    meta["registry_version"] = registry.version();
    meta["feature_names"] = registry.names();
    meta["n_recordings"] = recordings.size();
    write_json_file(out_dir + "/extract_meta.json", meta);
    write_resolved_config(out_dir, "egm extract", r.resolved());
    std::printf("egm extract: %zu recordings -> %s\n", recordings.size(), out_dir.c_str());
}

struct FeatureTable {
    std::string registry_version;
    std::vector<std::string> feature_names;
    epw::ml::LabeledDataset data;
};

FeatureTable load_features(const std::string& features_path, const std::string& meta_path) {
    FeatureTable table;
    const Json meta = load_config_file(meta_path);
    try {
        table.registry_version = meta.at("registry_version").get<std::string>();
        table.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw epw::io_error("bad extract meta " + meta_path + ": " + e.what());
    }

    const auto csv = epw::csv::read(features_path);
    if (csv.header.size() != table.feature_names.size() + 2 || csv.header[0] != "recording" ||
        csv.header[1] != "label" ||
        !std::equal(table.feature_names.begin(), table.feature_names.end(),
                    csv.header.begin() + 2))
        throw epw::io_error("features header does not match extract meta: " + features_path);

    table.data.feature_names = table.feature_names;
    for (const auto& row : csv.rows) {
        if (row.size() != csv.header.size())
            throw epw::io_error("features row width mismatch: " + features_path);
        const int label = static_cast<int>(epw::csv::to_double(row[1]));
        if (label != 0 && label != 1)
            throw CLI::ValidationError("feature rows must be labeled 0 or 1 (got '" + row[1] +
                                       "' for " + row[0] + ")");
        std::vector<double> values;
        for (std::size_t c = 2; c < row.size(); ++c) values.push_back(epw::csv::to_double(row[c]));
        table.data.rows.push_back(std::move(values));
        table.data.labels.push_back(label);
    }
    return table;
}

std::string sibling_meta(const std::string& features_path) {
    return (std::filesystem::path(features_path).parent_path() / "extract_meta.json").string();
}

void write_report(const std::string& out_dir, const epw::ml::ClassificationReport& report,
                  const std::string& csv_name, const std::string& confusion_name) {
    epw::csv::write(
        out_dir + "/" + csv_name,
        {"tp", "fp", "tn", "fn", "sensitivity", "specificity", "ppv", "npv", "accuracy",
         "error_rate"},
        {{std::to_string(report.tp), std::to_string(report.fp), std::to_string(report.tn),
          std::to_string(report.fn), epw::csv::format_double(report.sensitivity()),
          epw::csv::format_double(report.specificity()), epw::csv::format_double(report.ppv()),
          epw::csv::format_double(report.npv()), epw::csv::format_double(report.accuracy()),
          epw::csv::format_double(report.error_rate())}});

    const auto neg = report.tn + report.fp;
    const auto pos = report.fn + report.tp;
    char text[512];
    std::snprintf(text, sizeof text,
                  "                 predicted control  predicted cbx\n"
                  "actual control   %17zu  %13zu   (%.1f%% correct)\n"
                  "actual cbx       %17zu  %13zu   (%.1f%% correct)\n",
                  report.tn, report.fp, neg == 0 ? 0.0 : 100.0 * static_cast<double>(report.tn) / static_cast<double>(neg),
                  report.fn, report.tp, pos == 0 ? 0.0 : 100.0 * static_cast<double>(report.tp) / static_cast<double>(pos));
    write_text_file(out_dir + "/" + confusion_name, text);
}

struct TrainFlags {
    std::string config_path;
    std::string out = "egm_out";
    std::string features;
    std::string meta;
    std::size_t n_trees = 30;
    std::size_t min_leaf = 1;
    std::size_t k_folds = 10;
    bool no_sfs = false;
    std::uint64_t seed = 1;
    int workers = 0;
};

void run_train(const TrainFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    auto features_path = r.get<std::string>("features", "features", flags.features);
    auto meta_path = r.get<std::string>("meta", "meta", flags.meta);
    epw::ml::SfsConfig sfs_config;
    sfs_config.n_trees = r.get<std::size_t>("n-trees", "n_trees", flags.n_trees);
    sfs_config.min_leaf = r.get<std::size_t>("min-leaf", "min_leaf", flags.min_leaf);
    sfs_config.k_folds = r.get<std::size_t>("k-folds", "k_folds", flags.k_folds);
    const bool no_sfs = r.get<bool>("no-sfs", "no_sfs", flags.no_sfs);
    sfs_config.seed = r.seed("seed", flags.seed, 1);
    sfs_config.workers = r.get<int>("workers", "workers", flags.workers);
    if (sfs_config.workers <= 0) sfs_config.workers = epw::default_workers();
    r.finish();

    if (features_path.empty()) features_path = out_dir + "/features.csv";
    if (meta_path.empty()) meta_path = sibling_meta(features_path);
    const auto table = load_features(features_path, meta_path);

    std::vector<std::size_t> selected;
    std::vector<std::vector<std::string>> trace_rows;
    if (no_sfs) {
        for (std::size_t f = 0; f < table.data.n_features(); ++f) selected.push_back(f);
    } else {
        const auto result = epw::ml::sfs(table.data, sfs_config);
        selected = result.selected;
        for (std::size_t s = 0; s < result.trace.size(); ++s)
            trace_rows.push_back({std::to_string(s + 1),
                                  table.feature_names.at(result.trace[s].feature),
                                  epw::csv::format_double(result.trace[s].accuracy)});
    }

    const auto view = table.data.select_features(selected);
    const std::uint64_t model_seed =
        epw::SplitMixRng::substream(sfs_config.seed, 0x4D4F44454CULL).next_u64();
    const auto ensemble = epw::ml::bagging_train(view, sfs_config.n_trees, sfs_config.min_leaf,
                                                 model_seed, sfs_config.workers);

    const epw::ml::TrainerFn trainer = [&](const epw::ml::LabeledDataset& train) {
        auto e = std::make_shared<epw::ml::BaggedEnsemble>(epw::ml::bagging_train(
            train, sfs_config.n_trees, sfs_config.min_leaf, model_seed, sfs_config.workers));
        return epw::ml::PredictorFn(
            [e](const std::vector<double>& row) { return e->predict(row); });
    };
    const auto report = epw::ml::kfold_cv(view, sfs_config.k_folds, trainer,
                                          epw::SplitMixRng::substream(sfs_config.seed, 0x4356ULL)
                                              .next_u64());

    ensure_dir(out_dir);
    epw::ml::SavedModel model;
    model.ensemble = ensemble;
    model.registry_version = table.registry_version;
    for (std::size_t f : selected) model.feature_names.push_back(table.feature_names.at(f));
    epw::ml::save_model_json(out_dir + "/model.json", model);
    epw::csv::write(out_dir + "/sfs_trace.csv", {"step", "feature", "cv_accuracy"}, trace_rows);
    write_report(out_dir, report, "cv_report.csv", "cv_confusion.txt");
    write_resolved_config(out_dir, "egm train", r.resolved());
    std::printf("egm train: %zu features selected, CV accuracy %.4f -> %s\n", selected.size(),
                report.accuracy(), out_dir.c_str());
}

struct EvalFlags {
    std::string config_path;
    std::string out = "egm_out";
    std::string model;
    std::string features;
    std::string meta;
};

void run_eval(const EvalFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    auto model_path = r.get<std::string>("model", "model", flags.model);
    auto features_path = r.get<std::string>("features", "features", flags.features);
    auto meta_path = r.get<std::string>("meta", "meta", flags.meta);
    r.finish();

    if (model_path.empty()) model_path = out_dir + "/model.json";
    if (features_path.empty()) features_path = out_dir + "/features.csv";
    if (meta_path.empty()) meta_path = sibling_meta(features_path);

    const auto model = epw::ml::load_model_json(model_path);
    const auto table = load_features(features_path, meta_path);
    if (model.registry_version != table.registry_version)
        throw CLI::ValidationError("feature registry mismatch: model has '" +
                                   model.registry_version + "', features have '" +
                                   table.registry_version + "'");

    std::vector<std::size_t> columns;
    for (const auto& name : model.feature_names) {
        const auto it =
            std::find(table.feature_names.begin(), table.feature_names.end(), name);
        if (it == table.feature_names.end())
            throw CLI::ValidationError("model feature '" + name + "' missing from features file");
        columns.push_back(static_cast<std::size_t>(it - table.feature_names.begin()));
    }
    const auto view = table.data.select_features(columns);

    epw::ml::ClassificationReport report;
    for (std::size_t i = 0; i < view.n_rows(); ++i) {
        const int predicted = model.ensemble.predict(view.rows[i]);
        if (view.labels[i] == 1)
            (predicted == 1 ? report.tp : report.fn)++;
        else
            (predicted == 0 ? report.tn : report.fp)++;
    }

    ensure_dir(out_dir);
    write_report(out_dir, report, "eval_report.csv", "eval_confusion.txt");
    write_resolved_config(out_dir, "egm eval", r.resolved());
    std::printf("egm eval: %zu rows, error rate %.4f -> %s\n", view.n_rows(), report.error_rate(),
                out_dir.c_str());
}

}  // namespace

void register_egm(CLI::App& app) {
    CLI::App* egm = app.add_subcommand("egm", "Electrogram feature and classifier pipeline");
    egm->require_subcommand(1);

    auto extract = std::make_shared<ExtractFlags>();
    CLI::App* ex = egm->add_subcommand("extract", "Extract feature vectors from recordings");
    ex->add_option("--config", extract->config_path, "JSON config file");
    ex->add_option("--out", extract->out, "Output directory");
    ex->add_option("--input", extract->input, "Directory of .csv / .egr recordings");
    ex->add_option("--synthetic", extract->synthetic,
                   "Generate this many synthetic recordings per class instead of reading input");
    ex->add_option("--seed", extract->seed, "Synthetic generator seed");
    ex->add_option("--workers", extract->workers, "Worker threads (0 = hardware)");
    ex->callback([extract, ex] { run_extract(*extract, *ex); });

    auto train = std::make_shared<TrainFlags>();
    CLI::App* tr = egm->add_subcommand("train", "Select features and train the bagged ensemble");
    tr->add_option("--config", train->config_path, "JSON config file");
    tr->add_option("--out", train->out, "Output directory");
    tr->add_option("--features", train->features, "Feature CSV (default <out>/features.csv)");
    tr->add_option("--meta", train->meta, "Extract meta JSON (default sibling of features)");
    tr->add_option("--n-trees", train->n_trees, "Trees in the bagged ensemble");
    tr->add_option("--min-leaf", train->min_leaf, "Minimum rows per leaf");
    tr->add_option("--k-folds", train->k_folds, "Cross-validation folds");
    tr->add_flag("--no-sfs", train->no_sfs, "Train on all features, skipping forward selection");
    tr->add_option("--seed", train->seed, "Training RNG seed");
    tr->add_option("--workers", train->workers, "Worker threads (0 = hardware)");
    tr->callback([train, tr] { run_train(*train, *tr); });

    auto eval = std::make_shared<EvalFlags>();
    CLI::App* ev = egm->add_subcommand("eval", "Evaluate a saved model on a feature file");
    ev->add_option("--config", eval->config_path, "JSON config file");
    ev->add_option("--out", eval->out, "Output directory");
    ev->add_option("--model", eval->model, "Model JSON (default <out>/model.json)");
    ev->add_option("--features", eval->features, "Feature CSV (default <out>/features.csv)");
    ev->add_option("--meta", eval->meta, "Extract meta JSON (default sibling of features)");
    ev->callback([eval, ev] { run_eval(*eval, *ev); });
}

}  // namespace epwcli
