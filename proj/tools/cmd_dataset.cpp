#include <cstdio>
#include <memory>
#include <string>

#include "common.hpp"
#include "epw/csv.hpp"
#include "epw/epf1.hpp"
#include "epw/metrics.hpp"
#include "epw/parallel.hpp"
#include "epw/scenario.hpp"

namespace epwcli {

namespace {

struct GenDatasetFlags {
    std::string config_path;
    std::string out = "dataset";
    std::size_t n = 16;
    std::size_t grid_n = 128;
    std::size_t out_n = 64;
    double dt_frame = 0.01;
    std::size_t n_frames = 11;
    double cfl_safety = 0.9;
    std::uint64_t seed = 1;
    int workers = 0;
};

void run_gen_dataset(const GenDatasetFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    const auto n = r.get<std::size_t>("n", "n", flags.n);
    epw::GenDatasetConfig gen;
    gen.grid_n = r.get<std::size_t>("grid-n", "grid_n", flags.grid_n);
    gen.out_n = r.get<std::size_t>("out-n", "out_n", flags.out_n);
    gen.dt_frame = r.get<double>("dt-frame", "dt_frame", flags.dt_frame);
    gen.n_frames = r.get<std::size_t>("n-frames", "n_frames", flags.n_frames);
    gen.cfl_safety = r.get<double>("cfl-safety", "cfl_safety", flags.cfl_safety);
    const auto seed = r.seed("seed", flags.seed, 1);
    gen.workers = r.get<int>("workers", "workers", flags.workers);
    if (gen.workers <= 0) gen.workers = epw::default_workers();
    r.finish();

    const auto manifest = epw::gen_dataset(n, seed, gen, out_dir);
    write_resolved_config(out_dir, "gen-dataset", r.resolved());

    std::size_t ok = 0;
    for (const auto& entry : manifest.entries) {
        if (entry.ok) {
            ++ok;
            std::printf("entry %zu/%zu ok: %s\n", entry.id + 1, n, entry.frame_file.c_str());
        } else {
            std::printf("entry %zu/%zu FAILED: %s\n", entry.id + 1, n, entry.error.c_str());
        }
    }
    std::printf("gen-dataset: %zu/%zu entries ok -> %s\n", ok, n, out_dir.c_str());
}

struct BaselineFlags {
    std::string config_path;
    std::string dataset = "dataset";
    std::string out;
    std::size_t n_input = 1;
};

void run_baseline_eval(const BaselineFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto dataset_dir = r.get<std::string>("dataset", "dataset", flags.dataset);
    auto out_dir = r.get<std::string>("out", "out", flags.out);
    const auto n_input = r.get<std::size_t>("n-input", "n_input", flags.n_input);
    r.finish();
    if (out_dir.empty()) out_dir = dataset_dir;

    const auto manifest = epw::load_manifest(dataset_dir + "/manifest.json");
    if (n_input < 1 || n_input >= manifest.config.n_frames)
        throw CLI::ValidationError("n_input must be in [1, n_frames - 1]");
    const std::size_t horizon = manifest.config.n_frames - n_input;

    std::vector<std::vector<std::string>> mse_rows;
    std::vector<std::vector<std::string>> nmse_rows;
    for (const auto& entry : manifest.entries) {
        if (!entry.ok) continue;
        const auto seq = epw::read_epf1(dataset_dir + "/" + entry.frame_file);

        const auto split = seq.frames.begin() + static_cast<std::ptrdiff_t>(n_input);
        epw::FrameSequence inputs, target;
        inputs.dt_frame = target.dt_frame = seq.dt_frame;
        inputs.frames.assign(seq.frames.begin(), split);
        target.frames.assign(split, seq.frames.end());
        const auto baseline = epw::last_input_baseline(inputs, horizon);

        mse_rows.push_back(
            {std::to_string(entry.id), epw::csv::format_double(epw::mse(baseline, target))});
        const auto nmse = epw::nmse_per_frame(baseline, target);
        for (std::size_t h = 0; h < nmse.size(); ++h)
            nmse_rows.push_back({std::to_string(entry.id), std::to_string(h + 1),
                                 epw::csv::format_double(nmse[h])});
    }

    ensure_dir(out_dir);
    epw::csv::write(out_dir + "/baseline_mse.csv", {"entry", "mse"}, mse_rows);
    epw::csv::write(out_dir + "/baseline_nmse.csv", {"entry", "horizon_step", "nmse"}, nmse_rows);
    write_resolved_config(out_dir, "baseline-eval", r.resolved());
    std::printf("baseline-eval: %zu entries, horizon %zu -> %s\n", mse_rows.size(), horizon,
                out_dir.c_str());
}

}  // namespace

void register_gen_dataset(CLI::App& app) {
    auto flags = std::make_shared<GenDatasetFlags>();
    CLI::App* cmd = app.add_subcommand("gen-dataset", "Generate a training-scenario dataset");
    cmd->add_option("--config", flags->config_path, "JSON config file");
    cmd->add_option("--out", flags->out, "Output directory");
    cmd->add_option("--n", flags->n, "Number of scenarios");
    cmd->add_option("--grid-n", flags->grid_n, "Solver grid nodes per side");
    cmd->add_option("--out-n", flags->out_n, "Stored frame resolution per side");
    cmd->add_option("--dt-frame", flags->dt_frame, "Stored frame interval");
    cmd->add_option("--n-frames", flags->n_frames, "Stored frames per entry (incl. t = 0)");
    cmd->add_option("--cfl-safety", flags->cfl_safety, "Fraction of the stability limit");
    cmd->add_option("--seed", flags->seed, "Master RNG seed");
    cmd->add_option("--workers", flags->workers, "Worker threads (0 = hardware)");
    cmd->callback([flags, cmd] { run_gen_dataset(*flags, *cmd); });
}

void register_baseline_eval(CLI::App& app) {
    auto flags = std::make_shared<BaselineFlags>();
    CLI::App* cmd =
        app.add_subcommand("baseline-eval", "Last-input-baseline forecast error over a dataset");
    cmd->add_option("--config", flags->config_path, "JSON config file");
    cmd->add_option("--dataset", flags->dataset, "Dataset directory (holds manifest.json)");
    cmd->add_option("--out", flags->out, "Output directory (default: the dataset directory)");
    cmd->add_option("--n-input", flags->n_input, "Frames treated as model input");
    cmd->callback([flags, cmd] { run_baseline_eval(*flags, *cmd); });
}

}  // namespace epwcli
