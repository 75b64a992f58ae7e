#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "common.hpp"
#include "epw/csv.hpp"
#include "epw/diffusion.hpp"
#include "epw/epf1.hpp"
#include "epw/metrics.hpp"
#include "epw/resample.hpp"
#include "epw/scenario.hpp"

namespace epwcli {

namespace {

struct SimulateFlags {
    std::string config_path;
    std::string out = "sim_out";
    std::string ic = "eigenmode";
    std::string ic_file;
    std::size_t grid_n = 128;
    std::size_t out_n = 0;
    double amplitude = 1.0;
    int alpha = -2;
    double fc = 3.0;
    int f0 = 12;
    double contrast = 1.0;
    double margin = 0.25;
    std::string tensor = "uniform";
    double d0 = 1.0;
    double d1 = 1.0;
    double theta = 0.0;
    double beta = 0.0;
    double gamma = 2.0;
    double lambda = 4.0;
    double fast_magnitude = 3.5;
    std::string fast_axis = "horizontal";
    std::string reaction = "none";
    double rate = 0.0;
    double t_end = 0.1;
    double dt = 0.0;
    double cfl_safety = 0.9;
    std::size_t frame_stride = 0;
    std::uint64_t seed = 1;
    int workers = 0;
};

epw::ScalarField2D eigenmode_ic(std::size_t n, double amplitude) {
    auto f = epw::ScalarField2D::domain_grid(n, n);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            f.values[i * n + j] = amplitude * std::sin(pi * (f.x(i) + 2.0) / 4.0) *
                                  std::sin(pi * (f.y(j) + 2.0) / 4.0);
    return f;
}

void run_simulate(const SimulateFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    const auto ic_kind = r.get<std::string>("ic", "ic", flags.ic);
    const auto ic_file = r.get<std::string>("ic-file", "ic_file", flags.ic_file);
    const auto grid_n = r.get<std::size_t>("grid-n", "grid_n", flags.grid_n);
    const auto out_n = r.get<std::size_t>("out-n", "out_n", flags.out_n);
    const auto amplitude = r.get<double>("amplitude", "amplitude", flags.amplitude);
    const auto alpha = r.get<int>("alpha", "alpha", flags.alpha);
    const auto fc = r.get<double>("fc", "fc", flags.fc);
    const auto f0 = r.get<int>("f0", "f0", flags.f0);
    const auto contrast = r.get<double>("contrast", "contrast", flags.contrast);
    const auto margin = r.get<double>("margin", "margin", flags.margin);
    const auto tensor_kind = r.get<std::string>("tensor", "tensor", flags.tensor);
    const auto d0 = r.get<double>("d0", "d0", flags.d0);
    const auto d1 = r.get<double>("d1", "d1", flags.d1);
    const auto theta = r.get<double>("theta", "theta", flags.theta);
    const auto beta = r.get<double>("beta", "beta", flags.beta);
    const auto gamma = r.get<double>("gamma", "gamma", flags.gamma);
    const auto lambda = r.get<double>("lambda", "lambda", flags.lambda);
    const auto fast_magnitude =
        r.get<double>("fast-magnitude", "fast_magnitude", flags.fast_magnitude);
    const auto fast_axis = r.get<std::string>("fast-axis", "fast_axis", flags.fast_axis);
    const auto reaction_kind = r.get<std::string>("reaction", "reaction", flags.reaction);
    const auto rate = r.get<double>("rate", "rate", flags.rate);
    const auto t_end = r.get<double>("t-end", "t_end", flags.t_end);
    auto dt = r.get<double>("dt", "dt", flags.dt);
    const auto cfl_safety = r.get<double>("cfl-safety", "cfl_safety", flags.cfl_safety);
    auto stride = r.get<std::size_t>("frame-stride", "frame_stride", flags.frame_stride);
    const auto seed = r.seed("seed", flags.seed, 1);
    r.get<int>("workers", "workers", flags.workers);
    r.finish();

    if (t_end < 0.0) throw CLI::ValidationError("t_end must be >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
        throw CLI::ValidationError("cfl_safety must be in (0, 1]");

    epw::ScalarField2D ic;
    if (ic_kind == "eigenmode") {
        ic = eigenmode_ic(grid_n, amplitude);
    } else if (ic_kind == "spectral") {
        epw::InitialConditionSpec spec;
        spec.alpha = alpha;
        spec.fc = fc;
        spec.f0 = f0;
        spec.contrast = contrast;
        spec.boundary_margin = margin;
        spec.seed = seed;
        ic = epw::gen_initial_condition(spec, grid_n, grid_n);
    } else if (ic_kind == "file") {
        if (ic_file.empty()) throw CLI::ValidationError("ic=file requires ic_file");
        const auto seq = epw::read_epf1(ic_file);
        ic = seq.frames.front();
    } else {
        throw CLI::ValidationError("ic must be eigenmode, spectral, or file");
    }

    epw::DiffusionTensorField tensor;
    if (tensor_kind == "uniform") {
        tensor.d0 = ic;
        tensor.d1 = ic;
        std::fill(tensor.d0.values.begin(), tensor.d0.values.end(), d0);
        std::fill(tensor.d1.values.begin(), tensor.d1.values.end(), d1);
    } else if (tensor_kind == "split") {
        epw::DiffusionFieldSpec spec;
        spec.theta = theta;
        spec.beta = beta;
        spec.gamma = gamma;
        spec.lambda = lambda;
        spec.fast_magnitude = fast_magnitude;
        if (fast_axis == "horizontal")
            spec.fast_axis = epw::DiffusionFieldSpec::FastAxis::horizontal;
        else if (fast_axis == "vertical")
            spec.fast_axis = epw::DiffusionFieldSpec::FastAxis::vertical;
        else
            throw CLI::ValidationError("fast_axis must be horizontal or vertical");
        tensor = epw::gen_diffusion_field(spec, ic).tensor;
    } else {
        throw CLI::ValidationError("tensor must be uniform or split");
    }

    epw::ReactionSpec reaction;
    if (reaction_kind == "logistic") {
        reaction.kind = epw::ReactionSpec::Kind::logistic;
        reaction.rate = rate;
    } else if (reaction_kind != "none") {
        throw CLI::ValidationError("reaction must be none or logistic");
    }

    const double limit = epw::stability_limit(tensor);
    std::size_t steps = 1;
    if (t_end > 0.0) {
        if (dt <= 0.0) {
            steps = static_cast<std::size_t>(std::ceil(t_end / (cfl_safety * limit) - 1e-12));
            steps = std::max<std::size_t>(steps, 1);
            dt = t_end / static_cast<double>(steps);
        } else {
            steps = static_cast<std::size_t>(std::llround(t_end / dt));
            steps = std::max<std::size_t>(steps, 1);
        }
    }
    if (stride == 0) stride = std::max<std::size_t>(1, steps / 100);

    epw::SimConfig sim;
    sim.dt = t_end > 0.0 ? dt : limit;  // dt unused when no steps run
    sim.t_end = t_end;
    sim.frame_stride = stride;
    sim.output_nx = out_n;
    sim.output_ny = out_n;

    epw::FrameSequence frames;
    if (t_end > 0.0) {
        frames = epw::monodomain_simulate(ic, tensor, reaction, sim);
    } else {
        frames.dt_frame = 1.0;
        frames.frames.push_back(out_n > 0 ? epw::bilinear_resample(ic, out_n, out_n) : ic);
        steps = 0;
    }

    ensure_dir(out_dir);
    epw::write_epf1(out_dir + "/frames.epf1", frames);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < frames.frames.size(); ++k) {
        const auto& f = frames.frames[k];
        double max_abs = 0.0;
        for (double v : f.values) max_abs = std::max(max_abs, std::abs(v));
        rows.push_back({std::to_string(k),
                        epw::csv::format_double(static_cast<double>(k) * frames.dt_frame),
                        epw::csv::format_double(max_abs),
                        epw::csv::format_double(epw::discrete_energy(f))});
    }
    epw::csv::write(out_dir + "/series.csv", {"frame", "time", "amplitude", "energy"}, rows);

    Json summary;
    summary["frames"] = frames.frames.size();
    summary["dt_frame"] = frames.dt_frame;
    summary["dt"] = sim.dt;
    summary["steps"] = steps;
    summary["stability_limit"] = limit;
    summary["grid_nx"] = frames.frames.front().nx;
    summary["grid_ny"] = frames.frames.front().ny;
    summary["energy_first"] = epw::discrete_energy(frames.frames.front());
    summary["energy_last"] = epw::discrete_energy(frames.frames.back());
    write_json_file(out_dir + "/summary.json", summary);
    write_resolved_config(out_dir, "simulate", r.resolved());

    std::printf("simulate: %zu frames -> %s\n", frames.frames.size(), out_dir.c_str());
}

}  // namespace

void register_simulate(CLI::App& app) {
    auto flags = std::make_shared<SimulateFlags>();
    CLI::App* cmd = app.add_subcommand("simulate", "Run one diffusion / monodomain simulation");
    cmd->add_option("--config", flags->config_path, "JSON config file");
    cmd->add_option("--out", flags->out, "Output directory");
    cmd->add_option("--ic", flags->ic, "Initial condition: eigenmode, spectral, or file");
    cmd->add_option("--ic-file", flags->ic_file, "EPF1 file providing the IC (first frame)");
    cmd->add_option("--grid-n", flags->grid_n, "Solver grid nodes per side");
    cmd->add_option("--out-n", flags->out_n, "Stored frame resolution (0 = solver grid)");
    cmd->add_option("--amplitude", flags->amplitude, "Eigenmode amplitude");
    cmd->add_option("--alpha", flags->alpha, "Spectral IC exponent (-1 or -2)");
    cmd->add_option("--fc", flags->fc, "Spectral IC corner constant");
    cmd->add_option("--f0", flags->f0, "Spectral IC frequency cutoff");
    cmd->add_option("--contrast", flags->contrast, "Spectral IC peak amplitude");
    cmd->add_option("--margin", flags->margin, "Spectral IC boundary taper width");
    cmd->add_option("--tensor", flags->tensor, "Diffusion tensor: uniform or split");
    cmd->add_option("--d0", flags->d0, "Uniform tensor x-diffusivity");
    cmd->add_option("--d1", flags->d1, "Uniform tensor y-diffusivity");
    cmd->add_option("--theta", flags->theta, "Split tensor line angle");
    cmd->add_option("--beta", flags->beta, "Split tensor line offset");
    cmd->add_option("--gamma", flags->gamma, "Split tensor anisotropy ratio");
    cmd->add_option("--lambda", flags->lambda, "Split tensor scar contrast");
    cmd->add_option("--fast-magnitude", flags->fast_magnitude, "Split tensor fast diffusivity");
    cmd->add_option("--fast-axis", flags->fast_axis, "Split tensor fast axis");
    cmd->add_option("--reaction", flags->reaction, "Reaction term: none or logistic");
    cmd->add_option("--rate", flags->rate, "Logistic reaction rate");
    cmd->add_option("--t-end", flags->t_end, "Simulated duration");
    cmd->add_option("--dt", flags->dt, "Time step (0 = auto from the stability limit)");
    cmd->add_option("--cfl-safety", flags->cfl_safety, "Fraction of the stability limit");
    cmd->add_option("--frame-stride", flags->frame_stride, "Store every Nth step (0 = auto)");
    cmd->add_option("--seed", flags->seed, "RNG seed");
    cmd->add_option("--workers", flags->workers, "Worker threads");
    cmd->callback([flags, cmd] { run_simulate(*flags, *cmd); });
}

}  // namespace epwcli
