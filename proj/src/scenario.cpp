#include "epw/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "epw/epf1.hpp"
#include "epw/errors.hpp"
#include "epw/fft.hpp"
#include "epw/parallel.hpp"
#include "epw/resample.hpp"
#include "epw/rng.hpp"

namespace epw {

namespace {

constexpr std::size_t kSpectralN = 128;

void validate_ic_spec(const InitialConditionSpec& spec) {
    if (spec.alpha != -1 && spec.alpha != -2)
        throw std::invalid_argument("InitialConditionSpec: alpha must be -1 or -2");
    if (!(spec.fc > 0.0)) throw std::invalid_argument("InitialConditionSpec: fc must be > 0");
    if (spec.f0 <= 0 || spec.f0 > static_cast<int>(kSpectralN / 2))
        throw std::invalid_argument("InitialConditionSpec: f0 out of range");
    if (!(spec.contrast > 0.0))
        throw std::invalid_argument("InitialConditionSpec: contrast must be > 0");
    if (!(spec.boundary_margin > 0.0) || !(spec.boundary_margin < kDomainLen / 2.0))
        throw std::invalid_argument("InitialConditionSpec: boundary_margin out of range");
}

}  // namespace

IcStages gen_initial_condition_stages(const InitialConditionSpec& spec, std::size_t grid_nx,
                                      std::size_t grid_ny) {
    validate_ic_spec(spec);
    const std::size_t n = kSpectralN;
    SplitMixRng rng(spec.seed);

    // Noise draws are consumed for every bin in index order, so the same seed
    // lines up across cutoff choices.
    Spectrum2D spec2d(n);
    const double cutoff_sq = static_cast<double>(spec.f0) * static_cast<double>(spec.f0);
    for (std::size_t kx = 0; kx < n; ++kx) {
        for (std::size_t ky = 0; ky < n; ++ky) {
            const double g = rng.gaussian();
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double fx = static_cast<double>(signed_freq(kx, n));
            const double fy = static_cast<double>(signed_freq(ky, n));
            const double r2 = fx * fx + fy * fy;
            if (r2 >= cutoff_sq) continue;  // hard cutoff: bin stays zero
            const double amp = std::pow(r2 + spec.fc, 0.5 * static_cast<double>(spec.alpha));
            spec2d.at_index(kx, ky) = std::polar(amp * g, phase);
        }
    }
    hermitian_symmetrize(spec2d);

    IcStages stages;
    stages.pre_taper = inverse_fft2(spec2d);

    double max_abs = 0.0;
    for (double v : stages.pre_taper.values) max_abs = std::max(max_abs, std::abs(v));
    if (!(max_abs > 0.0)) throw numeric_error("gen_initial_condition: degenerate spectrum");
    const double scale = spec.contrast / max_abs;
    for (double& v : stages.pre_taper.values) v *= scale;

    // Raised-cosine taper on the distance to the nearest edge; exactly 0 at
    // the boundary nodes, exactly 1 beyond the margin.
    stages.tapered = stages.pre_taper;
    auto ramp = [&spec](double d) {
        if (d >= spec.boundary_margin) return 1.0;
        return 0.5 * (1.0 - std::cos(std::numbers::pi * d / spec.boundary_margin));
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::min(stages.tapered.x(i) - kDomainLo, kDomainHi - stages.tapered.x(i));
        for (std::size_t j = 0; j < n; ++j) {
            const double dy =
                std::min(stages.tapered.y(j) - kDomainLo, kDomainHi - stages.tapered.y(j));
            stages.tapered.at(i, j) *= ramp(std::min(dx, dy));
        }
    }

    stages.field = bilinear_resample(stages.tapered, grid_nx, grid_ny);
    return stages;
}

ScalarField2D gen_initial_condition(const InitialConditionSpec& spec, std::size_t grid_nx,
                                    std::size_t grid_ny) {
    return gen_initial_condition_stages(spec, grid_nx, grid_ny).field;
}

GeneratedField gen_diffusion_field(const DiffusionFieldSpec& spec, const ScalarField2D& grid_like) {
    grid_like.validate();
    if (!(spec.gamma >= 1.0)) throw std::invalid_argument("DiffusionFieldSpec: gamma must be >= 1");
    if (!(spec.lambda >= 1.0)) throw std::invalid_argument("DiffusionFieldSpec: lambda must be >= 1");
    if (!(spec.fast_magnitude > 0.0))
        throw std::invalid_argument("DiffusionFieldSpec: fast_magnitude must be > 0");

    const double fast = spec.fast_magnitude;
    const double slow = fast / spec.gamma;
    const bool horizontal = spec.fast_axis == DiffusionFieldSpec::FastAxis::horizontal;
    const double healthy_d0 = horizontal ? fast : slow;
    const double healthy_d1 = horizontal ? slow : fast;

    GeneratedField out;
    out.tensor.d0 = grid_like;
    out.tensor.d1 = grid_like;
    out.mask.nx = grid_like.nx;
    out.mask.ny = grid_like.ny;
    out.mask.healthy.assign(grid_like.nx * grid_like.ny, 0);

    const double st = std::sin(spec.theta), ct = std::cos(spec.theta);
    for (std::size_t i = 0; i < grid_like.nx; ++i) {
        for (std::size_t j = 0; j < grid_like.ny; ++j) {
            const bool healthy = st * grid_like.x(i) - ct * grid_like.y(j) - spec.beta >= 0.0;
            out.mask.healthy[i * grid_like.ny + j] = healthy ? 1 : 0;
            out.tensor.d0.at(i, j) = healthy ? healthy_d0 : healthy_d0 / spec.lambda;
            out.tensor.d1.at(i, j) = healthy ? healthy_d1 : healthy_d1 / spec.lambda;
        }
    }
    return out;
}

std::vector<ScenarioSpec> sample_specs(std::size_t n, std::uint64_t master_seed) {
    if (n == 0) throw std::invalid_argument("sample_specs: n must be >= 1");
    std::vector<ScenarioSpec> specs(n);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMixRng rng = SplitMixRng::substream(master_seed, i);
        ScenarioSpec& s = specs[i];
        s.field.gamma = rng.uniform(1.0, 3.0);
        s.field.lambda = rng.uniform(2.0, 7.0);
        s.field.fast_magnitude = rng.uniform(3.2, 3.8);
        s.field.fast_axis = rng.next_below(2) == 0 ? DiffusionFieldSpec::FastAxis::horizontal
                                                   : DiffusionFieldSpec::FastAxis::vertical;
        s.ic.alpha = rng.next_below(2) == 0 ? -1 : -2;
        static constexpr int kCutoffs[3] = {8, 12, 16};
        s.ic.f0 = kCutoffs[rng.next_below(3)];
        s.field.theta = rng.uniform(0.0, std::numbers::pi);
        s.field.beta = rng.uniform(-1.5, 1.5);
        s.ic.seed = rng.next_u64();
        s.field.seed = rng.next_u64();
    }
    return specs;
}

double dataset_dt(const DiffusionTensorField& tensor, const GenDatasetConfig& config) {
    const double limit = stability_limit(tensor) * config.cfl_safety;
    const auto stride = static_cast<std::size_t>(std::ceil(config.dt_frame / limit - 1e-12));
    return config.dt_frame / static_cast<double>(std::max<std::size_t>(stride, 1));
}

namespace {

void validate_dataset_config(const GenDatasetConfig& c) {
    if (c.grid_n < 2 || c.out_n < 2) throw std::invalid_argument("gen_dataset: grid sizes too small");
    if (!(c.dt_frame > 0.0)) throw std::invalid_argument("gen_dataset: dt_frame must be > 0");
    if (c.n_frames < 2) throw std::invalid_argument("gen_dataset: need at least 2 frames");
    if (!(c.cfl_safety > 0.0) || c.cfl_safety > 1.0)
        throw std::invalid_argument("gen_dataset: cfl_safety must be in (0, 1]");
}

FrameSequence simulate_entry(const ScenarioSpec& spec, const GenDatasetConfig& config) {
    const ScalarField2D ic = gen_initial_condition(spec.ic, config.grid_n, config.grid_n);
    const GeneratedField field = gen_diffusion_field(spec.field, ic);
    SimConfig sim;
    sim.dt = dataset_dt(field.tensor, config);
    sim.t_end = static_cast<double>(config.n_frames - 1) * config.dt_frame;
    sim.frame_stride = static_cast<std::size_t>(std::llround(config.dt_frame / sim.dt));
    sim.output_nx = config.out_n;
    sim.output_ny = config.out_n;
    return simulate(ic, field.tensor, sim);
}

std::string entry_file_name(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "entry_%04zu.epf1", id);
    return buf;
}

}  // namespace

FrameSequence regenerate_entry(const DatasetEntry& entry, const GenDatasetConfig& config) {
    return simulate_entry(entry.spec, config);
}

DatasetManifest gen_dataset(std::size_t n, std::uint64_t master_seed,
                            const GenDatasetConfig& config, const std::string& out_dir) {
    validate_dataset_config(config);
    std::filesystem::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.master_seed = master_seed;
    manifest.config = config;
    const auto specs = sample_specs(n, master_seed);
    manifest.entries.resize(n);

    parallel_for(n, config.workers, [&](std::size_t i) {
        DatasetEntry& entry = manifest.entries[i];
        entry.id = i;
        entry.spec = specs[i];
        entry.frame_file = entry_file_name(i);
        try {
            const FrameSequence seq = simulate_entry(specs[i], config);
            write_epf1((std::filesystem::path(out_dir) / entry.frame_file).string(), seq);
            entry.ok = true;
        } catch (const std::exception& e) {
            entry.ok = false;
            entry.error = e.what();
        }
    });

    save_manifest(manifest, (std::filesystem::path(out_dir) / "manifest.json").string());
    return manifest;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json ic_to_json(const InitialConditionSpec& s) {
    return {{"alpha", s.alpha},       {"fc", s.fc},
            {"f0", s.f0},             {"contrast", s.contrast},
            {"boundary_margin", s.boundary_margin}, {"seed", s.seed}};
}

InitialConditionSpec ic_from_json(const ordered_json& j) {
    InitialConditionSpec s;
    s.alpha = j.at("alpha").get<int>();
    s.fc = j.at("fc").get<double>();
    s.f0 = j.at("f0").get<int>();
    s.contrast = j.at("contrast").get<double>();
    s.boundary_margin = j.at("boundary_margin").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

ordered_json field_to_json(const DiffusionFieldSpec& s) {
    return {{"theta", s.theta},
            {"beta", s.beta},
            {"gamma", s.gamma},
            {"lambda", s.lambda},
            {"fast_magnitude", s.fast_magnitude},
            {"fast_axis", s.fast_axis == DiffusionFieldSpec::FastAxis::horizontal ? "horizontal"
                                                                                  : "vertical"},
            {"seed", s.seed}};
}

DiffusionFieldSpec field_from_json(const ordered_json& j) {
    DiffusionFieldSpec s;
    s.theta = j.at("theta").get<double>();
    s.beta = j.at("beta").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.lambda = j.at("lambda").get<double>();
    s.fast_magnitude = j.at("fast_magnitude").get<double>();
    const std::string axis = j.at("fast_axis").get<std::string>();
    if (axis == "horizontal") {
        s.fast_axis = DiffusionFieldSpec::FastAxis::horizontal;
    } else if (axis == "vertical") {
        s.fast_axis = DiffusionFieldSpec::FastAxis::vertical;
    } else {
        throw io_error("manifest: unknown fast_axis '" + axis + "'");
    }
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    ordered_json j;
    j["format"] = "epw-dataset";
    j["version"] = 1;
    j["master_seed"] = manifest.master_seed;
    j["config"] = {{"grid_n", manifest.config.grid_n},   {"out_n", manifest.config.out_n},
                   {"dt_frame", manifest.config.dt_frame}, {"n_frames", manifest.config.n_frames},
                   {"cfl_safety", manifest.config.cfl_safety}};
    auto& entries = j["entries"] = ordered_json::array();
    for (const auto& e : manifest.entries) {
        ordered_json je;
        je["id"] = e.id;
        je["ic"] = ic_to_json(e.spec.ic);
        je["field"] = field_to_json(e.spec.field);
        je["frames"] = e.frame_file;
        je["ok"] = e.ok;
        if (!e.ok) je["error"] = e.error;
        entries.push_back(std::move(je));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("manifest: cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("manifest: write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("manifest: cannot open: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error("manifest: parse error in " + path + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "epw-dataset")
            throw io_error("manifest: unexpected format field in " + path);
        DatasetManifest m;
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        const auto& jc = j.at("config");
        m.config.grid_n = jc.at("grid_n").get<std::size_t>();
        m.config.out_n = jc.at("out_n").get<std::size_t>();
        m.config.dt_frame = jc.at("dt_frame").get<double>();
        m.config.n_frames = jc.at("n_frames").get<std::size_t>();
        m.config.cfl_safety = jc.at("cfl_safety").get<double>();
        for (const auto& je : j.at("entries")) {
            DatasetEntry e;
            e.id = je.at("id").get<std::size_t>();
            e.spec.ic = ic_from_json(je.at("ic"));
            e.spec.field = field_from_json(je.at("field"));
            e.frame_file = je.at("frames").get<std::string>();
            e.ok = je.at("ok").get<bool>();
            if (je.contains("error")) e.error = je.at("error").get<std::string>();
            m.entries.push_back(std::move(e));
        }
        return m;
    } catch (const io_error&) {
        throw;
    } catch (const std::exception& e) {
        throw io_error("manifest: malformed content in " + path + ": " + e.what());
    }
}

}  // namespace epw
