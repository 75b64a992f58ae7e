#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epw/diffusion.hpp"
#include "epw/field.hpp"

namespace epw {

/// Random initial-condition recipe: an isotropic power-law spectral profile
/// (fx^2 + fy^2 + fc)^(alpha/2) shaped by Gaussian noise and uniform phases,
/// hard-cut to fx^2 + fy^2 < f0^2, Hermitian-symmetrized, inverted on a
/// 128 x 128 grid, normalized to max|v| = contrast, then tapered to exactly 0
/// at the domain edge over `boundary_margin` with a raised cosine.
struct InitialConditionSpec {
    int alpha = -2;               // spectral exponent, drawn from {-1, -2}
    double fc = 3.0;              // profile corner constant
    int f0 = 12;                  // cutoff frequency, drawn from {8, 12, 16}
    double contrast = 1.0;        // peak absolute amplitude after normalization
    double boundary_margin = 0.25;
    std::uint64_t seed = 0;
};

/// Two-region diffusion recipe: the line sin(theta)*x - cos(theta)*y = beta
/// splits the domain; the side with sin(theta)*x - cos(theta)*y - beta >= 0 is
/// healthy with (fast, slow) = (fast_magnitude, fast_magnitude / gamma) along
/// fast_axis, and the other side is scarred with both components divided by
/// lambda.
struct DiffusionFieldSpec {
    enum class FastAxis { horizontal, vertical };
    double theta = 0.0;           // line angle in [0, pi)
    double beta = 0.0;            // line offset in [-1.5, 1.5]
    double gamma = 1.0;           // anisotropy ratio, in [1, 3]
    double lambda = 1.0;          // scar contrast, in [2, 7]
    double fast_magnitude = 3.5;  // in [3.2, 3.8]
    FastAxis fast_axis = FastAxis::horizontal;
    std::uint64_t seed = 0;
};

/// Intermediate products of the IC pipeline, exposed so tests can check the
/// pre-taper spectrum and the taper separately.
struct IcStages {
    ScalarField2D pre_taper;  // 128 x 128, normalized, before the boundary taper
    ScalarField2D tapered;    // 128 x 128, after the taper
    ScalarField2D field;      // resampled to the requested grid
};

IcStages gen_initial_condition_stages(const InitialConditionSpec& spec,
                                      std::size_t grid_nx = 128, std::size_t grid_ny = 128);

ScalarField2D gen_initial_condition(const InitialConditionSpec& spec,
                                    std::size_t grid_nx = 128, std::size_t grid_ny = 128);

/// healthy[i*ny + j] == 1 on the healthy side of the partition line.
struct RegionMask {
    std::size_t nx = 0, ny = 0;
    std::vector<std::uint8_t> healthy;
};

struct GeneratedField {
    DiffusionTensorField tensor;
    RegionMask mask;
};

/// Builds the two-region tensor on the grid geometry of `grid_like`.
GeneratedField gen_diffusion_field(const DiffusionFieldSpec& spec, const ScalarField2D& grid_like);

struct ScenarioSpec {
    InitialConditionSpec ic;
    DiffusionFieldSpec field;
};

/// Draws n scenario specs. Entry i consumes only substream(master_seed, i), in
/// the fixed order gamma, lambda, fast_magnitude, fast_axis, alpha, f0, theta,
/// beta, ic seed, field seed; the result is a pure function of (n, master_seed).
std::vector<ScenarioSpec> sample_specs(std::size_t n, std::uint64_t master_seed);

struct GenDatasetConfig {
    std::size_t grid_n = 128;   // solver grid (per side)
    std::size_t out_n = 64;     // stored frame resolution (per side)
    double dt_frame = 0.01;     // frame interval; not derived from source data
    std::size_t n_frames = 11;  // stored frames including t = 0
    double cfl_safety = 0.9;    // dt = dt_frame / ceil(dt_frame / (safety * limit))
    int workers = 1;
};

struct DatasetEntry {
    std::size_t id = 0;
    ScenarioSpec spec;
    std::string frame_file;  // relative to the manifest directory
    bool ok = false;
    std::string error;
};

struct DatasetManifest {
    std::uint64_t master_seed = 0;
    GenDatasetConfig config;
    std::vector<DatasetEntry> entries;
};

/// Runs n scenarios (in parallel when config.workers > 1) and writes one EPF1
/// file per entry plus manifest.json into out_dir. Entries that fail are
/// recorded with their error and do not stop the batch. Output bytes depend
/// only on (n, master_seed, config), never on the worker count.
DatasetManifest gen_dataset(std::size_t n, std::uint64_t master_seed,
                            const GenDatasetConfig& config, const std::string& out_dir);

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Recomputes one entry's frames from its manifest spec; bit-identical to the
/// frames produced by gen_dataset.
FrameSequence regenerate_entry(const DatasetEntry& entry, const GenDatasetConfig& config);

/// The simulation step used for a given tensor under this config.
double dataset_dt(const DiffusionTensorField& tensor, const GenDatasetConfig& config);

}  // namespace epw
