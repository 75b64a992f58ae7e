#pragma once

#include <cstddef>
#include <vector>

#include "epw/field.hpp"

namespace epw {

/// Diagonal diffusivity tensor sampled on the state grid: d0 acts along x,
/// d1 along y. Both components must be strictly positive everywhere. Face
/// diffusivities in the solver are harmonic means of the two adjacent nodes.
struct DiffusionTensorField {
    ScalarField2D d0;
    ScalarField2D d1;

    void validate() const;
};

/// Boundary handling for one explicit step. `dirichlet_zero` is the model
/// boundary condition (state held at 0 on the domain edge); `zero_flux`
/// reflects at the edge and exists as a test harness for checking that the
/// flux-form stencil conserves the spatial integral.
enum class BoundaryMode { dirichlet_zero, zero_flux };

/// Local reaction term R(v) added to the diffusion right-hand side. In the
/// monodomain reading the tissue constants (surface-to-volume ratio, membrane
/// capacitance, and the equal-anisotropy intra/extracellular conductivity
/// ratio) are absorbed into the diffusivities and the time unit, and
/// R(v) = -I_ion / C_m for a membrane current I_ion.
struct ReactionSpec {
    enum class Kind { none, logistic, table };
    Kind kind = Kind::none;

    /// logistic: R(v) = rate * v * (1 - v); integrated exactly per substep.
    double rate = 0.0;

    /// table: R(v) interpolated linearly between (v, rate) knots, clamped to
    /// the end values outside; integrated with one explicit Euler substep.
    std::vector<double> table_v;
    std::vector<double> table_rate;

    void validate() const;
};

struct SimConfig {
    double dt = 0.0;
    double t_end = 0.0;
    std::size_t frame_stride = 1;
    enum class Scheme { explicit_euler } scheme = Scheme::explicit_euler;
    /// When nonzero, every stored frame is bilinearly resampled to this size.
    std::size_t output_nx = 0;
    std::size_t output_ny = 0;
};

/// Largest stable explicit step: min(hx, hy)^2 / (2 * (max d0 + max d1)).
double stability_limit(const DiffusionTensorField& tensor);

/// One explicit flux-form step of dv/dt = d/dx(d0 dv/dx) + d/dy(d1 dv/dy).
/// Throws numeric_error when dt exceeds the stability limit.
ScalarField2D diffusion_step(const ScalarField2D& state, const DiffusionTensorField& tensor,
                             double dt, BoundaryMode boundary = BoundaryMode::dirichlet_zero);

/// Pure diffusion run; frames are stored every frame_stride steps, starting
/// with the initial state. dt_frame of the result is dt * frame_stride.
FrameSequence simulate(const ScalarField2D& ic, const DiffusionTensorField& tensor,
                       const SimConfig& config);

/// Strang-split reaction-diffusion: half reaction, full diffusion step, half
/// reaction. With Kind::none this delegates to simulate (bit-identical); the
/// reaction acts on interior nodes only, keeping the Dirichlet edge at 0.
FrameSequence monodomain_simulate(const ScalarField2D& ic, const DiffusionTensorField& tensor,
                                  const ReactionSpec& reaction, const SimConfig& config);

}  // namespace epw
