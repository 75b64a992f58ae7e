#pragma once

#include <vector>

#include "epw/field.hpp"

namespace epw {

/// Mean squared difference over all samples of one field.
double mse(const ScalarField2D& a, const ScalarField2D& b);

/// Mean squared difference pooled over all frames and samples. Frame counts
/// and shapes must match.
double mse(const FrameSequence& pred, const FrameSequence& target);

/// Per-frame normalized error: MSE(pred_k, target_k) / mean(target_k^2).
/// The normalizer is the per-sample mean square of the target frame, which
/// keeps the value dimensionless (the zero predictor scores exactly 1).
std::vector<double> nmse_per_frame(const FrameSequence& pred, const FrameSequence& target);

/// Predicts `horizon` frames by repeating the final input frame; dt_frame is
/// carried over from the inputs.
FrameSequence last_input_baseline(const FrameSequence& inputs, std::size_t horizon);

double l2_norm(const ScalarField2D& f);       // sqrt(sum v^2)
double mean_square(const ScalarField2D& f);   // sum v^2 / (nx*ny)
double field_sum(const ScalarField2D& f);     // sum v
double discrete_energy(const ScalarField2D& f);  // sum v^2 * hx * hy

}  // namespace epw
