#pragma once

#include "epw/field.hpp"

namespace epw {

/// Bilinear resampling onto a target_nx x target_ny node grid spanning the same
/// physical extent as the source. Target sizes must be >= 2. Matching sizes
/// return a bit-identical copy; affine fields are reproduced exactly (up to
/// rounding) and the general interpolation error is bounded by
/// h^2 * max|d2f| / 8 per axis.
ScalarField2D bilinear_resample(const ScalarField2D& src, std::size_t target_nx,
                                std::size_t target_ny);

}  // namespace epw
