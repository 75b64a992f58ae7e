#pragma once

#include <string>

#include "epw/field.hpp"

namespace epw {

/// EPF1 frame file: magic "EPF1", then little-endian u32 nx, u32 ny,
/// u32 nframes, f64 dt_frame, f64 x0, f64 y0, f64 hx, f64 hy, followed by
/// nframes * nx * ny little-endian f32 samples, frame-major then row-major.
/// Samples are stored at f32 precision; reading back returns the rounded values.
void write_epf1(const std::string& path, const FrameSequence& seq);

FrameSequence read_epf1(const std::string& path);

}  // namespace epw
