#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace epw {

/// Simulation domain: the square [-2, 2] x [-2, 2].
inline constexpr double kDomainLo = -2.0;
inline constexpr double kDomainHi = 2.0;
inline constexpr double kDomainLen = kDomainHi - kDomainLo;

/// Node-centered sample grid: value index (i, j) sits at (x0 + i*hx, y0 + j*hy),
/// stored row-major as values[i*ny + j]. For the standard domain grid the
/// spacing is 4/(n-1), so boundary nodes lie exactly on the domain edge.
struct ScalarField2D {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double hx = 0.0;
    double hy = 0.0;
    std::vector<double> values;

    ScalarField2D() = default;
    ScalarField2D(std::size_t nx_, std::size_t ny_, double x0_, double y0_, double hx_, double hy_)
        : nx(nx_), ny(ny_), x0(x0_), y0(y0_), hx(hx_), hy(hy_), values(nx_ * ny_, 0.0) {
        validate();
    }

    /// Zero field on the standard domain grid with n x m nodes.
    static ScalarField2D domain_grid(std::size_t nx_, std::size_t ny_) {
        if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("domain_grid: need at least 2x2 nodes");
        return {nx_, ny_, kDomainLo, kDomainLo,
                kDomainLen / static_cast<double>(nx_ - 1), kDomainLen / static_cast<double>(ny_ - 1)};
    }

    double& at(std::size_t i, std::size_t j) { return values[i * ny + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }

    double x(std::size_t i) const { return x0 + static_cast<double>(i) * hx; }
    double y(std::size_t j) const { return y0 + static_cast<double>(j) * hy; }

    bool same_grid(const ScalarField2D& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && hx == o.hx && hy == o.hy;
    }

    void validate() const {
        if (nx < 2 || ny < 2) throw std::invalid_argument("ScalarField2D: nx and ny must be >= 2");
        if (!(hx > 0.0) || !(hy > 0.0)) throw std::invalid_argument("ScalarField2D: spacing must be > 0");
        if (values.size() != nx * ny) throw std::invalid_argument("ScalarField2D: values size mismatch");
    }
};

/// Frames sharing one grid, a fixed frame interval apart.
struct FrameSequence {
    std::vector<ScalarField2D> frames;
    double dt_frame = 0.0;

    void validate() const {
        if (!(dt_frame > 0.0)) throw std::invalid_argument("FrameSequence: dt_frame must be > 0");
        if (frames.empty()) throw std::invalid_argument("FrameSequence: no frames");
        for (const auto& f : frames) {
            f.validate();
            if (!f.same_grid(frames.front()))
                throw std::invalid_argument("FrameSequence: frames must share one grid");
        }
    }
};

}  // namespace epw
