#include "epw/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace epw {

ScalarField2D bilinear_resample(const ScalarField2D& src, std::size_t target_nx,
                                std::size_t target_ny) {
    src.validate();
    if (target_nx < 2 || target_ny < 2)
        throw std::invalid_argument("bilinear_resample: target grid must be at least 2x2");
    if (target_nx == src.nx && target_ny == src.ny) return src;

    ScalarField2D out(target_nx, target_ny, src.x0, src.y0,
                      src.hx * static_cast<double>(src.nx - 1) / static_cast<double>(target_nx - 1),
                      src.hy * static_cast<double>(src.ny - 1) / static_cast<double>(target_ny - 1));

    // Work in index space: target node i2 maps to source coordinate
    // u = i2 * (nx-1) / (nx2-1), which avoids origin/spacing rounding and puts
    // the last target node exactly on the last source node.
    const double sx = static_cast<double>(src.nx - 1) / static_cast<double>(target_nx - 1);
    const double sy = static_cast<double>(src.ny - 1) / static_cast<double>(target_ny - 1);
    for (std::size_t i2 = 0; i2 < target_nx; ++i2) {
        const double u = static_cast<double>(i2) * sx;
        std::size_t i = static_cast<std::size_t>(u);
        if (i > src.nx - 2) i = src.nx - 2;
        const double fx = u - static_cast<double>(i);
        for (std::size_t j2 = 0; j2 < target_ny; ++j2) {
            const double v = static_cast<double>(j2) * sy;
            std::size_t j = static_cast<std::size_t>(v);
            if (j > src.ny - 2) j = src.ny - 2;
            const double fy = v - static_cast<double>(j);
            out.at(i2, j2) = (1.0 - fx) * (1.0 - fy) * src.at(i, j) +
                             fx * (1.0 - fy) * src.at(i + 1, j) +
                             (1.0 - fx) * fy * src.at(i, j + 1) +
                             fx * fy * src.at(i + 1, j + 1);
        }
    }
    return out;
}

}  // namespace epw
