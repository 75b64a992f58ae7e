#include "epw/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace epw {

namespace {

void require_matching(const ScalarField2D& a, const ScalarField2D& b, const char* who) {
    if (a.nx != b.nx || a.ny != b.ny) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

double mse(const ScalarField2D& a, const ScalarField2D& b) {
    require_matching(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.values.size());
}

double mse(const FrameSequence& pred, const FrameSequence& target) {
    if (pred.frames.size() != target.frames.size())
        throw std::invalid_argument("mse: frame count mismatch");
    if (pred.frames.empty()) throw std::invalid_argument("mse: empty sequences");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < pred.frames.size(); ++k) {
        require_matching(pred.frames[k], target.frames[k], "mse");
        const auto& p = pred.frames[k].values;
        const auto& t = target.frames[k].values;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = p[i] - t[i];
            acc += d * d;
        }
        count += p.size();
    }
    return acc / static_cast<double>(count);
}

std::vector<double> nmse_per_frame(const FrameSequence& pred, const FrameSequence& target) {
    if (pred.frames.size() != target.frames.size())
        throw std::invalid_argument("nmse_per_frame: frame count mismatch");
    std::vector<double> out;
    out.reserve(pred.frames.size());
    for (std::size_t k = 0; k < pred.frames.size(); ++k) {
        require_matching(pred.frames[k], target.frames[k], "nmse_per_frame");
        out.push_back(mse(pred.frames[k], target.frames[k]) / mean_square(target.frames[k]));
    }
    return out;
}

FrameSequence last_input_baseline(const FrameSequence& inputs, std::size_t horizon) {
    inputs.validate();
    if (horizon == 0) throw std::invalid_argument("last_input_baseline: horizon must be >= 1");
    FrameSequence out;
    out.dt_frame = inputs.dt_frame;
    out.frames.assign(horizon, inputs.frames.back());
    return out;
}

double l2_norm(const ScalarField2D& f) { return std::sqrt(mean_square(f) * static_cast<double>(f.values.size())); }

double mean_square(const ScalarField2D& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v * v;
    return acc / static_cast<double>(f.values.size());
}

double field_sum(const ScalarField2D& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc;
}

double discrete_energy(const ScalarField2D& f) {
    return mean_square(f) * static_cast<double>(f.values.size()) * f.hx * f.hy;
}

}  // namespace epw
