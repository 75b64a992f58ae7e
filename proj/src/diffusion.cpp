#include "epw/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epw/errors.hpp"
#include "epw/resample.hpp"

namespace epw {

void DiffusionTensorField::validate() const {
    d0.validate();
    d1.validate();
    if (!d0.same_grid(d1))
        throw std::invalid_argument("DiffusionTensorField: d0 and d1 must share one grid");
    for (double v : d0.values)
        if (!(v > 0.0)) throw std::invalid_argument("DiffusionTensorField: d0 must be > 0");
    for (double v : d1.values)
        if (!(v > 0.0)) throw std::invalid_argument("DiffusionTensorField: d1 must be > 0");
}

void ReactionSpec::validate() const {
    switch (kind) {
        case Kind::none:
            break;
        case Kind::logistic:
            if (!(rate >= 0.0)) throw std::invalid_argument("ReactionSpec: logistic rate must be >= 0");
            break;
        case Kind::table:
            if (table_v.size() < 2 || table_v.size() != table_rate.size())
                throw std::invalid_argument("ReactionSpec: table needs >= 2 matching knots");
            for (std::size_t i = 1; i < table_v.size(); ++i)
                if (!(table_v[i] > table_v[i - 1]))
                    throw std::invalid_argument("ReactionSpec: table_v must be strictly increasing");
            break;
    }
}

double stability_limit(const DiffusionTensorField& tensor) {
    tensor.validate();
    const double max_d0 = *std::max_element(tensor.d0.values.begin(), tensor.d0.values.end());
    const double max_d1 = *std::max_element(tensor.d1.values.begin(), tensor.d1.values.end());
    const double h_min = std::min(tensor.d0.hx, tensor.d0.hy);
    return h_min * h_min / (2.0 * (max_d0 + max_d1));
}

namespace {

inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

void check_step_args(const ScalarField2D& state, const DiffusionTensorField& tensor, double dt) {
    state.validate();
    if (!state.same_grid(tensor.d0))
        throw std::invalid_argument("diffusion_step: state and tensor grids differ");
    if (!(dt > 0.0)) throw std::invalid_argument("diffusion_step: dt must be > 0");
    if (dt > stability_limit(tensor) * (1.0 + 1e-12))
        throw numeric_error("diffusion_step: dt exceeds the explicit stability limit");
}

// Shared stencil body. Face fluxes use identical expressions on both sides of
// each face, so the zero-flux mode conserves the sum exactly up to rounding.
void step_into(const ScalarField2D& v, const DiffusionTensorField& tensor, double dt,
               BoundaryMode boundary, ScalarField2D& out) {
    const std::size_t nx = v.nx, ny = v.ny;
    const double rx = dt / (v.hx * v.hx);
    const double ry = dt / (v.hy * v.hy);
    const auto& d0 = tensor.d0;
    const auto& d1 = tensor.d1;

    const bool dirichlet = boundary == BoundaryMode::dirichlet_zero;
    const std::size_t i_lo = dirichlet ? 1 : 0, i_hi = dirichlet ? nx - 1 : nx;
    const std::size_t j_lo = dirichlet ? 1 : 0, j_hi = dirichlet ? ny - 1 : ny;

    if (dirichlet) {
        for (std::size_t i = 0; i < nx; ++i) {
            out.at(i, 0) = 0.0;
            out.at(i, ny - 1) = 0.0;
        }
        for (std::size_t j = 0; j < ny; ++j) {
            out.at(0, j) = 0.0;
            out.at(nx - 1, j) = 0.0;
        }
    }

    for (std::size_t i = i_lo; i < i_hi; ++i) {
        for (std::size_t j = j_lo; j < j_hi; ++j) {
            const double c = v.at(i, j);
            double div = 0.0;
            if (i + 1 < nx)
                div += rx * harmonic_mean(d0.at(i, j), d0.at(i + 1, j)) * (v.at(i + 1, j) - c);
            if (i > 0)
                div -= rx * harmonic_mean(d0.at(i - 1, j), d0.at(i, j)) * (c - v.at(i - 1, j));
            if (j + 1 < ny)
                div += ry * harmonic_mean(d1.at(i, j), d1.at(i, j + 1)) * (v.at(i, j + 1) - c);
            if (j > 0)
                div -= ry * harmonic_mean(d1.at(i, j - 1), d1.at(i, j)) * (c - v.at(i, j - 1));
            out.at(i, j) = c + div;
        }
    }
}

// Exact solution of dv/dt = r v (1 - v) over time tau. r = 0 reduces to the
// identity bitwise. Throws on blow-up (pole crossed for v outside [0, 1]).
inline double logistic_advance(double v, double r, double tau) {
    const double e = std::exp(r * tau);
    const double denom = 1.0 + v * (e - 1.0);
    const double out = v * e / denom;
    if (denom <= 0.0 || !std::isfinite(out))
        throw numeric_error("monodomain_simulate: logistic reaction overflow");
    return out;
}

inline double table_rate_at(const ReactionSpec& spec, double v) {
    const auto& xs = spec.table_v;
    const auto& ys = spec.table_rate;
    if (v <= xs.front()) return ys.front();
    if (v >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (v - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

// Half-step reaction on interior nodes; the Dirichlet edge stays untouched.
void react_interior(ScalarField2D& v, const ReactionSpec& spec, double tau) {
    for (std::size_t i = 1; i + 1 < v.nx; ++i) {
        for (std::size_t j = 1; j + 1 < v.ny; ++j) {
            double& s = v.at(i, j);
            if (spec.kind == ReactionSpec::Kind::logistic) {
                s = logistic_advance(s, spec.rate, tau);
            } else {
                s += tau * table_rate_at(spec, s);
                if (!std::isfinite(s))
                    throw numeric_error("monodomain_simulate: table reaction overflow");
            }
        }
    }
}

std::size_t step_count(const SimConfig& config) {
    if (!(config.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be > 0");
    if (config.frame_stride == 0) throw std::invalid_argument("simulate: frame_stride must be >= 1");
    const auto n = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
    return n == 0 ? 1 : n;
}

ScalarField2D store_frame(const ScalarField2D& state, const SimConfig& config) {
    if (config.output_nx == 0 || config.output_ny == 0) return state;
    return bilinear_resample(state, config.output_nx, config.output_ny);
}

FrameSequence run(const ScalarField2D& ic, const DiffusionTensorField& tensor,
                  const ReactionSpec* reaction, const SimConfig& config) {
    check_step_args(ic, tensor, config.dt);
    const std::size_t n_steps = step_count(config);

    FrameSequence seq;
    seq.dt_frame = config.dt * static_cast<double>(config.frame_stride);
    seq.frames.push_back(store_frame(ic, config));

    ScalarField2D cur = ic;
    ScalarField2D next = ic;
    const double half = 0.5 * config.dt;
    for (std::size_t s = 1; s <= n_steps; ++s) {
        if (reaction) react_interior(cur, *reaction, half);
        step_into(cur, tensor, config.dt, BoundaryMode::dirichlet_zero, next);
        std::swap(cur, next);
        if (reaction) react_interior(cur, *reaction, half);
        if (s % config.frame_stride == 0) seq.frames.push_back(store_frame(cur, config));
    }
    return seq;
}

}  // namespace

ScalarField2D diffusion_step(const ScalarField2D& state, const DiffusionTensorField& tensor,
                             double dt, BoundaryMode boundary) {
    check_step_args(state, tensor, dt);
    ScalarField2D out = state;
    step_into(state, tensor, dt, boundary, out);
    return out;
}

FrameSequence simulate(const ScalarField2D& ic, const DiffusionTensorField& tensor,
                       const SimConfig& config) {
    return run(ic, tensor, nullptr, config);
}

FrameSequence monodomain_simulate(const ScalarField2D& ic, const DiffusionTensorField& tensor,
                                  const ReactionSpec& reaction, const SimConfig& config) {
    reaction.validate();
    if (reaction.kind == ReactionSpec::Kind::none) return simulate(ic, tensor, config);
    return run(ic, tensor, &reaction, config);
}

}  // namespace epw
