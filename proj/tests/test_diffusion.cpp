#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "epw/diffusion.hpp"
#include "epw/errors.hpp"
#include "epw/field.hpp"
#include "epw/metrics.hpp"
#include "epw/rng.hpp"

using epw::BoundaryMode;
using epw::DiffusionTensorField;
using epw::ReactionSpec;
using epw::ScalarField2D;
using epw::SimConfig;

namespace {

DiffusionTensorField uniform_tensor(std::size_t n, double d0, double d1) {
    DiffusionTensorField t;
    t.d0 = ScalarField2D::domain_grid(n, n);
    t.d1 = ScalarField2D::domain_grid(n, n);
    std::fill(t.d0.values.begin(), t.d0.values.end(), d0);
    std::fill(t.d1.values.begin(), t.d1.values.end(), d1);
    return t;
}

DiffusionTensorField random_tensor(std::size_t n, std::uint64_t seed) {
    DiffusionTensorField t = uniform_tensor(n, 1.0, 1.0);
    epw::SplitMixRng rng(seed);
    for (double& v : t.d0.values) v = rng.uniform(0.5, 3.0);
    for (double& v : t.d1.values) v = rng.uniform(0.5, 3.0);
    return t;
}

ScalarField2D random_field(std::size_t n, std::uint64_t seed) {
    ScalarField2D f = ScalarField2D::domain_grid(n, n);
    epw::SplitMixRng rng(seed);
    for (double& v : f.values) v = rng.gaussian();
    return f;
}

/// Independent flux-form reference step: assembles every face flux into
/// arrays first, then takes the discrete divergence. Same discretization,
/// different code path from the library stencil.
ScalarField2D reference_step(const ScalarField2D& v, const DiffusionTensorField& tensor,
                             double dt, BoundaryMode boundary) {
    const std::size_t nx = v.nx, ny = v.ny;
    auto hm = [](double a, double b) { return 2.0 * a * b / (a + b); };
    // flux_x[i][j] across the face between (i, j) and (i+1, j)
    std::vector<double> flux_x((nx - 1) * ny, 0.0), flux_y(nx * (ny - 1), 0.0);
    for (std::size_t i = 0; i + 1 < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            flux_x[i * ny + j] = hm(tensor.d0.at(i, j), tensor.d0.at(i + 1, j)) *
                                 (v.at(i + 1, j) - v.at(i, j)) / v.hx;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j + 1 < ny; ++j)
            flux_y[i * (ny - 1) + j] = hm(tensor.d1.at(i, j), tensor.d1.at(i, j + 1)) *
                                       (v.at(i, j + 1) - v.at(i, j)) / v.hy;
    ScalarField2D out = v;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double fx_hi = i + 1 < nx ? flux_x[i * ny + j] : 0.0;
            const double fx_lo = i > 0 ? flux_x[(i - 1) * ny + j] : 0.0;
            const double fy_hi = j + 1 < ny ? flux_y[i * (ny - 1) + j] : 0.0;
            const double fy_lo = j > 0 ? flux_y[i * (ny - 1) + j - 1] : 0.0;
            out.at(i, j) = v.at(i, j) + dt * ((fx_hi - fx_lo) / v.hx + (fy_hi - fy_lo) / v.hy);
        }
    }
    if (boundary == BoundaryMode::dirichlet_zero) {
        for (std::size_t i = 0; i < nx; ++i) out.at(i, 0) = out.at(i, ny - 1) = 0.0;
        for (std::size_t j = 0; j < ny; ++j) out.at(0, j) = out.at(nx - 1, j) = 0.0;
    }
    return out;
}

ScalarField2D eigenmode_ic(std::size_t n) {
    ScalarField2D f = ScalarField2D::domain_grid(n, n);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            f.at(i, j) = std::sin(pi * (f.x(i) + 2.0) / 4.0) * std::sin(pi * (f.y(j) + 2.0) / 4.0);
    return f;
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("stability limit is min(h)^2 / (2 (max d0 + max d1))") {
    auto t = uniform_tensor(65, 3.0, 1.0);
    const double h = 4.0 / 64.0;
    CHECK(epw::stability_limit(t) == doctest::Approx(h * h / 8.0).epsilon(1e-15));
    t.d0.values[17] = 5.0;  // max over the field counts
    CHECK(epw::stability_limit(t) == doctest::Approx(h * h / 12.0).epsilon(1e-15));
}

TEST_CASE("one step matches an independent flux-assembly oracle") {
    const std::size_t n = 23;
    const auto v = random_field(n, 1001);
    const auto tensor = random_tensor(n, 1002);
    const double dt = 0.9 * epw::stability_limit(tensor);
    for (auto mode : {BoundaryMode::dirichlet_zero, BoundaryMode::zero_flux}) {
        const auto got = epw::diffusion_step(v, tensor, dt, mode);
        const auto want = reference_step(v, tensor, dt, mode);
        double max_err = 0.0;
        for (std::size_t k = 0; k < got.values.size(); ++k)
            max_err = std::max(max_err, std::abs(got.values[k] - want.values[k]));
        CHECK(max_err < 1e-13);
    }
}

TEST_CASE("uniform diffusion damps the fundamental mode by the exact discrete factor") {
    const std::size_t n = 33;
    const double D = 1.3;
    const auto ic = eigenmode_ic(n);
    const auto tensor = uniform_tensor(n, D, D);
    SimConfig cfg;
    cfg.dt = 0.5 * epw::stability_limit(tensor);
    const std::size_t m = 50;
    cfg.t_end = cfg.dt * static_cast<double>(m);
    const auto seq = epw::simulate(ic, tensor, cfg);
    REQUIRE(seq.frames.size() == m + 1);

    const double h = 4.0 / static_cast<double>(n - 1);
    const double a = std::numbers::pi / static_cast<double>(n - 1);
    const double g = 1.0 + cfg.dt * D / (h * h) * 2.0 * (2.0 * std::cos(a) - 2.0);
    const double factor = std::pow(g, static_cast<double>(m));
    const auto& last = seq.frames.back();
    for (std::size_t k = 0; k < last.values.size(); ++k)
        CHECK(std::abs(last.values[k] - factor * ic.values[k]) < 1e-12);
}

TEST_CASE("eigenmode decay tracks the continuum rate") {
    const std::size_t n = 65;
    const auto ic = eigenmode_ic(n);
    const auto tensor = uniform_tensor(n, 1.0, 1.0);
    SimConfig cfg;
    cfg.dt = 0.25 * epw::stability_limit(tensor);
    cfg.t_end = 0.05;
    cfg.frame_stride = 1;
    const auto seq = epw::simulate(ic, tensor, cfg);
    const double t = cfg.dt * static_cast<double>(seq.frames.size() - 1);
    const double rate = 2.0 * std::pow(std::numbers::pi / 4.0, 2);
    const double expected = std::exp(-rate * t);
    const double got = epw::l2_norm(seq.frames.back()) / epw::l2_norm(ic);
    CHECK(got == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("zero-flux steps conserve the spatial sum to rounding") {
    const std::size_t n = 31;
    auto v = random_field(n, 2001);
    const auto tensor = random_tensor(n, 2002);
    const double dt = 0.9 * epw::stability_limit(tensor);
    const double sum0 = epw::field_sum(v);
    double abs_mass = 0.0;
    for (double x : v.values) abs_mass += std::abs(x);
    for (int s = 0; s < 20; ++s) {
        v = epw::diffusion_step(v, tensor, dt, BoundaryMode::zero_flux);
        CHECK(std::abs(epw::field_sum(v) - sum0) <= 1e-12 * abs_mass);
    }
}

TEST_CASE("Dirichlet steps dissipate the discrete energy") {
    const std::size_t n = 31;
    auto v = random_field(n, 3001);
    // Dirichlet data: start from a field that is zero on the edge
    for (std::size_t i = 0; i < n; ++i) v.at(i, 0) = v.at(i, n - 1) = 0.0;
    for (std::size_t j = 0; j < n; ++j) v.at(0, j) = v.at(n - 1, j) = 0.0;
    const auto tensor = random_tensor(n, 3002);
    const double dt = 0.9 * epw::stability_limit(tensor);
    double prev = epw::discrete_energy(v);
    for (int s = 0; s < 30; ++s) {
        v = epw::diffusion_step(v, tensor, dt);
        const double e = epw::discrete_energy(v);
        CHECK(e <= prev * (1.0 + 1e-14));
        prev = e;
    }
}

TEST_CASE("explicit steps under the limit respect the maximum principle") {
    const std::size_t n = 21;
    const auto v = random_field(n, 4001);
    const auto tensor = random_tensor(n, 4002);
    const double dt = epw::stability_limit(tensor);  // exactly at the limit
    const auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());

    const auto flux = epw::diffusion_step(v, tensor, dt, BoundaryMode::zero_flux);
    for (double x : flux.values) {
        CHECK(x >= *lo - 1e-12);
        CHECK(x <= *hi + 1e-12);
    }
    const auto diri = epw::diffusion_step(v, tensor, dt);
    for (double x : diri.values) {
        CHECK(x >= std::min(*lo, 0.0) - 1e-12);
        CHECK(x <= std::max(*hi, 0.0) + 1e-12);
    }
}

TEST_CASE("oversized steps raise a numeric error") {
    const auto v = random_field(17, 5001);
    const auto tensor = uniform_tensor(17, 1.0, 1.0);
    const double limit = epw::stability_limit(tensor);
    CHECK_THROWS_AS((void)epw::diffusion_step(v, tensor, 1.01 * limit), epw::numeric_error);
    CHECK_NOTHROW((void)epw::diffusion_step(v, tensor, limit));
    CHECK_THROWS_AS((void)epw::diffusion_step(v, tensor, 0.0), std::invalid_argument);
}

TEST_CASE("mismatched or invalid tensors are rejected") {
    const auto v = random_field(16, 6001);
    auto tensor = uniform_tensor(16, 1.0, 1.0);
    tensor.d1 = ScalarField2D::domain_grid(16, 17);
    std::fill(tensor.d1.values.begin(), tensor.d1.values.end(), 1.0);
    CHECK_THROWS_AS(tensor.validate(), std::invalid_argument);

    auto zero = uniform_tensor(16, 1.0, 1.0);
    zero.d0.values[40] = 0.0;
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);

    const auto other = uniform_tensor(17, 1.0, 1.0);
    CHECK_THROWS_AS((void)epw::diffusion_step(v, other, 1e-5), std::invalid_argument);
}

TEST_CASE("anisotropic spreading matches the tensor components") {
    const std::size_t n = 129;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    const double s0 = 0.2;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            ic.at(i, j) = std::exp(-(ic.x(i) * ic.x(i) + ic.y(j) * ic.y(j)) / (2.0 * s0 * s0));
    const auto tensor = uniform_tensor(n, 2.0, 0.5);
    SimConfig cfg;
    cfg.dt = 0.5 * epw::stability_limit(tensor);
    cfg.t_end = 0.01;
    cfg.frame_stride = 1;
    const auto seq = epw::simulate(ic, tensor, cfg);
    const double t = cfg.dt * static_cast<double>(seq.frames.size() - 1);

    auto second_moments = [](const ScalarField2D& f) {
        double m = 0.0, mx2 = 0.0, my2 = 0.0;
        for (std::size_t i = 0; i < f.nx; ++i)
            for (std::size_t j = 0; j < f.ny; ++j) {
                const double v = f.at(i, j);
                m += v;
                mx2 += v * f.x(i) * f.x(i);
                my2 += v * f.y(j) * f.y(j);
            }
        return std::pair{mx2 / m, my2 / m};
    };
    const auto [x0, y0] = second_moments(ic);
    const auto [x1, y1] = second_moments(seq.frames.back());
    CHECK((x1 - x0) / (2.0 * t) == doctest::Approx(2.0).epsilon(0.1));
    CHECK((y1 - y0) / (2.0 * t) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("simulate stores frames on the stride and resamples the output") {
    const auto ic = eigenmode_ic(9);
    const auto tensor = uniform_tensor(9, 1.0, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.1;
    cfg.frame_stride = 3;
    cfg.output_nx = 5;
    cfg.output_ny = 5;
    const auto seq = epw::simulate(ic, tensor, cfg);
    CHECK(seq.frames.size() == 4);  // initial + steps 3, 6, 9
    CHECK(seq.dt_frame == doctest::Approx(0.03).epsilon(1e-15));
    for (const auto& f : seq.frames) {
        CHECK(f.nx == 5);
        CHECK(f.ny == 5);
    }
}

TEST_CASE("simulate rejects non-positive horizons and zero strides") {
    const auto ic = eigenmode_ic(9);
    const auto tensor = uniform_tensor(9, 1.0, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.0;
    CHECK_THROWS_AS((void)epw::simulate(ic, tensor, cfg), std::invalid_argument);
    cfg.t_end = 0.1;
    cfg.frame_stride = 0;
    CHECK_THROWS_AS((void)epw::simulate(ic, tensor, cfg), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("monodomain") {

TEST_CASE("no reaction reproduces pure diffusion bit for bit") {
    const std::size_t n = 17;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    epw::SplitMixRng rng(7001);
    for (std::size_t i = 1; i + 1 < n; ++i)
        for (std::size_t j = 1; j + 1 < n; ++j) ic.at(i, j) = rng.next_double();
    const auto tensor = uniform_tensor(n, 1.0, 1.0);
    SimConfig cfg;
    cfg.dt = 0.5 * epw::stability_limit(tensor);
    cfg.t_end = 20.0 * cfg.dt;
    const auto plain = epw::simulate(ic, tensor, cfg);

    ReactionSpec none;
    const auto mono = epw::monodomain_simulate(ic, tensor, none, cfg);
    REQUIRE(mono.frames.size() == plain.frames.size());
    for (std::size_t k = 0; k < mono.frames.size(); ++k)
        CHECK(mono.frames[k].values == plain.frames[k].values);

    ReactionSpec zero_rate;
    zero_rate.kind = ReactionSpec::Kind::logistic;
    zero_rate.rate = 0.0;
    const auto mono0 = epw::monodomain_simulate(ic, tensor, zero_rate, cfg);
    for (std::size_t k = 0; k < mono0.frames.size(); ++k)
        CHECK(mono0.frames[k].values == plain.frames[k].values);
}

TEST_CASE("logistic reaction with negligible diffusion follows the exact solution") {
    const std::size_t n = 33;
    const double v0 = 0.2, r = 4.0, t_end = 0.5;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    std::fill(ic.values.begin(), ic.values.end(), v0);
    const auto tensor = uniform_tensor(n, 1e-12, 1e-12);
    ReactionSpec reaction;
    reaction.kind = ReactionSpec::Kind::logistic;
    reaction.rate = r;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = t_end;
    cfg.frame_stride = 100;
    const auto seq = epw::monodomain_simulate(ic, tensor, reaction, cfg);
    const double e = std::exp(r * t_end);
    const double expected = v0 * e / (1.0 + v0 * (e - 1.0));
    CHECK(seq.frames.back().at(n / 2, n / 2) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("table reaction advances by explicit Euler half-steps") {
    const std::size_t n = 9;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    std::fill(ic.values.begin(), ic.values.end(), 0.25);
    const auto tensor = uniform_tensor(n, 1e-12, 1e-12);
    ReactionSpec reaction;
    reaction.kind = ReactionSpec::Kind::table;
    reaction.table_v = {0.0, 1.0};
    reaction.table_rate = {0.0, 2.0};  // R(v) = 2 v on [0, 1]
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 0.1;  // one step
    const auto seq = epw::monodomain_simulate(ic, tensor, reaction, cfg);
    // v -> v (1 + dt/2 * 2) applied twice
    const double expected = 0.25 * 1.1 * 1.1;
    CHECK(seq.frames.back().at(n / 2, n / 2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("table reaction clamps outside its knots") {
    const std::size_t n = 9;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    std::fill(ic.values.begin(), ic.values.end(), 2.0);  // above the last knot
    const auto tensor = uniform_tensor(n, 1e-12, 1e-12);
    ReactionSpec reaction;
    reaction.kind = ReactionSpec::Kind::table;
    reaction.table_v = {0.0, 1.0};
    reaction.table_rate = {0.0, 2.0};
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 0.1;
    const auto seq = epw::monodomain_simulate(ic, tensor, reaction, cfg);
    CHECK(seq.frames.back().at(n / 2, n / 2) == doctest::Approx(2.0 + 2.0 * 0.1).epsilon(1e-12));
}

TEST_CASE("reaction acts on interior nodes only") {
    const std::size_t n = 9;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);  // all zeros
    const auto tensor = uniform_tensor(n, 1e-12, 1e-12);
    ReactionSpec reaction;
    reaction.kind = ReactionSpec::Kind::table;
    reaction.table_v = {0.0, 1.0};
    reaction.table_rate = {1.0, 1.0};  // constant source
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 0.5;
    const auto seq = epw::monodomain_simulate(ic, tensor, reaction, cfg);
    const auto& last = seq.frames.back();
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(last.at(i, 0) == 0.0);
        CHECK(last.at(i, n - 1) == 0.0);
        CHECK(last.at(0, i) == 0.0);
        CHECK(last.at(n - 1, i) == 0.0);
    }
    CHECK(last.at(n / 2, n / 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("logistic blow-up from negative states raises a numeric error") {
    const std::size_t n = 9;
    ScalarField2D ic = ScalarField2D::domain_grid(n, n);
    std::fill(ic.values.begin(), ic.values.end(), -0.5);
    const auto tensor = uniform_tensor(n, 1e-12, 1e-12);
    ReactionSpec reaction;
    reaction.kind = ReactionSpec::Kind::logistic;
    reaction.rate = 10.0;
    SimConfig cfg;
    cfg.dt = 1.0;
    cfg.t_end = 3.0;
    CHECK_THROWS_AS((void)epw::monodomain_simulate(ic, tensor, reaction, cfg), epw::numeric_error);
}

TEST_CASE("reaction validation rejects malformed specs") {
    ReactionSpec bad;
    bad.kind = ReactionSpec::Kind::logistic;
    bad.rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ReactionSpec table;
    table.kind = ReactionSpec::Kind::table;
    table.table_v = {0.0};
    table.table_rate = {1.0};
    CHECK_THROWS_AS(table.validate(), std::invalid_argument);
    table.table_v = {0.0, 0.0};
    table.table_rate = {1.0, 1.0};
    CHECK_THROWS_AS(table.validate(), std::invalid_argument);
}

}  // TEST_SUITE
