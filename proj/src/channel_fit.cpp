#include "epw/channel_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epw/rng.hpp"

namespace epw::ion {

abc::PriorSpec default_sodium_prior() {
    abc::PriorSpec prior;
    prior.names = {"p1", "p2", "p3", "p4", "p5", "p6", "p7", "q1", "q2"};
    prior.lo = {0.0, -50.0, 0.0, 0.0, -50.0, 0.0, 0.0, 0.0, 0.0};
    prior.hi = {100.0, 0.0, 1.0, 100.0, 0.0, 1.0, 1000.0, 100.0, 50.0};
    return prior;
}

namespace {

double observed_range(const SummaryCurve& curve) {
    const auto [lo, hi] = std::minmax_element(curve.ordinate.begin(), curve.ordinate.end());
    const double range = *hi - *lo;
    return range > 0.0 ? range : 1.0;
}

}  // namespace

double curve_distance(const SuiteResult& simulated, const std::vector<SummaryCurve>& observed) {
    if (observed.empty()) throw std::invalid_argument("curve_distance: no observed curves");
    if (!simulated.feasible) return std::numeric_limits<double>::infinity();
    if (simulated.curves.size() != observed.size())
        throw std::invalid_argument("curve_distance: curve count mismatch");

    double total = 0.0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
        const auto& sim = simulated.curves[c];
        const auto& obs = observed[c];
        if (sim.kind != obs.kind) throw std::invalid_argument("curve_distance: protocol kind mismatch");
        if (sim.abscissa.size() != obs.abscissa.size() || obs.abscissa.empty() ||
            sim.ordinate.size() != obs.ordinate.size())
            throw std::invalid_argument("curve_distance: curve length mismatch");
        for (std::size_t i = 0; i < obs.abscissa.size(); ++i)
            if (std::abs(sim.abscissa[i] - obs.abscissa[i]) > 1e-9)
                throw std::invalid_argument("curve_distance: abscissa mismatch");

        const double range = observed_range(obs);
        double acc = 0.0;
        for (std::size_t i = 0; i < obs.ordinate.size(); ++i) {
            const double z = (sim.ordinate[i] - obs.ordinate[i]) / range;
            acc += z * z;
        }
        total += acc / static_cast<double>(obs.ordinate.size());
    }
    return std::sqrt(total / static_cast<double>(observed.size()));
}

std::vector<SummaryCurve> synth_observations(const SodiumChannelParams& params,
                                             const ProtocolSet& set, double noise_level,
                                             std::uint64_t seed) {
    if (noise_level < 0.0) throw std::invalid_argument("synth_observations: negative noise level");
    const SuiteResult suite = run_protocol_suite(params, set);
    if (!suite.feasible)
        throw std::invalid_argument("synth_observations: parameters give an infeasible suite");

    std::vector<SummaryCurve> observed = suite.curves;
    for (std::size_t c = 0; c < observed.size(); ++c) {
        if (noise_level == 0.0) continue;
        SplitMixRng rng = SplitMixRng::substream(seed, static_cast<std::uint64_t>(c));
        const double sd = noise_level * observed_range(observed[c]);
        for (double& y : observed[c].ordinate) y += sd * rng.gaussian();
    }
    return observed;
}

ChannelFitResult run_abcsmc_channel(const std::vector<SummaryCurve>& observed,
                                    const SodiumChannelParams& base, const abc::AbcConfig& config,
                                    const abc::PriorSpec& prior) {
    if (prior.dim() != 9) throw std::invalid_argument("run_abcsmc_channel: prior must have 9 dims");
    const ProtocolSet set = ProtocolSet::matching(observed);

    abc::DistanceFn model = [&, set](const std::vector<double>& theta, SplitMixRng&) {
        SodiumChannelParams candidate = base;
        std::array<double, 9> p;
        std::copy_n(theta.begin(), 9, p.begin());
        candidate.set_free_params(p);
        return curve_distance(run_protocol_suite(candidate, set), observed);
    };

    ChannelFitResult result;
    result.populations = abc::run_abcsmc(prior, model, config);
    if (!result.populations.empty() && !result.populations.back().particles.empty())
        result.stats = abc::posterior_stats(result.populations.back(), prior);
    return result;
}

}  // namespace epw::ion
