#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epw/rng.hpp"

namespace epw::abc {

/// Independent uniform prior box.
struct PriorSpec {
    std::vector<std::string> names;
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const std::vector<double>& theta) const;
    double density() const;  // constant over the box
    void validate() const;
};

struct Particle {
    std::vector<double> params;
    double weight = 0.0;
    double distance = 0.0;
};

struct Population {
    int generation = 0;
    std::vector<Particle> particles;
    double epsilon = 0.0;
    double acceptance_rate = 0.0;
    /// False when the proposal budget ran out before n_particles acceptances;
    /// such a population is returned partially filled and ends the run.
    bool complete = true;
};

struct AbcConfig {
    std::size_t n_particles = 200;
    int max_generations = 12;
    double epsilon_quantile = 0.5;   // next epsilon = this quantile of current distances
    double min_acceptance = 0.02;    // stop after a generation below this rate
    std::size_t proposal_budget = 0; // per generation; 0 means 100 * n_particles
    std::uint64_t seed = 0;
    int workers = 1;
};

/// Distance between simulated parameters and the observations, +inf for an
/// infeasible parameter vector. The rng argument carries the proposal slot's
/// substream for stochastic simulators; deterministic models ignore it.
using DistanceFn = std::function<double(const std::vector<double>& params, SplitMixRng& rng)>;

/// Sequential ABC with a Gaussian transition kernel:
///   - generation 0 draws from the prior and keeps feasible draws;
///   - later generations resample ancestors by weight, perturb each parameter
///     with std dev sqrt(2 * weighted variance), reject outside the prior, and
///     accept at distance <= epsilon (the epsilon_quantile of the previous
///     generation's distances);
///   - weights follow the standard sequential importance correction
///     w_i = prior(theta_i) / sum_j w_j K(theta_i | theta_j), normalized to 1.
/// Every proposal slot draws from substream(seed, generation << 40 | slot) and
/// acceptances are collected in slot order, so results are identical for any
/// worker count. Stops at max_generations, on acceptance < min_acceptance, or
/// when a generation exhausts its proposal budget (flagged incomplete).
std::vector<Population> run_abcsmc(const PriorSpec& prior, const DistanceFn& model,
                                   const AbcConfig& config);

struct PosteriorStats {
    std::vector<std::string> names;
    std::vector<double> mean;  // weighted
    std::vector<double> min;
    std::vector<double> max;
};

PosteriorStats posterior_stats(const Population& population, const PriorSpec& prior);

/// Gaussian kernel density of one marginal, weighted, with Silverman's
/// bandwidth 0.9 * min(sd, IQR/1.34) * n_eff^(-1/5) (n_eff = 1/sum w^2).
/// A zero-variance population is flagged as a delta instead of a curve.
struct KdeCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
    bool is_delta = false;
    double delta_location = 0.0;
};

KdeCurve kernel_density_1d(const Population& population, std::size_t param_index,
                           std::size_t grid_points = 801);

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace epw::abc
