#include "epw/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "epw/parallel.hpp"

namespace epw::abc {

void PriorSpec::validate() const {
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("PriorSpec: lo/hi must be non-empty and match");
    if (!names.empty() && names.size() != lo.size())
        throw std::invalid_argument("PriorSpec: names size mismatch");
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (!(hi[k] >= lo[k])) throw std::invalid_argument("PriorSpec: hi must be >= lo");
}

bool PriorSpec::contains(const std::vector<double>& theta) const {
    if (theta.size() != lo.size()) return false;
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (theta[k] < lo[k] || theta[k] > hi[k]) return false;
    return true;
}

double PriorSpec::density() const {
    double d = 1.0;
    for (std::size_t k = 0; k < lo.size(); ++k) {
        const double w = hi[k] - lo[k];
        if (w > 0.0) d /= w;
    }
    return d;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(k);
    return values[k] + frac * (values[k + 1] - values[k]);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Proposal {
    std::vector<double> params;
    double distance = kInf;
    bool accepted = false;
};

std::vector<double> weighted_variance(const std::vector<Particle>& particles, std::size_t dim) {
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& p : particles)
        for (std::size_t k = 0; k < dim; ++k) mean[k] += p.weight * p.params[k];
    for (const auto& p : particles)
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = p.params[k] - mean[k];
            var[k] += p.weight * d * d;
        }
    return var;
}

std::size_t pick_ancestor(const std::vector<double>& cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

// Product of per-parameter Gaussian kernel densities; sigma == 0 components
// contribute factor 1 (the kernel collapses to identity along that axis).
double kernel_density(const std::vector<double>& theta, const std::vector<double>& center,
                      const std::vector<double>& sigma) {
    double d = 1.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (sigma[k] == 0.0) continue;
        const double z = (theta[k] - center[k]) / sigma[k];
        d *= std::exp(-0.5 * z * z) / (sigma[k] * std::sqrt(2.0 * std::numbers::pi));
    }
    return d;
}

}  // namespace

std::vector<Population> run_abcsmc(const PriorSpec& prior, const DistanceFn& model,
                                   const AbcConfig& config) {
    prior.validate();
    if (config.n_particles == 0) throw std::invalid_argument("run_abcsmc: n_particles must be >= 1");
    if (config.max_generations < 1)
        throw std::invalid_argument("run_abcsmc: max_generations must be >= 1");
    if (!(config.epsilon_quantile > 0.0 && config.epsilon_quantile <= 1.0))
        throw std::invalid_argument("run_abcsmc: epsilon_quantile must be in (0, 1]");
    const std::size_t dim = prior.dim();
    const std::size_t budget =
        config.proposal_budget > 0 ? config.proposal_budget : 100 * config.n_particles;
    const double prior_pdf = prior.density();

    std::vector<Population> populations;

    for (int gen = 0; gen < config.max_generations; ++gen) {
        const Population* prev = populations.empty() ? nullptr : &populations.back();

        double eps = kInf;
        std::vector<double> sigma(dim, 0.0);
        std::vector<double> cumulative;
        if (prev) {
            std::vector<double> dists;
            dists.reserve(prev->particles.size());
            for (const auto& p : prev->particles) dists.push_back(p.distance);
            eps = quantile(dists, config.epsilon_quantile);

            const auto var = weighted_variance(prev->particles, dim);
            for (std::size_t k = 0; k < dim; ++k) sigma[k] = std::sqrt(2.0 * var[k]);

            cumulative.reserve(prev->particles.size());
            double acc = 0.0;
            for (const auto& p : prev->particles) {
                acc += p.weight;
                cumulative.push_back(acc);
            }
        }

        // Evaluate proposal slots in batches; slot i always uses the same
        // substream and acceptances are consumed in slot order, so the
        // population is a pure function of (prior, model, config).
        const std::uint64_t gen_tag = static_cast<std::uint64_t>(gen) << 40;
        auto evaluate_slot = [&](std::uint64_t slot, Proposal& out) {
            SplitMixRng rng = SplitMixRng::substream(config.seed, gen_tag | slot);
            std::vector<double> theta(dim);
            if (!prev) {
                for (std::size_t k = 0; k < dim; ++k) theta[k] = rng.uniform(prior.lo[k], prior.hi[k]);
            } else {
                const std::size_t a = pick_ancestor(cumulative, rng.next_double());
                const auto& base = prev->particles[a].params;
                for (std::size_t k = 0; k < dim; ++k) theta[k] = base[k] + sigma[k] * rng.gaussian();
                if (!prior.contains(theta)) {
                    out.accepted = false;
                    return;
                }
            }
            const double d = model(theta, rng);
            out.params = std::move(theta);
            out.distance = d;
            out.accepted = std::isfinite(d) && d <= eps;
        };

        Population pop;
        pop.generation = gen;
        std::vector<Particle> accepted;
        accepted.reserve(config.n_particles);
        std::size_t slots_consumed = 0;

        const std::size_t batch_size =
            std::max<std::size_t>(64, static_cast<std::size_t>(std::max(config.workers, 1)) * 8);
        std::vector<Proposal> batch(batch_size);
        std::size_t next_slot = 0;
        while (accepted.size() < config.n_particles && next_slot < budget) {
            const std::size_t count = std::min(batch_size, budget - next_slot);
            parallel_for(count, config.workers,
                         [&](std::size_t b) { evaluate_slot(next_slot + b, batch[b]); });
            for (std::size_t b = 0; b < count && accepted.size() < config.n_particles; ++b) {
                slots_consumed = next_slot + b + 1;
                if (batch[b].accepted)
                    accepted.push_back({std::move(batch[b].params), 0.0, batch[b].distance});
            }
            next_slot += count;
        }

        pop.complete = accepted.size() == config.n_particles;
        pop.acceptance_rate = slots_consumed == 0
                                  ? 0.0
                                  : static_cast<double>(accepted.size()) /
                                        static_cast<double>(slots_consumed);
        pop.particles = std::move(accepted);
        if (pop.particles.empty()) {
            populations.push_back(std::move(pop));
            break;
        }

        // importance weights, then normalize to exactly sum 1
        if (!prev) {
            const double w = 1.0 / static_cast<double>(pop.particles.size());
            for (auto& p : pop.particles) p.weight = w;
        } else {
            for (auto& p : pop.particles) {
                double denom = 0.0;
                for (const auto& q : prev->particles)
                    denom += q.weight * kernel_density(p.params, q.params, sigma);
                p.weight = denom > 0.0 ? prior_pdf / denom : 0.0;
            }
        }
        double wsum = 0.0;
        for (const auto& p : pop.particles) wsum += p.weight;
        if (!(wsum > 0.0)) throw std::runtime_error("run_abcsmc: degenerate weights");
        for (auto& p : pop.particles) p.weight /= wsum;

        // recorded epsilon: the bound actually satisfied by this population
        if (!prev) {
            double dmax = 0.0;
            for (const auto& p : pop.particles) dmax = std::max(dmax, p.distance);
            pop.epsilon = dmax;
        } else {
            pop.epsilon = eps;
        }

        const bool stop = !pop.complete || pop.acceptance_rate < config.min_acceptance;
        populations.push_back(std::move(pop));
        if (stop) break;
    }
    return populations;
}

PosteriorStats posterior_stats(const Population& population, const PriorSpec& prior) {
    if (population.particles.empty()) throw std::invalid_argument("posterior_stats: empty population");
    const std::size_t dim = population.particles.front().params.size();
    PosteriorStats stats;
    stats.names = prior.names;
    stats.mean.assign(dim, 0.0);
    stats.min.assign(dim, std::numeric_limits<double>::infinity());
    stats.max.assign(dim, -std::numeric_limits<double>::infinity());
    for (const auto& p : population.particles) {
        for (std::size_t k = 0; k < dim; ++k) {
            stats.mean[k] += p.weight * p.params[k];
            stats.min[k] = std::min(stats.min[k], p.params[k]);
            stats.max[k] = std::max(stats.max[k], p.params[k]);
        }
    }
    return stats;
}

KdeCurve kernel_density_1d(const Population& population, std::size_t param_index,
                           std::size_t grid_points) {
    if (population.particles.empty())
        throw std::invalid_argument("kernel_density_1d: empty population");
    if (grid_points < 2) throw std::invalid_argument("kernel_density_1d: need >= 2 grid points");

    std::vector<double> xs, ws;
    double wsum = 0.0;
    for (const auto& p : population.particles) {
        xs.push_back(p.params.at(param_index));
        ws.push_back(p.weight);
        wsum += p.weight;
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("kernel_density_1d: weights sum to zero");
    for (double& w : ws) w /= wsum;

    double mean = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mean += ws[i] * xs[i];
    double var = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        var += ws[i] * (xs[i] - mean) * (xs[i] - mean);
        w2 += ws[i] * ws[i];
    }

    const auto [x_min, x_max] = std::minmax_element(xs.begin(), xs.end());
    KdeCurve curve;
    if (*x_min == *x_max || !(var > 0.0)) {
        curve.is_delta = true;
        curve.delta_location = xs.front();
        return curve;
    }

    // weighted quartiles for the robust spread estimate
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    auto weighted_quantile = [&](double q) {
        double acc = 0.0;
        for (std::size_t i : order) {
            acc += ws[i];
            if (acc >= q) return xs[i];
        }
        return xs[order.back()];
    };
    const double iqr = weighted_quantile(0.75) - weighted_quantile(0.25);
    const double sd = std::sqrt(var);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double n_eff = 1.0 / w2;
    const double h = 0.9 * spread * std::pow(n_eff, -0.2);

    const double lo = *std::min_element(xs.begin(), xs.end()) - 5.0 * h;
    const double hi = *std::max_element(xs.begin(), xs.end()) + 5.0 * h;
    curve.bandwidth = h;
    curve.x.resize(grid_points);
    curve.density.resize(grid_points);
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double x = lo + static_cast<double>(g) * step;
        double d = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double z = (x - xs[i]) / h;
            d += ws[i] * std::exp(-0.5 * z * z);
        }
        curve.x[g] = x;
        curve.density[g] = d * norm;
    }
    return curve;
}

}  // namespace epw::abc
