#pragma once

#include <vector>

#include "epw/abc.hpp"
#include "epw/protocol.hpp"
#include "epw/sodium.hpp"

namespace epw::ion {

/// Uniform prior boxes for the nine free channel parameters, in
/// free_params() order: p1..p7, q1, q2.
abc::PriorSpec default_sodium_prior();

/// Range-normalized root-mean-square discrepancy between a simulated suite
/// and observed summary curves:
///
///   d = sqrt( mean over curves of mean_i ((s_i - o_i) / range_o)^2 )
///
/// where range_o = max - min of the observed ordinate (a range <= 0 falls
/// back to 1 so flat curves still contribute absolute error). Curves are
/// matched by position and must agree in kind, length, and abscissa (absolute
/// tolerance 1e-9); any mismatch throws std::invalid_argument. An infeasible
/// simulation scores +infinity.
double curve_distance(const SuiteResult& simulated, const std::vector<SummaryCurve>& observed);

/// Runs the protocol suite at `params` and perturbs every summary ordinate
/// with additive Gaussian noise of standard deviation noise_level * range of
/// that curve. Each curve draws from its own substream of `seed`, so the
/// noise pattern is independent of suite composition order.
std::vector<SummaryCurve> synth_observations(const SodiumChannelParams& params,
                                             const ProtocolSet& set, double noise_level,
                                             std::uint64_t seed);

struct ChannelFitResult {
    std::vector<abc::Population> populations;
    abc::PosteriorStats stats;
};

/// ABC-SMC recovery of the nine free parameters from observed summary curves.
/// Protocols are rebuilt on the observed abscissae; g_na, e_na, tau_h, tau_j
/// are taken from `base` and held fixed. Each distance evaluation sets the
/// candidate free parameters on a copy of `base`, runs the matched suite, and
/// scores it with curve_distance.
ChannelFitResult run_abcsmc_channel(const std::vector<SummaryCurve>& observed,
                                    const SodiumChannelParams& base, const abc::AbcConfig& config,
                                    const abc::PriorSpec& prior = default_sodium_prior());

}  // namespace epw::ion
