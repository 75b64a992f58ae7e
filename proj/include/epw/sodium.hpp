#pragma once

#include <array>
#include <functional>

namespace epw::ion {

/// Fast sodium current I_Na = g_na * m^3 * h * j * (v - e_na), with
///   m_inf(v) = 1 / (1 + exp((p1 + v) / p2))
///   h_inf(v) = j_inf(v) = 1 / (1 + exp((q1 + v) / q2))
///   tau_m(v) = 1 / ( p3 (v + p4) / (1 - exp(p5 (v + p4))) + p6 exp(-v / p7) )
/// The nine free parameters p1..p7, q1, q2 are the inference targets; g_na and
/// e_na are configuration inputs (units follow the chosen current/voltage
/// scale). h and j keep fixed voltage-dependent time-constant callables.
struct SodiumChannelParams {
    double g_na = 13.0;
    double e_na = 64.3;
    double p1 = 45.0;
    double p2 = -6.5;
    double p3 = 0.235;
    double p4 = 47.1;
    double p5 = -0.1;
    double p6 = 0.0588;
    double p7 = 11.0;
    double q1 = 76.1;
    double q2 = 6.07;
    std::function<double(double)> tau_h = [](double) { return 10.0; };   // ms
    std::function<double(double)> tau_j = [](double) { return 100.0; };  // ms

    /// The published parameter set (also the struct defaults).
    static SodiumChannelParams original() { return {}; }

    std::array<double, 9> free_params() const { return {p1, p2, p3, p4, p5, p6, p7, q1, q2}; }
    void set_free_params(const std::array<double, 9>& p) {
        p1 = p[0]; p2 = p[1]; p3 = p[2]; p4 = p[3]; p5 = p[4];
        p6 = p[5]; p7 = p[6]; q1 = p[7]; q2 = p[8];
    }
};

struct GateState {
    double m = 0.0;
    double h = 1.0;
    double j = 1.0;
};

double m_inf(double v, const SodiumChannelParams& p);

/// Shared steady state of the fast (h) and slow (j) inactivation gates.
double hj_inf(double v, const SodiumChannelParams& p);

/// Activation time constant. The drive term has a removable singularity at
/// v = -p4 (limit -p3/p5); a two-term series takes over for |p5 (v+p4)| < 1e-6.
/// Returns NaN when the denominator is NaN or <= 0 (parameter infeasibility);
/// an overflowing denominator yields tau = 0, i.e. instant equilibration.
double tau_m(double v, const SodiumChannelParams& p);

double i_na(double v, const GateState& g, const SodiumChannelParams& p);

GateState steady_state(double v, const SodiumChannelParams& p);

/// Exact exponential relaxation g0 -> g_inf with time constant tau over t.
/// tau = 0 jumps to g_inf; t <= 0 returns g0 unchanged.
double gate_advance(double g0, double g_inf, double tau, double t);

}  // namespace epw::ion
