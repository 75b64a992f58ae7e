#include "epw/sodium.hpp"

#include <cmath>
#include <limits>

namespace epw::ion {

double m_inf(double v, const SodiumChannelParams& p) {
    return 1.0 / (1.0 + std::exp((p.p1 + v) / p.p2));
}

double hj_inf(double v, const SodiumChannelParams& p) {
    return 1.0 / (1.0 + std::exp((p.q1 + v) / p.q2));
}

double tau_m(double v, const SodiumChannelParams& p) {
    const double u = v + p.p4;
    const double su = p.p5 * u;
    double drive;
    if (std::abs(su) < 1e-6) {
        // p3 u / (1 - exp(su)) = -(p3/p5) / (1 + su/2 + ...) ~ -(p3/p5)(1 - su/2)
        drive = -(p.p3 / p.p5) * (1.0 - 0.5 * su);
    } else {
        drive = p.p3 * u / (1.0 - std::exp(su));
    }
    const double denom = drive + p.p6 * std::exp(-v / p.p7);
    if (std::isnan(denom) || denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 / denom;  // denom == +inf gives tau = 0
}

double i_na(double v, const GateState& g, const SodiumChannelParams& p) {
    return p.g_na * g.m * g.m * g.m * g.h * g.j * (v - p.e_na);
}

GateState steady_state(double v, const SodiumChannelParams& p) {
    const double hj = hj_inf(v, p);
    return {m_inf(v, p), hj, hj};
}

double gate_advance(double g0, double g_inf, double tau, double t) {
    if (t <= 0.0) return g0;
    if (tau == 0.0) return g_inf;
    return g_inf + (g0 - g_inf) * std::exp(-t / tau);
}

}  // namespace epw::ion
