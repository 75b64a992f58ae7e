#pragma once

#include <string>
#include <vector>

#include "epw/sodium.hpp"

namespace epw::ion {

enum class ProtocolKind { activation, iv_curve, inactivation, pulse_train, recovery };

int protocol_id(ProtocolKind kind);
ProtocolKind protocol_kind_from_id(int id);
std::string protocol_name(ProtocolKind kind);

struct Segment {
    double duration_ms = 0.0;
    double voltage_mv = 0.0;
};

/// One sweep: a run of constant-voltage segments; `measure` lists the segment
/// indices whose peak current enters the summary.
struct Sweep {
    std::vector<Segment> segments;
    std::vector<int> measure;
};

/// Sweeps start from gates equilibrated at hold_voltage_mv. abscissa has one
/// value per sweep (step voltage, prepulse voltage, pulse index, or gap ms),
/// except pulse_train which uses a single sweep with one abscissa per pulse.
struct VoltageProtocol {
    ProtocolKind kind = ProtocolKind::activation;
    double hold_voltage_mv = -120.0;
    std::vector<Sweep> sweeps;
    std::vector<double> abscissa;
};

/// Normalized summary of one protocol (see integrate_protocol for the
/// per-kind ordinate definitions).
struct SummaryCurve {
    ProtocolKind kind = ProtocolKind::activation;
    std::vector<double> abscissa;
    std::vector<double> ordinate;
};

struct TracePoint {
    double t_ms = 0.0;
    double v_mv = 0.0;
    double current = 0.0;
    double m = 0.0, h = 0.0, j = 0.0;
};

struct ProtocolResult {
    bool feasible = true;
    SummaryCurve summary;
    /// Signed peak current of each measured window, per sweep in order.
    std::vector<std::vector<double>> sweep_peaks;
    std::vector<TracePoint> trace;
};

/// Integrates a protocol with exact exponential (Rush-Larsen) gate updates:
/// within a constant-voltage segment every gate follows its closed form, so
/// results do not depend on the sampling step. Peak currents are located by a
/// coarse scan plus golden-section refinement of the closed-form current.
/// dt_ms only controls the optional trace sampling. Summary ordinates:
///   activation:   cube root of peak conductance / max (steady-state
///                 activation estimate for the cubic gate)
///   iv_curve:     signed peak current / max |peak|
///   inactivation: |test-pulse peak| / max |peak|
///   pulse_train:  |pulse k peak| / |pulse 1 peak|
///   recovery:     |second-pulse peak| / |first-pulse peak| per gap
/// An infeasible tau_m (NaN) at any segment voltage aborts the sweep loop and
/// returns feasible = false.
ProtocolResult integrate_protocol(const VoltageProtocol& protocol, const SodiumChannelParams& params,
                                  double dt_ms = 0.01, bool with_trace = false);

struct ProtocolSet {
    std::vector<VoltageProtocol> protocols;

    /// Stock five-protocol suite. The voltages, durations, pulse counts, and
    /// gap spacing are workbench defaults (not derived from source data) and
    /// can be swapped out by building a ProtocolSet by hand or via matching().
    static ProtocolSet defaults();

    /// Rebuilds the stock suite on the abscissae of observed curves, so a
    /// simulated suite lines up point-for-point with the observations.
    static ProtocolSet matching(const std::vector<SummaryCurve>& observed);
};

struct SuiteResult {
    bool feasible = true;
    std::vector<SummaryCurve> curves;
};

SuiteResult run_protocol_suite(const SodiumChannelParams& params,
                               const ProtocolSet& set = ProtocolSet::defaults(),
                               double dt_ms = 0.01);

/// CSV exchange format: columns protocol_id, abscissa, value.
void write_summary_csv(const std::string& path, const std::vector<SummaryCurve>& curves);
std::vector<SummaryCurve> read_summary_csv(const std::string& path);

}  // namespace epw::ion
