#include "epw/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "epw/csv.hpp"
#include "epw/errors.hpp"

namespace epw::ion {

int protocol_id(ProtocolKind kind) { return static_cast<int>(kind); }

ProtocolKind protocol_kind_from_id(int id) {
    if (id < 0 || id > 4) throw std::invalid_argument("protocol id out of range");
    return static_cast<ProtocolKind>(id);
}

std::string protocol_name(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::activation: return "activation";
        case ProtocolKind::iv_curve: return "iv_curve";
        case ProtocolKind::inactivation: return "inactivation";
        case ProtocolKind::pulse_train: return "pulse_train";
        case ProtocolKind::recovery: return "recovery";
    }
    return "unknown";
}

namespace {

struct SegmentDynamics {
    double v = 0.0;
    double mi = 0.0, hji = 0.0;
    double tm = 0.0, th = 1.0, tj = 1.0;
    GateState g0;

    GateState at(double t) const {
        return {gate_advance(g0.m, mi, tm, t), gate_advance(g0.h, hji, th, t),
                gate_advance(g0.j, hji, tj, t)};
    }
};

// Locates max |I(t)| on [0, T] for the closed-form segment current: coarse
// scan to bracket, then golden-section refinement. The refined optimum is
// independent of the trace step, which is what makes summaries invariant
// under dt changes.
double window_peak(const SegmentDynamics& dyn, const SodiumChannelParams& params, double T) {
    auto current = [&](double t) { return i_na(dyn.v, dyn.at(t), params); };

    double scan = std::min(0.05, T / 8.0);
    if (!(scan > 0.0)) scan = T;
    auto n = static_cast<std::size_t>(std::ceil(T / scan));
    if (n > 100000) {
        n = 100000;
        scan = T / static_cast<double>(n);
    }

    double best_t = 0.0, best_abs = std::abs(current(0.0));
    for (std::size_t k = 1; k <= n; ++k) {
        const double t = std::min(static_cast<double>(k) * scan, T);
        const double a = std::abs(current(t));
        if (a > best_abs) {
            best_abs = a;
            best_t = t;
        }
    }

    double lo = std::max(0.0, best_t - scan);
    double hi = std::min(T, best_t + scan);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = std::abs(current(x1));
    double f2 = std::abs(current(x2));
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, T); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = std::abs(current(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = std::abs(current(x1));
        }
    }
    const double t_star = 0.5 * (lo + hi);
    double peak = current(t_star);
    if (std::abs(peak) < best_abs) peak = current(best_t);
    return peak;
}

bool segment_dynamics(SegmentDynamics& dyn, double v, const GateState& g0,
                      const SodiumChannelParams& params) {
    dyn.v = v;
    dyn.g0 = g0;
    dyn.mi = m_inf(v, params);
    dyn.hji = hj_inf(v, params);
    dyn.tm = tau_m(v, params);
    dyn.th = params.tau_h(v);
    dyn.tj = params.tau_j(v);
    if (std::isnan(dyn.th) || !(dyn.th > 0.0) || std::isnan(dyn.tj) || !(dyn.tj > 0.0))
        throw std::invalid_argument("integrate_protocol: tau_h/tau_j must be positive");
    return !std::isnan(dyn.tm);
}

void append_trace(std::vector<TracePoint>& trace, const SegmentDynamics& dyn,
                  const SodiumChannelParams& params, double t_offset, double T, double dt) {
    const auto n = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = std::min(static_cast<double>(k) * dt, T);
        const GateState g = dyn.at(t);
        trace.push_back({t_offset + t, dyn.v, i_na(dyn.v, g, params), g.m, g.h, g.j});
    }
}

bool summarize(ProtocolResult& result, const VoltageProtocol& protocol,
               const SodiumChannelParams& params) {
    auto& curve = result.summary;
    curve.kind = protocol.kind;
    curve.abscissa = protocol.abscissa;
    curve.ordinate.clear();

    switch (protocol.kind) {
        case ProtocolKind::activation: {
            std::vector<double> conductance;
            double g_max = 0.0;
            for (std::size_t s = 0; s < result.sweep_peaks.size(); ++s) {
                const double v = protocol.abscissa[s];
                const double drive = v - params.e_na;
                double g = std::abs(drive) < 1e-12 ? 0.0 : result.sweep_peaks[s][0] / drive;
                g = std::max(g, 0.0);
                conductance.push_back(g);
                g_max = std::max(g_max, g);
            }
            if (!(g_max > 0.0)) return false;
            for (double g : conductance) curve.ordinate.push_back(std::cbrt(g / g_max));
            return true;
        }
        case ProtocolKind::iv_curve: {
            double max_abs = 0.0;
            for (const auto& peaks : result.sweep_peaks) max_abs = std::max(max_abs, std::abs(peaks[0]));
            if (!(max_abs > 0.0)) return false;
            for (const auto& peaks : result.sweep_peaks) curve.ordinate.push_back(peaks[0] / max_abs);
            return true;
        }
        case ProtocolKind::inactivation: {
            double max_abs = 0.0;
            for (const auto& peaks : result.sweep_peaks) max_abs = std::max(max_abs, std::abs(peaks[0]));
            if (!(max_abs > 0.0)) return false;
            for (const auto& peaks : result.sweep_peaks)
                curve.ordinate.push_back(std::abs(peaks[0]) / max_abs);
            return true;
        }
        case ProtocolKind::pulse_train: {
            const auto& peaks = result.sweep_peaks.at(0);
            const double first = std::abs(peaks.at(0));
            if (!(first > 0.0)) return false;
            for (double p : peaks) curve.ordinate.push_back(std::abs(p) / first);
            return true;
        }
        case ProtocolKind::recovery: {
            for (const auto& peaks : result.sweep_peaks) {
                const double p1 = std::abs(peaks.at(0));
                if (!(p1 > 0.0)) return false;
                curve.ordinate.push_back(std::abs(peaks.at(1)) / p1);
            }
            return true;
        }
    }
    return false;
}

}  // namespace

ProtocolResult integrate_protocol(const VoltageProtocol& protocol, const SodiumChannelParams& params,
                                  double dt_ms, bool with_trace) {
    if (!(dt_ms > 0.0)) throw std::invalid_argument("integrate_protocol: dt must be > 0");
    if (protocol.sweeps.empty()) throw std::invalid_argument("integrate_protocol: no sweeps");
    if (!(params.g_na > 0.0)) throw std::invalid_argument("integrate_protocol: g_na must be > 0");
    const std::size_t expected_abscissa = protocol.kind == ProtocolKind::pulse_train
                                              ? protocol.sweeps.front().measure.size()
                                              : protocol.sweeps.size();
    if (protocol.abscissa.size() != expected_abscissa)
        throw std::invalid_argument("integrate_protocol: abscissa size mismatch");

    ProtocolResult result;
    const GateState hold_state = steady_state(protocol.hold_voltage_mv, params);
    {
        // the hold potential itself must be feasible
        SodiumChannelParams probe = params;
        if (std::isnan(tau_m(protocol.hold_voltage_mv, probe))) {
            result.feasible = false;
            return result;
        }
    }

    double t_global = 0.0;
    for (const auto& sweep : protocol.sweeps) {
        GateState g = hold_state;
        std::vector<double> peaks;
        for (std::size_t si = 0; si < sweep.segments.size(); ++si) {
            const Segment& seg = sweep.segments[si];
            if (!(seg.duration_ms > 0.0))
                throw std::invalid_argument("integrate_protocol: segment duration must be > 0");
            SegmentDynamics dyn;
            if (!segment_dynamics(dyn, seg.voltage_mv, g, params)) {
                result.feasible = false;
                return result;
            }
            const bool measured =
                std::find(sweep.measure.begin(), sweep.measure.end(), static_cast<int>(si)) !=
                sweep.measure.end();
            if (measured) peaks.push_back(window_peak(dyn, params, seg.duration_ms));
            if (with_trace) append_trace(result.trace, dyn, params, t_global, seg.duration_ms, dt_ms);
            g = dyn.at(seg.duration_ms);
            t_global += seg.duration_ms;
        }
        result.sweep_peaks.push_back(std::move(peaks));
    }

    if (!summarize(result, protocol, params)) result.feasible = false;
    return result;
}

SuiteResult run_protocol_suite(const SodiumChannelParams& params, const ProtocolSet& set,
                               double dt_ms) {
    SuiteResult out;
    for (const auto& protocol : set.protocols) {
        ProtocolResult r = integrate_protocol(protocol, params, dt_ms, false);
        if (!r.feasible) {
            out.feasible = false;
            out.curves.clear();
            return out;
        }
        out.curves.push_back(std::move(r.summary));
    }
    return out;
}

namespace {

VoltageProtocol make_step_protocol(ProtocolKind kind, const std::vector<double>& voltages) {
    VoltageProtocol p;
    p.kind = kind;
    p.hold_voltage_mv = -120.0;
    for (double v : voltages) {
        Sweep s;
        s.segments = {{50.0, v}};
        s.measure = {0};
        p.sweeps.push_back(std::move(s));
    }
    p.abscissa = voltages;
    return p;
}

VoltageProtocol make_inactivation_protocol(const std::vector<double>& prepulses) {
    VoltageProtocol p;
    p.kind = ProtocolKind::inactivation;
    p.hold_voltage_mv = -120.0;
    for (double v : prepulses) {
        Sweep s;
        s.segments = {{500.0, v}, {25.0, -20.0}};
        s.measure = {1};
        p.sweeps.push_back(std::move(s));
    }
    p.abscissa = prepulses;
    return p;
}

VoltageProtocol make_train_protocol(std::size_t n_pulses) {
    // 2 Hz train: 25 ms test pulse, 475 ms back at the hold potential.
    VoltageProtocol p;
    p.kind = ProtocolKind::pulse_train;
    p.hold_voltage_mv = -80.0;
    Sweep s;
    for (std::size_t k = 0; k < n_pulses; ++k) {
        s.measure.push_back(static_cast<int>(s.segments.size()));
        s.segments.push_back({25.0, -20.0});
        s.segments.push_back({475.0, -80.0});
        p.abscissa.push_back(static_cast<double>(k + 1));
    }
    p.sweeps.push_back(std::move(s));
    return p;
}

VoltageProtocol make_recovery_protocol(const std::vector<double>& gaps_ms) {
    VoltageProtocol p;
    p.kind = ProtocolKind::recovery;
    p.hold_voltage_mv = -120.0;
    for (double gap : gaps_ms) {
        Sweep s;
        s.segments = {{25.0, -20.0}, {gap, -120.0}, {25.0, -20.0}};
        s.measure = {0, 2};
        p.sweeps.push_back(std::move(s));
    }
    p.abscissa = gaps_ms;
    return p;
}

std::vector<double> voltage_range(double lo, double hi, double step) {
    std::vector<double> v;
    for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
    return v;
}

}  // namespace

ProtocolSet ProtocolSet::defaults() {
    ProtocolSet set;
    const auto steps = voltage_range(-60.0, 30.0, 5.0);
    set.protocols.push_back(make_step_protocol(ProtocolKind::activation, steps));
    set.protocols.push_back(make_step_protocol(ProtocolKind::iv_curve, steps));
    set.protocols.push_back(make_inactivation_protocol(voltage_range(-120.0, -40.0, 5.0)));
    set.protocols.push_back(make_train_protocol(20));
    std::vector<double> gaps;
    for (int i = 0; i < 10; ++i)
        gaps.push_back(std::pow(500.0, static_cast<double>(i) / 9.0));  // log-spaced 1..500 ms
    set.protocols.push_back(make_recovery_protocol(gaps));
    return set;
}

ProtocolSet ProtocolSet::matching(const std::vector<SummaryCurve>& observed) {
    ProtocolSet set;
    for (const auto& curve : observed) {
        switch (curve.kind) {
            case ProtocolKind::activation:
            case ProtocolKind::iv_curve:
                set.protocols.push_back(make_step_protocol(curve.kind, curve.abscissa));
                break;
            case ProtocolKind::inactivation:
                set.protocols.push_back(make_inactivation_protocol(curve.abscissa));
                break;
            case ProtocolKind::pulse_train:
                set.protocols.push_back(make_train_protocol(curve.abscissa.size()));
                break;
            case ProtocolKind::recovery:
                set.protocols.push_back(make_recovery_protocol(curve.abscissa));
                break;
        }
    }
    return set;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryCurve>& curves) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& curve : curves) {
        for (std::size_t i = 0; i < curve.abscissa.size(); ++i)
            rows.push_back({std::to_string(protocol_id(curve.kind)),
                            csv::format_double(curve.abscissa[i]),
                            csv::format_double(curve.ordinate[i])});
    }
    csv::write(path, {"protocol_id", "abscissa", "value"}, rows);
}

std::vector<SummaryCurve> read_summary_csv(const std::string& path) {
    const csv::Table t = csv::read(path);
    if (t.header != std::vector<std::string>{"protocol_id", "abscissa", "value"})
        throw io_error("summary csv: unexpected header in " + path);
    std::map<int, SummaryCurve> by_id;
    for (const auto& row : t.rows) {
        if (row.size() != 3) throw io_error("summary csv: malformed row in " + path);
        const int id = static_cast<int>(csv::to_double(row[0]));
        auto& curve = by_id[id];
        curve.kind = protocol_kind_from_id(id);
        curve.abscissa.push_back(csv::to_double(row[1]));
        curve.ordinate.push_back(csv::to_double(row[2]));
    }
    std::vector<SummaryCurve> curves;
    for (auto& [id, curve] : by_id) curves.push_back(std::move(curve));
    return curves;
}

}  // namespace epw::ion
