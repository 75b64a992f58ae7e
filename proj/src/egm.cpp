#include "epw/egm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "epw/csv.hpp"
#include "epw/errors.hpp"
#include "epw/fft.hpp"
#include "epw/rng.hpp"

namespace epw {

void ElectrogramRecording::validate() const {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("ElectrogramRecording: sample rate must be positive");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("ElectrogramRecording: non-finite sample");
}

namespace {

/// Gauss elimination with partial pivoting on the 5x5 linearized rational
/// normal equations. Returns false when a pivot degenerates.
bool solve5(std::array<std::array<double, 5>, 5> a, std::array<double, 5>& b,
            std::array<double, 5>& out) {
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (int col = 0; col < 5; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 5; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12 * scale) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 5; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 4; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 5; ++c) acc -= a[r][c] * out[c];
        out[r] = acc / a[r][r];
    }
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
}

/// One weighted linearized least-squares pass for
/// y ~ (a0 + a1 t + a2 t^2) / (1 + b1 t + b2 t^2).
bool fit_rational_pass(const std::vector<double>& tau, const std::vector<double>& y,
                       const std::vector<double>& w, std::array<double, 5>& coef) {
    std::array<std::array<double, 5>, 5> ata{};
    std::array<double, 5> atb{};
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double t = tau[i];
        const std::array<double, 5> phi = {1.0, t, t * t, -y[i] * t, -y[i] * t * t};
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) ata[r][c] += w[i] * phi[r] * phi[c];
            atb[r] += w[i] * phi[r] * y[i];
        }
    }
    return solve5(ata, atb, coef);
}

double rational_eval(const std::array<double, 5>& coef, double t) {
    const double num = coef[0] + coef[1] * t + coef[2] * t * t;
    const double den = 1.0 + coef[3] * t + coef[4] * t * t;
    return num / den;
}

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double m = v[n / 2];
    if (n % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.begin() + n / 2);
        m = 0.5 * (m + v[n / 2 - 1]);
    }
    return m;
}

}  // namespace

ArtifactRemovalResult remove_stimulus_artifact(const ElectrogramRecording& rec,
                                               const std::vector<double>& stim_times_s,
                                               double window_s) {
    rec.validate();
    if (!(window_s > 0.0))
        throw std::invalid_argument("remove_stimulus_artifact: window must be positive");

    ArtifactRemovalResult result;
    result.recording = rec;
    if (stim_times_s.empty()) return result;

    auto& x = result.recording.samples;
    const double fs = rec.sample_rate_hz;
    const auto n = static_cast<std::ptrdiff_t>(x.size());

    for (double t0 : stim_times_s) {
        const auto begin = static_cast<std::ptrdiff_t>(std::ceil(t0 * fs));
        const auto end = std::min<std::ptrdiff_t>(n, static_cast<std::ptrdiff_t>(std::ceil((t0 + window_s) * fs)));
        const auto b = std::max<std::ptrdiff_t>(0, begin);
        if (b >= end) {
            result.window_zeroed.push_back(false);
            continue;
        }

        const auto m = static_cast<std::size_t>(end - b);
        std::vector<double> tau(m), y(m), w(m, 1.0);
        for (std::size_t i = 0; i < m; ++i) {
            tau[i] = (static_cast<double>(b + static_cast<std::ptrdiff_t>(i)) / fs - t0) / window_s;
            y[i] = x[static_cast<std::size_t>(b + static_cast<std::ptrdiff_t>(i))];
        }

        std::array<double, 5> coef{};
        bool ok = fit_rational_pass(tau, y, w, coef);
        for (int pass = 0; ok && pass < 3; ++pass) {
            for (std::size_t i = 0; i < m; ++i) {
                const double den = 1.0 + coef[3] * tau[i] + coef[4] * tau[i] * tau[i];
                w[i] = 1.0 / std::max(den * den, 1e-12);
            }
            ok = fit_rational_pass(tau, y, w, coef);
        }
        if (ok) {
            for (std::size_t i = 0; i < m && ok; ++i) {
                const double den = 1.0 + coef[3] * tau[i] + coef[4] * tau[i] * tau[i];
                ok = std::abs(den) > 1e-6 && std::isfinite(rational_eval(coef, tau[i]));
            }
        }

        for (std::size_t i = 0; i < m; ++i) {
            auto& s = x[static_cast<std::size_t>(b + static_cast<std::ptrdiff_t>(i))];
            s = ok ? s - rational_eval(coef, tau[i]) : 0.0;
        }
        result.window_zeroed.push_back(!ok);
    }
    return result;
}

std::vector<double> detect_stimulus_times(const ElectrogramRecording& rec, double threshold,
                                          double refractory_s) {
    rec.validate();
    std::vector<double> times;
    const double fs = rec.sample_rate_hz;
    double next_allowed = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const double t = static_cast<double>(i) / fs;
        if (t < next_allowed) continue;
        if (std::abs(rec.samples[i]) > threshold) {
            times.push_back(t);
            next_allowed = t + refractory_s;
        }
    }
    return times;
}

std::vector<DeflectionWindow> detect_deflections(const ElectrogramRecording& rec,
                                                 double mad_multiplier, double refractory_s,
                                                 double half_window_s) {
    rec.validate();
    const std::size_t n = rec.samples.size();
    if (n < 3) return {};

    std::vector<double> diff(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diff[i] = rec.samples[i + 1] - rec.samples[i];

    std::vector<double> tmp = diff;
    const double med = median_inplace(tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = std::abs(diff[i] - med);
    const double mad = median_inplace(tmp);
    const double threshold = mad_multiplier * mad;
    if (!(threshold > 0.0)) return {};

    const double fs = rec.sample_rate_hz;
    const auto half = static_cast<std::size_t>(std::llround(half_window_s * fs));
    const auto refractory = static_cast<std::ptrdiff_t>(std::llround(refractory_s * fs));

    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < diff.size(); ++i) {
        const double a = std::abs(diff[i]);
        if (a <= threshold) continue;
        if (a < std::abs(diff[i - 1]) || a <= std::abs(diff[i + 1])) continue;
        candidates.push_back(i);
    }
    // strongest slope first; the refractory gap then suppresses the side
    // lobes of an already claimed deflection rather than its steepest point
    std::sort(candidates.begin(), candidates.end(), [&diff](std::size_t a, std::size_t b) {
        const double ma = std::abs(diff[a]), mb = std::abs(diff[b]);
        return ma != mb ? ma > mb : a < b;
    });
    std::vector<std::ptrdiff_t> accepted;
    for (std::size_t i : candidates) {
        const auto c = static_cast<std::ptrdiff_t>(i);
        bool clear = true;
        for (std::ptrdiff_t other : accepted)
            clear = clear && std::abs(c - other) >= refractory;
        if (clear) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end());

    std::vector<DeflectionWindow> out;
    for (std::ptrdiff_t c : accepted) {
        const auto i = static_cast<std::size_t>(c);
        DeflectionWindow win;
        win.center_index = i;
        win.center_time_s = (static_cast<double>(i) + 0.5) / fs;
        win.begin_index = i > half ? i - half : 0;
        win.end_index = std::min(n, i + half + 1);
        out.push_back(win);
    }
    return out;
}

double feature_amplitude(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

double feature_rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> autocorrelation_normalized(const std::vector<double>& x, std::size_t max_lag) {
    if (x.empty()) throw std::invalid_argument("autocorrelation: empty signal");
    if (max_lag >= x.size())
        throw std::invalid_argument("autocorrelation: lag span exceeds signal length");
    const std::size_t n = x.size();
    std::vector<double> r(max_lag + 1, 0.0);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) {  // constant signal: delta at lag 0
        r[0] = 1.0;
        return r;
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - mean;

    for (std::size_t k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) acc += y[t] * y[t + k];
        r[k] = acc / static_cast<double>(n);
    }
    const double r0 = r[0];
    for (double& v : r) v /= r0;  // r[0] becomes exactly 1
    return r;
}

double feature_acf_std(const ElectrogramRecording& rec, double max_lag_s) {
    const auto max_lag = static_cast<std::size_t>(std::llround(max_lag_s * rec.sample_rate_hz));
    const auto r = autocorrelation_normalized(rec.samples, max_lag);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(r.size()));
}

std::vector<double> ricker_wavelet(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("ricker_wavelet: scale must be positive");
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(5.0 * scale));
    const double amp = 2.0 / (std::sqrt(3.0 * scale) * std::pow(std::numbers::pi, 0.25));
    std::vector<double> psi(static_cast<std::size_t>(2 * half + 1));
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const double u = static_cast<double>(i) / scale;
        psi[static_cast<std::size_t>(i + half)] = amp * (1.0 - u * u) * std::exp(-0.5 * u * u);
    }
    return psi;
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Same-mode linear convolution via zero-padded FFT.
std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& kernel) {
    const std::size_t n = x.size(), m = kernel.size();
    const std::size_t len = next_pow2(n + m - 1);
    std::vector<std::complex<double>> a(len), b(len);
    for (std::size_t i = 0; i < n; ++i) a[i] = x[i];
    for (std::size_t i = 0; i < m; ++i) b[i] = kernel[i];
    fft_inplace(a, false);
    fft_inplace(b, false);
    for (std::size_t i = 0; i < len; ++i) a[i] *= b[i];
    fft_inplace(a, true);
    const std::size_t offset = (m - 1) / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i + offset].real();
    return out;
}

}  // namespace

std::vector<double> cwt_energy_per_scale(const std::vector<double>& x, std::size_t max_scale) {
    if (x.empty()) throw std::invalid_argument("cwt_energy_per_scale: empty signal");
    if (max_scale < 1) throw std::invalid_argument("cwt_energy_per_scale: need at least one scale");
    std::vector<double> energy(max_scale);
    for (std::size_t s = 1; s <= max_scale; ++s) {
        const auto coeff = convolve_same(x, ricker_wavelet(static_cast<double>(s)));
        double acc = 0.0;
        for (double c : coeff) acc += c * c;
        energy[s - 1] = acc;
    }
    return energy;
}

std::size_t feature_cwt_min_energy_scale(const std::vector<double>& x, std::size_t max_scale) {
    const auto energy = cwt_energy_per_scale(x, max_scale);
    std::size_t best = 1;
    for (std::size_t s = 2; s <= max_scale; ++s)
        if (energy[s - 1] < energy[best - 1]) best = s;
    return best;
}

double feature_dominant_freq_hz(const std::vector<double>& x, double sample_rate_hz) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());

    const std::size_t len = next_pow2(x.size());
    std::vector<std::complex<double>> a(len);
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i] - mean;
    fft_inplace(a, false);

    std::size_t best = 1;
    double best_power = -1.0;
    for (std::size_t k = 1; k <= len / 2; ++k) {
        const double p = std::norm(a[k]);
        if (p > best_power) {
            best_power = p;
            best = k;
        }
    }
    return static_cast<double>(best) * sample_rate_hz / static_cast<double>(len);
}

double feature_peak_to_peak_duration_s(const std::vector<double>& x, double sample_rate_hz) {
    if (x.empty()) return 0.0;
    // first occurrence of each extremum, so a constant signal scores 0
    const auto lo = std::min_element(x.begin(), x.end());
    const auto hi = std::max_element(x.begin(), x.end());
    const auto d = std::abs((hi - x.begin()) - (lo - x.begin()));
    return static_cast<double>(d) / sample_rate_hz;
}

const FeatureRegistry& FeatureRegistry::standard() {
    static const FeatureRegistry registry = [] {
        FeatureRegistry r;
        r.version_ = "egm-features/1";
        r.names_ = {"amplitude",        "acf_std", "cwt_min_energy_scale",
                    "dominant_freq_hz", "rms",     "deflection_count",
                    "peak_to_peak_duration_s"};
        return r;
    }();
    return registry;
}

FeatureVector FeatureRegistry::extract(const ElectrogramRecording& rec) const {
    rec.validate();
    const auto lag_span = static_cast<std::size_t>(std::llround(0.050 * rec.sample_rate_hz));
    if (rec.samples.size() <= lag_span)
        throw std::invalid_argument("extract: recording shorter than the autocorrelation lag span");

    FeatureVector fv;
    fv.registry_version = version_;
    fv.values = {
        feature_amplitude(rec.samples),
        feature_acf_std(rec),
        static_cast<double>(feature_cwt_min_energy_scale(rec.samples)),
        feature_dominant_freq_hz(rec.samples, rec.sample_rate_hz),
        feature_rms(rec.samples),
        static_cast<double>(detect_deflections(rec).size()),
        feature_peak_to_peak_duration_s(rec.samples, rec.sample_rate_hz),
    };
    return fv;
}

std::vector<double> synth_deflection_times(const SyntheticEgmSpec& spec) {
    std::vector<double> times(spec.n_deflections);
    const double period = spec.duration_s / static_cast<double>(spec.n_deflections + 1);
    for (std::size_t k = 0; k < spec.n_deflections; ++k)
        times[k] = static_cast<double>(k + 1) * period;
    return times;
}

ElectrogramRecording synth_electrogram(const SyntheticEgmSpec& spec) {
    if (!(spec.sample_rate_hz > 0.0) || !(spec.duration_s > 0.0))
        throw std::invalid_argument("synth_electrogram: rate and duration must be positive");
    ElectrogramRecording rec;
    rec.sample_rate_hz = spec.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
    rec.samples.assign(n, 0.0);

    const auto centers = synth_deflection_times(spec);
    const double sigma = spec.deflection_sigma_s;
    for (double tc : centers) {
        // biphasic derivative-of-Gaussian deflection, peak |value| = amplitude
        const auto lo = static_cast<std::ptrdiff_t>((tc - 6.0 * sigma) * spec.sample_rate_hz);
        const auto hi = static_cast<std::ptrdiff_t>((tc + 6.0 * sigma) * spec.sample_rate_hz) + 1;
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, lo);
             i < std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n), hi); ++i) {
            const double u = (static_cast<double>(i) / spec.sample_rate_hz - tc) / sigma;
            rec.samples[static_cast<std::size_t>(i)] -=
                spec.deflection_amplitude * u * std::exp(0.5 - 0.5 * u * u);
        }
        if (spec.artifact_amplitude != 0.0) {
            const double ts = tc - spec.stim_lead_s;
            const auto first = std::max<std::ptrdiff_t>(
                0, static_cast<std::ptrdiff_t>(std::ceil(ts * spec.sample_rate_hz)));
            for (auto i = static_cast<std::size_t>(first); i < n; ++i) {
                const double dt = static_cast<double>(i) / spec.sample_rate_hz - ts;
                const double a = spec.artifact_amplitude * std::exp(-dt / spec.artifact_tau_s);
                if (a < 1e-12 * std::abs(spec.artifact_amplitude)) break;
                rec.samples[i] += a;
            }
        }
    }

    if (spec.noise_sd > 0.0) {
        SplitMixRng rng(spec.seed);
        for (auto& s : rec.samples) s += spec.noise_sd * rng.gaussian();
    }
    return rec;
}

SyntheticEgmSpec control_preset(std::uint64_t seed) {
    SyntheticEgmSpec spec;
    spec.deflection_sigma_s = 0.0015;
    spec.deflection_amplitude = 1.2;
    spec.noise_sd = 0.02;
    spec.seed = seed;
    return spec;
}

SyntheticEgmSpec cbx_preset(std::uint64_t seed) {
    SyntheticEgmSpec spec;
    spec.deflection_sigma_s = 0.004;
    spec.deflection_amplitude = 0.55;
    spec.noise_sd = 0.03;
    spec.seed = seed;
    return spec;
}

void write_recording_csv(const std::string& path, const ElectrogramRecording& rec) {
    rec.validate();
    std::vector<std::vector<std::string>> rows;
    rows.reserve(rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
        rows.push_back({csv::format_double(static_cast<double>(i) / rec.sample_rate_hz),
                        csv::format_double(rec.samples[i])});
    csv::write(path, {"time_s", "value"}, rows);
}

ElectrogramRecording read_recording_csv(const std::string& path) {
    const auto table = csv::read(path);
    if (table.header.size() != 2 || table.header[0] != "time_s" || table.header[1] != "value")
        throw io_error("recording CSV must have header time_s,value: " + path);
    if (table.rows.size() < 2) throw io_error("recording CSV needs at least two samples: " + path);

    ElectrogramRecording rec;
    std::vector<double> times;
    for (const auto& row : table.rows) {
        if (row.size() != 2) throw io_error("recording CSV row width mismatch: " + path);
        times.push_back(csv::to_double(row[0]));
        rec.samples.push_back(csv::to_double(row[1]));
    }
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw io_error("recording CSV times must increase: " + path);
    rec.sample_rate_hz = static_cast<double>(times.size() - 1) / span;
    return rec;
}

void write_recording_raw(const std::string& path, const ElectrogramRecording& rec) {
    rec.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write("EGR1", 4);
    const auto n = static_cast<std::uint32_t>(rec.samples.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&rec.sample_rate_hz), sizeof(double));
    for (double v : rec.samples) {
        const auto f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
    }
    if (!out) throw io_error("write failed: " + path);
}

ElectrogramRecording read_recording_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "EGR1", 4) != 0)
        throw io_error("not an EGR1 file: " + path);
    std::uint32_t n = 0;
    ElectrogramRecording rec;
    if (!in.read(reinterpret_cast<char*>(&n), sizeof n) ||
        !in.read(reinterpret_cast<char*>(&rec.sample_rate_hz), sizeof(double)))
        throw io_error("truncated EGR1 header: " + path);
    if (!(rec.sample_rate_hz > 0.0)) throw io_error("EGR1 sample rate must be positive: " + path);
    rec.samples.resize(n);
    for (auto& v : rec.samples) {
        float f = 0.0f;
        if (!in.read(reinterpret_cast<char*>(&f), sizeof f))
            throw io_error("truncated EGR1 samples: " + path);
        v = f;
    }
    return rec;
}

}  // namespace epw
