#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace epw {

/// A single-electrode extracellular recording. label: -1 unknown, 0 control,
/// 1 drug (carbenoxolone-style uncoupling).
struct ElectrogramRecording {
    double sample_rate_hz = 2000.0;
    std::vector<double> samples;
    int label = -1;
    std::string plate_id;
    std::string electrode_id;

    void validate() const;
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

struct ArtifactRemovalResult {
    ElectrogramRecording recording;
    /// One flag per stimulus window, true when the rational fit was singular
    /// (or its denominator vanished in-window) and the window was zeroed.
    std::vector<bool> window_zeroed;
};

/// Subtracts the decaying stimulus deflection after each stimulus onset by
/// least-squares fitting a degree (2, 2) rational polynomial over a fixed
/// post-stimulus window (default 20 ms, abscissa normalized to [0, 1)).
/// The linearized normal equations are solved directly and refined with a
/// few Sanathanan-Koerner reweighting passes. Samples outside every window
/// are returned bit-identical; an empty stim_times_s returns the input
/// unchanged.
ArtifactRemovalResult remove_stimulus_artifact(const ElectrogramRecording& rec,
                                               const std::vector<double>& stim_times_s,
                                               double window_s = 0.020);

/// Onset times where |sample| first exceeds `threshold`, separated by at
/// least `refractory_s`.
std::vector<double> detect_stimulus_times(const ElectrogramRecording& rec, double threshold,
                                          double refractory_s = 0.050);

struct DeflectionWindow {
    std::size_t center_index = 0;
    double center_time_s = 0.0;
    std::size_t begin_index = 0;
    std::size_t end_index = 0;  // half-open
};

/// Windows (default ±10 ms) centered on local extrema of the first difference
/// whose magnitude exceeds mad_multiplier times the median absolute deviation
/// of the first difference. Candidates are accepted strongest first (ties to
/// the earlier sample); anything within refractory_s of an accepted extremum
/// is suppressed, so a deflection is claimed by its steepest point rather
/// than a leading side lobe. Windows are returned in time order. A flat
/// signal yields an empty list.
std::vector<DeflectionWindow> detect_deflections(const ElectrogramRecording& rec,
                                                 double mad_multiplier = 5.0,
                                                 double refractory_s = 0.020,
                                                 double half_window_s = 0.010);

struct FeatureVector {
    std::string registry_version;
    std::vector<double> values;
};

/// Named feature set with a version tag so serialized models can refuse
/// vectors extracted under a different registry.
class FeatureRegistry {
public:
    static const FeatureRegistry& standard();

    const std::string& version() const { return version_; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

    /// Throws std::invalid_argument when the recording is shorter than the
    /// longest analysis window (the autocorrelation lag span).
    FeatureVector extract(const ElectrogramRecording& rec) const;

private:
    std::string version_;
    std::vector<std::string> names_;
};

// Individual features, exposed for direct testing.

/// max - min of the samples.
double feature_amplitude(const std::vector<double>& x);

/// sqrt(mean of squares).
double feature_rms(const std::vector<double>& x);

/// Biased autocorrelation of the mean-removed signal at lags 0..max_lag,
/// normalized by the lag-0 value (so r[0] == 1). A constant signal returns
/// all-zero values beyond r[0] = 1.
std::vector<double> autocorrelation_normalized(const std::vector<double>& x, std::size_t max_lag);

/// Population standard deviation of autocorrelation_normalized over a lag
/// span of max_lag_s seconds (default 50 ms).
double feature_acf_std(const ElectrogramRecording& rec, double max_lag_s = 0.050);

/// Ricker (Mexican-hat) wavelet psi(t) = A (1 - (t/a)^2) exp(-t^2 / (2 a^2)),
/// A = 2 / (sqrt(3 a) pi^{1/4}), sampled on t = -half..half with
/// half = ceil(5 a).
std::vector<double> ricker_wavelet(double scale);

/// Sum over time of squared same-mode convolution coefficients, one entry
/// per integer scale 1..max_scale. Convolutions run through a zero-padded
/// radix-2 FFT.
std::vector<double> cwt_energy_per_scale(const std::vector<double>& x, std::size_t max_scale = 64);

/// Scale in 1..max_scale minimizing the CWT energy; ties resolve to the
/// lowest scale.
std::size_t feature_cwt_min_energy_scale(const std::vector<double>& x, std::size_t max_scale = 64);

/// Argmax of the periodogram over positive frequencies (DC excluded), on a
/// zero-padded power-of-two transform. Returns 0 for signals shorter than 2.
double feature_dominant_freq_hz(const std::vector<double>& x, double sample_rate_hz);

/// Time between the global maximum and global minimum samples, in seconds.
double feature_peak_to_peak_duration_s(const std::vector<double>& x, double sample_rate_hz);

/// Synthetic paced-electrogram model for tests and demos: n_deflections
/// biphasic deflections (derivative-of-Gaussian shape) at regular intervals,
/// Gaussian background noise, and optionally an exponentially decaying
/// stimulus artifact starting stim_lead_s before each deflection.
struct SyntheticEgmSpec {
    double sample_rate_hz = 2000.0;
    double duration_s = 2.0;
    std::size_t n_deflections = 10;
    double deflection_sigma_s = 0.002;
    double deflection_amplitude = 1.0;
    double noise_sd = 0.02;
    double artifact_amplitude = 0.0;
    double artifact_tau_s = 0.004;
    double stim_lead_s = 0.012;
    std::uint64_t seed = 0;
};

ElectrogramRecording synth_electrogram(const SyntheticEgmSpec& spec);

/// First deflection center of synth_electrogram's layout, then spaced evenly;
/// exposed so tests can compare detected windows against construction.
std::vector<double> synth_deflection_times(const SyntheticEgmSpec& spec);

/// Class presets for classifier exercises: control beats are sharp and
/// narrow, drugged beats are wider and lower with rougher noise.
SyntheticEgmSpec control_preset(std::uint64_t seed);
SyntheticEgmSpec cbx_preset(std::uint64_t seed);

// Recording I/O.

/// Two-column CSV with header time_s,value; the sample rate is recovered
/// from the time span.
void write_recording_csv(const std::string& path, const ElectrogramRecording& rec);
ElectrogramRecording read_recording_csv(const std::string& path);

/// Raw format: magic "EGR1", u32 sample count, f64 sample rate, f32 samples
/// (little-endian).
void write_recording_raw(const std::string& path, const ElectrogramRecording& rec);
ElectrogramRecording read_recording_raw(const std::string& path);

}  // namespace epw
