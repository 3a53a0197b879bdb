#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/rng.hpp"

namespace pulseline {

enum class QualityLabel : std::uint8_t { Normal = 0, Abnormal = 1, Unlabeled = 2 };

// Canonical frame geometry: the high-rate frame is 69 samples at 12 Hz
// (5.75 s window) and the low-rate frame is its even-index subsampling,
// 35 samples at 6 Hz. 35 = ceil(69/2), so downsample(., 2) maps one onto
// the other.
inline constexpr std::size_t kHighRateLen = 69;
inline constexpr std::size_t kLowRateLen = 35;
inline constexpr double kHighRateHz = 12.0;
inline constexpr double kLowRateHz = 6.0;

// Post-inference physiological bounds for reported estimates.
inline constexpr double kMinHrBpm = 30.0;
inline constexpr double kMaxHrBpm = 220.0;

// Generator acceptance band.
inline constexpr double kMinSynthHrBpm = 40.0;
inline constexpr double kMaxSynthHrBpm = 180.0;

inline constexpr double kPi = 3.14159265358979323846;

struct Frame {
    std::vector<double> samples;        // normalized pressure, unitless
    double rate_hz = 0.0;
    QualityLabel label = QualityLabel::Unlabeled;
    std::optional<double> hr_truth;     // beats per minute

    double duration_s() const {
        return samples.size() < 2 ? 0.0
                                  : static_cast<double>(samples.size() - 1) / rate_hz;
    }
};

// Least-squares linear detrend. Removes offset and slope (slow drift and
// breathing wander to first order); anything beyond linear is left to the
// filter stages.
inline Frame baseline_correct(const Frame& frame) {
    const std::size_t n = frame.samples.size();
    if (n < 2) throw DegenerateFrame("baseline_correct: need at least 2 samples");

    // normal equations for y = a + b*i over i = 0..n-1
    const double nn = static_cast<double>(n);
    double sum_i = 0.0, sum_ii = 0.0, sum_y = 0.0, sum_iy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        const double y = frame.samples[i];
        sum_i += x;
        sum_ii += x * x;
        sum_y += y;
        sum_iy += x * y;
    }
    const double det = nn * sum_ii - sum_i * sum_i;
    const double slope = (nn * sum_iy - sum_i * sum_y) / det;
    const double intercept = (sum_y - slope * sum_i) / nn;

    Frame out = frame;
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = frame.samples[i] - (intercept + slope * static_cast<double>(i));
    return out;
}

// Min-max map to [0, 1]; a constant frame maps to all zeros.
inline Frame normalize(const Frame& frame) {
    Frame out = frame;
    if (frame.samples.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(frame.samples.begin(), frame.samples.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        std::fill(out.samples.begin(), out.samples.end(), 0.0);
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (auto& v : out.samples) v = (v - lo) * inv;
    return out;
}

// Keep samples at indices 0, factor, 2*factor, ...
inline Frame downsample(const Frame& frame, unsigned factor) {
    if (factor == 0) throw InvalidFactor("downsample: factor must be >= 1");
    Frame out;
    out.rate_hz = frame.rate_hz / static_cast<double>(factor);
    out.label = frame.label;
    out.hr_truth = frame.hr_truth;
    out.samples.reserve((frame.samples.size() + factor - 1) / factor);
    for (std::size_t i = 0; i < frame.samples.size(); i += factor)
        out.samples.push_back(frame.samples[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic pulse generator
// ---------------------------------------------------------------------------

enum class BeatShape : std::uint8_t { GaussianPulse = 0, HarmonicSum = 1 };
enum class Artifact : std::uint8_t { None = 0, Dropout = 1, Spike = 2, Saturation = 3, Drift = 4 };

// Frames with an injected artifact, or per-sample noise above this sigma
// (normalized amplitude units), are labeled Abnormal.
inline constexpr double kAbnormalNoiseSigma = 0.15;

// Width of a Gaussian beat, seconds.
inline constexpr double kBeatSigmaS = 0.08;

struct SynthParams {
    double hr_bpm = 60.0;
    BeatShape beat_shape = BeatShape::GaussianPulse;
    double baseline_wander_hz = 0.25;
    double baseline_wander_amp = 0.1;
    double noise_sigma = 0.0;
    Artifact artifact = Artifact::None;
    std::uint64_t seed = 0;
};

namespace synth_detail {

// counter slots of the per-frame random stream
enum : std::uint64_t {
    kCtrPhase = 0,
    kCtrWanderPhase = 1,
    kCtrDropoutPos = 2,
    kCtrSpikeBase = 3,   // three spikes: counters 3, 4, 5
    kCtrDriftSign = 6,
    kCtrNoiseBase = 32,  // per-sample noise from here on
};

inline double beat_period_s(const SynthParams& p) { return 60.0 / p.hr_bpm; }

// First beat center, uniform in [0, period).
inline double beat_phase_s(const SynthParams& p) {
    return counter_uniform(p.seed, kCtrPhase) * beat_period_s(p);
}

inline double wander_phase(const SynthParams& p) {
    return counter_uniform(p.seed, kCtrWanderPhase) * 2.0 * kPi;
}

} // namespace synth_detail

// Deterministic continuous-time pulse model: a periodic beat train (unit
// amplitude) plus baseline wander. Per-sample noise and artifact injection
// happen in synth_frame on top of this, so sampling this function is the
// noise-free pre-decimation reference trace at any rate.
inline double pulse_value(const SynthParams& p, double t) {
    const double period = synth_detail::beat_period_s(p);
    const double phase0 = synth_detail::beat_phase_s(p);

    double beats = 0.0;
    if (p.beat_shape == BeatShape::GaussianPulse) {
        // only the nearest beat centers matter at sigma = 0.08 s
        const double kmid = std::round((t - phase0) / period);
        for (int dk = -2; dk <= 2; ++dk) {
            const double tk = phase0 + (kmid + static_cast<double>(dk)) * period;
            const double d = (t - tk) / kBeatSigmaS;
            beats += std::exp(-0.5 * d * d);
        }
    } else {
        // three aligned harmonics, rescaled to [0, 1]; maxima sit at the
        // beat centers and the mid-cycle ripple is ~1e-3, far below any
        // prominence threshold in use
        const double w = 2.0 * kPi / period;
        const double u = t - phase0;
        const double raw = std::cos(w * u) + 0.5 * std::cos(2.0 * w * u) + 0.25 * std::cos(3.0 * w * u);
        beats = (raw + 0.75) / 2.5;
    }

    const double wander = p.baseline_wander_amp *
                          std::sin(2.0 * kPi * p.baseline_wander_hz * t + synth_detail::wander_phase(p));
    return beats + wander;
}

// Noise-free model trace sampled at an arbitrary rate (used by oracles to
// cross-check the generator at the 126 Hz acquisition rate).
inline std::vector<double> synth_waveform(const SynthParams& p, double rate_hz, std::size_t n) {
    if (p.hr_bpm < kMinSynthHrBpm || p.hr_bpm > kMaxSynthHrBpm)
        throw OutOfBand("synth_waveform: hr_bpm outside [40, 180]");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = pulse_value(p, static_cast<double>(i) / rate_hz);
    return out;
}

// Beat centers that fall inside [0, window_s].
inline std::vector<double> synth_beat_times(const SynthParams& p, double window_s) {
    const double period = synth_detail::beat_period_s(p);
    const double phase0 = synth_detail::beat_phase_s(p);
    std::vector<double> beats;
    for (double tk = phase0; tk <= window_s; tk += period) beats.push_back(tk);
    return beats;
}

// Generate the canonical 69-sample, 12 Hz frame.
inline Frame synth_frame(const SynthParams& p) {
    using namespace synth_detail;
    if (p.hr_bpm < kMinSynthHrBpm || p.hr_bpm > kMaxSynthHrBpm)
        throw OutOfBand("synth_frame: hr_bpm outside [40, 180]");

    Frame f;
    f.rate_hz = kHighRateHz;
    f.samples.resize(kHighRateLen);
    for (std::size_t i = 0; i < kHighRateLen; ++i) {
        double v = pulse_value(p, static_cast<double>(i) / kHighRateHz);
        if (p.noise_sigma > 0.0)
            v += p.noise_sigma * counter_gauss(p.seed, kCtrNoiseBase + i);
        f.samples[i] = v;
    }

    switch (p.artifact) {
    case Artifact::None:
        break;
    case Artifact::Dropout: {
        // flat-line a ~20% chunk (lost sensor contact)
        const std::size_t len = 14;
        const std::size_t i0 = static_cast<std::size_t>(
            counter_uniform(p.seed, kCtrDropoutPos) * static_cast<double>(kHighRateLen - len));
        for (std::size_t i = i0; i < i0 + len; ++i) f.samples[i] = 0.0;
        break;
    }
    case Artifact::Spike: {
        for (int j = 0; j < 3; ++j) {
            const std::size_t pos = static_cast<std::size_t>(
                counter_uniform(p.seed, kCtrSpikeBase + static_cast<std::uint64_t>(j)) *
                static_cast<double>(kHighRateLen));
            f.samples[std::min(pos, kHighRateLen - 1)] += (j % 2 == 0) ? 2.0 : -2.0;
        }
        break;
    }
    case Artifact::Saturation: {
        // clip the upper part of the range (rail-limited front end)
        const auto [lo_it, hi_it] = std::minmax_element(f.samples.begin(), f.samples.end());
        const double cap = *lo_it + 0.45 * (*hi_it - *lo_it);
        for (auto& v : f.samples) v = std::min(v, cap);
        break;
    }
    case Artifact::Drift: {
        const double sign = counter_uniform(p.seed, kCtrDriftSign) < 0.5 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < kHighRateLen; ++i)
            f.samples[i] += sign * 3.0 * static_cast<double>(i) / static_cast<double>(kHighRateLen - 1);
        break;
    }
    }

    f.label = (p.artifact != Artifact::None || p.noise_sigma > kAbnormalNoiseSigma)
                  ? QualityLabel::Abnormal
                  : QualityLabel::Normal;

    const auto beats = synth_beat_times(p, f.duration_s());
    if (beats.size() >= 2) {
        const double mean_interval =
            (beats.back() - beats.front()) / static_cast<double>(beats.size() - 1);
        f.hr_truth = 60.0 / mean_interval;
    } else {
        f.hr_truth = p.hr_bpm;
    }
    return f;
}

} // namespace pulseline
