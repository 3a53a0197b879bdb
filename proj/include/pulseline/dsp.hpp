#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/frame.hpp"

namespace pulseline {

// Sub-sample peak positions, in units of samples at rate_hz.
struct PeakSet {
    std::vector<double> positions;  // strictly increasing
    double rate_hz = 0.0;
};

inline constexpr double kDefaultMinProminence = 0.2;
// Peaks closer than one period at 220 BPM are physiologically impossible.
inline constexpr double kDefaultMinDistanceS = 60.0 / 220.0;

struct FilterSpec {
    int median_window = 7;                // "6-order" -> 7-sample window
    std::vector<double> fir_taps;         // unity DC gain; default set below
    int ma_window = 31;                   // "30-order" -> 31 taps
    int interp_factor = 10;

    // 7-tap Hamming-windowed sinc low-pass, 3 Hz cutoff at the 12 Hz rate
    // (heart-rate content tops out around 3 Hz), normalized to DC gain 1.
    static std::vector<double> default_fir_taps() {
        constexpr int n = 7;
        constexpr double cutoff_hz = 3.0;
        const double fc = 2.0 * cutoff_hz / kHighRateHz;  // cycles/sample * 2
        std::vector<double> taps(n);
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double m = static_cast<double>(k - (n - 1) / 2);
            const double x = fc * m;
            const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
            const double hamming = 0.54 - 0.46 * std::cos(2.0 * kPi * k / (n - 1));
            taps[k] = fc * sinc * hamming;
            sum += taps[k];
        }
        for (auto& t : taps) t /= sum;
        return taps;
    }

    static FilterSpec defaults() {
        FilterSpec s;
        s.fir_taps = default_fir_taps();
        return s;
    }

    void validate() const {
        if (median_window < 3 || median_window % 2 == 0)
            throw InvalidWindow("FilterSpec: median_window must be odd and >= 3");
        if (ma_window < 3 || ma_window % 2 == 0)
            throw InvalidWindow("FilterSpec: ma_window must be odd and >= 3");
        if (fir_taps.empty()) throw InvalidTaps("FilterSpec: fir_taps must be non-empty");
        double sum = 0.0;
        for (double t : fir_taps) sum += t;
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidTaps("FilterSpec: fir_taps must sum to 1 (unity DC gain)");
        if (interp_factor < 1) throw InvalidFactor("FilterSpec: interp_factor must be >= 1");
    }
};

namespace dsp_detail {

// replicate-padded sample access
inline double at_clamped(const std::vector<double>& x, long i) {
    const long n = static_cast<long>(x.size());
    return x[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))];
}

} // namespace dsp_detail

// Sliding median over a replicate-padded window, length preserving.
inline std::vector<double> median_filter(const std::vector<double>& x, int window) {
    if (window < 3 || window % 2 == 0)
        throw InvalidWindow("median_filter: window must be odd and >= 3");
    if (x.empty()) return {};
    const int half = window / 2;
    std::vector<double> out(x.size());
    std::vector<double> buf(static_cast<std::size_t>(window));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int k = -half; k <= half; ++k)
            buf[static_cast<std::size_t>(k + half)] =
                dsp_detail::at_clamped(x, static_cast<long>(i) + k);
        auto mid = buf.begin() + half;
        std::nth_element(buf.begin(), mid, buf.end());
        out[i] = *mid;
    }
    return out;
}

// Centered sliding dot product with replicate padding; zero-phase for
// symmetric taps. Length preserving.
inline std::vector<double> fir_filter(const std::vector<double>& x, const std::vector<double>& taps) {
    if (taps.empty()) throw InvalidTaps("fir_filter: taps must be non-empty");
    if (x.empty()) return {};
    const long center = static_cast<long>((taps.size() - 1) / 2);
    std::vector<double> out(x.size());

    // replicate-pad into a scratch buffer so the hot loop is branch-free
    const long n = static_cast<long>(x.size());
    const long t = static_cast<long>(taps.size());
    std::vector<double> padded(static_cast<std::size_t>(n + t - 1));
    for (long i = 0; i < n + t - 1; ++i)
        padded[static_cast<std::size_t>(i)] = dsp_detail::at_clamped(x, i - center);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long k = 0; k < t; ++k)
            acc += taps[static_cast<std::size_t>(k)] * padded[static_cast<std::size_t>(i + k)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

inline std::vector<double> moving_average(const std::vector<double>& x, int window) {
    if (window < 3 || window % 2 == 0)
        throw InvalidWindow("moving_average: window must be odd and >= 3");
    const std::vector<double> taps(static_cast<std::size_t>(window), 1.0 / window);
    return fir_filter(x, taps);
}

// Piecewise-linear upsampling: output length factor*(N-1)+1, original
// samples preserved at indices that are multiples of factor.
inline std::vector<double> linear_interp(const std::vector<double>& x, int factor) {
    if (factor < 1) throw InvalidFactor("linear_interp: factor must be >= 1");
    if (x.size() < 2) throw DegenerateFrame("linear_interp: need at least 2 samples");
    if (factor == 1) return x;
    std::vector<double> out(static_cast<std::size_t>(factor) * (x.size() - 1) + 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i], b = x[i + 1];
        const std::size_t base = i * static_cast<std::size_t>(factor);
        out[base] = a;
        for (int r = 1; r < factor; ++r) {
            const double t = static_cast<double>(r) / factor;
            out[base + static_cast<std::size_t>(r)] = a + (b - a) * t;
        }
    }
    out.back() = x.back();
    return out;
}

// Vertex offset of the parabola through (-1, y_prev), (0, y_peak), (1, y_next).
inline double parabolic_refine(double y_prev, double y_peak, double y_next) {
    if (y_peak < y_prev || y_peak < y_next)
        throw NotAPeak("parabolic_refine: center sample is not a local maximum");
    const double denom = y_prev - 2.0 * y_peak + y_next;
    if (std::abs(denom) < 1e-12) return 0.0;
    return 0.5 * (y_prev - y_next) / denom;
}

namespace dsp_detail {

struct Candidate {
    std::size_t index;
    double height;
    double prominence;
};

// Topographic prominence: walk out left and right until a higher sample (or
// the signal edge); prominence is height minus the higher of the two valley
// floors found on the way.
inline double prominence_at(const std::vector<double>& x, std::size_t peak) {
    const double h = x[peak];
    double left_min = h;
    for (std::size_t i = peak; i-- > 0;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = peak + 1; i < x.size(); ++i) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

} // namespace dsp_detail

// Local maxima with prominence >= min_prominence, kept greedily in
// descending height order subject to a minimum spacing, then refined to
// sub-sample positions. Ties resolve toward the lower index. The spacing
// floor never drops below one period at 220 BPM.
inline PeakSet detect_peaks(const std::vector<double>& x, double rate_hz,
                            double min_prominence = kDefaultMinProminence,
                            double min_distance_s = kDefaultMinDistanceS) {
    PeakSet peaks;
    peaks.rate_hz = rate_hz;
    if (x.size() < 3) return peaks;

    const double min_dist_samples = rate_hz * std::max(min_distance_s, kDefaultMinDistanceS);

    std::vector<dsp_detail::Candidate> cands;
    std::size_t i = 1;
    while (i + 1 < x.size()) {
        if (x[i] > x[i - 1]) {
            // plateau-tolerant: scan to the end of any flat top
            std::size_t j = i;
            while (j + 1 < x.size() && x[j + 1] == x[i]) ++j;
            if (j + 1 < x.size() && x[j + 1] < x[i]) {
                const double prom = dsp_detail::prominence_at(x, i);
                if (prom >= min_prominence) cands.push_back({i, x[i], prom});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }

    // height-descending, index-ascending on ties
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.height != b.height) return a.height > b.height;
        return a.index < b.index;
    });

    std::vector<std::size_t> kept;
    for (const auto& c : cands) {
        bool ok = true;
        for (std::size_t k : kept) {
            const double d = std::abs(static_cast<double>(c.index) - static_cast<double>(k));
            if (d < min_dist_samples) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(c.index);
    }
    std::sort(kept.begin(), kept.end());

    peaks.positions.reserve(kept.size());
    for (std::size_t k : kept) {
        // detection guarantees 0 < k < size-1 and a local maximum
        const double pos = static_cast<double>(k) + parabolic_refine(x[k - 1], x[k], x[k + 1]);
        peaks.positions.push_back(pos);
    }
    return peaks;
}

// Mean heart rate from inter-peak spacing. Needs at least two intervals.
inline double hr_from_peaks(const PeakSet& peaks) {
    if (peaks.positions.size() < 3)
        throw InsufficientPeaks("hr_from_peaks: need at least 3 peaks");
    const double span = peaks.positions.back() - peaks.positions.front();
    const double mean_interval_s =
        span / static_cast<double>(peaks.positions.size() - 1) / peaks.rate_hz;
    return 60.0 / mean_interval_s;
}

} // namespace pulseline
