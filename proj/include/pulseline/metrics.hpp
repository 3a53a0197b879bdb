#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulseline/errors.hpp"

namespace pulseline {

inline double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw MetricError("mae: need equal, non-empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw MetricError("rmse: need equal, non-empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

struct F1Accuracy {
    double f1 = 0.0;
    double accuracy = 0.0;
};

// Positive class is "abnormal" (true). F1 falls back to 0 when precision and
// recall are both undefined or zero.
inline F1Accuracy f1_accuracy(const std::vector<bool>& pred, const std::vector<bool>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw MetricError("f1_accuracy: need equal, non-empty vectors");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] && truth[i]) ++tp;
        else if (pred[i] && !truth[i]) ++fp;
        else if (!pred[i] && truth[i]) ++fn;
        else ++tn;
    }
    F1Accuracy out;
    out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(pred.size());
    const double denom = static_cast<double>(2 * tp + fp + fn);
    out.f1 = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
    return out;
}

struct LatencyStats {
    std::uint64_t mean_ns = 0;
    std::uint64_t p50_ns = 0;
    std::uint64_t p95_ns = 0;
    std::uint64_t max_ns = 0;
};

inline LatencyStats latency_stats(std::vector<std::uint64_t> samples_ns) {
    if (samples_ns.empty()) throw MetricError("latency_stats: no samples");
    std::sort(samples_ns.begin(), samples_ns.end());
    auto pct = [&](double q) {
        const double idx = q * static_cast<double>(samples_ns.size() - 1);
        return samples_ns[static_cast<std::size_t>(std::llround(idx))];
    };
    LatencyStats st;
    unsigned __int128 sum = 0;
    for (auto v : samples_ns) sum += v;
    st.mean_ns = static_cast<std::uint64_t>(sum / samples_ns.size());
    st.p50_ns = pct(0.50);
    st.p95_ns = pct(0.95);
    st.max_ns = samples_ns.back();
    return st;
}

// Per-seed spread when an experiment is repeated with different seeds.
struct MetricStd {
    double mae_bpm = 0.0, rmse_bpm = 0.0, accuracy = 0.0, f1 = 0.0;
};

struct EvalReport {
    double mae_bpm = 0.0;          // test split, accepted frames
    double rmse_bpm = 0.0;         // test split, accepted frames
    double mae_entire_bpm = 0.0;   // whole dataset, accepted frames
    double accuracy = 0.0;         // rejection decision vs. truth label, test split
    double f1 = 0.0;
    double acceptance_rate = 0.0;  // whole dataset
    LatencyStats latency;
    std::size_t model_bytes = 0;
    std::optional<MetricStd> seed_std;
    std::vector<std::string> notes;
};

struct PowerModel {
    // Placeholder active power for the time-times-power energy estimate;
    // configure to the deployment target's measured draw.
    double active_power_mw = 100.0;
};

// Energy is always an estimate here: mean latency times configured power.
inline double energy_estimate_mj(const EvalReport& report, const PowerModel& power) {
    if (!(power.active_power_mw > 0.0)) throw ConfigError("PowerModel: power must be positive");
    return static_cast<double>(report.latency.mean_ns) * 1e-9 * power.active_power_mw;
}

} // namespace pulseline
