#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "pulseline/metrics.hpp"
#include "pulseline/pipelines.hpp"

namespace pulseline {

// Evaluation report as JSON. Everything timing-derived lives in its own
// "timing" subtree so reproducibility checks can strip it mechanically.
inline nlohmann::json report_to_json(const EvalReport& r, PipelineKind kind,
                                     const PowerModel& power) {
    nlohmann::json metrics{{"mae_bpm", r.mae_bpm},
                           {"rmse_bpm", r.rmse_bpm},
                           {"mae_entire_bpm", r.mae_entire_bpm},
                           {"accuracy", r.accuracy},
                           {"f1", r.f1},
                           {"acceptance_rate", r.acceptance_rate}};
    if (r.seed_std) {
        metrics["seed_std"] = {{"mae_bpm", r.seed_std->mae_bpm},
                               {"rmse_bpm", r.seed_std->rmse_bpm},
                               {"accuracy", r.seed_std->accuracy},
                               {"f1", r.seed_std->f1}};
    }
    nlohmann::json j{{"pipeline", pipeline_name(kind)},
                     {"metrics", metrics},
                     {"model_bytes", r.model_bytes},
                     {"notes", r.notes}};
    j["timing"] = {{"mean_latency_ns", r.latency.mean_ns},
                   {"p50_latency_ns", r.latency.p50_ns},
                   {"p95_latency_ns", r.latency.p95_ns},
                   {"max_latency_ns", r.latency.max_ns},
                   {"energy_estimate_mj", energy_estimate_mj(r, power)},
                   {"power_mw", power.active_power_mw}};
    return j;
}

inline nlohmann::json result_to_json(const PipelineResult& r) {
    nlohmann::json j{{"pipeline", pipeline_name(r.pipeline)}, {"rejected", r.rejected}};
    if (r.estimate) j["estimate"] = *r.estimate;
    if (r.rejected && r.reject_reason) j["reject_reason"] = r.reject_reason;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : r.stage_times) stages.push_back({{"name", s.name}, {"ns", s.ns}});
    j["timing"] = {{"stages", stages}, {"total_ns", r.total_ns()}};
    return j;
}

namespace report_detail {

inline std::string fmt(double v, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

} // namespace report_detail

// Side-by-side comparison of the three pipelines, one metric per row.
inline std::string comparison_markdown(const EvalReport& sp, const EvalReport& hybrid,
                                       const EvalReport& ml, const PowerModel& power) {
    using report_detail::fmt;
    auto us = [](const EvalReport& r) {
        return report_detail::fmt(static_cast<double>(r.latency.mean_ns) / 1000.0);
    };
    std::string out;
    out += "| Metric | Signal Processing | Hybrid | ML |\n";
    out += "|---|---|---|---|\n";
    out += "| Model size (bytes) | " + std::to_string(sp.model_bytes) + " | " +
           std::to_string(hybrid.model_bytes) + " | " + std::to_string(ml.model_bytes) + " |\n";
    out += "| Mean inference time (us) | " + us(sp) + " | " + us(hybrid) + " | " + us(ml) + " |\n";
    out += "| Estimated inference energy (mJ) | " + fmt(energy_estimate_mj(sp, power), "%.6f") +
           " | " + fmt(energy_estimate_mj(hybrid, power), "%.6f") + " | " +
           fmt(energy_estimate_mj(ml, power), "%.6f") + " |\n";
    out += "| MAE, entire data set (BPM) | " + fmt(sp.mae_entire_bpm) + " | " +
           fmt(hybrid.mae_entire_bpm) + " | " + fmt(ml.mae_entire_bpm) + " |\n";
    out += "| MAE, test set (BPM) | " + fmt(sp.mae_bpm) + " | " + fmt(hybrid.mae_bpm) + " | " +
           fmt(ml.mae_bpm) + " |\n";
    out += "| Acceptance rate | " + fmt(sp.acceptance_rate) + " | " + fmt(hybrid.acceptance_rate) +
           " | " + fmt(ml.acceptance_rate) + " |\n";
    return out;
}

} // namespace pulseline
