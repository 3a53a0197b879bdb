#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pulseline/dataset.hpp"
#include "pulseline/metrics.hpp"
#include "pulseline/pipelines.hpp"

namespace pulseline {

struct BenchOptions {
    std::size_t repeats = 10;  // measured passes per frame
    std::size_t warmup = 5;    // discarded pipeline invocations before timing
    PowerModel power;
};

namespace bench_detail {

inline Frame to_low_rate(const Frame& frame12) {
    Frame f = normalize(downsample(frame12, 2));
    return f;
}

inline PipelineResult dispatch(PipelineKind kind, const Frame& input, const PipelineContext& ctx) {
    switch (kind) {
    case PipelineKind::SP: return run_sp(input, ctx.filters);
    case PipelineKind::ML: return run_ml(input, ctx);
    case PipelineKind::Hybrid: return run_hybrid(input, ctx);
    }
    throw ConfigError("bench: unknown pipeline");
}

} // namespace bench_detail

// Latency, acceptance, and accuracy-over-accepted-frames for one pipeline
// over a dataset. MAE/RMSE and gate accuracy are reported on the test split;
// acceptance rate and the "entire" MAE cover the whole dataset. Inputs are
// derived before any clock starts; timing wraps the pipeline call alone.
inline EvalReport bench_pipeline(PipelineKind kind, const Dataset& ds, const PipelineContext& ctx,
                                 const BenchOptions& opt = {}) {
    if (opt.repeats < 10) throw ConfigError("bench_pipeline: repeats must be >= 10");
    if (ds.frames.empty()) throw DataError("bench_pipeline: empty dataset");

    // pipeline inputs, derived up front
    std::vector<Frame> inputs;
    inputs.reserve(ds.frames.size());
    for (const auto& f : ds.frames) {
        if (f.samples.size() != kHighRateLen)
            throw DataError("bench_pipeline: dataset frames must be the canonical 12 Hz frames");
        inputs.push_back(kind == PipelineKind::SP ? f : bench_detail::to_low_rate(f));
    }

    for (std::size_t w = 0; w < opt.warmup; ++w)
        (void)bench_detail::dispatch(kind, inputs[w % inputs.size()], ctx);

    std::vector<std::uint64_t> lat;
    lat.reserve(ds.frames.size() * opt.repeats);
    std::vector<PipelineResult> results;
    results.reserve(ds.frames.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        PipelineResult last;
        for (std::size_t rep = 0; rep < opt.repeats; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            last = bench_detail::dispatch(kind, inputs[i], ctx);
            const auto t1 = std::chrono::steady_clock::now();
            lat.push_back(static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
        }
        results.push_back(std::move(last));
    }

    EvalReport report;
    report.latency = latency_stats(std::move(lat));

    std::size_t accepted = 0;
    std::vector<double> pred_all, truth_all, pred_test, truth_test;
    std::vector<bool> gate_pred, gate_truth;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        const Frame& f = ds.frames[i];
        if (!res.rejected) ++accepted;
        if (!res.rejected && f.hr_truth) {
            pred_all.push_back(*res.estimate);
            truth_all.push_back(*f.hr_truth);
            if (ds.split_assignment[i] == Split::Test) {
                pred_test.push_back(*res.estimate);
                truth_test.push_back(*f.hr_truth);
            }
        }
        if (f.label != QualityLabel::Unlabeled && ds.split_assignment[i] == Split::Test) {
            gate_pred.push_back(res.rejected);
            gate_truth.push_back(f.label == QualityLabel::Abnormal);
        }
    }
    report.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(results.size());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (pred_test.empty()) {
        report.mae_bpm = nan;
        report.rmse_bpm = nan;
        report.notes.push_back("no accepted test frames with ground truth");
    } else {
        report.mae_bpm = mae(pred_test, truth_test);
        report.rmse_bpm = rmse(pred_test, truth_test);
    }
    report.mae_entire_bpm = pred_all.empty() ? nan : mae(pred_all, truth_all);
    if (!gate_pred.empty()) {
        const F1Accuracy fa = f1_accuracy(gate_pred, gate_truth);
        report.accuracy = fa.accuracy;
        report.f1 = fa.f1;
    }

    switch (kind) {
    case PipelineKind::SP:
        report.model_bytes = 0;
        report.notes.push_back(
            "signal processing carries no learned parameters; configuration bytes are not counted");
        break;
    case PipelineKind::ML:
        report.model_bytes = ctx.upsampler_bytes + ctx.classifier_bytes + ctx.regressor_bytes;
        break;
    case PipelineKind::Hybrid:
        report.model_bytes = ctx.upsampler_bytes + ctx.classifier_bytes;
        break;
    }
    return report;
}

} // namespace pulseline
