#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "pulseline/dsp.hpp"
#include "pulseline/errors.hpp"
#include "pulseline/frame.hpp"
#include "pulseline/infer.hpp"
#include "pulseline/model_io.hpp"
#include "pulseline/models.hpp"

namespace pulseline {

enum class PipelineKind : std::uint8_t { SP = 0, ML = 1, Hybrid = 2 };

inline const char* pipeline_name(PipelineKind k) {
    switch (k) {
    case PipelineKind::SP: return "sp";
    case PipelineKind::ML: return "ml";
    case PipelineKind::Hybrid: return "hybrid";
    }
    return "?";
}

struct StageTime {
    const char* name;
    std::uint64_t ns;
};

// Either an estimate or a rejection, never both; rejection is a first-class
// outcome (gate said no, or too few peaks), not an error.
struct PipelineResult {
    std::optional<double> estimate;  // BPM, within [30, 220] when present
    bool rejected = false;
    const char* reject_reason = nullptr;  // "gate" | "insufficient_peaks" | "out_of_band"
    std::vector<StageTime> stage_times;
    PipelineKind pipeline = PipelineKind::SP;

    std::uint64_t total_ns() const {
        std::uint64_t sum = 0;
        for (const auto& s : stage_times) sum += s.ns;
        return sum;
    }
};

// Compiled float32 models plus the classical-stage parameters; build once,
// run many frames.
struct PipelineContext {
    InferenceModel upsampler, classifier, regressor;
    FilterSpec filters;
    double gate_threshold = 0.5;
    std::size_t upsampler_bytes = 0, classifier_bytes = 0, regressor_bytes = 0;

    static PipelineContext from_bundle(const TrainedBundle& bundle, FilterSpec fs,
                                       double gate_threshold = 0.5) {
        fs.validate();
        PipelineContext ctx;
        ctx.upsampler = InferenceModel::compile(bundle.upsampler.model);
        ctx.classifier = InferenceModel::compile(bundle.classifier.model);
        ctx.regressor = InferenceModel::compile(bundle.regressor.model);
        ctx.filters = std::move(fs);
        ctx.gate_threshold = gate_threshold;
        ctx.upsampler_bytes = serialize_model(bundle.upsampler.model).size();
        ctx.classifier_bytes = serialize_model(bundle.classifier.model).size();
        ctx.regressor_bytes = serialize_model(bundle.regressor.model).size();
        return ctx;
    }

    static PipelineContext from_models(const Model& up, const Model& cls, const Model& reg,
                                       FilterSpec fs, double gate_threshold = 0.5) {
        fs.validate();
        PipelineContext ctx;
        ctx.upsampler = InferenceModel::compile(up);
        ctx.classifier = InferenceModel::compile(cls);
        ctx.regressor = InferenceModel::compile(reg);
        ctx.filters = std::move(fs);
        ctx.gate_threshold = gate_threshold;
        ctx.upsampler_bytes = serialize_model(up).size();
        ctx.classifier_bytes = serialize_model(cls).size();
        ctx.regressor_bytes = serialize_model(reg).size();
        return ctx;
    }
};

namespace pipe_detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTime>& out) : out_(out) {
        last_ = std::chrono::steady_clock::now();
    }

    void mark(const char* name) {
        const auto now = std::chrono::steady_clock::now();
        out_.push_back({name, static_cast<std::uint64_t>(
                                  std::chrono::duration_cast<std::chrono::nanoseconds>(now - last_)
                                      .count())});
        last_ = now;
    }

private:
    std::vector<StageTime>& out_;
    std::chrono::steady_clock::time_point last_;
};

// Physiological range check shared by all pipelines.
inline void finish_with_estimate(PipelineResult& r, double bpm) {
    if (bpm < kMinHrBpm || bpm > kMaxHrBpm) {
        r.rejected = true;
        r.reject_reason = "out_of_band";
    } else {
        r.estimate = bpm;
    }
}

} // namespace pipe_detail

// Classical chain on the 12 Hz frame: median -> FIR -> detrend -> normalize
// -> 10x linear interpolation -> moving average -> peak detection -> HR.
inline PipelineResult run_sp(const Frame& frame12, const FilterSpec& spec) {
    if (frame12.samples.size() != kHighRateLen)
        throw ShapeError("run_sp: expected a " + std::to_string(kHighRateLen) + "-sample frame, got " +
                         std::to_string(frame12.samples.size()));
    PipelineResult r;
    r.pipeline = PipelineKind::SP;
    r.stage_times.reserve(8);
    pipe_detail::StageClock clock(r.stage_times);

    std::vector<double> x = median_filter(frame12.samples, spec.median_window);
    clock.mark("median");
    x = fir_filter(x, spec.fir_taps);
    clock.mark("fir");
    Frame f;
    f.samples = std::move(x);
    f.rate_hz = frame12.rate_hz;
    f = baseline_correct(f);
    clock.mark("baseline");
    f = normalize(f);
    clock.mark("normalize");
    std::vector<double> y = linear_interp(f.samples, spec.interp_factor);
    const double rate = frame12.rate_hz * spec.interp_factor;
    clock.mark("interp");
    y = moving_average(y, spec.ma_window);
    clock.mark("moving_average");
    const PeakSet peaks = detect_peaks(y, rate);
    clock.mark("detect_peaks");
    try {
        const double bpm = hr_from_peaks(peaks);
        clock.mark("hr_from_peaks");
        pipe_detail::finish_with_estimate(r, bpm);
    } catch (const InsufficientPeaks&) {
        clock.mark("hr_from_peaks");
        r.rejected = true;
        r.reject_reason = "insufficient_peaks";
    }
    return r;
}

namespace pipe_detail {

// Shared ML-path prefix: reconstruct at 12 Hz, then ask the gate. Both ML
// and Hybrid call this, so their rejection decisions agree by construction.
struct GateOutcome {
    std::vector<float> reconstruction;  // 69 samples, float32 path
    float p_abnormal = 0.0f;
    bool rejected = false;
};

inline GateOutcome gate_prefix(const Frame& frame6, const PipelineContext& ctx,
                               StageClock& clock, InferenceWorkspace& ws) {
    if (frame6.samples.size() != kLowRateLen)
        throw ShapeError("ml/hybrid: expected a " + std::to_string(kLowRateLen) +
                         "-sample frame, got " + std::to_string(frame6.samples.size()));
    GateOutcome g;
    std::vector<float> in(frame6.samples.begin(), frame6.samples.end());
    g.reconstruction = infer_run(ctx.upsampler, in, ws);
    clock.mark("upsample");
    g.p_abnormal = infer_run(ctx.classifier, g.reconstruction, ws)[0];
    g.rejected = g.p_abnormal > ctx.gate_threshold;
    clock.mark("classify");
    return g;
}

} // namespace pipe_detail

// Upsampler -> gate -> HR regressor. A gated frame never reaches the
// regressor (no "regress" entry in the stage ledger).
inline PipelineResult run_ml(const Frame& frame6, const PipelineContext& ctx) {
    PipelineResult r;
    r.pipeline = PipelineKind::ML;
    r.stage_times.reserve(3);
    pipe_detail::StageClock clock(r.stage_times);
    InferenceWorkspace ws;

    const auto gate = pipe_detail::gate_prefix(frame6, ctx, clock, ws);
    if (gate.rejected) {
        r.rejected = true;
        r.reject_reason = "gate";
        return r;
    }
    const double bpm = static_cast<double>(infer_run(ctx.regressor, gate.reconstruction, ws)[0]);
    clock.mark("regress");
    pipe_detail::finish_with_estimate(r, bpm);
    return r;
}

// Upsampler -> gate -> classical peak detection on the reconstruction.
inline PipelineResult run_hybrid(const Frame& frame6, const PipelineContext& ctx) {
    PipelineResult r;
    r.pipeline = PipelineKind::Hybrid;
    r.stage_times.reserve(6);
    pipe_detail::StageClock clock(r.stage_times);
    InferenceWorkspace ws;

    const auto gate = pipe_detail::gate_prefix(frame6, ctx, clock, ws);
    if (gate.rejected) {
        r.rejected = true;
        r.reject_reason = "gate";
        return r;
    }
    std::vector<double> recon(gate.reconstruction.begin(), gate.reconstruction.end());
    std::vector<double> y = linear_interp(recon, ctx.filters.interp_factor);
    const double rate = kHighRateHz * ctx.filters.interp_factor;
    clock.mark("interp");
    y = moving_average(y, ctx.filters.ma_window);
    clock.mark("moving_average");
    const PeakSet peaks = detect_peaks(y, rate);
    clock.mark("detect_peaks");
    try {
        const double bpm = hr_from_peaks(peaks);
        clock.mark("hr_from_peaks");
        pipe_detail::finish_with_estimate(r, bpm);
    } catch (const InsufficientPeaks&) {
        clock.mark("hr_from_peaks");
        r.rejected = true;
        r.reject_reason = "insufficient_peaks";
    }
    return r;
}

// Convenience one-shot overloads; bench and batch paths should build a
// PipelineContext once instead.
inline PipelineResult run_ml(const Frame& frame6, const TrainedBundle& bundle,
                             double gate_threshold = 0.5) {
    return run_ml(frame6, PipelineContext::from_bundle(bundle, FilterSpec::defaults(), gate_threshold));
}

inline PipelineResult run_hybrid(const Frame& frame6, const TrainedBundle& bundle,
                                 double gate_threshold = 0.5) {
    return run_hybrid(frame6,
                      PipelineContext::from_bundle(bundle, FilterSpec::defaults(), gate_threshold));
}

} // namespace pulseline
