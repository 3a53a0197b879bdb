#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pulseline/dataset.hpp"
#include "pulseline/dsp.hpp"
#include "pulseline/errors.hpp"
#include "pulseline/frame.hpp"
#include "pulseline/infer.hpp"
#include "pulseline/metrics.hpp"
#include "pulseline/nn.hpp"

namespace pulseline {

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

// Two dense layers, 35 -> hidden -> 69. The hidden width is sweepable
// (30..55); 55 is the default operating point. A 23-input variant covers the
// 4 Hz experiment.
inline Model build_upsampler(std::size_t hidden = 55, std::size_t in_dim = kLowRateLen,
                             std::size_t out_dim = kHighRateLen, std::uint64_t seed = 0) {
    return make_model({LayerSpec::dense(in_dim, hidden, Activation::ReLU),
                       LayerSpec::dense(hidden, out_dim, Activation::None)},
                      seed);
}

// 3-layer 1-D CNN gate; output is P(abnormal), decision threshold 0.5.
inline Model build_classifier(std::uint64_t seed = 0) {
    return make_model({LayerSpec::conv1d(1, 5, 5, kHighRateLen, Activation::ReLU),
                       LayerSpec::conv1d(5, 5, 5, 65, Activation::ReLU),
                       LayerSpec::dense(305, 1, Activation::Sigmoid)},
                      seed);
}

enum class RegressorVariant : std::uint8_t { CNN, FCN };

// Same CNN shape as the classifier but sine activations and a linear output
// (BPM), or the small sine FCN alternative.
inline Model build_regressor(RegressorVariant variant = RegressorVariant::CNN,
                             std::uint64_t seed = 0) {
    if (variant == RegressorVariant::CNN) {
        return make_model({LayerSpec::conv1d(1, 5, 5, kHighRateLen, Activation::Sine),
                           LayerSpec::conv1d(5, 5, 5, 65, Activation::Sine),
                           LayerSpec::dense(305, 1, Activation::None)},
                          seed);
    }
    return make_model({LayerSpec::dense(kHighRateLen, 8, Activation::Sine),
                       LayerSpec::dense(8, 8, Activation::Sine),
                       LayerSpec::dense(8, 1, Activation::None)},
                      seed);
}

// Published hyperparameters as defaults.
inline TrainConfig default_upsampler_config(std::uint64_t seed = 1) {
    TrainConfig c;
    c.optimizer = OptimizerKind::SGD;
    c.learning_rate = 0.9;
    c.weight_decay = 0.0;
    c.epochs = 2000;
    c.loss = LossKind::MSE;
    c.checkpoint_metric = CheckpointMetric::ValRMSE;
    c.batch_size = 0;  // full batch; lr 0.9 is only stable near full batch
    c.seed = seed;
    return c;
}

inline TrainConfig default_classifier_config(std::uint64_t seed = 2) {
    TrainConfig c;
    c.optimizer = OptimizerKind::Adam;
    c.learning_rate = 0.003;
    c.weight_decay = 0.0;
    c.epochs = 1000;
    c.loss = LossKind::BCE;
    c.checkpoint_metric = CheckpointMetric::ValF1;
    c.batch_size = 32;
    c.seed = seed;
    return c;
}

inline TrainConfig default_regressor_config(std::uint64_t seed = 3) {
    TrainConfig c;
    c.optimizer = OptimizerKind::Adam;
    c.learning_rate = 0.05;
    c.weight_decay = 0.05;
    c.epochs = 1000;
    c.loss = LossKind::MSE;
    c.checkpoint_metric = CheckpointMetric::ValRMSE;
    c.batch_size = 32;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------
// generic supervised training with per-epoch validation checkpointing
// ---------------------------------------------------------------------------

struct SampleSet {
    std::vector<std::vector<double>> inputs, targets;

    std::size_t size() const { return inputs.size(); }
};

struct TrainResult {
    Model model;            // checkpoint that was best on validation
    double best_val = 0.0;  // value of the checkpoint metric
    std::size_t best_epoch = 0;
    double final_train_loss = 0.0;
};

namespace train_detail {

inline double eval_checkpoint_metric(const Model& model, const SampleSet& val,
                                     const TrainConfig& cfg, ForwardCache& cache) {
    if (cfg.checkpoint_metric == CheckpointMetric::ValF1) {
        std::vector<bool> pred, truth;
        pred.reserve(val.size());
        truth.reserve(val.size());
        for (std::size_t i = 0; i < val.size(); ++i) {
            const auto& out = forward_cached(model, val.inputs[i], cache);
            pred.push_back(out[0] > 0.5);
            truth.push_back(val.targets[i][0] > 0.5);
        }
        return f1_accuracy(pred, truth).f1;
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < val.size(); ++i) {
        const auto& out = forward_cached(model, val.inputs[i], cache);
        if (cfg.checkpoint_metric == CheckpointMetric::ValRMSE) {
            for (std::size_t j = 0; j < out.size(); ++j) {
                const double d = out[j] - val.targets[i][j];
                acc += d * d;
                ++count;
            }
        } else {
            acc += loss_eval(cfg.loss, out, val.targets[i]);
            ++count;
        }
    }
    const double mean = acc / static_cast<double>(count);
    return cfg.checkpoint_metric == CheckpointMetric::ValRMSE ? std::sqrt(mean) : mean;
}

inline bool metric_improved(CheckpointMetric metric, double candidate, double best) {
    return metric == CheckpointMetric::ValF1 ? candidate > best : candidate < best;
}

} // namespace train_detail

inline TrainResult train_model(Model model, const SampleSet& train, const SampleSet& val,
                               const TrainConfig& cfg) {
    cfg.validate();
    if (train.size() == 0 || val.size() == 0)
        throw DataError("train_model: empty train or validation split");
    if (train.inputs.size() != train.targets.size() || val.inputs.size() != val.targets.size())
        throw DataError("train_model: inputs/targets length mismatch");

    Gradients grads = Gradients::zeros_like(model);
    OptimizerState opt = OptimizerState::for_model(model);
    ForwardCache cache;
    nn_detail::BackwardScratch scratch;
    SplitMix64 shuffle_rng(mix64(cfg.seed ^ 0x7EA1A1ULL));

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.best_val = train_detail::eval_checkpoint_metric(model, val, cfg, cache);
    result.best_epoch = 0;
    result.model = model;

    const std::size_t batch = cfg.batch_size == 0 ? train.size() : cfg.batch_size;
    double epoch_loss = 0.0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.batch_size != 0) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);
        }
        epoch_loss = 0.0;
        for (std::size_t start = 0; start < train.size(); start += batch) {
            const std::size_t end = std::min(start + batch, train.size());
            grads.reset();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = order[k];
                epoch_loss += backward_accumulate(model, train.inputs[idx], train.targets[idx],
                                                  cfg.loss, grads, cache, scratch);
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            optimizer_step(model, grads, cfg, opt);
        }
        epoch_loss /= static_cast<double>(train.size());
        if (!std::isfinite(epoch_loss))
            throw TrainingDiverged("train_model: loss is not finite at epoch " +
                                   std::to_string(epoch));

        const double val_metric = train_detail::eval_checkpoint_metric(model, val, cfg, cache);
        if (!std::isfinite(val_metric))
            throw TrainingDiverged("train_model: validation metric is not finite at epoch " +
                                   std::to_string(epoch));
        if (train_detail::metric_improved(cfg.checkpoint_metric, val_metric, result.best_val)) {
            result.best_val = val_metric;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    result.final_train_loss = epoch_loss;
    return result;
}

// ---------------------------------------------------------------------------
// dataset views for the three models
// ---------------------------------------------------------------------------

// Conditioning chain the upsampler is trained to reproduce: median and FIR
// smoothing, detrend, then min-max normalization of the 12 Hz frame.
inline std::vector<double> conditioned_high_rate(const Frame& f, const FilterSpec& fs) {
    Frame t = f;
    t.samples = median_filter(t.samples, fs.median_window);
    t.samples = fir_filter(t.samples, fs.fir_taps);
    t = baseline_correct(t);
    t = normalize(t);
    return std::move(t.samples);
}

// What the device actually feeds the ML path: the normalized 6 Hz frame.
inline std::vector<double> low_rate_input(const Frame& f) {
    return std::move(normalize(downsample(f, 2)).samples);
}

namespace train_detail {

inline std::vector<double> upsample_f64(const InferenceModel& up, const std::vector<double>& x35,
                                        InferenceWorkspace& ws) {
    std::vector<float> in(x35.begin(), x35.end());
    const auto& out = infer_run(up, in, ws);
    return std::vector<double>(out.begin(), out.end());
}

} // namespace train_detail

// ---------------------------------------------------------------------------
// per-model training entry points
// ---------------------------------------------------------------------------

struct ModelEval {
    // test-split numbers; units depend on the model (normalized amplitude for
    // the upsampler, BPM for the regressor)
    double rmse = 0.0;
    double mae = 0.0;
    double accuracy = 0.0;  // classifier only
    double f1 = 0.0;        // classifier only
};

struct TrainedModel {
    Model model;
    double best_val = 0.0;
    std::size_t best_epoch = 0;
    ModelEval test;
};

inline TrainedModel train_upsampler(const Dataset& ds, const FilterSpec& fs,
                                    const TrainConfig& cfg, std::size_t hidden = 55) {
    const SplitView sv = split(ds);
    if (sv.train.empty() || sv.val.empty() || sv.test.empty())
        throw DataError("train_upsampler: empty split");

    auto make_set = [&](const std::vector<std::size_t>& idx) {
        SampleSet s;
        s.inputs.reserve(idx.size());
        s.targets.reserve(idx.size());
        for (std::size_t i : idx) {
            s.inputs.push_back(low_rate_input(ds.frames[i]));
            s.targets.push_back(conditioned_high_rate(ds.frames[i], fs));
        }
        return s;
    };
    const SampleSet train = make_set(sv.train);
    const SampleSet val = make_set(sv.val);
    const SampleSet test = make_set(sv.test);

    TrainResult r = train_model(build_upsampler(hidden, kLowRateLen, kHighRateLen, cfg.seed),
                                train, val, cfg);

    TrainedModel out{std::move(r.model), r.best_val, r.best_epoch, {}};
    ForwardCache cache;
    double se = 0.0, ae = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& pred = forward_cached(out.model, test.inputs[i], cache);
        for (std::size_t j = 0; j < pred.size(); ++j) {
            const double d = pred[j] - test.targets[i][j];
            se += d * d;
            ae += std::abs(d);
            ++n;
        }
    }
    out.test.rmse = std::sqrt(se / static_cast<double>(n));
    out.test.mae = ae / static_cast<double>(n);
    return out;
}

// The classifier consumes upsampler reconstructions. Training additionally
// sees the normalized raw 12 Hz version of each abnormal training frame, so
// poor reconstructions of poor signals still land on the abnormal side.
inline TrainedModel train_classifier(const Dataset& ds, const FilterSpec& fs,
                                     const Model& upsampler, const TrainConfig& cfg) {
    (void)fs;
    const SplitView sv = split(ds);
    if (sv.train.empty() || sv.val.empty() || sv.test.empty())
        throw DataError("train_classifier: empty split");

    const InferenceModel up = InferenceModel::compile(upsampler);
    InferenceWorkspace ws;

    auto reconstructed = [&](std::size_t i) {
        return train_detail::upsample_f64(up, low_rate_input(ds.frames[i]), ws);
    };
    auto label_of = [&](std::size_t i) {
        return std::vector<double>{ds.frames[i].label == QualityLabel::Abnormal ? 1.0 : 0.0};
    };

    SampleSet train, val, test;
    for (std::size_t i : sv.train) {
        train.inputs.push_back(reconstructed(i));
        train.targets.push_back(label_of(i));
        if (ds.frames[i].label == QualityLabel::Abnormal) {
            train.inputs.push_back(normalize(ds.frames[i]).samples);
            train.targets.push_back({1.0});
        }
    }
    for (std::size_t i : sv.val) {
        val.inputs.push_back(reconstructed(i));
        val.targets.push_back(label_of(i));
    }
    for (std::size_t i : sv.test) {
        test.inputs.push_back(reconstructed(i));
        test.targets.push_back(label_of(i));
    }

    TrainResult r = train_model(build_classifier(cfg.seed), train, val, cfg);

    TrainedModel out{std::move(r.model), r.best_val, r.best_epoch, {}};
    ForwardCache cache;
    std::vector<bool> pred, truth;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pred.push_back(forward_cached(out.model, test.inputs[i], cache)[0] > 0.5);
        truth.push_back(test.targets[i][0] > 0.5);
    }
    const F1Accuracy fa = f1_accuracy(pred, truth);
    out.test.accuracy = fa.accuracy;
    out.test.f1 = fa.f1;
    return out;
}

// BPM regression on upsampled normal frames only; abnormal frames never
// reach the regressor in deployment, so they are excluded here too.
inline TrainedModel train_regressor(const Dataset& ds, const FilterSpec& fs,
                                    const Model& upsampler, const TrainConfig& cfg,
                                    RegressorVariant variant = RegressorVariant::CNN) {
    (void)fs;
    const SplitView sv = split(ds);
    const InferenceModel up = InferenceModel::compile(upsampler);
    InferenceWorkspace ws;

    auto make_set = [&](const std::vector<std::size_t>& idx) {
        SampleSet s;
        for (std::size_t i : idx) {
            const Frame& f = ds.frames[i];
            if (f.label != QualityLabel::Normal || !f.hr_truth) continue;
            s.inputs.push_back(train_detail::upsample_f64(up, low_rate_input(f), ws));
            s.targets.push_back({*f.hr_truth});
        }
        return s;
    };
    const SampleSet train = make_set(sv.train);
    const SampleSet val = make_set(sv.val);
    const SampleSet test = make_set(sv.test);
    if (train.size() == 0 || val.size() == 0 || test.size() == 0)
        throw DataError("train_regressor: no labeled normal frames in one of the splits");

    TrainResult r = train_model(build_regressor(variant, cfg.seed), train, val, cfg);

    TrainedModel out{std::move(r.model), r.best_val, r.best_epoch, {}};
    ForwardCache cache;
    std::vector<double> pred, truth;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pred.push_back(forward_cached(out.model, test.inputs[i], cache)[0]);
        truth.push_back(test.targets[i][0]);
    }
    out.test.rmse = rmse(pred, truth);
    out.test.mae = mae(pred, truth);
    return out;
}

// ---------------------------------------------------------------------------
// bundle
// ---------------------------------------------------------------------------

struct BundleConfigs {
    TrainConfig upsampler = default_upsampler_config();
    TrainConfig classifier = default_classifier_config();
    TrainConfig regressor = default_regressor_config();
};

struct TrainedBundle {
    TrainedModel upsampler, classifier, regressor;
    BundleConfigs configs;
};

inline void validate_bundle(const TrainedBundle& b) {
    if (b.upsampler.model.input_size() != kLowRateLen ||
        b.upsampler.model.output_size() != kHighRateLen)
        throw ShapeError("bundle: upsampler must map 35 -> 69");
    if (b.classifier.model.input_size() != kHighRateLen || b.classifier.model.output_size() != 1)
        throw ShapeError("bundle: classifier must map 69 -> 1");
    if (b.regressor.model.input_size() != kHighRateLen || b.regressor.model.output_size() != 1)
        throw ShapeError("bundle: regressor must map 69 -> 1");
}

inline TrainedBundle train_bundle(const Dataset& ds, const BundleConfigs& configs,
                                  const FilterSpec& fs) {
    TrainedBundle b;
    b.configs = configs;
    b.upsampler = train_upsampler(ds, fs, configs.upsampler);
    b.classifier = train_classifier(ds, fs, b.upsampler.model, configs.classifier);
    b.regressor = train_regressor(ds, fs, b.upsampler.model, configs.regressor);
    validate_bundle(b);
    return b;
}

} // namespace pulseline
