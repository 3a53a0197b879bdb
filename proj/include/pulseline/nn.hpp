#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/rng.hpp"

namespace pulseline {

enum class LayerKind : std::uint8_t { Dense = 0, Conv1D = 1 };
enum class Activation : std::uint8_t { None = 0, ReLU = 1, Sine = 2, Sigmoid = 3 };
enum class LossKind : std::uint8_t { MSE, BCE };
enum class OptimizerKind : std::uint8_t { SGD, Adam };
enum class CheckpointMetric : std::uint8_t { ValRMSE, ValF1, ValLoss };

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    Activation activation = Activation::None;
    // Dense
    std::size_t in_dim = 0, out_dim = 0;
    // Conv1D: cross-correlation, stride 1, no padding, one bias per output channel
    std::size_t in_channels = 0, out_channels = 0, kernel = 0, in_length = 0;

    static LayerSpec dense(std::size_t in, std::size_t out, Activation act) {
        LayerSpec s;
        s.kind = LayerKind::Dense;
        s.activation = act;
        s.in_dim = in;
        s.out_dim = out;
        return s;
    }

    static LayerSpec conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                            std::size_t in_length, Activation act) {
        LayerSpec s;
        s.kind = LayerKind::Conv1D;
        s.activation = act;
        s.in_channels = in_ch;
        s.out_channels = out_ch;
        s.kernel = kernel;
        s.in_length = in_length;
        return s;
    }

    std::size_t out_length() const { return in_length - kernel + 1; }

    // flattened I/O sizes; conv data is channel-major [c][t]
    std::size_t input_size() const {
        return kind == LayerKind::Dense ? in_dim : in_channels * in_length;
    }
    std::size_t output_size() const {
        return kind == LayerKind::Dense ? out_dim : out_channels * out_length();
    }

    std::size_t weight_count() const {
        return kind == LayerKind::Dense ? in_dim * out_dim : out_channels * in_channels * kernel;
    }
    std::size_t bias_count() const {
        return kind == LayerKind::Dense ? out_dim : out_channels;
    }

    void validate(std::size_t layer_index) const {
        const std::string where = "layer " + std::to_string(layer_index);
        if (kind == LayerKind::Dense) {
            if (in_dim == 0 || out_dim == 0)
                throw ShapeError(where + " (dense): zero dimension");
        } else {
            if (in_channels == 0 || out_channels == 0 || kernel == 0 || in_length == 0)
                throw ShapeError(where + " (conv1d): zero dimension");
            if (in_length < kernel)
                throw ShapeError(where + " (conv1d): kernel longer than input");
        }
    }
};

struct Layer {
    LayerSpec spec;
    std::vector<double> weights;  // Dense: out x in row-major; Conv1D: [oc][ic][k]
    std::vector<double> biases;
};

struct Model {
    std::vector<Layer> layers;

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().spec.input_size(); }
    std::size_t output_size() const { return layers.empty() ? 0 : layers.back().spec.output_size(); }
};

inline std::size_t param_count(const Model& model) {
    std::size_t n = 0;
    for (const auto& l : model.layers) n += l.weights.size() + l.biases.size();
    return n;
}

inline void validate_model(const Model& model) {
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& l = model.layers[i];
        l.spec.validate(i);
        if (l.weights.size() != l.spec.weight_count() || l.biases.size() != l.spec.bias_count())
            throw ShapeError("layer " + std::to_string(i) + ": parameter buffers disagree with spec");
        if (i > 0 && model.layers[i - 1].spec.output_size() != l.spec.input_size())
            throw ShapeError("layer " + std::to_string(i) + ": input size " +
                             std::to_string(l.spec.input_size()) + " does not match previous output " +
                             std::to_string(model.layers[i - 1].spec.output_size()));
    }
}

// Seeded uniform init in +-sqrt(6/(fan_in+fan_out)); biases start at zero.
inline Model make_model(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    Model m;
    SplitMix64 rng(seed);
    for (const auto& spec : specs) {
        Layer l;
        l.spec = spec;
        std::size_t fan_in, fan_out;
        if (spec.kind == LayerKind::Dense) {
            fan_in = spec.in_dim;
            fan_out = spec.out_dim;
        } else {
            fan_in = spec.in_channels * spec.kernel;
            fan_out = spec.out_channels * spec.kernel;
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        l.weights.resize(spec.weight_count());
        for (auto& w : l.weights) w = rng.uniform(-bound, bound);
        l.biases.assign(spec.bias_count(), 0.0);
        m.layers.push_back(std::move(l));
    }
    validate_model(m);
    return m;
}

// ---------------------------------------------------------------------------
// activations & losses
// ---------------------------------------------------------------------------

inline double activation_apply(Activation kind, double x) {
    switch (kind) {
    case Activation::None: return x;
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::Sine: return std::sin(x);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

// derivative w.r.t. the pre-activation; `post` avoids recomputing sigmoid
inline double activation_deriv(Activation kind, double pre, double post) {
    switch (kind) {
    case Activation::None: return 1.0;
    case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Sine: return std::cos(pre);
    case Activation::Sigmoid: return post * (1.0 - post);
    }
    return 1.0;
}

inline constexpr double kBceClamp = 1e-7;  // keeps log() finite

inline double loss_eval(LossKind loss, const std::vector<double>& pred,
                        const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeError("loss_eval: prediction/target length mismatch");
    const double n = static_cast<double>(pred.size());
    double acc = 0.0;
    if (loss == LossKind::MSE) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = pred[i] - target[i];
            acc += d * d;
        }
    } else {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
            acc -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
        }
    }
    return acc / n;
}

namespace nn_detail {

inline void loss_grad(LossKind loss, const std::vector<double>& pred,
                      const std::vector<double>& target, std::vector<double>& out) {
    const double n = static_cast<double>(pred.size());
    out.resize(pred.size());
    if (loss == LossKind::MSE) {
        for (std::size_t i = 0; i < pred.size(); ++i)
            out[i] = 2.0 * (pred[i] - target[i]) / n;
    } else {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
            out[i] = (p - target[i]) / (p * (1.0 - p) * n);
        }
    }
}

} // namespace nn_detail

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

// Per-layer output shapes as (channels, length); dense outputs are (1, n).
struct ShapeTrace {
    struct Entry {
        std::size_t channels, length;
    };
    std::vector<Entry> shapes;  // input shape first, then one entry per layer
};

// Activations captured layer by layer so backward can reuse them.
struct ForwardCache {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer
};

namespace nn_detail {

inline void layer_forward(const Layer& l, const std::vector<double>& in,
                          std::vector<double>& pre, std::vector<double>& post) {
    const auto& s = l.spec;
    pre.resize(s.output_size());
    post.resize(s.output_size());
    if (s.kind == LayerKind::Dense) {
        for (std::size_t o = 0; o < s.out_dim; ++o) {
            double acc = l.biases[o];
            const double* w = l.weights.data() + o * s.in_dim;
            for (std::size_t i = 0; i < s.in_dim; ++i) acc += w[i] * in[i];
            pre[o] = acc;
        }
    } else {
        const std::size_t lout = s.out_length();
        for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
            double* dst = pre.data() + oc * lout;
            for (std::size_t t = 0; t < lout; ++t) dst[t] = l.biases[oc];
            for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
                const double* src = in.data() + ic * s.in_length;
                const double* w = l.weights.data() + (oc * s.in_channels + ic) * s.kernel;
                for (std::size_t k = 0; k < s.kernel; ++k) {
                    const double wk = w[k];
                    for (std::size_t t = 0; t < lout; ++t) dst[t] += wk * src[t + k];
                }
            }
        }
    }
    for (std::size_t i = 0; i < pre.size(); ++i)
        post[i] = activation_apply(s.activation, pre[i]);
}

} // namespace nn_detail

inline std::vector<double> forward_cached(const Model& model, const std::vector<double>& input,
                                          ForwardCache& cache, ShapeTrace* trace = nullptr) {
    if (model.layers.empty()) throw ShapeError("forward: empty model");
    if (input.size() != model.input_size())
        throw ShapeError("layer 0: expected input size " + std::to_string(model.input_size()) +
                         ", got " + std::to_string(input.size()));
    cache.pre.resize(model.layers.size());
    cache.post.resize(model.layers.size());
    if (trace) {
        trace->shapes.clear();
        const auto& s0 = model.layers.front().spec;
        if (s0.kind == LayerKind::Conv1D)
            trace->shapes.push_back({s0.in_channels, s0.in_length});
        else
            trace->shapes.push_back({1, s0.in_dim});
    }
    const std::vector<double>* cur = &input;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        nn_detail::layer_forward(model.layers[i], *cur, cache.pre[i], cache.post[i]);
        if (trace) {
            const auto& s = model.layers[i].spec;
            if (s.kind == LayerKind::Conv1D)
                trace->shapes.push_back({s.out_channels, s.out_length()});
            else
                trace->shapes.push_back({1, s.out_dim});
        }
        cur = &cache.post[i];
    }
    return cache.post.back();
}

inline std::vector<double> forward(const Model& model, const std::vector<double>& input,
                                   ShapeTrace* trace = nullptr) {
    ForwardCache cache;
    return forward_cached(model, input, cache, trace);
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

struct Gradients {
    std::vector<std::vector<double>> weights, biases;

    static Gradients zeros_like(const Model& model) {
        Gradients g;
        g.weights.reserve(model.layers.size());
        g.biases.reserve(model.layers.size());
        for (const auto& l : model.layers) {
            g.weights.emplace_back(l.weights.size(), 0.0);
            g.biases.emplace_back(l.biases.size(), 0.0);
        }
        return g;
    }

    void reset() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
    }

    void scale(double s) {
        for (auto& w : weights)
            for (auto& v : w) v *= s;
        for (auto& b : biases)
            for (auto& v : b) v *= s;
    }
};

namespace nn_detail {

// scratch buffers reused across samples
struct BackwardScratch {
    std::vector<double> delta, delta_prev;
};

inline void backward_pass(const Model& model, const std::vector<double>& input,
                          const std::vector<double>& target, LossKind loss,
                          const ForwardCache& cache, Gradients& grads, BackwardScratch& scratch) {
    auto& delta = scratch.delta;
    auto& delta_prev = scratch.delta_prev;
    loss_grad(loss, cache.post.back(), target, delta);

    for (std::size_t li = model.layers.size(); li-- > 0;) {
        const Layer& l = model.layers[li];
        const auto& s = l.spec;
        const std::vector<double>& in = li == 0 ? input : cache.post[li - 1];
        const std::vector<double>& pre = cache.pre[li];
        const std::vector<double>& post = cache.post[li];

        // delta currently holds dL/dpost; fold in the activation
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta[i] *= activation_deriv(s.activation, pre[i], post[i]);

        double* gw = grads.weights[li].data();
        double* gb = grads.biases[li].data();

        if (s.kind == LayerKind::Dense) {
            delta_prev.assign(s.in_dim, 0.0);
            for (std::size_t o = 0; o < s.out_dim; ++o) {
                const double d = delta[o];
                gb[o] += d;
                const double* w = l.weights.data() + o * s.in_dim;
                double* gwo = gw + o * s.in_dim;
                for (std::size_t i = 0; i < s.in_dim; ++i) {
                    gwo[i] += d * in[i];
                    delta_prev[i] += d * w[i];
                }
            }
        } else {
            const std::size_t lout = s.out_length();
            delta_prev.assign(s.in_channels * s.in_length, 0.0);
            for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
                const double* d = delta.data() + oc * lout;
                double acc_b = 0.0;
                for (std::size_t t = 0; t < lout; ++t) acc_b += d[t];
                gb[oc] += acc_b;
                for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
                    const double* src = in.data() + ic * s.in_length;
                    const double* w = l.weights.data() + (oc * s.in_channels + ic) * s.kernel;
                    double* gwk = gw + (oc * s.in_channels + ic) * s.kernel;
                    double* dp = delta_prev.data() + ic * s.in_length;
                    for (std::size_t k = 0; k < s.kernel; ++k) {
                        double acc_w = 0.0;
                        const double wk = w[k];
                        for (std::size_t t = 0; t < lout; ++t) {
                            acc_w += d[t] * src[t + k];
                            dp[t + k] += d[t] * wk;
                        }
                        gwk[k] += acc_w;
                    }
                }
            }
        }
        std::swap(delta, delta_prev);
    }
}

} // namespace nn_detail

// Accumulates this sample's gradients into `grads` (callers zero/scale as
// they see fit); cache and scratch are reused across calls.
inline double backward_accumulate(const Model& model, const std::vector<double>& input,
                                  const std::vector<double>& target, LossKind loss,
                                  Gradients& grads, ForwardCache& cache,
                                  nn_detail::BackwardScratch& scratch) {
    const auto pred = forward_cached(model, input, cache);
    if (pred.size() != target.size())
        throw ShapeError("backward: target size " + std::to_string(target.size()) +
                         " does not match model output " + std::to_string(pred.size()));
    nn_detail::backward_pass(model, input, target, loss, cache, grads, scratch);
    return loss_eval(loss, pred, target);
}

// One-shot exact reverse-mode gradients for a single (input, target) pair.
inline Gradients backward(const Model& model, const std::vector<double>& input,
                          const std::vector<double>& target, LossKind loss) {
    Gradients grads = Gradients::zeros_like(model);
    ForwardCache cache;
    nn_detail::BackwardScratch scratch;
    backward_accumulate(model, input, target, loss, grads, cache, scratch);
    return grads;
}

// ---------------------------------------------------------------------------
// optimizers
// ---------------------------------------------------------------------------

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::SGD;
    double learning_rate = 0.01;
    double weight_decay = 0.0;  // decoupled; see optimizer_step
    std::size_t epochs = 100;
    LossKind loss = LossKind::MSE;
    CheckpointMetric checkpoint_metric = CheckpointMetric::ValLoss;
    std::uint64_t seed = 0;
    std::size_t batch_size = 32;  // 0 = full batch
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
        if (weight_decay < 0.0 || weight_decay >= 1.0)
            throw ConfigError("TrainConfig: weight_decay must be in [0, 1)");
        if (epochs == 0) throw ConfigError("TrainConfig: epochs must be >= 1");
    }
};

struct OptimizerState {
    std::size_t step = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;  // Adam moments

    static OptimizerState for_model(const Model& model) {
        OptimizerState st;
        for (const auto& l : model.layers) {
            st.m_w.emplace_back(l.weights.size(), 0.0);
            st.v_w.emplace_back(l.weights.size(), 0.0);
            st.m_b.emplace_back(l.biases.size(), 0.0);
            st.v_b.emplace_back(l.biases.size(), 0.0);
        }
        return st;
    }
};

namespace nn_detail {

inline void sgd_update(std::vector<double>& param, const std::vector<double>& grad,
                       double lr, double wd) {
    for (std::size_t i = 0; i < param.size(); ++i)
        param[i] -= lr * (grad[i] + wd * param[i]);
}

inline void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                        std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                        double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        // decoupled decay, outside the adaptive denominator
        param[i] -= cfg.learning_rate * cfg.weight_decay * param[i];
    }
}

} // namespace nn_detail

inline void optimizer_step(Model& model, const Gradients& grads, const TrainConfig& cfg,
                           OptimizerState& state) {
    if (cfg.optimizer == OptimizerKind::SGD) {
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            nn_detail::sgd_update(model.layers[li].weights, grads.weights[li], cfg.learning_rate,
                                  cfg.weight_decay);
            nn_detail::sgd_update(model.layers[li].biases, grads.biases[li], cfg.learning_rate,
                                  cfg.weight_decay);
        }
        ++state.step;
        return;
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        nn_detail::adam_update(model.layers[li].weights, grads.weights[li], state.m_w[li],
                               state.v_w[li], cfg, bc1, bc2);
        nn_detail::adam_update(model.layers[li].biases, grads.biases[li], state.m_b[li],
                               state.v_b[li], cfg, bc1, bc2);
    }
}

} // namespace pulseline
