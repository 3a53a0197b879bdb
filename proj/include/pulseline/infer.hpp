#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/nn.hpp"

namespace pulseline {

// Deployment-style inference: float32 parameters (exactly the serialized
// precision) and float32 arithmetic. Training and the reference forward()
// stay in float64; pipelines run on this path, so estimates depend only on
// the bits that actually ship in a model file.

// Vectorizable sine for the Sine activation, reduced to [-pi/2, pi/2] with a
// degree-9 odd minimax polynomial; |error| is a few ulp of float32 across
// the reduced range.
inline float fast_sinf(float x) {
    const float k = std::nearbyintf(x * 0.318309886183790672f);  // 1/pi
    const float y = x - k * 3.14159265358979324f;
    const float y2 = y * y;
    float p = 2.7525562e-06f;
    p = p * y2 - 0.00019840874f;
    p = p * y2 + 0.0083333310f;
    p = p * y2 - 0.16666667f;
    const float s = y + y * y2 * p;
    return (static_cast<int>(k) & 1) ? -s : s;
}

struct InferenceModel {
    struct Layer {
        LayerSpec spec;
        std::vector<float> weights, biases;
    };
    std::vector<Layer> layers;
    std::size_t scratch_size = 0;  // max flattened activation size

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().spec.input_size(); }
    std::size_t output_size() const { return layers.empty() ? 0 : layers.back().spec.output_size(); }

    static InferenceModel compile(const Model& model) {
        validate_model(model);
        InferenceModel im;
        im.scratch_size = model.input_size();
        for (const auto& l : model.layers) {
            Layer cl;
            cl.spec = l.spec;
            cl.weights.reserve(l.weights.size());
            for (double w : l.weights) cl.weights.push_back(static_cast<float>(w));
            cl.biases.reserve(l.biases.size());
            for (double b : l.biases) cl.biases.push_back(static_cast<float>(b));
            im.scratch_size = std::max(im.scratch_size, cl.spec.output_size());
            im.layers.push_back(std::move(cl));
        }
        return im;
    }
};

struct InferenceWorkspace {
    std::vector<float> a, b;
};

namespace infer_detail {

inline void apply_activation(Activation act, float* v, std::size_t n) {
    switch (act) {
    case Activation::None:
        break;
    case Activation::ReLU:
        for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0f ? v[i] : 0.0f;
        break;
    case Activation::Sine:
        for (std::size_t i = 0; i < n; ++i) v[i] = fast_sinf(v[i]);
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0f / (1.0f + std::exp(-v[i]));
        break;
    }
}

inline void layer_run(const InferenceModel::Layer& l, const float* in, float* out) {
    const auto& s = l.spec;
    if (s.kind == LayerKind::Dense) {
        for (std::size_t o = 0; o < s.out_dim; ++o) {
            float acc = l.biases[o];
            const float* w = l.weights.data() + o * s.in_dim;
            for (std::size_t i = 0; i < s.in_dim; ++i) acc += w[i] * in[i];
            out[o] = acc;
        }
    } else {
        const std::size_t lout = s.out_length();
        for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
            float* dst = out + oc * lout;
            const float bias = l.biases[oc];
            for (std::size_t t = 0; t < lout; ++t) dst[t] = bias;
            for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
                const float* src = in + ic * s.in_length;
                const float* w = l.weights.data() + (oc * s.in_channels + ic) * s.kernel;
                for (std::size_t k = 0; k < s.kernel; ++k) {
                    const float wk = w[k];
                    for (std::size_t t = 0; t < lout; ++t) dst[t] += wk * src[t + k];
                }
            }
        }
    }
    apply_activation(s.activation, out, s.output_size());
}

} // namespace infer_detail

// Runs the model; the returned reference points into the workspace and stays
// valid until the next call with the same workspace.
inline const std::vector<float>& infer_run(const InferenceModel& m, std::span<const float> input,
                                           InferenceWorkspace& ws) {
    if (m.layers.empty()) throw ShapeError("infer_run: empty model");
    if (input.size() != m.input_size())
        throw ShapeError("layer 0: expected input size " + std::to_string(m.input_size()) +
                         ", got " + std::to_string(input.size()));
    ws.a.resize(m.scratch_size);
    ws.b.resize(m.scratch_size);
    std::copy(input.begin(), input.end(), ws.a.begin());
    float* cur = ws.a.data();
    float* nxt = ws.b.data();
    for (const auto& l : m.layers) {
        infer_detail::layer_run(l, cur, nxt);
        std::swap(cur, nxt);
    }
    auto& out = (cur == ws.a.data()) ? ws.a : ws.b;
    out.resize(m.output_size());
    return out;
}

} // namespace pulseline
