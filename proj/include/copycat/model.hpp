#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copycat/tensor.hpp"

namespace copycat {

enum class LayerKind { Conv2D, MaxPool, ReLU, Flatten, Dense };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    int out_channels = 0;  // Conv2D
    int kernel = 0;        // Conv2D / MaxPool
    int stride = 1;        // Conv2D / MaxPool
    int pad = 0;           // Conv2D
    int out_features = 0;  // Dense

    static LayerSpec conv2d(int out_channels, int kernel, int stride = 1, int pad = 0);
    static LayerSpec maxpool(int kernel, int stride);
    static LayerSpec relu();
    static LayerSpec flatten();
    static LayerSpec dense(int out_features);
};

struct Shape3 {
    int c = 0, h = 0, w = 0;
};

// Feed-forward classifier. weights/biases run parallel to layers; layers
// without parameters hold empty tensors. Layers at index >= head_start form
// the "head" group, everything before is the "backbone".
struct Model {
    Shape3 input;
    std::vector<LayerSpec> layers;
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
    int n_classes = 0;
    int head_start = 0;

    bool layer_in_head(int i) const { return i >= head_start; }
    long long param_count() const;
};

// Uniform Glorot samples in [-L, L], L = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_init(int fan_in, int fan_out, std::vector<int> shape, std::uint64_t seed);

// Validates the stack, derives parameter shapes, Glorot weights, zero biases.
// The head is the final Dense layer unless head_start is set afterwards.
Model build_model(Shape3 input, std::vector<LayerSpec> layers, int n_classes, std::uint64_t seed);

// Conv(16,3x3)/ReLU/Pool2 - Conv(32,3x3)/ReLU/Pool2 - Flatten - Dense(64)/ReLU - Dense(n)
std::vector<LayerSpec> default_arch(int n_classes);

struct ForwardTrace {
    std::vector<Tensor> acts;                    // acts[0] = batch, acts[i+1] = layer i output
    std::vector<std::vector<int>> pool_argmax;   // per layer, flat indices into that layer's input
};

Tensor forward(const Model& m, const Tensor& batch);
ForwardTrace forward_trace(const Model& m, const Tensor& batch);

std::vector<int> argmax_rows(const Tensor& logits);  // ties -> lowest index
std::vector<int> predict(const Model& m, const Tensor& batch);

struct Gradients {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
    static Gradients zeros_like(const Model& m);
};

// dlogits is dLoss/dlogits for the traced batch.
Gradients backward(const Model& m, const ForwardTrace& trace, const Tensor& dlogits);

}  // namespace copycat
