#pragma once

#include <cstdint>
#include <filesystem>

#include "fermech/tensor.hpp"

namespace fermech::backbone {

enum class InputKind { vector, image };

// Miniature trainable network with the two tap points the training scheme
// needs: input -> affine+ReLU -> mid feature map -> affine+ReLU -> high
// feature vector -> affine -> logits.
struct Config {
    InputKind input_kind = InputKind::vector;
    std::size_t input_dim = 0;  // d for vector input, h*w*c for image input
    std::size_t image_h = 0, image_w = 0, image_c = 0;
    std::size_t mid_channels = 8;
    std::size_t mid_h = 2, mid_w = 2;
    std::size_t high_dim = 32;
    int num_classes = 6;
    std::uint64_t seed = 0;

    std::size_t mid_flat() const { return mid_channels * mid_h * mid_w; }
    void validate() const;
};

struct State {
    Config cfg;
    Tensor w1, b1;  // [input_dim x mid_flat], [mid_flat]
    Tensor w2, b2;  // [mid_flat x high_dim], [high_dim]
    Tensor w3, b3;  // [high_dim x num_classes], [num_classes]
    std::uint64_t step = 0;
};

// Mid-level map, pooled high-level vector and classifier logits for one sample.
struct ForwardTaps {
    Tensor mid;     // mid_channels x mid_h x mid_w
    Tensor high;    // high_dim
    Tensor logits;  // num_classes
};

// Taps plus the pre-activation values backward passes need.
struct ForwardCache {
    Tensor input;
    Tensor pre1;  // affine1 output before ReLU
    Tensor pre2;  // affine2 output before ReLU
    ForwardTaps taps;
};

struct Grads {
    Tensor w1, b1, w2, b2, w3, b3;
};

// Weights and biases drawn uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the
// seeded generator, in a fixed order.
State init(const Config& cfg);

ForwardTaps forward(const State& s, const Tensor& input);
ForwardCache forward_cached(const State& s, const Tensor& input);

// Per-channel spatial mean: C x H x W -> C.
Tensor gap(const Tensor& mid);

Grads zero_grads(const Config& cfg);

// Backward through logits -> high -> mid. Accumulates head-layer gradients
// into `g` and returns d(loss)/d(mid map); the caller combines it with any
// gradient arriving at the mid tap from elsewhere before calling
// backward_stem.
Tensor backward_head(const State& s, const ForwardCache& c, const Tensor& dlogits, Grads& g);

// Backward through the mid map into the first layer.
void backward_stem(const State& s, const ForwardCache& c, const Tensor& dmid, Grads& g);

// w <- w - lr*g elementwise; step counter incremented. Non-finite gradients
// raise NumericError naming the parameter.
State sgd_step(const State& s, const Grads& g, double lr);

// Versioned text checkpoint (config + parameters as hexfloats); save/load
// round-trips bit-exactly.
void save_checkpoint(const State& s, const std::filesystem::path& path);
State load_checkpoint(const std::filesystem::path& path);

// Stream forms, for embedding the backbone in a larger checkpoint.
void write_section(std::ostream& os, const State& s);
State read_section(std::istream& is);

}  // namespace fermech::backbone
