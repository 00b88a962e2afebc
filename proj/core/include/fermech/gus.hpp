#pragma once

#include <cstdint>
#include <vector>

#include "fermech/tensor.hpp"

namespace fermech::gus {

// Batch affinity graph: symmetric, nonnegative (negative similarities
// clamped by default), zero diagonal. Self-loops are added later, during
// normalization.
struct Graph {
    std::size_t n = 0;
    Tensor adj;  // n x n
};

// Degrees are taken from adj + I by default. The raw mode divides by the
// self-loop-free degrees instead and fails on isolated nodes.
enum class DegreeMode { with_self_loop, raw_adjacency };

struct Layer {
    Tensor w;         // [d_in x d_out], no bias
    bool relu = true;
};

struct Config {
    std::vector<std::size_t> dims;  // layer dims chain, e.g. {d, d, 6}
    bool clamp_negative_sim = true;
    DegreeMode degree_mode = DegreeMode::with_self_loop;
    double lr = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
    // Default head: d -> d with ReLU, then d -> num_classes linear.
    static Config two_layer(std::size_t feature_dim, int num_classes = 6);
};

struct State {
    std::vector<Layer> layers;
    std::uint64_t step = 0;
};

State init(const Config& cfg);

void validate_graph(const Graph& g);

// adj[i][j] = cossim(f_i, f_j) for i != j, clamped at 0 from below when
// requested; zero diagonal. A near-zero-norm feature isolates its node
// (off-diagonals zeroed) with a warning.
Graph build_affinity(const std::vector<Tensor>& features, bool clamp_negative = true);

// (adj + I) normalized symmetrically by degree: entry (i,j) divided by
// sqrt(d_i * d_j). Symmetric, spectral radius <= 1 in the default mode.
Tensor normalize_adjacency(const Graph& g, DegreeMode mode = DegreeMode::with_self_loop);

// One propagation step: act(normalize_adjacency(g) * f * w).
Tensor gcn_forward(const Tensor& f, const Graph& g, const Layer& layer,
                   DegreeMode mode = DegreeMode::with_self_loop);

// Full head: affinity graph -> stacked propagation -> per-node logits.
// The graph is rebuilt from the given features on every call.
Tensor head_logits(const std::vector<Tensor>& features, const Config& cfg, const State& s);

// Forward pass retaining what backward needs.
struct HeadCache {
    Tensor norm_adj;           // n x n
    Tensor input;              // n x d
    std::vector<Tensor> pre;   // per-layer pre-activation
    std::vector<Tensor> post;  // per-layer post-activation
};

HeadCache head_forward(const std::vector<Tensor>& features, const Config& cfg, const State& s);

struct Grads {
    std::vector<Tensor> w;
};
Grads zero_grads(const State& s);

// dlogits: n x classes. Accumulates layer gradients, returns d(loss)/d(input).
// The affinity graph is treated as a constant of the batch.
Tensor head_backward(const State& s, const HeadCache& c, const Tensor& dlogits, Grads& g);

State sgd_step(const State& s, const Grads& g, double lr);

}  // namespace fermech::gus
