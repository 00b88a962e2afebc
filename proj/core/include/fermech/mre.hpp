#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fermech/rng.hpp"
#include "fermech/tensor.hpp"

namespace fermech::mre {

// Spatial positions of a mid-level grid where a partner sample's values
// replace the original ones. Backed by a bitmask, so positions are unique
// and in-bounds by construction.
class MixMask {
public:
    MixMask(std::size_t grid_h, std::size_t grid_w);

    std::size_t grid_h() const { return h_; }
    std::size_t grid_w() const { return w_; }
    bool contains(std::size_t y, std::size_t x) const;
    void insert(std::size_t y, std::size_t x);  // ShapeError if out of bounds
    std::size_t count() const { return count_; }
    MixMask complement() const;
    std::vector<std::pair<std::size_t, std::size_t>> positions() const;  // row-major order

private:
    std::size_t h_, w_;
    std::size_t count_ = 0;
    std::vector<std::uint8_t> sel_;
};

struct Config {
    double lambda = 1.0;       // weight of the auxiliary branch loss
    double noise_ratio = 0.25; // fraction of grid positions replaced
    std::uint64_t seed = 0;
    void validate() const;
};

// round(noise_ratio * H * W) distinct positions, uniform without replacement.
MixMask sample_mix_mask(std::size_t grid_h, std::size_t grid_w, double noise_ratio, Rng& rng);

// Positionwise splice of two equally-shaped C x H x W maps: masked positions
// take r_j's channel values, the rest keep r_i's.
Tensor mix_representations(const Tensor& r_i, const Tensor& r_j, const MixMask& mask);

// Label-checked wrapper: partners must carry different expressions.
Tensor mix_samples(const Tensor& r_i, int label_i, const Tensor& r_j, int label_j,
                   const MixMask& mask);

// Uniform draw among batch members with a label different from labels[self];
// nullopt when no such member exists (the sample then trains unmixed).
std::optional<std::size_t> choose_partner(const std::vector<int>& labels, std::size_t self,
                                          Rng& rng);

// Auxiliary classifier on the (mixed) mid-level map: affine over GAP.
struct BranchHead {
    Tensor w;  // [mid_channels x num_classes]
    Tensor b;  // [num_classes]
};

BranchHead init_branch(std::size_t mid_channels, int num_classes, Rng& rng);
Tensor branch_logits(const Tensor& mid_map, const BranchHead& head);

struct BranchGrads {
    Tensor w, b;
};
BranchGrads zero_branch_grads(const BranchHead& head);

// Accumulates head gradients into `g` and returns d(loss)/d(mid map).
Tensor branch_backward(const Tensor& mid_map, const BranchHead& head, const Tensor& dlogits,
                       BranchGrads& g);

// Splits a gradient on the mixed map back onto the two source maps.
void route_mix_grad(const Tensor& dmixed, const MixMask& mask, Tensor& dmid_i, Tensor& dmid_j);

// Per-sample objective: base(high, y) + lambda * base(branch, y).
double total_loss(const Tensor& high_logits, const Tensor& branch_logits, int label,
                  double lambda, const std::function<double(const Tensor&, int)>& base_loss);

}  // namespace fermech::mre
