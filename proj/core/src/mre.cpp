#include "fermech/mre.hpp"

#include <cmath>

#include "fermech/backbone.hpp"
#include "fermech/errors.hpp"
#include "fermech/label.hpp"

namespace fermech::mre {

MixMask::MixMask(std::size_t grid_h, std::size_t grid_w)
    : h_(grid_h), w_(grid_w), sel_(grid_h * grid_w, 0) {
    if (h_ == 0 || w_ == 0) throw ShapeError("MixMask: grid dimensions must be positive");
}

bool MixMask::contains(std::size_t y, std::size_t x) const {
    return y < h_ && x < w_ && sel_[y * w_ + x] != 0;
}

void MixMask::insert(std::size_t y, std::size_t x) {
    if (y >= h_ || x >= w_) {
        throw ShapeError("MixMask::insert: position (" + std::to_string(y) + "," +
                         std::to_string(x) + ") outside " + std::to_string(h_) + "x" +
                         std::to_string(w_) + " grid");
    }
    if (!sel_[y * w_ + x]) {
        sel_[y * w_ + x] = 1;
        ++count_;
    }
}

MixMask MixMask::complement() const {
    MixMask out(h_, w_);
    for (std::size_t i = 0; i < sel_.size(); ++i) out.sel_[i] = sel_[i] ? 0 : 1;
    out.count_ = sel_.size() - count_;
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> MixMask::positions() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(count_);
    for (std::size_t y = 0; y < h_; ++y)
        for (std::size_t x = 0; x < w_; ++x)
            if (sel_[y * w_ + x]) out.emplace_back(y, x);
    return out;
}

void Config::validate() const {
    if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0)) {
        throw ConfigError("mre.noise_ratio must lie in [0, 1]");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("mre.lambda must be finite and >= 0");
    }
}

MixMask sample_mix_mask(std::size_t grid_h, std::size_t grid_w, double noise_ratio, Rng& rng) {
    if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0)) {
        throw DomainError("sample_mix_mask: noise_ratio must lie in [0, 1]");
    }
    MixMask mask(grid_h, grid_w);
    const std::size_t cells = grid_h * grid_w;
    const std::size_t k = static_cast<std::size_t>(
        std::llround(noise_ratio * static_cast<double>(cells)));
    for (std::size_t idx : rng.sample_without_replacement(cells, k)) {
        mask.insert(idx / grid_w, idx % grid_w);
    }
    return mask;
}

Tensor mix_representations(const Tensor& r_i, const Tensor& r_j, const MixMask& mask) {
    if (!r_i.same_shape(r_j)) {
        throw ShapeError("mix_representations: shape mismatch " + r_i.shape_str() + " vs " +
                         r_j.shape_str());
    }
    if (r_i.rank() != 3 || r_i.dim(1) != mask.grid_h() || r_i.dim(2) != mask.grid_w()) {
        throw ShapeError("mix_representations: map " + r_i.shape_str() + " does not match " +
                         std::to_string(mask.grid_h()) + "x" + std::to_string(mask.grid_w()) +
                         " mask grid");
    }
    Tensor out = r_i;
    for (std::size_t c = 0; c < r_i.dim(0); ++c) {
        for (std::size_t y = 0; y < mask.grid_h(); ++y) {
            for (std::size_t x = 0; x < mask.grid_w(); ++x) {
                if (mask.contains(y, x)) out(c, y, x) = r_j(c, y, x);
            }
        }
    }
    return out;
}

Tensor mix_samples(const Tensor& r_i, int label_i, const Tensor& r_j, int label_j,
                   const MixMask& mask) {
    require_label(label_i, "mix_samples");
    require_label(label_j, "mix_samples");
    if (label_i == label_j) {
        throw DomainError("mix_samples: mixing partners share label " +
                          std::string(label_name(label_i)) +
                          "; a partner must carry a different expression");
    }
    return mix_representations(r_i, r_j, mask);
}

std::optional<std::size_t> choose_partner(const std::vector<int>& labels, std::size_t self,
                                          Rng& rng) {
    std::vector<std::size_t> candidates;
    candidates.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i != self && labels[i] != labels[self]) candidates.push_back(i);
    }
    if (candidates.empty()) return std::nullopt;
    return candidates[rng.index(candidates.size())];
}

BranchHead init_branch(std::size_t mid_channels, int num_classes, Rng& rng) {
    BranchHead head;
    const double bound = 1.0 / std::sqrt(static_cast<double>(mid_channels));
    head.w = Tensor({mid_channels, static_cast<std::size_t>(num_classes)});
    head.b = Tensor({static_cast<std::size_t>(num_classes)});
    for (std::size_t i = 0; i < head.w.size(); ++i) head.w[i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < head.b.size(); ++i) head.b[i] = rng.uniform(-bound, bound);
    return head;
}

Tensor branch_logits(const Tensor& mid_map, const BranchHead& head) {
    const Tensor pooled = backbone::gap(mid_map);
    if (pooled.size() != head.w.dim(0)) {
        throw ShapeError("branch_logits: pooled " + pooled.shape_str() +
                         " does not match head weights " + head.w.shape_str());
    }
    Tensor logits = head.b;
    for (std::size_t r = 0; r < head.w.dim(0); ++r) {
        for (std::size_t c = 0; c < head.w.dim(1); ++c) logits[c] += pooled[r] * head.w(r, c);
    }
    return logits;
}

BranchGrads zero_branch_grads(const BranchHead& head) {
    return BranchGrads{Tensor(head.w.shape()), Tensor(head.b.shape())};
}

Tensor branch_backward(const Tensor& mid_map, const BranchHead& head, const Tensor& dlogits,
                       BranchGrads& g) {
    const Tensor pooled = backbone::gap(mid_map);
    Tensor dpooled({pooled.size()});
    for (std::size_t r = 0; r < head.w.dim(0); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < head.w.dim(1); ++c) {
            g.w(r, c) += pooled[r] * dlogits[c];
            acc += dlogits[c] * head.w(r, c);
        }
        dpooled[r] = acc;
    }
    for (std::size_t c = 0; c < head.b.size(); ++c) g.b[c] += dlogits[c];

    // GAP spreads each channel gradient evenly over its spatial cells.
    Tensor dmid(mid_map.shape());
    const double inv = 1.0 / static_cast<double>(mid_map.dim(1) * mid_map.dim(2));
    for (std::size_t c = 0; c < mid_map.dim(0); ++c) {
        const double dch = dpooled[c] * inv;
        for (std::size_t y = 0; y < mid_map.dim(1); ++y)
            for (std::size_t x = 0; x < mid_map.dim(2); ++x) dmid(c, y, x) = dch;
    }
    return dmid;
}

void route_mix_grad(const Tensor& dmixed, const MixMask& mask, Tensor& dmid_i, Tensor& dmid_j) {
    if (!dmixed.same_shape(dmid_i) || !dmixed.same_shape(dmid_j)) {
        throw ShapeError("route_mix_grad: shape mismatch " + dmixed.shape_str() + " vs " +
                         dmid_i.shape_str() + " / " + dmid_j.shape_str());
    }
    for (std::size_t c = 0; c < dmixed.dim(0); ++c) {
        for (std::size_t y = 0; y < dmixed.dim(1); ++y) {
            for (std::size_t x = 0; x < dmixed.dim(2); ++x) {
                if (mask.contains(y, x)) {
                    dmid_j(c, y, x) += dmixed(c, y, x);
                } else {
                    dmid_i(c, y, x) += dmixed(c, y, x);
                }
            }
        }
    }
}

double total_loss(const Tensor& high_logits, const Tensor& branch_logits, int label,
                  double lambda, const std::function<double(const Tensor&, int)>& base_loss) {
    require_label(label, "mre::total_loss");
    if (!(lambda >= 0.0)) throw DomainError("mre::total_loss: lambda must be >= 0");
    double loss = base_loss(high_logits, label);
    if (lambda != 0.0) loss += lambda * base_loss(branch_logits, label);
    return loss;
}

}  // namespace fermech::mre
