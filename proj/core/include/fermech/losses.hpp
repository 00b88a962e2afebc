#pragma once

#include "fermech/tensor.hpp"

namespace fermech::losses {

// Weights and hyperparameters of the combined training loss
//   L = omega1 * L_ce + omega2 * L_fl + omega3 * L_sr
struct Config {
    double omega1 = 1.0;
    double omega2 = 0.5;
    double omega3 = 0.1;
    double gamma = 2.0;  // focal focusing exponent, >= 0
    double tau = 0.5;    // sparse-regularization exponent, in (0, 1]

    void validate() const;  // ConfigError on violated ranges
};

// Every loss takes raw logits; softmax happens inside. All analytic
// gradients are with respect to the logits and are validated against
// finite_diff_grad in the test suite.

double cross_entropy(const Tensor& logits, int label);
Tensor cross_entropy_grad(const Tensor& logits, int label);

// -(1 - p_t)^gamma * log p_t
double focal(const Tensor& logits, int label, double gamma);
Tensor focal_grad(const Tensor& logits, int label, double gamma);

// sum_k p_k^tau - 1, minimized exactly by one-hot predictions when tau < 1
double sparse_reg(const Tensor& logits, double tau);
Tensor sparse_reg_grad(const Tensor& logits, double tau);

double mixed(const Tensor& logits, int label, const Config& cfg);
Tensor mixed_grad(const Tensor& logits, int label, const Config& cfg);

}  // namespace fermech::losses
