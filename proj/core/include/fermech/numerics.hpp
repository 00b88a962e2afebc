#pragma once

#include <functional>

#include "fermech/tensor.hpp"

namespace fermech {

// Matrix product [MxK]x[KxN] -> [MxN]. Accumulation over K runs in a fixed
// left-to-right order, so results are bit-reproducible.
Tensor matmul(const Tensor& a, const Tensor& b);

// Numerically stable softmax (max subtraction). Output entries are positive
// and sum to 1 within 1e-12.
Tensor softmax(const Tensor& v);

// (a.b)/(|a||b|), in [-1, 1]. Throws DomainError when either norm <= 1e-12.
double cosine_similarity(const Tensor& a, const Tensor& b);

// Central-difference gradient of a scalar function, the oracle every
// analytic gradient in the repository is checked against.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& x, double h = 1e-5);

// max over coordinates of |a-b| / max(|a|, |b|, 1e-8)
double max_rel_error(const Tensor& a, const Tensor& b);

}  // namespace fermech
