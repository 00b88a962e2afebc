#include "fermech/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "fermech/errors.hpp"

namespace fermech {

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul: need rank-2 operands, got " + a.shape_str() + " and " +
                         b.shape_str());
    }
    if (a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: inner dimensions disagree for " + a.shape_str() + " x " +
                         b.shape_str());
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out({m, n});
    // i-k-j loop: each out(i,j) still accumulates k = 0..K-1 left to right
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a(i, kk);
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) += aik * b(kk, j);
            }
        }
    }
    return out;
}

Tensor softmax(const Tensor& v) {
    if (v.size() == 0) throw DomainError("softmax: empty input");
    double mx = *std::max_element(v.data().begin(), v.data().end());
    Tensor out = v;
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i) out[i] /= sum;
    return out;
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) {
        throw ShapeError("cosine_similarity: lengths differ, " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    const double na = norm(a), nb = norm(b);
    if (na <= 1e-12 || nb <= 1e-12) {
        throw DomainError("cosine_similarity: degenerate (near-zero-norm) vector");
    }
    double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h) {
    if (h <= 0.0) throw DomainError("finite_diff_grad: h must be positive");
    Tensor grad(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                               std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double max_rel_error(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_rel_error: shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-8});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace fermech
