#include "fermech/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fermech/errors.hpp"
#include "fermech/label.hpp"
#include "fermech/numerics.hpp"

namespace fermech::losses {

namespace {

// log(sum exp(z)) with max subtraction
double logsumexp(const Tensor& z) {
    double mx = *std::max_element(z.data().begin(), z.data().end());
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += std::exp(z[i] - mx);
    return mx + std::log(s);
}

void check_logits(const Tensor& logits, const char* who) {
    if (logits.rank() != 1 || logits.size() != static_cast<std::size_t>(kNumClasses)) {
        throw ShapeError(std::string(who) + ": expected " + std::to_string(kNumClasses) +
                         " logits, got " + logits.shape_str());
    }
}

}  // namespace

void Config::validate() const {
    if (omega1 < 0.0 || omega2 < 0.0 || omega3 < 0.0) {
        throw ConfigError("loss.omega1..3 must be >= 0");
    }
    if (omega1 + omega2 + omega3 <= 0.0) {
        throw ConfigError("loss.omega1+omega2+omega3 must be > 0");
    }
    if (gamma < 0.0) throw ConfigError("loss.gamma must be >= 0");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("loss.tau must lie in (0, 1]");
}

double cross_entropy(const Tensor& logits, int label) {
    check_logits(logits, "cross_entropy");
    require_label(label, "cross_entropy");
    return logsumexp(logits) - logits[static_cast<std::size_t>(label)];
}

Tensor cross_entropy_grad(const Tensor& logits, int label) {
    check_logits(logits, "cross_entropy_grad");
    require_label(label, "cross_entropy_grad");
    Tensor g = softmax(logits);
    g[static_cast<std::size_t>(label)] -= 1.0;
    return g;
}

double focal(const Tensor& logits, int label, double gamma) {
    check_logits(logits, "focal");
    require_label(label, "focal");
    if (gamma < 0.0) throw DomainError("focal: gamma must be >= 0");
    const double log_pt = logits[static_cast<std::size_t>(label)] - logsumexp(logits);
    const double pt = std::exp(log_pt);
    return -std::pow(1.0 - pt, gamma) * log_pt;
}

Tensor focal_grad(const Tensor& logits, int label, double gamma) {
    check_logits(logits, "focal_grad");
    require_label(label, "focal_grad");
    if (gamma < 0.0) throw DomainError("focal_grad: gamma must be >= 0");
    const Tensor p = softmax(logits);
    const std::size_t y = static_cast<std::size_t>(label);
    const double pt = p[y];
    const double log_pt = logits[y] - logsumexp(logits);
    // d/dz_k of -(1-pt)^g log pt, with dpt/dz_k = pt (1[k=y] - p_k):
    //   c = g (1-pt)^{g-1} pt log pt - (1-pt)^g,   grad_k = c (1[k=y] - p_k)
    const double c = (gamma > 0.0 ? gamma * std::pow(1.0 - pt, gamma - 1.0) * pt * log_pt : 0.0) -
                     std::pow(1.0 - pt, gamma);
    Tensor g(logits.shape());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] = c * ((k == y ? 1.0 : 0.0) - p[k]);
    }
    return g;
}

double sparse_reg(const Tensor& logits, double tau) {
    check_logits(logits, "sparse_reg");
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("sparse_reg: tau must lie in (0, 1]");
    const Tensor p = softmax(logits);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += std::pow(p[k], tau);
    return s - 1.0;
}

Tensor sparse_reg_grad(const Tensor& logits, double tau) {
    check_logits(logits, "sparse_reg_grad");
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("sparse_reg_grad: tau must lie in (0, 1]");
    const Tensor p = softmax(logits);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += std::pow(p[k], tau);
    // d/dz_j sum_k p_k^tau = tau (p_j^tau - p_j * sum_k p_k^tau)
    Tensor g(logits.shape());
    for (std::size_t j = 0; j < g.size(); ++j) {
        g[j] = tau * (std::pow(p[j], tau) - p[j] * s);
    }
    return g;
}

double mixed(const Tensor& logits, int label, const Config& cfg) {
    cfg.validate();
    double total = 0.0;
    if (cfg.omega1 != 0.0) total += cfg.omega1 * cross_entropy(logits, label);
    if (cfg.omega2 != 0.0) total += cfg.omega2 * focal(logits, label, cfg.gamma);
    if (cfg.omega3 != 0.0) total += cfg.omega3 * sparse_reg(logits, cfg.tau);
    return total;
}

Tensor mixed_grad(const Tensor& logits, int label, const Config& cfg) {
    cfg.validate();
    Tensor g(logits.shape());
    if (cfg.omega1 != 0.0) g = add(g, scaled(cross_entropy_grad(logits, label), cfg.omega1));
    if (cfg.omega2 != 0.0) g = add(g, scaled(focal_grad(logits, label, cfg.gamma), cfg.omega2));
    if (cfg.omega3 != 0.0) g = add(g, scaled(sparse_reg_grad(logits, cfg.tau), cfg.omega3));
    return g;
}

}  // namespace fermech::losses
