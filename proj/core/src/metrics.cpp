#include "fermech/metrics.hpp"

#include "fermech/errors.hpp"
#include "fermech/label.hpp"

namespace fermech::metrics {

void ConfusionMatrix::add(int truth, int predicted) {
    require_label(truth, "ConfusionMatrix::add(truth)");
    require_label(predicted, "ConfusionMatrix::add(predicted)");
    ++counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
        for (std::int64_t c : row) n += c;
    return n;
}

std::array<double, 6> per_class_f1(const ConfusionMatrix& cm) {
    std::array<double, 6> f1{};
    for (std::size_t k = 0; k < 6; ++k) {
        std::int64_t tp = cm.counts[k][k];
        std::int64_t fp = 0, fn = 0;
        for (std::size_t j = 0; j < 6; ++j) {
            if (j == k) continue;
            fp += cm.counts[j][k];
            fn += cm.counts[k][j];
        }
        const std::int64_t denom = 2 * tp + fp + fn;
        f1[k] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
    return f1;
}

double mean_f1(const std::array<double, 6>& per_class) {
    double s = 0.0;
    for (double v : per_class) {
        if (v < 0.0 || v > 1.0) throw DomainError("mean_f1: per-class F1 outside [0, 1]");
        s += v;
    }
    return s / 6.0;
}

}  // namespace fermech::metrics
