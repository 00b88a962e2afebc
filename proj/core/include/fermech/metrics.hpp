#pragma once

#include <array>
#include <cstdint>

namespace fermech::metrics {

// 6x6 counts, rows = true class, cols = predicted class.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 6>, 6> counts{};

    void add(int truth, int predicted);  // DomainError on bad labels
    std::int64_t total() const;
};

// F1_k = 2 TP / (2 TP + FP + FN), defined as 0 when the denominator is 0.
std::array<double, 6> per_class_f1(const ConfusionMatrix& cm);

// Unweighted mean over classes (macro F1).
double mean_f1(const std::array<double, 6>& per_class);

}  // namespace fermech::metrics
