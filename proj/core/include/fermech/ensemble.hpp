#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fermech/tensor.hpp"

namespace fermech::ensemble {

// Post-softmax class scores for one sample: nonnegative, sum 1 within 1e-9.
struct ScoreVector {
    std::array<double, 6> p{};

    void validate(const std::string& source) const;
};

// Per-source merge weights. Nonnegative, not all zero.
struct Weights {
    double gus = 0.0;
    double mre = 0.0;
    double dmue = 0.0;

    void validate() const;
};

// The two published weight settings.
inline constexpr Weights kSchemeS1{0.6, 0.2, 0.2};
inline constexpr Weights kSchemeS2{0.4, 0.3, 0.3};

// Componentwise weighted sum of the three source scores. Not renormalized;
// the argmax is unaffected.
Tensor merge_scores(const ScoreVector& gus_scores, const ScoreVector& mre_scores,
                    const ScoreVector& dmue_scores, const Weights& w);

// Generalized form over N >= 1 named sources.
Tensor merge_scores(const std::vector<std::pair<std::string, ScoreVector>>& sources,
                    const std::vector<double>& weights);

// Index of the maximum entry; exact ties resolve to the lowest class index.
int predict(const Tensor& merged);

// Score file: header `id,an,di,fe,ha,sa,su`, one row per sample. Rows whose
// scores sum outside 1 +/- 1e-6 are rejected with their row number.
struct ScoreTable {
    std::vector<std::string> ids;  // file order
    std::vector<ScoreVector> rows;

    std::size_t size() const { return ids.size(); }
};

ScoreTable load_scores(const std::filesystem::path& path);
void save_scores(const std::filesystem::path& path, const ScoreTable& table);

}  // namespace fermech::ensemble
