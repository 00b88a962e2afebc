#include "fermech/ensemble.hpp"

#include <cmath>
#include <fstream>

#include "fermech/csv.hpp"
#include "fermech/errors.hpp"
#include "fermech/label.hpp"

namespace fermech::ensemble {

void ScoreVector::validate(const std::string& source) const {
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DomainError("score vector from '" + source + "' has a negative or non-finite entry");
        }
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw DomainError("score vector from '" + source + "' sums to " + std::to_string(sum) +
                          ", expected 1");
    }
}

void Weights::validate() const {
    if (gus < 0.0 || mre < 0.0 || dmue < 0.0) {
        throw DomainError("ensemble weights must be >= 0");
    }
    if (gus + mre + dmue <= 0.0) {
        throw DomainError("ensemble weights must not all be zero");
    }
}

Tensor merge_scores(const std::vector<std::pair<std::string, ScoreVector>>& sources,
                    const std::vector<double>& weights) {
    if (sources.empty()) throw DomainError("merge_scores: need at least one source");
    if (sources.size() != weights.size()) {
        throw DomainError("merge_scores: " + std::to_string(sources.size()) + " sources but " +
                          std::to_string(weights.size()) + " weights");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("merge_scores: weights must be >= 0");
        wsum += w;
    }
    if (wsum <= 0.0) throw DomainError("merge_scores: weights must not all be zero");

    Tensor out({static_cast<std::size_t>(kNumClasses)});
    for (std::size_t s = 0; s < sources.size(); ++s) {
        sources[s].second.validate(sources[s].first);
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += weights[s] * sources[s].second.p[k];
        }
    }
    return out;
}

Tensor merge_scores(const ScoreVector& gus_scores, const ScoreVector& mre_scores,
                    const ScoreVector& dmue_scores, const Weights& w) {
    w.validate();
    return merge_scores({{"gus", gus_scores}, {"mre", mre_scores}, {"dmue", dmue_scores}},
                        {w.gus, w.mre, w.dmue});
}

int predict(const Tensor& merged) {
    if (merged.size() != static_cast<std::size_t>(kNumClasses)) {
        throw ShapeError("predict: expected " + std::to_string(kNumClasses) + " scores, got " +
                         merged.shape_str());
    }
    if (!merged.all_finite()) throw NumericError("predict: non-finite merged score");
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k) {
        if (merged[static_cast<std::size_t>(k)] > merged[static_cast<std::size_t>(best)]) {
            best = k;
        }
    }
    return best;
}

ScoreTable load_scores(const std::filesystem::path& path) {
    csv::Reader reader(path);
    const std::vector<std::string> expect{"id", "an", "di", "fe", "ha", "sa", "su"};
    if (reader.header() != expect) {
        throw DataError(path.string() + ": bad header, expected id,an,di,fe,ha,sa,su");
    }
    ScoreTable table;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() != 7) {
            throw DataError(path.string() + ": row " + std::to_string(reader.row()) +
                            ": expected 7 fields, found " + std::to_string(fields.size()));
        }
        ScoreVector sv;
        double sum = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            sv.p[static_cast<std::size_t>(k)] =
                csv::parse_double(fields[static_cast<std::size_t>(k) + 1], path, reader.row());
            sum += sv.p[static_cast<std::size_t>(k)];
        }
        if (std::fabs(sum - 1.0) > 1e-6) {
            throw DataError(path.string() + ": row " + std::to_string(reader.row()) +
                            ": scores sum to " + std::to_string(sum) + ", outside 1 +/- 1e-6");
        }
        table.ids.push_back(fields[0]);
        table.rows.push_back(sv);
    }
    return table;
}

void save_scores(const std::filesystem::path& path, const ScoreTable& table) {
    if (table.ids.size() != table.rows.size()) {
        throw DomainError("save_scores: id/row count mismatch");
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot open file for writing: " + path.string());
    os << "id,an,di,fe,ha,sa,su\n";
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        os << table.ids[i];
        for (double v : table.rows[i].p) os << "," << csv::format_double(v);
        os << "\n";
    }
}

}  // namespace fermech::ensemble
