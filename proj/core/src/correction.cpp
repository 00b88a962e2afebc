#include "fermech/correction.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "fermech/errors.hpp"
#include "fermech/label.hpp"
#include "fermech/numerics.hpp"

namespace fermech::correction {

namespace {

// union-find over node indices
struct DisjointSet {
    std::vector<std::size_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

void Config::validate() const {
    if (!(threshold > -1.0 && threshold <= 1.0)) {
        throw ConfigError("correction.threshold must lie in (-1, 1]");
    }
    if (!(vote_fraction > 0.5 && vote_fraction <= 1.0)) {
        throw ConfigError("correction.vote_fraction must lie in (0.5, 1]");
    }
    if (min_subset < 2) throw ConfigError("correction.min_subset must be >= 2");
}

Partition group_by_similarity(const std::vector<std::pair<std::string, Tensor>>& features,
                              const Config& cfg) {
    cfg.validate();
    const std::size_t n = features.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (features[i].first == features[j].first) {
                throw DataError("group_by_similarity: duplicate sample id '" +
                                features[i].first + "'");
            }
        }
    }
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(features[i].second);
        if (norms[i] <= 1e-12) {
            warn("group_by_similarity: feature '" + features[i].first +
                 "' is near zero; left as a singleton");
        }
    }

    DisjointSet ds(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (norms[i] <= 1e-12) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (norms[j] <= 1e-12) continue;
            if (features[i].second.size() != features[j].second.size()) {
                throw ShapeError("group_by_similarity: features '" + features[i].first +
                                 "' and '" + features[j].first + "' have different lengths");
            }
            const double sim = dot(features[i].second, features[j].second) / (norms[i] * norms[j]);
            if (sim > cfg.threshold) ds.unite(i, j);
        }
    }

    std::map<std::size_t, std::vector<std::string>> by_root;
    for (std::size_t i = 0; i < n; ++i) by_root[ds.find(i)].push_back(features[i].first);

    Partition out;
    for (auto& [root, ids] : by_root) {
        std::sort(ids.begin(), ids.end());
        out.groups.push_back(std::move(ids));
    }
    std::sort(out.groups.begin(), out.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

std::map<std::string, int> vote_correct(const Partition& partition,
                                        const std::map<std::string, int>& preds,
                                        const Config& cfg) {
    cfg.validate();
    std::map<std::string, int> out;
    for (const auto& group : partition.groups) {
        if (group.empty()) throw DomainError("vote_correct: empty group in partition");

        std::vector<int> labels;
        labels.reserve(group.size());
        for (const std::string& id : group) {
            auto it = preds.find(id);
            if (it == preds.end()) {
                throw DataError("vote_correct: no prediction for grouped id '" + id + "'");
            }
            require_label(it->second, "vote_correct");
            labels.push_back(it->second);
        }

        int winner = -1;
        if (group.size() >= static_cast<std::size_t>(cfg.min_subset)) {
            std::array<int, 6> counts{};
            for (int l : labels) ++counts[static_cast<std::size_t>(l)];
            for (int k = 0; k < kNumClasses; ++k) {
                const double share = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                     static_cast<double>(group.size());
                const bool wins = cfg.strict_fraction ? share > cfg.vote_fraction
                                                      : share >= cfg.vote_fraction;
                if (wins) {
                    winner = k;
                    break;  // vote_fraction > 1/2, at most one label qualifies
                }
            }
        }

        for (std::size_t i = 0; i < group.size(); ++i) {
            out[group[i]] = winner >= 0 ? winner : labels[i];
        }
    }
    return out;
}

}  // namespace fermech::correction
