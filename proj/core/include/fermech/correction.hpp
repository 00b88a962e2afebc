#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fermech/tensor.hpp"

namespace fermech::correction {

struct Config {
    double threshold = 0.93;          // strict lower bound for an edge
    double vote_fraction = 2.0 / 3.0; // winning label's required share
    int min_subset = 3;               // groups below this size are untouched
    bool strict_fraction = false;     // true: share must exceed vote_fraction

    void validate() const;
};

// Disjoint, exhaustive grouping of sample ids. Members are sorted and groups
// are ordered by their smallest member id.
struct Partition {
    std::vector<std::vector<std::string>> groups;
};

// Connected components of the graph with an undirected edge for every pair
// whose cosine similarity exceeds the threshold. A near-zero-norm feature
// becomes a singleton with a warning.
Partition group_by_similarity(const std::vector<std::pair<std::string, Tensor>>& features,
                              const Config& cfg);

// Majority-vote relabeling: in each group of size >= min_subset, if one
// label's share reaches vote_fraction, every member takes it. Returns the
// complete relabeling map. Idempotent.
std::map<std::string, int> vote_correct(const Partition& partition,
                                        const std::map<std::string, int>& preds,
                                        const Config& cfg);

}  // namespace fermech::correction
