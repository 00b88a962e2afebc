#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fermech/correction.hpp"
#include "fermech/errors.hpp"
#include "fermech/rng.hpp"

using namespace fermech;

namespace {

// independent restatement of the voting rule, used as the oracle
std::vector<int> vote_oracle(const std::vector<int>& labels, const correction::Config& cfg) {
    if (labels.size() < static_cast<std::size_t>(cfg.min_subset)) return labels;
    std::array<int, 6> counts{};
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int k = 0; k < 6; ++k) {
        const double share = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                             static_cast<double>(labels.size());
        const bool wins = cfg.strict_fraction ? share > cfg.vote_fraction : share >= cfg.vote_fraction;
        if (wins) return std::vector<int>(labels.size(), k);
    }
    return labels;
}

std::vector<int> run_single_group(const std::vector<int>& labels, const correction::Config& cfg) {
    correction::Partition part;
    std::vector<std::string> ids;
    std::map<std::string, int> preds;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        // zero-padded so that sorted order matches construction order
        std::string id = "s" + std::to_string(i);
        ids.push_back(id);
        preds[id] = labels[i];
    }
    part.groups.push_back(ids);
    const auto out = correction::vote_correct(part, preds, cfg);
    std::vector<int> result;
    for (const std::string& id : ids) result.push_back(out.at(id));
    return result;
}

Tensor unit2(double angle) { return Tensor::vec({std::cos(angle), std::sin(angle)}); }

}  // namespace

TEST_CASE("grouping: threshold one leaves generic features as singletons") {
    Rng rng(1);
    std::vector<std::pair<std::string, Tensor>> feats;
    for (int i = 0; i < 6; ++i) {
        Tensor f({4});
        for (std::size_t k = 0; k < 4; ++k) f[k] = rng.normal();
        feats.emplace_back("f" + std::to_string(i), f);
    }
    correction::Config cfg;
    cfg.threshold = 1.0;
    const auto part = correction::group_by_similarity(feats, cfg);
    CHECK(part.groups.size() == 6);
    for (const auto& g : part.groups) CHECK(g.size() == 1);
}

TEST_CASE("grouping: a 0.95 clique forms one group of three") {
    // v_i = (1, r e_i) gives pairwise cosine exactly 1/(1+r^2)
    const double r = std::sqrt(1.0 / 0.95 - 1.0);
    const std::vector<std::pair<std::string, Tensor>> feats{
        {"a", Tensor::vec({1.0, r, 0.0, 0.0})},
        {"b", Tensor::vec({1.0, 0.0, r, 0.0})},
        {"c", Tensor::vec({1.0, 0.0, 0.0, r})},
    };
    const auto part = correction::group_by_similarity(feats, correction::Config{});
    REQUIRE(part.groups.size() == 1);
    CHECK(part.groups[0] == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("grouping: chains merge through connected components") {
    const double theta = std::acos(0.95);
    const std::vector<std::pair<std::string, Tensor>> feats{
        {"a", unit2(0.0)},
        {"b", unit2(theta)},        // a~b at 0.95
        {"c", unit2(2.0 * theta)},  // b~c at 0.95, a~c at 0.805 < threshold
    };
    const auto part = correction::group_by_similarity(feats, correction::Config{});
    REQUIRE(part.groups.size() == 1);
    CHECK(part.groups[0] == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("grouping: zero-norm feature stays a singleton") {
    const std::vector<std::pair<std::string, Tensor>> feats{
        {"a", Tensor::vec({1.0, 0.0})},
        {"zero", Tensor::vec({0.0, 0.0})},
        {"b", Tensor::vec({1.0, 1e-4})},
    };
    const auto part = correction::group_by_similarity(feats, correction::Config{});
    REQUIRE(part.groups.size() == 2);
    CHECK(part.groups[0] == std::vector<std::string>{"a", "b"});
    CHECK(part.groups[1] == std::vector<std::string>{"zero"});
}

TEST_CASE("grouping yields a valid partition on random inputs") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<std::string, Tensor>> feats;
        const std::size_t n = 1 + rng.index(20);
        std::set<std::string> all_ids;
        for (std::size_t i = 0; i < n; ++i) {
            Tensor f({3});
            for (std::size_t k = 0; k < 3; ++k) f[k] = rng.normal();
            const std::string id = "n" + std::to_string(i);
            feats.emplace_back(id, f);
            all_ids.insert(id);
        }
        correction::Config cfg;
        cfg.threshold = rng.uniform(-0.5, 1.0);
        const auto part = correction::group_by_similarity(feats, cfg);

        std::set<std::string> seen;
        for (const auto& g : part.groups) {
            CHECK(!g.empty());
            for (const auto& id : g) CHECK(seen.insert(id).second);  // disjoint
        }
        CHECK(seen == all_ids);  // exhaustive
    }
}

TEST_CASE("grouping rejects duplicate ids") {
    const std::vector<std::pair<std::string, Tensor>> feats{
        {"a", Tensor::vec({1.0, 0.0})},
        {"a", Tensor::vec({0.0, 1.0})},
    };
    CHECK_THROWS_AS(correction::group_by_similarity(feats, correction::Config{}), DataError);
}

TEST_CASE("voting: the documented 2-of-3 case flips under the inclusive rule only") {
    correction::Config cfg;  // inclusive by default
    CHECK(run_single_group({3, 3, 4}, cfg) == std::vector<int>{3, 3, 3});

    correction::Config strict = cfg;
    strict.strict_fraction = true;
    CHECK(run_single_group({3, 3, 4}, strict) == std::vector<int>{3, 3, 4});
}

TEST_CASE("voting: small groups and split groups stay unchanged") {
    const correction::Config cfg;
    CHECK(run_single_group({3, 4}, cfg) == std::vector<int>{3, 4});       // below min_subset
    CHECK(run_single_group({3, 4, 2}, cfg) == std::vector<int>{3, 4, 2});  // max share 1/3
}

TEST_CASE("voting requires predictions for every grouped id") {
    correction::Partition part;
    part.groups.push_back({"a", "b"});
    std::map<std::string, int> preds{{"a", 0}};
    CHECK_THROWS_AS(correction::vote_correct(part, preds, correction::Config{}), DataError);
}

TEST_CASE("voting matches exhaustive enumeration for groups of size <= 5 over 3 classes") {
    for (const bool strict : {false, true}) {
        correction::Config cfg;
        cfg.strict_fraction = strict;
        for (std::size_t size = 1; size <= 5; ++size) {
            std::size_t total = 1;
            for (std::size_t i = 0; i < size; ++i) total *= 3;
            for (std::size_t code = 0; code < total; ++code) {
                std::vector<int> labels(size);
                std::size_t c = code;
                for (std::size_t i = 0; i < size; ++i) {
                    labels[i] = static_cast<int>(c % 3);
                    c /= 3;
                }
                CHECK(run_single_group(labels, cfg) == vote_oracle(labels, cfg));
            }
        }
    }
}

TEST_CASE("voting is idempotent and never touches small groups") {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        correction::Partition part;
        std::map<std::string, int> preds;
        int node = 0;
        const std::size_t groups = 1 + rng.index(4);
        for (std::size_t g = 0; g < groups; ++g) {
            std::vector<std::string> ids;
            const std::size_t size = 1 + rng.index(6);
            for (std::size_t i = 0; i < size; ++i) {
                const std::string id = "n" + std::to_string(node++);
                ids.push_back(id);
                preds[id] = static_cast<int>(rng.index(6));
            }
            part.groups.push_back(ids);
        }
        const correction::Config cfg;
        const auto once = correction::vote_correct(part, preds, cfg);
        const auto twice = correction::vote_correct(part, once, cfg);
        CHECK(once == twice);

        for (const auto& g : part.groups) {
            if (g.size() < static_cast<std::size_t>(cfg.min_subset)) {
                for (const auto& id : g) CHECK(once.at(id) == preds.at(id));
            }
        }
    }
}

TEST_CASE("config validation") {
    correction::Config cfg;
    cfg.threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = correction::Config{};
    cfg.vote_fraction = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = correction::Config{};
    cfg.min_subset = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(correction::Config{}.validate());
}
