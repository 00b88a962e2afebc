#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fermech/ensemble.hpp"
#include "fermech/errors.hpp"
#include "fermech/numerics.hpp"
#include "fermech/rng.hpp"

using namespace fermech;

namespace {

ensemble::ScoreVector random_score(Rng& rng) {
    Tensor z({6});
    for (std::size_t i = 0; i < 6; ++i) z[i] = rng.uniform(-3.0, 3.0);
    const Tensor p = softmax(z);
    ensemble::ScoreVector sv;
    for (std::size_t i = 0; i < 6; ++i) sv.p[i] = p[i];
    return sv;
}

// independent re-statement of the merge rule, used as the oracle
std::array<double, 6> merge_oracle(const ensemble::ScoreVector& g, const ensemble::ScoreVector& m,
                                   const ensemble::ScoreVector& d, const ensemble::Weights& w) {
    std::array<double, 6> out{};
    for (std::size_t k = 0; k < 6; ++k) {
        out[k] = w.gus * g.p[k] + w.mre * m.p[k] + w.dmue * d.p[k];
    }
    return out;
}

int argmax_oracle(const std::array<double, 6>& v) {
    int best = 0;
    for (int k = 1; k < 6; ++k) {
        if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
    }
    return best;
}

}  // namespace

TEST_CASE("merge: consensus keeps the argmax") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const ensemble::ScoreVector p = random_score(rng);
        const Tensor merged = ensemble::merge_scores(p, p, p, ensemble::kSchemeS1);
        Tensor plain({6});
        for (std::size_t k = 0; k < 6; ++k) plain[k] = p.p[k];
        CHECK(ensemble::predict(merged) == ensemble::predict(plain));
    }
}

TEST_CASE("merge: published weight settings flip the hand case") {
    const ensemble::ScoreVector gus_s{{0.8, 0.2, 0.0, 0.0, 0.0, 0.0}};
    const ensemble::ScoreVector mre_s{{0.2, 0.8, 0.0, 0.0, 0.0, 0.0}};
    const ensemble::ScoreVector dmue_s = mre_s;

    const Tensor s1 = ensemble::merge_scores(gus_s, mre_s, dmue_s, ensemble::kSchemeS1);
    CHECK(s1[0] == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(s1[1] == doctest::Approx(0.44).epsilon(1e-12));
    CHECK(ensemble::predict(s1) == 0);

    const Tensor s2 = ensemble::merge_scores(gus_s, mre_s, dmue_s, ensemble::kSchemeS2);
    CHECK(s2[0] == doctest::Approx(0.44).epsilon(1e-12));
    CHECK(s2[1] == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(ensemble::predict(s2) == 1);
}

TEST_CASE("merge: unit weight projects one source") {
    Rng rng(2);
    const ensemble::ScoreVector g = random_score(rng);
    const ensemble::ScoreVector m = random_score(rng);
    const ensemble::ScoreVector d = random_score(rng);
    const Tensor merged = ensemble::merge_scores(g, m, d, ensemble::Weights{1.0, 0.0, 0.0});
    for (std::size_t k = 0; k < 6; ++k) CHECK(merged[k] == g.p[k]);
}

TEST_CASE("merge matches the brute-force oracle on 1000 random triples") {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const ensemble::ScoreVector g = random_score(rng);
        const ensemble::ScoreVector m = random_score(rng);
        const ensemble::ScoreVector d = random_score(rng);
        const ensemble::Weights w{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0),
                                  rng.uniform(0.0, 2.0)};
        if (w.gus + w.mre + w.dmue <= 0.0) continue;
        const Tensor merged = ensemble::merge_scores(g, m, d, w);
        const auto oracle = merge_oracle(g, m, d, w);
        for (std::size_t k = 0; k < 6; ++k) CHECK(merged[k] == oracle[k]);
        CHECK(ensemble::predict(merged) == argmax_oracle(oracle));
    }
}

TEST_CASE("merge validates sources and weights") {
    Rng rng(4);
    ensemble::ScoreVector bad = random_score(rng);
    bad.p[0] += 0.1;  // breaks the sum contract
    const ensemble::ScoreVector ok = random_score(rng);
    try {
        ensemble::merge_scores(bad, ok, ok, ensemble::kSchemeS1);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("gus") != std::string::npos);
    }
    try {
        ensemble::merge_scores(ok, ok, bad, ensemble::kSchemeS1);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("dmue") != std::string::npos);
    }
    CHECK_THROWS_AS(ensemble::merge_scores(ok, ok, ok, ensemble::Weights{0.0, 0.0, 0.0}),
                    DomainError);
    CHECK_THROWS_AS(ensemble::merge_scores(ok, ok, ok, ensemble::Weights{-0.1, 0.5, 0.6}),
                    DomainError);
}

TEST_CASE("predict basics and the documented tie break") {
    CHECK(ensemble::predict(Tensor::vec({0, 0, 0, 0, 0, 1})) == 5);
    CHECK(ensemble::predict(Tensor::vec({0.5, 0.5, 0, 0, 0, 0})) == 0);
    CHECK(ensemble::predict(Tensor::vec({0.1, 0.3, 0.3, 0.1, 0.1, 0.1})) == 1);
}

TEST_CASE("predict is invariant to positive scaling") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        Tensor v({6});
        for (std::size_t k = 0; k < 6; ++k) v[k] = rng.uniform(0.0, 1.0);
        const double c = rng.uniform(0.001, 1000.0);
        CHECK(ensemble::predict(v) == ensemble::predict(scaled(v, c)));
    }
}

TEST_CASE("weight scaling never changes the merged argmax") {
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        const ensemble::ScoreVector g = random_score(rng);
        const ensemble::ScoreVector m = random_score(rng);
        const ensemble::ScoreVector d = random_score(rng);
        ensemble::Weights w{rng.uniform(0.01, 2.0), rng.uniform(0.01, 2.0),
                            rng.uniform(0.01, 2.0)};
        const double c = rng.uniform(0.01, 100.0);
        const ensemble::Weights cw{c * w.gus, c * w.mre, c * w.dmue};
        CHECK(ensemble::predict(ensemble::merge_scores(g, m, d, w)) ==
              ensemble::predict(ensemble::merge_scores(g, m, d, cw)));
    }
}

TEST_CASE("agreement on the argmax survives any nonnegative weights") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        // force all three sources to agree on a winner
        const int winner = static_cast<int>(rng.index(6));
        auto make = [&]() {
            ensemble::ScoreVector sv = random_score(rng);
            std::swap(sv.p[static_cast<std::size_t>(winner)],
                      sv.p[static_cast<std::size_t>(argmax_oracle(sv.p))]);
            return sv;
        };
        const ensemble::ScoreVector g = make(), m = make(), d = make();
        ensemble::Weights w{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
        if (w.gus + w.mre + w.dmue <= 0.0) w.gus = 1.0;
        CHECK(ensemble::predict(ensemble::merge_scores(g, m, d, w)) == winner);
    }
}

TEST_CASE("generalized merge accepts a single source") {
    Rng rng(8);
    const ensemble::ScoreVector s = random_score(rng);
    const Tensor merged = ensemble::merge_scores({{"solo", s}}, {2.0});
    for (std::size_t k = 0; k < 6; ++k) CHECK(merged[k] == doctest::Approx(2.0 * s.p[k]));
    CHECK_THROWS_AS(ensemble::merge_scores({}, {}), DomainError);
}

TEST_CASE("score file round trip and validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "fermech_ensemble_test";
    fs::create_directories(dir);

    Rng rng(9);
    ensemble::ScoreTable table;
    for (int i = 0; i < 20; ++i) {
        table.ids.push_back("s" + std::to_string(i));
        table.rows.push_back(random_score(rng));
    }
    const fs::path path = dir / "scores.csv";
    ensemble::save_scores(path, table);
    const ensemble::ScoreTable loaded = ensemble::load_scores(path);
    REQUIRE(loaded.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(loaded.ids[i] == table.ids[i]);
        for (std::size_t k = 0; k < 6; ++k) CHECK(loaded.rows[i].p[k] == table.rows[i].p[k]);
    }

    // a row whose scores break the 1 +/- 1e-6 contract is rejected with its row number
    const fs::path bad = dir / "bad_scores.csv";
    {
        std::ofstream os(bad);
        os << "id,an,di,fe,ha,sa,su\n";
        os << "a,0.5,0.1,0.1,0.1,0.1,0.1\n";
        os << "b,0.5,0.5,0.1,0.1,0.1,0.1\n";
    }
    try {
        ensemble::load_scores(bad);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }

    const fs::path bad_header = dir / "bad_header.csv";
    {
        std::ofstream os(bad_header);
        os << "id,a,b,c,d,e,f\na,1,0,0,0,0,0\n";
    }
    CHECK_THROWS_AS(ensemble::load_scores(bad_header), DataError);

    fs::remove_all(dir);
}
