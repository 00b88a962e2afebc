#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fermech {

// Seeded random source. Distributions are drawn by hand on top of
// std::mt19937_64 so sequences do not depend on the standard library's
// (implementation-defined) distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // [0, 1), 53-bit resolution
    double uniform();
    double uniform(double lo, double hi);

    // standard normal via Box-Muller
    double normal();

    // uniform integer in [0, n), n >= 1, rejection-sampled (unbiased)
    std::size_t index(std::size_t n);

    bool bernoulli(double p) { return uniform() < p; }

    // Independent child stream, e.g. one per sample.
    Rng fork(std::uint64_t stream) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace fermech
