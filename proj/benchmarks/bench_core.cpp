#include <benchmark/benchmark.h>

#include "fermech/backbone.hpp"
#include "fermech/ensemble.hpp"
#include "fermech/gus.hpp"
#include "fermech/dataset.hpp"
#include "fermech/numerics.hpp"
#include "fermech/rng.hpp"
#include "fermech/trainer.hpp"

using namespace fermech;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Tensor t({r, c});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

void BM_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Tensor a = random_matrix(n, n, rng);
    const Tensor b = random_matrix(n, n, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(a, b));
    }
}
BENCHMARK(BM_matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_softmax(benchmark::State& state) {
    Rng rng(2);
    Tensor v({6});
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(softmax(v));
    }
}
BENCHMARK(BM_softmax);

void BM_affinity_and_normalize(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    std::vector<Tensor> feats;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor f({32});
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = rng.normal();
        feats.push_back(std::move(f));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(gus::normalize_adjacency(gus::build_affinity(feats)));
    }
}
BENCHMARK(BM_affinity_and_normalize)->Arg(32)->Arg(128);

void BM_gcn_forward(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    std::vector<Tensor> feats;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor f({32});
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = rng.normal();
        feats.push_back(std::move(f));
    }
    const gus::Config cfg = gus::Config::two_layer(32);
    const gus::State s = gus::init(cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gus::head_logits(feats, cfg, s));
    }
}
BENCHMARK(BM_gcn_forward)->Arg(32)->Arg(128);

void BM_backbone_forward(benchmark::State& state) {
    backbone::Config cfg;
    cfg.input_dim = 32;
    cfg.mid_channels = 8;
    cfg.mid_h = 2;
    cfg.mid_w = 2;
    cfg.high_dim = 32;
    cfg.seed = 5;
    const backbone::State s = backbone::init(cfg);
    Rng rng(6);
    Tensor x({32});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(backbone::forward(s, x));
    }
}
BENCHMARK(BM_backbone_forward);

void BM_merge_scores(benchmark::State& state) {
    ensemble::ScoreVector a{{0.5, 0.1, 0.1, 0.1, 0.1, 0.1}};
    ensemble::ScoreVector b{{0.1, 0.5, 0.1, 0.1, 0.1, 0.1}};
    ensemble::ScoreVector c{{0.1, 0.1, 0.5, 0.1, 0.1, 0.1}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ensemble::merge_scores(a, b, c, ensemble::kSchemeS1));
    }
}
BENCHMARK(BM_merge_scores);

void BM_train_epoch(benchmark::State& state) {
    // one full epoch of the joint loop on a 96-sample, 32-dim toy set
    std::array<data::ClassGaussian, 6> spec;
    for (int k = 0; k < 6; ++k) {
        Tensor mean({32});
        mean[static_cast<std::size_t>(k)] = 5.0;
        Tensor cov({32, 32});
        for (std::size_t i = 0; i < 32; ++i) cov(i, i) = 1.0;
        spec[static_cast<std::size_t>(k)] = {std::move(mean), std::move(cov)};
    }
    const data::Dataset ds = data::gen_synthetic(spec, 16, 7);

    backbone::Config bc;
    bc.input_dim = 32;
    bc.mid_channels = 8;
    bc.mid_h = 2;
    bc.mid_w = 2;
    bc.high_dim = 32;
    bc.seed = 7;
    gus::Config gc = gus::Config::two_layer(32);
    gc.seed = 8;

    pipeline::TrainOptions opt;
    opt.epochs = 1;
    opt.batch_size = 32;
    opt.oversample = false;
    opt.augment = false;
    opt.seed = 9;

    for (auto _ : state) {
        pipeline::Model m = pipeline::init_model(bc, gc);
        benchmark::DoNotOptimize(pipeline::train(m, ds, opt));
    }
}
BENCHMARK(BM_train_epoch);

}  // namespace

BENCHMARK_MAIN();
