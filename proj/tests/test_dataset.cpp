#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fermech/dataset.hpp"
#include "fermech/errors.hpp"
#include "fermech/label.hpp"
#include "fermech/metrics.hpp"
#include "fermech/numerics.hpp"
#include "fermech/rng.hpp"

using namespace fermech;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "fermech_dataset_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

data::Dataset tiny_dataset(const std::array<std::size_t, 6>& counts, std::size_t d,
                           Rng& rng) {
    data::Dataset ds;
    ds.dim = d;
    int n = 0;
    for (int k = 0; k < 6; ++k) {
        for (std::size_t i = 0; i < counts[static_cast<std::size_t>(k)]; ++i) {
            data::Sample s;
            s.id = "x" + std::to_string(n++);
            Tensor f({d});
            for (std::size_t j = 0; j < d; ++j) f[j] = rng.normal();
            s.payload = std::move(f);
            s.label = k;
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

std::array<data::ClassGaussian, 6> isotropic_spec(std::size_t d, double mean_scale,
                                                  double sigma) {
    REQUIRE(d >= 6);
    std::array<data::ClassGaussian, 6> spec;
    for (int k = 0; k < 6; ++k) {
        Tensor mean({d});
        mean[static_cast<std::size_t>(k)] = mean_scale;
        Tensor cov({d, d});
        for (std::size_t i = 0; i < d; ++i) cov(i, i) = sigma * sigma;
        spec[static_cast<std::size_t>(k)] = {std::move(mean), std::move(cov)};
    }
    return spec;
}

// test-only multinomial logistic regression, the separability oracle
double linear_classifier_f1(const data::Dataset& ds, int epochs, double lr) {
    const std::size_t d = ds.dim;
    Tensor w({d, 6}), b({6});
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Tensor gw({d, 6}), gb({6});
        for (const data::Sample& s : ds.samples) {
            Tensor z = b;
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < 6; ++c) z[c] += s.payload[r] * w(r, c);
            Tensor p = softmax(z);
            p[static_cast<std::size_t>(s.label)] -= 1.0;
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < 6; ++c) gw(r, c) += s.payload[r] * p[c];
            for (std::size_t c = 0; c < 6; ++c) gb[c] += p[c];
        }
        const double scale = lr / static_cast<double>(ds.samples.size());
        w = sub(w, scaled(gw, scale));
        b = sub(b, scaled(gb, scale));
    }
    metrics::ConfusionMatrix cm;
    for (const data::Sample& s : ds.samples) {
        Tensor z = b;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < 6; ++c) z[c] += s.payload[r] * w(r, c);
        int best = 0;
        for (int c = 1; c < 6; ++c) {
            if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(best)]) best = c;
        }
        cm.add(s.label, best);
    }
    return metrics::mean_f1(metrics::per_class_f1(cm));
}

}  // namespace

TEST_CASE("oversample balances classes with original payloads only") {
    Rng data_rng(1);
    const data::Dataset ds = tiny_dataset({10, 5, 10, 10, 10, 10}, 4, data_rng);
    Rng rng(2);
    const data::Dataset out = data::oversample(ds, rng);
    CHECK(out.samples.size() == 60);
    const auto counts = out.class_counts();
    for (std::size_t k = 0; k < 6; ++k) CHECK(counts[k] == 10);

    std::map<std::string, const Tensor*> originals;
    for (const data::Sample& s : ds.samples) originals[s.id] = &s.payload;
    for (const data::Sample& s : out.samples) {
        REQUIRE(originals.count(s.id) == 1);
        const Tensor& orig = *originals[s.id];
        REQUIRE(orig.size() == s.payload.size());
        for (std::size_t i = 0; i < orig.size(); ++i) CHECK(s.payload[i] == orig[i]);
    }
}

TEST_CASE("oversample of a balanced set is a permutation") {
    Rng data_rng(3);
    const data::Dataset ds = tiny_dataset({4, 4, 4, 4, 4, 4}, 3, data_rng);
    Rng rng(4);
    const data::Dataset out = data::oversample(ds, rng);
    CHECK(out.samples.size() == ds.samples.size());
    std::multiset<std::string> a, b;
    for (const auto& s : ds.samples) a.insert(s.id);
    for (const auto& s : out.samples) b.insert(s.id);
    CHECK(a == b);
}

TEST_CASE("oversample is deterministic and rejects empty classes") {
    Rng data_rng(5);
    const data::Dataset ds = tiny_dataset({3, 1, 2, 3, 1, 3}, 2, data_rng);
    Rng r1(77), r2(77);
    const data::Dataset o1 = data::oversample(ds, r1);
    const data::Dataset o2 = data::oversample(ds, r2);
    REQUIRE(o1.samples.size() == o2.samples.size());
    for (std::size_t i = 0; i < o1.samples.size(); ++i) {
        CHECK(o1.samples[i].id == o2.samples[i].id);
    }

    const data::Dataset missing = tiny_dataset({3, 0, 2, 3, 1, 3}, 2, data_rng);
    try {
        Rng r3(1);
        data::oversample(missing, r3);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("DI") != std::string::npos);
    }
}

TEST_CASE("augment: zero probabilities are the identity") {
    Rng img_rng(6);
    data::Sample s;
    s.id = "img";
    s.label = 0;
    s.payload = Tensor({8, 8, 2});
    for (std::size_t i = 0; i < s.payload.size(); ++i) s.payload[i] = img_rng.uniform(0.0, 255.0);

    data::AugmentConfig cfg;
    cfg.flip_prob = 0.0;
    cfg.crop_prob = 0.0;
    cfg.blur_prob = 0.0;
    Rng rng(7);
    const data::Sample out = data::augment(s, rng, cfg);
    for (std::size_t i = 0; i < s.payload.size(); ++i) CHECK(out.payload[i] == s.payload[i]);
}

TEST_CASE("augment: forced flip twice restores the image") {
    Rng img_rng(8);
    data::Sample s;
    s.id = "img";
    s.label = 1;
    s.payload = Tensor({6, 5, 3});
    for (std::size_t i = 0; i < s.payload.size(); ++i) s.payload[i] = img_rng.uniform(0.0, 255.0);

    data::AugmentConfig cfg;
    cfg.flip_prob = 1.0;
    cfg.crop_prob = 0.0;
    cfg.blur_prob = 0.0;
    Rng rng(9);
    const data::Sample once = data::augment(s, rng, cfg);
    const data::Sample twice = data::augment(once, rng, cfg);
    bool changed = false;
    for (std::size_t i = 0; i < s.payload.size(); ++i) {
        if (once.payload[i] != s.payload[i]) changed = true;
        CHECK(twice.payload[i] == s.payload[i]);
    }
    CHECK(changed);
}

TEST_CASE("augment: tiny blur sigma degenerates to the identity") {
    Rng img_rng(10);
    data::Sample s;
    s.id = "img";
    s.label = 2;
    s.payload = Tensor({4, 4, 1});
    for (std::size_t i = 0; i < s.payload.size(); ++i) s.payload[i] = img_rng.uniform(0.0, 255.0);

    data::AugmentConfig cfg;
    cfg.flip_prob = 0.0;
    cfg.crop_prob = 0.0;
    cfg.blur_prob = 1.0;
    cfg.blur_sigma_min = 0.0;
    cfg.blur_sigma_max = 1e-4;  // below the delta-kernel cutoff
    Rng rng(11);
    const data::Sample out = data::augment(s, rng, cfg);
    for (std::size_t i = 0; i < s.payload.size(); ++i) {
        CHECK(std::fabs(out.payload[i] - s.payload[i]) <= 1.0);
    }
}

TEST_CASE("augment: blur preserves a constant image and the label") {
    data::Sample s;
    s.id = "img";
    s.label = 4;
    s.payload = Tensor({8, 8, 1});
    for (std::size_t i = 0; i < s.payload.size(); ++i) s.payload[i] = 100.0;
    data::AugmentConfig cfg;
    cfg.flip_prob = 0.0;
    cfg.crop_prob = 0.0;
    cfg.blur_prob = 1.0;
    cfg.blur_sigma_min = 1.0;
    cfg.blur_sigma_max = 1.0;
    Rng rng(12);
    const data::Sample out = data::augment(s, rng, cfg);
    CHECK(out.label == 4);
    for (std::size_t i = 0; i < s.payload.size(); ++i) {
        CHECK(out.payload[i] == doctest::Approx(100.0).epsilon(1e-9));
    }
}

TEST_CASE("augment: crop-and-resize keeps shape and stays in range") {
    Rng img_rng(13);
    data::Sample s;
    s.id = "img";
    s.label = 3;
    s.payload = Tensor({9, 7, 2});
    for (std::size_t i = 0; i < s.payload.size(); ++i) s.payload[i] = img_rng.uniform(0.0, 255.0);
    data::AugmentConfig cfg;
    cfg.flip_prob = 0.0;
    cfg.crop_prob = 1.0;
    cfg.crop_ratio = 0.6;
    cfg.blur_prob = 0.0;
    Rng rng(14);
    const data::Sample out = data::augment(s, rng, cfg);
    CHECK(out.payload.shape() == s.payload.shape());
    for (std::size_t i = 0; i < out.payload.size(); ++i) {
        CHECK(out.payload[i] >= 0.0);
        CHECK(out.payload[i] <= 255.0);
    }
}

TEST_CASE("augment passes vector payloads through") {
    data::Sample s;
    s.id = "v";
    s.label = 5;
    s.payload = Tensor::vec({1.0, 2.0, 3.0});
    Rng rng(15);
    const data::Sample out = data::augment(s, rng, data::AugmentConfig{});
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.payload[i] == s.payload[i]);
}

TEST_CASE("synthetic: zero covariance reproduces the class means") {
    const auto spec = isotropic_spec(8, 3.0, 0.0);
    const data::Dataset ds = data::gen_synthetic(spec, 1, 99);
    CHECK(ds.samples.size() == 6);
    for (const data::Sample& s : ds.samples) {
        const Tensor& mean = spec[static_cast<std::size_t>(s.label)].mean;
        for (std::size_t i = 0; i < mean.size(); ++i) CHECK(s.payload[i] == mean[i]);
    }
}

TEST_CASE("synthetic: fixed seed gives byte-identical files") {
    const auto spec = isotropic_spec(6, 4.0, 1.0);
    const fs::path dir = temp_dir();
    const data::Dataset a = data::gen_synthetic(spec, 7, 1234);
    const data::Dataset b = data::gen_synthetic(spec, 7, 1234);
    data::save_features(dir / "a.csv", a);
    data::save_features(dir / "b.csv", b);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    data::save_labels(dir / "la.csv", a);
    data::save_labels(dir / "lb.csv", b);
    CHECK(slurp(dir / "la.csv") == slurp(dir / "lb.csv"));
    fs::remove_all(dir);
}

TEST_CASE("synthetic: non-PSD covariance is rejected") {
    auto spec = isotropic_spec(6, 1.0, 1.0);
    spec[2].cov(0, 0) = -1.0;
    CHECK_THROWS_AS(data::gen_synthetic(spec, 2, 1), DomainError);

    // indefinite despite a positive diagonal: leading block [[1,2],[2,1]]
    auto spec2 = isotropic_spec(6, 1.0, 1.0);
    spec2[0].cov(0, 1) = 2.0;
    spec2[0].cov(1, 0) = 2.0;
    CHECK_THROWS_AS(data::gen_synthetic(spec2, 2, 1), DomainError);
}

TEST_CASE("synthetic: a correlated covariance is honored") {
    // covariance [[1, 0.8], [0.8, 1]] padded to d=6: check sample correlation
    auto spec = isotropic_spec(6, 0.0, 1.0);
    for (auto& cg : spec) {
        cg.cov(0, 1) = 0.8;
        cg.cov(1, 0) = 0.8;
    }
    const data::Dataset ds = data::gen_synthetic(spec, 2000, 555);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const data::Sample& s : ds.samples) {
        const Tensor& mean = spec[static_cast<std::size_t>(s.label)].mean;
        const double x = s.payload[0] - mean[0];
        const double y = s.payload[1] - mean[1];
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(corr == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("synthetic separability oracle: 10-sigma means train to near-perfect F1") {
    const auto spec = isotropic_spec(8, 10.0, 1.0);  // pairwise distance 10*sqrt(2) sigma
    const data::Dataset ds = data::gen_synthetic(spec, 50, 2025);
    CHECK(linear_classifier_f1(ds, 300, 0.5) >= 0.99);
}

TEST_CASE("feature and label files round trip") {
    Rng rng(16);
    data::Dataset ds = tiny_dataset({2, 1, 1, 1, 1, 2}, 3, rng);
    const fs::path dir = temp_dir();
    data::save_features(dir / "f.csv", ds);
    data::save_labels(dir / "l.csv", ds);
    const data::Dataset loaded = data::load_dataset(dir / "f.csv", dir / "l.csv");
    REQUIRE(loaded.samples.size() == ds.samples.size());
    CHECK(loaded.dim == ds.dim);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(loaded.samples[i].id == ds.samples[i].id);
        CHECK(loaded.samples[i].label == ds.samples[i].label);
        for (std::size_t k = 0; k < ds.dim; ++k) {
            CHECK(loaded.samples[i].payload[k] == ds.samples[i].payload[k]);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("prediction files round trip, with and without the changed column") {
    const fs::path dir = temp_dir();
    const std::vector<std::pair<std::string, int>> preds{{"a", 0}, {"b", 3}, {"c", 5}};
    data::save_predictions(dir / "p.csv", preds);
    CHECK(data::load_predictions(dir / "p.csv") == preds);

    const std::vector<bool> changed{false, true, false};
    data::save_predictions(dir / "pc.csv", preds, &changed);
    CHECK(data::load_predictions(dir / "pc.csv") == preds);
    const std::string text = slurp(dir / "pc.csv");
    CHECK(text.find("id,label,changed") == 0);
    CHECK(text.find("b,HA,1") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("malformed files carry path and row information") {
    const fs::path dir = temp_dir();
    {
        std::ofstream os(dir / "bad.csv");
        os << "id,f0,f1\n";
        os << "a,1.0,2.0\n";
        os << "b,1.0,oops\n";
    }
    {
        std::ofstream os(dir / "labels.csv");
        os << "id,label\na,AN\nb,DI\n";
    }
    try {
        data::load_dataset(dir / "bad.csv", dir / "labels.csv");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.csv") != std::string::npos);
        CHECK(msg.find("row 3") != std::string::npos);
    }

    {
        std::ofstream os(dir / "nolabel.csv");
        os << "id,label\na,AN\n";
    }
    CHECK_THROWS_AS(data::load_dataset(dir / "bad.csv", dir / "nolabel.csv"), DataError);
    CHECK_THROWS_AS(data::load_dataset(dir / "missing.csv", dir / "labels.csv"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("image datasets reshape payloads") {
    const fs::path dir = temp_dir();
    {
        std::ofstream os(dir / "img.csv");
        os << "id";
        for (int i = 0; i < 12; ++i) os << ",f" << i;
        os << "\nz";
        for (int i = 0; i < 12; ++i) os << "," << i;
        os << "\n";
    }
    {
        std::ofstream os(dir / "lab.csv");
        os << "id,label\nz,SU\n";
    }
    const data::Dataset ds = data::load_image_dataset(dir / "img.csv", dir / "lab.csv", 2, 3, 2);
    REQUIRE(ds.samples.size() == 1);
    CHECK(ds.samples[0].payload.shape() == std::vector<std::size_t>{2, 3, 2});
    CHECK(ds.samples[0].payload(1, 2, 1) == 11.0);
    CHECK_THROWS_AS(data::load_image_dataset(dir / "img.csv", dir / "lab.csv", 2, 2, 2),
                    DataError);
    fs::remove_all(dir);
}
