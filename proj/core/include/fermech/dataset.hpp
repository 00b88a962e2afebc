#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fermech/rng.hpp"
#include "fermech/tensor.hpp"

namespace fermech::data {

// One labeled sample: a feature vector (shape {d}) or an image patch
// (shape {h, w, c}) plus an expression label.
struct Sample {
    std::string id;
    Tensor payload;
    int label = 0;
};

enum class Kind { vector_features, image };

struct Dataset {
    Kind kind = Kind::vector_features;
    std::size_t dim = 0;  // feature length; h*w*c for images
    std::size_t image_h = 0, image_w = 0, image_c = 0;
    std::vector<Sample> samples;

    std::array<std::size_t, 6> class_counts() const;
};

// Feature file: header `id,f0,...,f{d-1}`. Label file: header `id,label`
// with names AN..SU. Samples appear in feature-file order; every feature id
// must carry a label.
Dataset load_dataset(const std::filesystem::path& features_csv,
                     const std::filesystem::path& labels_csv);

// Feature file alone, in file order.
std::vector<std::pair<std::string, Tensor>> load_features(
    const std::filesystem::path& features_csv);
// Same files, payloads reshaped to {h, w, c}.
Dataset load_image_dataset(const std::filesystem::path& features_csv,
                           const std::filesystem::path& labels_csv, std::size_t h,
                           std::size_t w, std::size_t c);

void save_features(const std::filesystem::path& path, const Dataset& ds);
void save_labels(const std::filesystem::path& path, const Dataset& ds);

// Prediction file: header `id,label`; `id,label,changed` when `changed`
// (0/1 per row) is supplied.
void save_predictions(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, int>>& preds,
                      const std::vector<bool>* changed = nullptr);
std::vector<std::pair<std::string, int>> load_predictions(const std::filesystem::path& path);

// Duplicates every minority class (with replacement, seeded) up to the
// majority count, then reshuffles. DomainError when a class is absent.
Dataset oversample(const Dataset& ds, Rng& rng);

struct AugmentConfig {
    double flip_prob = 0.5;
    double crop_prob = 0.5;
    double crop_ratio = 0.875;  // crop side as a fraction of the original
    double blur_prob = 0.3;
    double blur_sigma_min = 0.1;
    double blur_sigma_max = 1.5;

    void validate() const;
};

// Random horizontal flip, random crop-and-resize, Gaussian blur. Identity on
// vector payloads (warned once per process).
Sample augment(const Sample& s, Rng& rng, const AugmentConfig& cfg);

// Bilinear resize of an {h, w, c} payload.
Tensor resize_image(const Tensor& img, std::size_t out_h, std::size_t out_w);

// Per-class Gaussian spec for synthetic data.
struct ClassGaussian {
    Tensor mean;  // {d}
    Tensor cov;   // {d, d}, positive semi-definite
};

// Seeded draws: mean + L z with L the Cholesky factor of cov.
// DomainError when a covariance is not PSD.
Dataset gen_synthetic(const std::array<ClassGaussian, 6>& spec, std::size_t n_per_class,
                      std::uint64_t seed, const std::string& id_prefix = "");

}  // namespace fermech::data
