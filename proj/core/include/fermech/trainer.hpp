#pragma once

#include <filesystem>
#include <vector>

#include "fermech/backbone.hpp"
#include "fermech/dataset.hpp"
#include "fermech/ensemble.hpp"
#include "fermech/gus.hpp"
#include "fermech/losses.hpp"
#include "fermech/mre.hpp"

namespace fermech::pipeline {

// The trained system: shared backbone, auxiliary mid-level branch head and
// the graph head. The branch supervises training; at evaluation it reads the
// unmixed mid-level map.
struct Model {
    backbone::State net;
    mre::BranchHead branch;
    gus::Config gus_cfg;  // inference-relevant structure and flags
    gus::State gus;
};

Model init_model(const backbone::Config& net_cfg, const gus::Config& gus_cfg);

// Versioned composite checkpoint; save/load round-trips bit-exactly.
void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    bool oversample = true;
    bool augment = true;  // image datasets only
    data::AugmentConfig augment_cfg;
    double backbone_lr = 0.001;  // the branch head trains at the same rate
    mre::Config mre_cfg;
    losses::Config loss_cfg;
    std::uint64_t seed = 0;
};

// Per-epoch record written to the run log. Losses are per-sample means.
struct EpochLog {
    std::size_t epoch = 0;
    double loss_high = 0.0;
    double loss_branch = 0.0;
    double loss_gus = 0.0;
    double train_f1 = 0.0;
};

// Joint loop: each batch takes one SGD step on backbone+branch under the
// mixed-representation objective and one on the graph head (its own rate,
// features treated as inputs). NumericError on a non-finite loss.
std::vector<EpochLog> train(Model& m, const data::Dataset& train_set, const TrainOptions& opt);

struct EvalOutputs {
    std::vector<std::string> ids;
    std::vector<int> truth;
    ensemble::ScoreTable mre_scores;     // main classifier head
    ensemble::ScoreTable gus_scores;     // graph head over the whole eval set
    ensemble::ScoreTable branch_scores;  // auxiliary branch on unmixed maps
    std::vector<Tensor> high_features;   // penultimate vectors, one per sample
};

EvalOutputs evaluate(const Model& m, const data::Dataset& eval_set);

}  // namespace fermech::pipeline
