#include "fermech/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fermech/errors.hpp"
#include "fermech/label.hpp"
#include "fermech/metrics.hpp"
#include "fermech/numerics.hpp"
#include "fermech/param_io.hpp"
#include "fermech/rng.hpp"

namespace fermech::pipeline {

namespace {

Tensor flat_payload(const Tensor& payload) {
    return payload.rank() == 1 ? payload : reshaped(payload, {payload.size()});
}

ensemble::ScoreVector to_score(const Tensor& logits) {
    const Tensor p = softmax(logits);
    ensemble::ScoreVector sv;
    for (std::size_t k = 0; k < 6; ++k) sv.p[k] = p[k];
    return sv;
}

std::string degree_mode_name(gus::DegreeMode mode) {
    return mode == gus::DegreeMode::raw_adjacency ? "raw_adjacency" : "with_self_loop";
}

gus::DegreeMode degree_mode_from(const std::string& name) {
    if (name == "raw_adjacency") return gus::DegreeMode::raw_adjacency;
    if (name == "with_self_loop") return gus::DegreeMode::with_self_loop;
    throw DataError("checkpoint: unknown degree mode '" + name + "'");
}

std::string hexd(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexd(const std::string& s, const char* key) {
    const char* p = s.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) throw DataError(std::string("checkpoint: bad value for ") + key);
    return v;
}

}  // namespace

Model init_model(const backbone::Config& net_cfg, const gus::Config& gus_cfg) {
    if (gus_cfg.dims.empty() || gus_cfg.dims.front() != net_cfg.high_dim) {
        throw ConfigError("gus.layers must start at backbone.high_dim (" +
                          std::to_string(net_cfg.high_dim) + ")");
    }
    Model m;
    m.net = backbone::init(net_cfg);
    Rng branch_rng = Rng(net_cfg.seed).fork(1);
    m.branch = mre::init_branch(net_cfg.mid_channels, net_cfg.num_classes, branch_rng);
    m.gus_cfg = gus_cfg;
    m.gus = gus::init(gus_cfg);
    return m;
}

std::vector<EpochLog> train(Model& m, const data::Dataset& train_set, const TrainOptions& opt) {
    opt.mre_cfg.validate();
    opt.loss_cfg.validate();
    if (train_set.samples.empty()) throw DataError("train: empty dataset");
    if (opt.batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
    if (opt.epochs == 0) throw ConfigError("train.epochs must be >= 1");
    if (!(opt.backbone_lr > 0.0)) throw ConfigError("backbone.lr must be > 0");

    Rng rng(opt.seed);
    const data::Dataset working = opt.oversample ? data::oversample(train_set, rng) : train_set;
    const backbone::Config& net_cfg = m.net.cfg;
    const bool do_augment = opt.augment && working.kind == data::Kind::image;
    const double lambda = opt.mre_cfg.lambda;
    bool warned_unmixable = false;

    std::vector<EpochLog> logs;
    logs.reserve(opt.epochs);
    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        std::vector<std::size_t> order(working.samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);

        double sum_high = 0.0, sum_branch = 0.0, sum_gus = 0.0;

        metrics::ConfusionMatrix train_cm;
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            const std::size_t bs = std::min(opt.batch_size, order.size() - start);

            std::vector<backbone::ForwardCache> caches;
            caches.reserve(bs);
            std::vector<int> labels(bs);
            for (std::size_t b = 0; b < bs; ++b) {
                const data::Sample& s = working.samples[order[start + b]];
                labels[b] = s.label;
                const Tensor input = do_augment
                                         ? flat_payload(data::augment(s, rng, opt.augment_cfg).payload)
                                         : flat_payload(s.payload);
                caches.push_back(backbone::forward_cached(m.net, input));
            }

            backbone::Grads grads = backbone::zero_grads(net_cfg);
            mre::BranchGrads bgrads = mre::zero_branch_grads(m.branch);
            std::vector<Tensor> dmid(bs);

            // main head loss, backward to the mid tap; objective is the batch
            // sum of per-sample losses
            for (std::size_t b = 0; b < bs; ++b) {
                sum_high += losses::mixed(caches[b].taps.logits, labels[b], opt.loss_cfg);
                train_cm.add(labels[b], ensemble::predict(caches[b].taps.logits));
                const Tensor dlogits =
                    losses::mixed_grad(caches[b].taps.logits, labels[b], opt.loss_cfg);
                dmid[b] = backbone::backward_head(m.net, caches[b], dlogits, grads);
            }

            // auxiliary branch on mixed mid-level maps
            if (lambda > 0.0) {
                for (std::size_t b = 0; b < bs; ++b) {
                    const auto partner = mre::choose_partner(labels, b, rng);
                    mre::MixMask mask(net_cfg.mid_h, net_cfg.mid_w);
                    Tensor mixed;
                    if (partner) {
                        mask = mre::sample_mix_mask(net_cfg.mid_h, net_cfg.mid_w,
                                                    opt.mre_cfg.noise_ratio, rng);
                        mixed = mre::mix_samples(caches[b].taps.mid, labels[b],
                                                 caches[*partner].taps.mid, labels[*partner], mask);
                    } else {
                        if (!warned_unmixable) {
                            warn("train: batch has no different-label partner; sample left unmixed");
                            warned_unmixable = true;
                        }
                        mixed = caches[b].taps.mid;
                    }
                    const Tensor blogits = mre::branch_logits(mixed, m.branch);
                    sum_branch += lambda * losses::mixed(blogits, labels[b], opt.loss_cfg);
                    const Tensor dblogits =
                        scaled(losses::mixed_grad(blogits, labels[b], opt.loss_cfg), lambda);
                    const Tensor dmixed = mre::branch_backward(mixed, m.branch, dblogits, bgrads);
                    if (partner) {
                        mre::route_mix_grad(dmixed, mask, dmid[b], dmid[*partner]);
                    } else {
                        dmid[b] = add(dmid[b], dmixed);
                    }
                }
            }

            for (std::size_t b = 0; b < bs; ++b) {
                backbone::backward_stem(m.net, caches[b], dmid[b], grads);
            }

            m.net = backbone::sgd_step(m.net, grads, opt.backbone_lr);
            if (!bgrads.w.all_finite() || !bgrads.b.all_finite()) {
                throw NumericError("train: non-finite gradient for the branch head");
            }
            m.branch.w = sub(m.branch.w, scaled(bgrads.w, opt.backbone_lr));
            m.branch.b = sub(m.branch.b, scaled(bgrads.b, opt.backbone_lr));

            // graph head: one step on this batch's pooled features
            std::vector<Tensor> feats;
            feats.reserve(bs);
            for (std::size_t b = 0; b < bs; ++b) feats.push_back(caches[b].taps.high);
            const gus::HeadCache gcache = gus::head_forward(feats, m.gus_cfg, m.gus);
            const Tensor& glogits = gcache.post.back();
            Tensor dglogits(glogits.shape());
            for (std::size_t b = 0; b < bs; ++b) {
                Tensor row({6});
                for (std::size_t k = 0; k < 6; ++k) row[k] = glogits(b, k);
                sum_gus += losses::mixed(row, labels[b], opt.loss_cfg);
                const Tensor grow = losses::mixed_grad(row, labels[b], opt.loss_cfg);
                for (std::size_t k = 0; k < 6; ++k) dglogits(b, k) = grow[k];
            }
            gus::Grads ggrads = gus::zero_grads(m.gus);
            gus::head_backward(m.gus, gcache, dglogits, ggrads);
            m.gus = gus::sgd_step(m.gus, ggrads, m.gus_cfg.lr);
        }

        EpochLog log;
        log.epoch = epoch;
        const double n = static_cast<double>(order.size());
        log.loss_high = sum_high / n;  // logged as per-sample means
        log.loss_branch = sum_branch / n;
        log.loss_gus = sum_gus / n;
        if (!std::isfinite(log.loss_high) || !std::isfinite(log.loss_branch) ||
            !std::isfinite(log.loss_gus)) {
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        log.train_f1 = metrics::mean_f1(metrics::per_class_f1(train_cm));
        logs.push_back(log);
    }
    return logs;
}

EvalOutputs evaluate(const Model& m, const data::Dataset& eval_set) {
    if (eval_set.samples.empty()) throw DataError("evaluate: empty dataset");
    EvalOutputs out;
    out.high_features.reserve(eval_set.samples.size());
    for (const data::Sample& s : eval_set.samples) {
        const auto taps = backbone::forward(m.net, flat_payload(s.payload));
        out.ids.push_back(s.id);
        out.truth.push_back(s.label);
        out.mre_scores.ids.push_back(s.id);
        out.mre_scores.rows.push_back(to_score(taps.logits));
        out.branch_scores.ids.push_back(s.id);
        out.branch_scores.rows.push_back(to_score(mre::branch_logits(taps.mid, m.branch)));
        out.high_features.push_back(taps.high);
    }
    // transductive graph over the whole provided set
    const Tensor glogits = gus::head_logits(out.high_features, m.gus_cfg, m.gus);
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
        Tensor row({6});
        for (std::size_t k = 0; k < 6; ++k) row[k] = glogits(i, k);
        out.gus_scores.ids.push_back(out.ids[i]);
        out.gus_scores.rows.push_back(to_score(row));
    }
    return out;
}

void save_model(const Model& m, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    paramio::write_kv(os, "fermech-model", std::string("v1"));
    backbone::write_section(os, m.net);
    paramio::write_kv(os, "branch", std::string("v1"));
    paramio::write_tensor(os, "branch_w", m.branch.w);
    paramio::write_tensor(os, "branch_b", m.branch.b);
    paramio::write_kv(os, "gus", std::string("v1"));
    std::ostringstream dims;
    for (std::size_t i = 0; i < m.gus_cfg.dims.size(); ++i) {
        if (i) dims << ",";
        dims << m.gus_cfg.dims[i];
    }
    paramio::write_kv(os, "gus_dims", dims.str());
    paramio::write_kv(os, "gus_clamp_negative_sim",
                      std::string(m.gus_cfg.clamp_negative_sim ? "1" : "0"));
    paramio::write_kv(os, "gus_degree_mode", degree_mode_name(m.gus_cfg.degree_mode));
    paramio::write_kv(os, "gus_lr", hexd(m.gus_cfg.lr));
    paramio::write_kv(os, "gus_seed", m.gus_cfg.seed);
    paramio::write_kv(os, "gus_step", m.gus.step);
    for (std::size_t l = 0; l < m.gus.layers.size(); ++l) {
        paramio::write_tensor(os, "gus_w" + std::to_string(l), m.gus.layers[l].w);
    }
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    const std::string version = paramio::read_kv(is, "fermech-model");
    if (version != "v1") throw DataError("unsupported model checkpoint version " + version);
    Model m;
    m.net = backbone::read_section(is);
    if (paramio::read_kv(is, "branch") != "v1") {
        throw DataError("unsupported branch section version");
    }
    m.branch.w = paramio::read_tensor(is, "branch_w");
    m.branch.b = paramio::read_tensor(is, "branch_b");
    if (paramio::read_kv(is, "gus") != "v1") {
        throw DataError("unsupported gus section version");
    }
    const std::string dims = paramio::read_kv(is, "gus_dims");
    std::istringstream ds(dims);
    std::string field;
    while (std::getline(ds, field, ',')) {
        m.gus_cfg.dims.push_back(static_cast<std::size_t>(std::stoull(field)));
    }
    m.gus_cfg.clamp_negative_sim = paramio::read_kv(is, "gus_clamp_negative_sim") == "1";
    m.gus_cfg.degree_mode = degree_mode_from(paramio::read_kv(is, "gus_degree_mode"));
    m.gus_cfg.lr = parse_hexd(paramio::read_kv(is, "gus_lr"), "gus_lr");
    m.gus_cfg.seed = paramio::read_kv_u64(is, "gus_seed");
    m.gus.step = paramio::read_kv_u64(is, "gus_step");
    m.gus_cfg.validate();
    for (std::size_t l = 0; l + 1 < m.gus_cfg.dims.size(); ++l) {
        gus::Layer layer;
        layer.w = paramio::read_tensor(is, "gus_w" + std::to_string(l));
        if (layer.w.rank() != 2 || layer.w.dim(0) != m.gus_cfg.dims[l] ||
            layer.w.dim(1) != m.gus_cfg.dims[l + 1]) {
            throw DataError("checkpoint: gus layer " + std::to_string(l) + " weights " +
                            layer.w.shape_str() + " do not match dims " +
                            std::to_string(m.gus_cfg.dims[l]) + "x" +
                            std::to_string(m.gus_cfg.dims[l + 1]));
        }
        layer.relu = l + 2 < m.gus_cfg.dims.size();
        m.gus.layers.push_back(std::move(layer));
    }
    return m;
}

}  // namespace fermech::pipeline
