#include "fermech/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fermech/correction.hpp"
#include "fermech/csv.hpp"
#include "fermech/dataset.hpp"
#include "fermech/errors.hpp"
#include "fermech/label.hpp"
#include "fermech/metrics.hpp"
#include "fermech/numerics.hpp"
#include "fermech/trainer.hpp"

namespace fermech::pipeline {

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const config::File& cfg) {
    fs::path dir = cfg.get_string("out_dir", "out");
    fs::create_directories(dir);
    return dir;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

data::Dataset load_split(const config::File& cfg, const std::string& features_key,
                         const std::string& labels_key) {
    const fs::path features = cfg.require_string(features_key);
    const fs::path labels = cfg.require_string(labels_key);
    const std::string kind = cfg.get_string("dataset.kind", "vector");
    if (kind == "image") {
        const std::size_t h = cfg.get_size("dataset.image_h", 32);
        const std::size_t w = cfg.get_size("dataset.image_w", 32);
        const std::size_t c = cfg.get_size("dataset.image_c", 1);
        data::Dataset ds = data::load_image_dataset(features, labels, h, w, c);
        // images enter the pipeline at a fixed square size; 0 disables
        const std::size_t target = cfg.get_size("dataset.resize", 224);
        if (target > 0 && (target != h || target != w)) {
            for (data::Sample& s : ds.samples) {
                s.payload = data::resize_image(s.payload, target, target);
            }
            ds.image_h = target;
            ds.image_w = target;
            ds.dim = target * target * c;
        }
        return ds;
    }
    if (kind != "vector") {
        throw ConfigError("dataset.kind must be 'vector' or 'image', got '" + kind + "'");
    }
    return data::load_dataset(features, labels);
}

gus::DegreeMode parse_degree_mode(const config::File& cfg) {
    const std::string mode = cfg.get_string("gus.degree_mode", "with_self_loop");
    if (mode == "with_self_loop") return gus::DegreeMode::with_self_loop;
    if (mode == "raw_adjacency") return gus::DegreeMode::raw_adjacency;
    throw ConfigError("gus.degree_mode must be 'with_self_loop' or 'raw_adjacency'");
}

losses::Config loss_config(const config::File& cfg) {
    losses::Config lc;
    lc.omega1 = cfg.get_double("loss.omega1", lc.omega1);
    lc.omega2 = cfg.get_double("loss.omega2", lc.omega2);
    lc.omega3 = cfg.get_double("loss.omega3", lc.omega3);
    lc.gamma = cfg.get_double("loss.gamma", lc.gamma);
    lc.tau = cfg.get_double("loss.tau", lc.tau);
    lc.validate();
    return lc;
}

struct ReportRow {
    std::string name;
    std::array<double, 6> f1{};
    double mean = 0.0;
};

ReportRow score_row(const std::string& name, const std::vector<int>& truth,
                    const std::vector<int>& preds) {
    metrics::ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], preds[i]);
    ReportRow row;
    row.name = name;
    row.f1 = metrics::per_class_f1(cm);
    row.mean = metrics::mean_f1(row.f1);
    return row;
}

std::string render_report(const std::vector<ReportRow>& rows) {
    std::size_t name_w = 6;  // "METHOD"
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
    std::ostringstream os;
    os << "METHOD";
    os << std::string(name_w - 6, ' ');
    for (const char* col : {"AN", "DI", "FE", "HA", "SA", "SU", "MEAN"}) {
        os << std::string(8 - std::string(col).size(), ' ') << col;
    }
    os << "\n";
    for (const auto& r : rows) {
        os << r.name << std::string(name_w - r.name.size(), ' ');
        for (double v : r.f1) os << "  " << fixed4(v);
        os << "  " << fixed4(r.mean) << "\n";
    }
    return os.str();
}

void write_report_files(const fs::path& text_path, const fs::path& csv_path,
                        const std::vector<ReportRow>& rows) {
    std::ofstream txt(text_path);
    if (!txt) throw DataError("cannot open file for writing: " + text_path.string());
    txt << render_report(rows);

    std::ofstream csv_os(csv_path);
    if (!csv_os) throw DataError("cannot open file for writing: " + csv_path.string());
    csv_os << "method,an,di,fe,ha,sa,su,mean\n";
    for (const auto& r : rows) {
        csv_os << r.name;
        for (double v : r.f1) csv_os << "," << fixed4(v);
        csv_os << "," << fixed4(r.mean) << "\n";
    }
}

std::vector<int> argmax_preds(const ensemble::ScoreTable& table) {
    std::vector<int> preds;
    preds.reserve(table.size());
    for (const auto& sv : table.rows) {
        Tensor t({6});
        for (std::size_t k = 0; k < 6; ++k) t[k] = sv.p[k];
        preds.push_back(ensemble::predict(t));
    }
    return preds;
}

Tensor identity_cov(std::size_t d, double sigma) {
    Tensor cov({d, d});
    for (std::size_t i = 0; i < d; ++i) cov(i, i) = sigma * sigma;
    return cov;
}

std::array<data::ClassGaussian, 6> synthetic_spec(const config::File& cfg, std::size_t dim) {
    const double sigma = cfg.get_double("synthetic.sigma", 1.0);
    if (sigma < 0.0) throw ConfigError("synthetic.sigma must be >= 0");
    const double mean_scale = cfg.get_double("synthetic.mean_scale", 5.0);

    std::array<data::ClassGaussian, 6> spec;
    if (cfg.has("synthetic.means_file")) {
        const fs::path path = cfg.require_string("synthetic.means_file");
        csv::Reader reader(path);
        if (reader.header().empty() || reader.header()[0] != "label") {
            throw DataError(path.string() + ": bad header, expected label,f0,...");
        }
        const std::size_t d = reader.header().size() - 1;
        std::array<bool, 6> seen{};
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            if (fields.size() != d + 1) {
                throw DataError(path.string() + ": row " + std::to_string(reader.row()) +
                                ": expected " + std::to_string(d + 1) + " fields");
            }
            const int label = parse_label(fields[0]);
            std::vector<double> mean(d);
            for (std::size_t k = 0; k < d; ++k) {
                mean[k] = csv::parse_double(fields[k + 1], path, reader.row());
            }
            spec[static_cast<std::size_t>(label)].mean = Tensor::vec(std::move(mean));
            seen[static_cast<std::size_t>(label)] = true;
        }
        for (int k = 0; k < kNumClasses; ++k) {
            if (!seen[static_cast<std::size_t>(k)]) {
                throw DataError(path.string() + ": no mean row for class " +
                                std::string(label_name(k)));
            }
        }
        dim = spec[0].mean.size();
    } else {
        if (dim < 6) {
            throw ConfigError("synthetic.dim must be >= 6 unless synthetic.means_file is given");
        }
        for (int k = 0; k < kNumClasses; ++k) {
            Tensor mean({dim});
            mean[static_cast<std::size_t>(k)] = mean_scale;
            spec[static_cast<std::size_t>(k)].mean = std::move(mean);
        }
    }

    Tensor cov;
    if (cfg.has("synthetic.cov_file")) {
        const fs::path path = cfg.require_string("synthetic.cov_file");
        std::ifstream in(path);
        if (!in) throw DataError("cannot open file: " + path.string());
        cov = Tensor({dim, dim});
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (row >= dim) throw DataError(path.string() + ": more than " + std::to_string(dim) + " rows");
            const auto fields = csv::split(line);
            if (fields.size() != dim) {
                throw DataError(path.string() + ": row " + std::to_string(row + 1) + ": expected " +
                                std::to_string(dim) + " values");
            }
            for (std::size_t c = 0; c < dim; ++c) {
                cov(row, c) = csv::parse_double(fields[c], path, row + 1);
            }
            ++row;
        }
        if (row != dim) {
            throw DataError(path.string() + ": expected " + std::to_string(dim) + " rows, found " +
                            std::to_string(row));
        }
    } else {
        cov = identity_cov(dim, sigma);
    }
    for (auto& cg : spec) cg.cov = cov;
    return spec;
}

}  // namespace

void run_gen_synthetic(const config::File& cfg) {
    const std::uint64_t seed = cfg.get_u64("seed", 7);
    const fs::path out = out_dir(cfg);
    const std::size_t dim = cfg.get_size("synthetic.dim", 32);
    const std::size_t train_n = cfg.get_size("synthetic.train_per_class", 100);
    const std::size_t eval_n = cfg.get_size("synthetic.eval_per_class", 50);
    if (train_n == 0 || eval_n == 0) {
        throw ConfigError("synthetic.train_per_class and eval_per_class must be >= 1");
    }

    const auto spec = synthetic_spec(cfg, dim);
    const data::Dataset train = data::gen_synthetic(spec, train_n, seed, "tr_");
    const data::Dataset eval = data::gen_synthetic(spec, eval_n, seed + 1, "ev_");

    data::save_features(out / "train_features.csv", train);
    data::save_labels(out / "train_labels.csv", train);
    data::save_features(out / "eval_features.csv", eval);
    data::save_labels(out / "eval_labels.csv", eval);

    std::cout << "gen-synthetic: wrote " << train.samples.size() << " train and "
              << eval.samples.size() << " eval samples (dim " << spec[0].mean.size() << ") to "
              << out.string() << "\n";
}

void run_train(const config::File& cfg) {
    const std::uint64_t seed = cfg.get_u64("seed", 7);
    const fs::path out = out_dir(cfg);
    const data::Dataset train_set =
        load_split(cfg, "dataset.train_features", "dataset.train_labels");

    backbone::Config bc;
    bc.input_dim = train_set.dim;
    if (train_set.kind == data::Kind::image) {
        bc.input_kind = backbone::InputKind::image;
        bc.image_h = train_set.image_h;
        bc.image_w = train_set.image_w;
        bc.image_c = train_set.image_c;
    }
    bc.mid_channels = cfg.get_size("backbone.mid_channels", 8);
    bc.mid_h = cfg.get_size("backbone.mid_h", 2);
    bc.mid_w = cfg.get_size("backbone.mid_w", 2);
    bc.high_dim = cfg.get_size("backbone.high_dim", 32);
    bc.seed = seed;
    bc.validate();

    gus::Config gc = gus::Config::two_layer(bc.high_dim);
    if (cfg.has("gus.layers")) gc.dims = cfg.get_sizes("gus.layers");
    gc.clamp_negative_sim = cfg.get_bool("gus.clamp_negative_sim", true);
    gc.degree_mode = parse_degree_mode(cfg);
    gc.lr = cfg.get_double("gus.lr", 0.0001);
    gc.seed = seed + 1000003;  // distinct stream from the backbone init
    gc.validate();

    TrainOptions opt;
    opt.epochs = cfg.get_size("train.epochs", 100);
    opt.batch_size = cfg.get_size("train.batch_size", 32);
    opt.oversample = cfg.get_bool("train.oversample", true);
    opt.augment = cfg.get_bool("train.augment", true);
    opt.augment_cfg.flip_prob = cfg.get_double("augment.flip_prob", opt.augment_cfg.flip_prob);
    opt.augment_cfg.crop_prob = cfg.get_double("augment.crop_prob", opt.augment_cfg.crop_prob);
    opt.augment_cfg.crop_ratio = cfg.get_double("augment.crop_ratio", opt.augment_cfg.crop_ratio);
    opt.augment_cfg.blur_prob = cfg.get_double("augment.blur_prob", opt.augment_cfg.blur_prob);
    opt.augment_cfg.blur_sigma_min =
        cfg.get_double("augment.blur_sigma_min", opt.augment_cfg.blur_sigma_min);
    opt.augment_cfg.blur_sigma_max =
        cfg.get_double("augment.blur_sigma_max", opt.augment_cfg.blur_sigma_max);
    opt.backbone_lr = cfg.get_double("backbone.lr", 0.001);
    opt.mre_cfg.lambda = cfg.get_double("mre.lambda", 1.0);
    opt.mre_cfg.noise_ratio = cfg.get_double("mre.noise_ratio", 0.25);
    opt.mre_cfg.validate();
    opt.loss_cfg = loss_config(cfg);
    opt.seed = seed;

    Model model = init_model(bc, gc);
    std::vector<std::pair<std::string, EpochLog>> full_log;
    for (const EpochLog& e : train(model, train_set, opt)) full_log.emplace_back("train", e);

    // optional second phase on a held-out split
    const std::size_t ft_epochs = cfg.get_size("train.finetune_epochs", 0);
    if (ft_epochs > 0) {
        const data::Dataset ft_set =
            load_split(cfg, "dataset.finetune_features", "dataset.finetune_labels");
        TrainOptions ft_opt = opt;
        ft_opt.epochs = ft_epochs;
        ft_opt.seed = seed + 1;
        for (const EpochLog& e : train(model, ft_set, ft_opt)) full_log.emplace_back("finetune", e);
    }

    const fs::path ckpt = cfg.get_string("train.checkpoint", (out / "checkpoint.txt").string());
    save_model(model, ckpt);

    const fs::path log_path = cfg.get_string("train.log_file", (out / "train_log.txt").string());
    std::ofstream log(log_path);
    if (!log) throw DataError("cannot open file for writing: " + log_path.string());
    for (const auto& [phase, e] : full_log) {
        log << "phase=" << phase << " epoch=" << e.epoch << " loss_high=" << fixed6(e.loss_high)
            << " loss_branch=" << fixed6(e.loss_branch) << " loss_gus=" << fixed6(e.loss_gus)
            << " train_f1=" << fixed6(e.train_f1) << "\n";
    }

    const EpochLog& last = full_log.back().second;
    std::cout << "train: " << full_log.size() << " epochs, final loss_high="
              << fixed6(last.loss_high) << " train_f1=" << fixed6(last.train_f1)
              << ", checkpoint " << ckpt.string() << "\n";
}

void run_eval(const config::File& cfg) {
    const fs::path out = out_dir(cfg);
    const fs::path ckpt = cfg.get_string(
        "eval.checkpoint",
        cfg.get_string("train.checkpoint", (out / "checkpoint.txt").string()));
    const Model model = load_model(ckpt);
    const data::Dataset eval_set = load_split(cfg, "dataset.eval_features", "dataset.eval_labels");

    const EvalOutputs ev = evaluate(model, eval_set);
    ensemble::save_scores(out / "mre_scores.csv", ev.mre_scores);
    ensemble::save_scores(out / "gus_scores.csv", ev.gus_scores);
    ensemble::save_scores(out / "branch_scores.csv", ev.branch_scores);

    // penultimate features, usable as the correction stage's feature file
    data::Dataset high;
    high.dim = model.net.cfg.high_dim;
    for (std::size_t i = 0; i < ev.ids.size(); ++i) {
        high.samples.push_back({ev.ids[i], ev.high_features[i], ev.truth[i]});
    }
    data::save_features(out / "high_features.csv", high);

    std::vector<ReportRow> rows;
    rows.push_back(score_row("MRE", ev.truth, argmax_preds(ev.mre_scores)));
    rows.push_back(score_row("GUS", ev.truth, argmax_preds(ev.gus_scores)));
    rows.push_back(score_row("BRANCH", ev.truth, argmax_preds(ev.branch_scores)));
    write_report_files(out / "eval_report.txt", out / "eval_report.csv", rows);
    std::cout << render_report(rows);
}

void run_merge(const config::File& cfg) {
    const fs::path out = out_dir(cfg);
    std::vector<double> w = cfg.get_doubles("ensemble.weights");
    if (w.empty()) w = {0.6, 0.2, 0.2};  // scheme s1
    if (w.size() != 3) {
        throw ConfigError("ensemble.weights must hold three values: gus,mre,dmue");
    }
    ensemble::Weights weights{w[0], w[1], w[2]};
    weights.validate();

    struct Source {
        std::string name;
        std::string key;
        std::string fallback;
        double weight;
    };
    const std::vector<Source> slots{
        {"gus", "ensemble.gus_scores", (out / "gus_scores.csv").string(), weights.gus},
        {"mre", "ensemble.mre_scores", (out / "mre_scores.csv").string(), weights.mre},
        {"dmue", "ensemble.dmue_scores", "", weights.dmue},
    };

    std::vector<std::string> names;
    std::vector<double> used_weights;
    std::vector<ensemble::ScoreTable> tables;
    for (const Source& s : slots) {
        const std::string path = cfg.get_string(s.key, s.fallback);
        if (path.empty()) {
            if (s.weight > 0.0) {
                throw ConfigError("source '" + s.name + "' has weight " + std::to_string(s.weight) +
                                  " but no score file (set " + s.key + ")");
            }
            continue;  // absent zero-weight source
        }
        if (s.weight == 0.0 && !fs::exists(path)) continue;
        names.push_back(s.name);
        used_weights.push_back(s.weight);
        tables.push_back(ensemble::load_scores(path));
    }
    if (tables.empty()) throw ConfigError("run_merge: no score sources configured");

    // all sources must cover exactly the same sample ids
    std::vector<std::map<std::string, ensemble::ScoreVector>> by_id(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t) {
        for (std::size_t i = 0; i < tables[t].size(); ++i) {
            if (!by_id[t].emplace(tables[t].ids[i], tables[t].rows[i]).second) {
                throw DataError("source '" + names[t] + "': duplicate id '" + tables[t].ids[i] + "'");
            }
        }
        if (by_id[t].size() != by_id[0].size()) {
            throw DataError("source '" + names[t] + "' covers " + std::to_string(by_id[t].size()) +
                            " ids, source '" + names[0] + "' covers " +
                            std::to_string(by_id[0].size()));
        }
    }

    std::vector<std::pair<std::string, int>> preds;
    preds.reserve(tables[0].size());
    for (const std::string& id : tables[0].ids) {
        std::vector<std::pair<std::string, ensemble::ScoreVector>> sources;
        for (std::size_t t = 0; t < tables.size(); ++t) {
            auto it = by_id[t].find(id);
            if (it == by_id[t].end()) {
                throw DataError("source '" + names[t] + "' is missing id '" + id + "'");
            }
            sources.emplace_back(names[t], it->second);
        }
        const Tensor merged = ensemble::merge_scores(sources, used_weights);
        preds.emplace_back(id, ensemble::predict(merged));
    }

    data::save_predictions(out / "merged_predictions.csv", preds);
    std::cout << "merge: " << preds.size() << " predictions from " << tables.size()
              << " sources -> " << (out / "merged_predictions.csv").string() << "\n";
}

void run_correct(const config::File& cfg) {
    const fs::path out = out_dir(cfg);
    correction::Config cc;
    cc.threshold = cfg.get_double("correction.threshold", cc.threshold);
    cc.vote_fraction = cfg.get_double("correction.vote_fraction", cc.vote_fraction);
    cc.min_subset = static_cast<int>(cfg.get_size("correction.min_subset", 3));
    cc.strict_fraction = cfg.get_bool("correction.strict", false);
    cc.validate();

    const fs::path preds_path =
        cfg.get_string("correction.predictions", (out / "merged_predictions.csv").string());
    const fs::path feats_path = cfg.require_string("correction.features");

    const auto pred_rows = data::load_predictions(preds_path);
    if (pred_rows.empty()) throw DataError(preds_path.string() + ": no predictions");
    std::map<std::string, int> preds;
    for (const auto& [id, label] : pred_rows) {
        if (!preds.emplace(id, label).second) {
            throw DataError(preds_path.string() + ": duplicate id '" + id + "'");
        }
    }

    std::map<std::string, Tensor> all_features;
    for (auto& [id, f] : data::load_features(feats_path)) all_features.emplace(id, std::move(f));
    std::vector<std::pair<std::string, Tensor>> features;
    features.reserve(pred_rows.size());
    for (const auto& [id, label] : pred_rows) {
        auto it = all_features.find(id);
        if (it == all_features.end()) {
            throw DataError(feats_path.string() + ": no feature row for predicted id '" + id + "'");
        }
        features.emplace_back(id, it->second);
    }

    const correction::Partition partition = correction::group_by_similarity(features, cc);
    const std::map<std::string, int> corrected = correction::vote_correct(partition, preds, cc);

    std::vector<std::pair<std::string, int>> out_rows;
    std::vector<bool> changed;
    std::size_t changes = 0;
    for (const auto& [id, label] : pred_rows) {
        const int fixed = corrected.at(id);
        out_rows.emplace_back(id, fixed);
        changed.push_back(fixed != label);
        if (fixed != label) ++changes;
    }
    data::save_predictions(out / "corrected_predictions.csv", out_rows, &changed);
    std::cout << "correct: changed " << changes << " of " << out_rows.size() << " predictions ("
              << partition.groups.size() << " groups) -> "
              << (out / "corrected_predictions.csv").string() << "\n";
}

void run_report(const config::File& cfg) {
    const fs::path out = out_dir(cfg);
    const fs::path labels_path = cfg.require_string("report.labels");
    std::map<std::string, int> truth;
    for (const auto& [id, label] : data::load_predictions(labels_path)) {
        if (!truth.emplace(id, label).second) {
            throw DataError(labels_path.string() + ": duplicate id '" + id + "'");
        }
    }

    const auto entries = cfg.with_prefix("report.pred.");
    if (entries.empty()) {
        throw ConfigError("run_report: no report.pred.<name> entries configured");
    }
    std::vector<ReportRow> rows;
    for (const auto& [key, path] : entries) {
        const std::string name = key.substr(std::string("report.pred.").size());
        std::vector<int> t, p;
        for (const auto& [id, label] : data::load_predictions(path)) {
            auto it = truth.find(id);
            if (it == truth.end()) {
                throw DataError(std::string(path) + ": id '" + id + "' has no truth label in " +
                                labels_path.string());
            }
            t.push_back(it->second);
            p.push_back(label);
        }
        if (t.empty()) throw DataError(std::string(path) + ": no predictions");
        rows.push_back(score_row(name, t, p));
    }
    write_report_files(out / "report.txt", out / "report.csv", rows);
    std::cout << render_report(rows);
}

}  // namespace fermech::pipeline
