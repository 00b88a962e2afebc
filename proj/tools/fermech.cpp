// fermech: train/eval/merge/correct/report pipeline for the six-class
// facial-expression task, plus a synthetic data generator.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fermech/config.hpp"
#include "fermech/errors.hpp"
#include "fermech/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file")->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out", flags.out, "override the output directory");
}

fermech::config::File load_with_overrides(const CommonFlags& flags) {
    auto cfg = fermech::config::File::load(flags.config_path);
    if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
    if (flags.out) cfg.set("out_dir", *flags.out);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facial-expression training, merging and correcting pipeline"};
    app.require_subcommand(1);

    CommonFlags gen_flags, train_flags, eval_flags, merge_flags, correct_flags, report_flags;

    CLI::App* gen = app.add_subcommand("gen-synthetic", "generate a seeded Gaussian toy dataset");
    add_common(gen, gen_flags);
    CLI::App* train = app.add_subcommand("train", "train backbone, branch and graph head");
    add_common(train, train_flags);
    CLI::App* eval = app.add_subcommand("eval", "write per-source score files and an F1 report");
    add_common(eval, eval_flags);

    CLI::App* merge = app.add_subcommand("merge", "merge score files into predictions");
    add_common(merge, merge_flags);
    std::optional<std::string> weights_arg;
    std::string scheme;
    merge->add_option("--weights", weights_arg, "gus,mre,dmue merge weights");
    merge->add_option("--scheme", scheme, "preset weights: s1 = 0.6,0.2,0.2 or s2 = 0.4,0.3,0.3")
        ->check(CLI::IsMember({"s1", "s2"}));

    CLI::App* correct = app.add_subcommand("correct", "similarity-vote correction of predictions");
    add_common(correct, correct_flags);
    CLI::App* report = app.add_subcommand("report", "render an F1 table for prediction files");
    add_common(report, report_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage errors map to exit code 1
    }

    try {
        if (gen->parsed()) {
            fermech::pipeline::run_gen_synthetic(load_with_overrides(gen_flags));
        } else if (train->parsed()) {
            fermech::pipeline::run_train(load_with_overrides(train_flags));
        } else if (eval->parsed()) {
            fermech::pipeline::run_eval(load_with_overrides(eval_flags));
        } else if (merge->parsed()) {
            auto cfg = load_with_overrides(merge_flags);
            if (!scheme.empty() && weights_arg) {
                throw fermech::ConfigError("give either --weights or --scheme, not both");
            }
            if (scheme == "s1") cfg.set("ensemble.weights", "0.6,0.2,0.2");
            if (scheme == "s2") cfg.set("ensemble.weights", "0.4,0.3,0.3");
            if (weights_arg) cfg.set("ensemble.weights", *weights_arg);
            fermech::pipeline::run_merge(cfg);
        } else if (correct->parsed()) {
            fermech::pipeline::run_correct(load_with_overrides(correct_flags));
        } else if (report->parsed()) {
            fermech::pipeline::run_report(load_with_overrides(report_flags));
        }
    } catch (const fermech::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fermech::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fermech::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const fermech::ShapeError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const fermech::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
