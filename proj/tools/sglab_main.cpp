// Command-line front end: dataset generation, component training, experiment
// grids and report rendering.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sglab/checkpoint.hpp"
#include "sglab/harness.hpp"

using namespace sglab;

namespace {

InstructionMix mix_by_name(const std::string& name) {
    if (name == "train") return InstructionMix::training_mix();
    if (name == "eval") return InstructionMix::eval_mix();
    if (name == "all") {
        std::vector<int> all;
        for (int t = 0; t < Instruction::kVocabSize; ++t) all.push_back(t);
        return InstructionMix::uniform_over(all);
    }
    throw CLI::ValidationError("mix must be one of: train, eval, all");
}

AugMode mode_by_name(const std::string& name) {
    if (name == "sync") return AugMode::Synchronized;
    if (name == "desync") return AugMode::Desynchronized;
    throw CLI::ValidationError("aug-mode must be 'sync' or 'desync'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sglab: hierarchical imitation with subgoal filtering"};
    app.require_subcommand(1);

    // gen-data
    std::string gd_out = "data.sgds";
    int gd_n = 2000;
    std::uint64_t gd_seed = 42;
    std::string gd_mix = "train";
    auto* gen = app.add_subcommand("gen-data", "Generate an expert demonstration dataset");
    gen->add_option("--out", gd_out, "Output dataset path");
    gen->add_option("--n", gd_n, "Number of trajectories");
    gen->add_option("--seed", gd_seed, "Generation seed");
    gen->add_option("--mix", gd_mix, "Instruction mix: train|eval|all");

    // train-classifier
    std::string tc_data, tc_eval_data, tc_out = "classifier.ckpt", tc_mode = "desync";
    ClassifierTrainConfig tc_cfg;
    auto* tc = app.add_subcommand("train-classifier", "Train the subgoal classifier");
    tc->add_option("--data", tc_data, "Training dataset (.sgds)")->required();
    tc->add_option("--eval-data", tc_eval_data, "Held-out dataset (.sgds)");
    tc->add_option("--out", tc_out, "Checkpoint output path");
    tc->add_option("--aug-mode", tc_mode, "sync|desync");
    tc->add_option("--steps", tc_cfg.steps, "Gradient steps");
    tc->add_option("--batch", tc_cfg.batch_size, "Batch size");
    tc->add_option("--lr", tc_cfg.lr, "Learning rate");
    tc->add_option("--seed", tc_cfg.seed, "Training seed");
    tc->add_option("--pipeline-depth", tc_cfg.pipeline_depth, "Batch queue depth (0=sync)");

    // train-policy
    std::string tp_data, tp_out = "policy.ckpt", tp_mode = "desync";
    PolicyTrainConfig tp_cfg;
    auto* tp = app.add_subcommand("train-policy", "Train the goal-conditioned policy");
    tp->add_option("--data", tp_data, "Training dataset (.sgds)")->required();
    tp->add_option("--out", tp_out, "Checkpoint output path");
    tp->add_option("--aug-mode", tp_mode, "sync|desync");
    tp->add_option("--steps", tp_cfg.steps, "Gradient steps");
    tp->add_option("--batch", tp_cfg.batch_size, "Batch size");
    tp->add_option("--lr", tp_cfg.lr, "Learning rate");
    tp->add_option("--seed", tp_cfg.seed, "Training seed");

    // train-idm
    std::string ti_data, ti_out = "idm.ckpt";
    PolicyTrainConfig ti_cfg;
    auto* ti = app.add_subcommand("train-idm", "Train the inverse-dynamics model");
    ti->add_option("--data", ti_data, "Training dataset (.sgds)")->required();
    ti->add_option("--out", ti_out, "Checkpoint output path");
    ti->add_option("--steps", ti_cfg.steps, "Gradient steps");
    ti->add_option("--batch", ti_cfg.batch_size, "Batch size");
    ti->add_option("--lr", ti_cfg.lr, "Learning rate");
    ti->add_option("--seed", ti_cfg.seed, "Training seed");

    // run
    std::string run_config, run_out, run_cache;
    auto* run = app.add_subcommand("run", "Run the ablation experiment grid");
    run->add_option("--config", run_config, "Experiment config (JSON)");
    run->add_option("--out", run_out, "Output directory override");
    run->add_option("--cache-dir", run_cache, "Component cache directory override");

    // report
    std::string rep_metrics, rep_csv = "metrics.csv", rep_summary = "summary.txt";
    auto* rep = app.add_subcommand("report", "Re-render CSV/summary from stored metrics");
    rep->add_option("--metrics", rep_metrics, "metrics.json path")->required();
    rep->add_option("--csv", rep_csv, "CSV output path");
    rep->add_option("--summary", rep_summary, "Summary output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const Dataset ds = generate_dataset(gd_n, gd_seed, mix_by_name(gd_mix));
            save_dataset(gd_out, ds);
            int ok = 0;
            for (const auto& t : ds.trajs) ok += t.success ? 1 : 0;
            std::cout << "wrote " << ds.trajs.size() << " trajectories (" << ok
                      << " successful) to " << gd_out << "\n";
        } else if (tc->parsed()) {
            const Dataset train = load_dataset(tc_data);
            Dataset eval_ds;
            const bool have_eval = !tc_eval_data.empty();
            if (have_eval) eval_ds = load_dataset(tc_eval_data);
            ClassifierNet net;
            net.init(tc_cfg.seed);
            const auto result = train_classifier(net, train, have_eval ? &eval_ds : nullptr,
                                                 tc_cfg, mode_by_name(tc_mode));
            nlohmann::json meta;
            meta["component"] = "classifier";
            meta["aug_mode"] = tc_mode;
            meta["final_eval_accuracy"] = result.final_eval_accuracy;
            meta["train_seconds"] = result.train_seconds;
            save_classifier(net, tc_out, meta.dump(2));
            std::cout << "trained classifier -> " << tc_out
                      << " (eval acc " << result.final_eval_accuracy << ")\n";
        } else if (tp->parsed()) {
            const Dataset train = load_dataset(tp_data);
            PolicyNet net;
            net.init(tp_cfg.seed);
            train_gc_policy(net, train, tp_cfg, mode_by_name(tp_mode));
            auto params = net.parameters();
            save_checkpoint(tp_out, params);
            std::cout << "trained policy -> " << tp_out << "\n";
        } else if (ti->parsed()) {
            const Dataset train = load_dataset(ti_data);
            IdmNet net;
            net.init(ti_cfg.seed);
            train_idm(net, train, ti_cfg);
            auto params = net.parameters();
            save_checkpoint(ti_out, params);
            const IdmEval ev = eval_idm(net, train);
            std::cout << "trained idm -> " << ti_out << " (delta R2 " << ev.delta_r2
                      << ", gripper acc " << ev.gripper_accuracy << ")\n";
        } else if (run->parsed()) {
            ExperimentConfig cfg;
            if (!run_config.empty()) cfg = load_experiment_config(run_config);
            if (!run_out.empty()) cfg.out_dir = run_out;
            if (!run_cache.empty()) cfg.cache_dir = run_cache;
            const auto rows = run_experiment(cfg);
            std::cout << metrics_summary(rows, [&] {
                std::vector<std::string> order;
                for (const auto& c : cfg.cells) order.push_back(c.name());
                return order;
            }());
            std::cout << "outputs in " << cfg.out_dir << "\n";
        } else if (rep->parsed()) {
            const auto rows = metrics_from_json_file(rep_metrics);
            emit_report(rows, rep_csv, rep_summary);
            std::cout << "wrote " << rep_csv << " and " << rep_summary << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
