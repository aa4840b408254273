#include "sglab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "sglab/checkpoint.hpp"

namespace sglab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// episode loop

void validate_stack(const Stack& stack, const ChainConfig& cfg) {
    if (!stack.proposer) throw std::runtime_error("stack: proposer config missing");
    if (stack.proposer->mode == ProposerMode::ImageStyle) {
        if (!stack.policy)
            throw std::runtime_error("stack: ImageStyle needs a goal-conditioned policy");
        if (cfg.refresh_period != stack.proposer->subgoal_horizon)
            throw std::runtime_error(
                "stack: refresh period must equal the proposer subgoal horizon (got " +
                std::to_string(cfg.refresh_period) + " vs " +
                std::to_string(stack.proposer->subgoal_horizon) + ")");
    } else {
        if (!stack.idm) throw std::runtime_error("stack: VideoStyle needs an inverse-dynamics model");
    }
    if (stack.classifier && stack.classifier->embed.vocab < Instruction::kVocabSize)
        throw std::runtime_error("stack: classifier vocabulary smaller than the task vocabulary");
}

EpisodeResult run_task(WorldState& state, const Instruction& instr, const Stack& stack,
                       const ChainConfig& cfg, std::uint64_t task_seed) {
    EpisodeResult res;
    if (cfg.max_steps_per_task <= 0) return res;
    if (task_success(state, instr)) {
        res.success = true;
        return res;
    }

    const bool image_style = stack.proposer->mode == ProposerMode::ImageStyle;
    ImageF obs = render(state);
    ImageF goal;
    std::vector<ImageF> clip;
    int clip_pos = 0;
    int refresh_idx = 0;

    while (res.steps < cfg.max_steps_per_task) {
        const bool need_proposal = image_style
                                       ? (res.steps % cfg.refresh_period == 0)
                                       : (clip_pos >= static_cast<int>(clip.size()));
        if (need_proposal) {
            Rng prng(derive_seed(task_seed, 0x9209ULL, refresh_idx));
            const auto candidates = propose(*stack.proposer, state, instr, prng);
            int sel;
            bool filtered = false;
            if (stack.classifier) {
                sel = select_subgoal(*stack.classifier, obs, candidates, instr,
                                     stack.proposer->mode)
                          .selected;
                filtered = true;
            } else {
                sel = static_cast<int>(
                    prng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1));
            }
            res.decisions.push_back({sel, candidates[sel].provenance, filtered});
            if (image_style) {
                goal = candidates[sel].final_frame();
            } else {
                clip = candidates[sel].frames;
                clip_pos = 0;
            }
            ++refresh_idx;
        }

        Action a;
        if (image_style) {
            a = policy_action(*stack.policy, obs, goal);
        } else {
            const ImageF& from = clip_pos == 0 ? obs : clip[clip_pos - 1];
            a = idm_action(*stack.idm, from, clip[clip_pos]);
            ++clip_pos;
        }
        state = step(state, a);
        obs = render(state);
        ++res.steps;
        if (task_success(state, instr)) {
            res.success = true;
            break;
        }
    }
    return res;
}

EpisodeResult run_episode(std::uint64_t env_seed, const Instruction& instr,
                          const Stack& stack, const ChainConfig& cfg,
                          const SceneOptions& scene) {
    validate_stack(stack, cfg);
    WorldState state = reset(env_seed, instr, scene);
    return run_task(state, instr, stack, cfg, derive_seed(env_seed, 0xe915ULL));
}

// ---------------------------------------------------------------------------
// chains

std::vector<Instruction> sample_chain_tasks(std::uint64_t seed, int length) {
    // distinct non-held-out-color combos, container restricted to held-in
    // tokens, so every task is commandable and objects never conflict
    std::vector<std::pair<Shape, Color>> combos;
    for (int s = 0; s < kNumShapes; ++s)
        for (int c = 0; c < kNumColors; ++c)
            if (static_cast<Color>(c) != kHeldOutColor)
                combos.emplace_back(static_cast<Shape>(s), static_cast<Color>(c));
    if (length > static_cast<int>(combos.size()))
        throw std::invalid_argument("sample_chain_tasks: chain longer than the combo pool");

    Rng rng(derive_seed(seed, 0x7a58ULL));
    for (int i = static_cast<int>(combos.size()) - 1; i > 0; --i)
        std::swap(combos[i], combos[static_cast<int>(rng.uniform_int(0, i))]);

    std::vector<Instruction> tasks;
    for (int i = 0; i < length; ++i) {
        Instruction in;
        in.shape = combos[i].first;
        in.color = combos[i].second;
        std::vector<ContainerKind> options;
        for (int k = 0; k < kNumContainers; ++k) {
            in.target = static_cast<ContainerKind>(k);
            if (!is_held_out_token(in.token())) options.push_back(in.target);
        }
        in.target = options[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
        tasks.push_back(in);
    }
    return tasks;
}

ChainResult run_task_chain(std::uint64_t env_seed, const std::vector<Instruction>& tasks,
                           const Stack& stack, const ChainConfig& cfg) {
    validate_stack(stack, cfg);
    SceneOptions scene;
    scene.allow_held_out_color = true;  // evaluation scenes carry novel pixels
    WorldState state = reset_multi(derive_seed(env_seed, 0xc4a1ULL), tasks,
                                   /*extra_distractors=*/1, scene);
    ChainResult r;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        EpisodeResult er =
            run_task(state, tasks[i], stack, cfg, derive_seed(env_seed, 0x7a59ULL, i));
        r.decisions.insert(r.decisions.end(), er.decisions.begin(), er.decisions.end());
        r.task_ok[i] = er.success;
        ++r.tasks_attempted;
        if (!er.success) break;
        ++r.length;
    }
    return r;
}

// ---------------------------------------------------------------------------
// metrics

Metrics aggregate_metrics(const std::string& cell, std::uint64_t seed,
                          const std::vector<ChainResult>& chains, double wall_clock_sec) {
    Metrics m;
    m.cell = cell;
    m.seed = seed;
    m.wall_clock_sec = wall_clock_sec;
    if (chains.empty()) return m;

    const double inv = 1.0 / static_cast<double>(chains.size());
    std::array<int, 5> attempts{};
    std::array<int, 5> wins{};
    long off_task = 0, tagged = 0;
    for (const auto& c : chains) {
        for (int n = 0; n < 5; ++n)
            if (c.length >= n + 1) m.frac_at_least[n] += inv;
        for (int i = 0; i < std::min(5, c.tasks_attempted); ++i) {
            ++attempts[i];
            if (c.task_ok[i]) ++wins[i];
        }
        for (const auto& d : c.decisions) {
            if (d.provenance == Provenance::Unknown) continue;
            ++tagged;
            if (d.provenance == Provenance::OffTask) ++off_task;
        }
    }
    for (int n = 0; n < 5; ++n) m.avg_len += m.frac_at_least[n];
    for (int i = 0; i < 5; ++i)
        m.per_task_success[i] =
            attempts[i] > 0 ? static_cast<double>(wins[i]) / attempts[i] : 0.0;
    m.off_task_rate = tagged > 0 ? static_cast<double>(off_task) / tagged : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// configuration

std::string CellSpec::name() const {
    const char* base = nullptr;
    switch (kind) {
        case CellKind::Baseline: base = "baseline"; break;
        case CellKind::FilterOnly: base = "filter_only"; break;
        case CellKind::DesyncOnly: base = "desync_only"; break;
        case CellKind::Both: base = "both"; break;
    }
    return std::string(base) + "_k" + std::to_string(K);
}

std::vector<CellSpec> ExperimentConfig::default_cells() {
    return {
        {CellKind::Baseline, 8}, {CellKind::FilterOnly, 8}, {CellKind::DesyncOnly, 8},
        {CellKind::Both, 8},     {CellKind::Both, 1},       {CellKind::Both, 4},
        {CellKind::Both, 16},
    };
}

namespace {

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "baseline") return CellKind::Baseline;
    if (s == "filter_only") return CellKind::FilterOnly;
    if (s == "desync_only") return CellKind::DesyncOnly;
    if (s == "both") return CellKind::Both;
    throw std::runtime_error("unknown cell kind '" + s + "'");
}

std::string cell_kind_to_string(CellKind k) {
    switch (k) {
        case CellKind::Baseline: return "baseline";
        case CellKind::FilterOnly: return "filter_only";
        case CellKind::DesyncOnly: return "desync_only";
        case CellKind::Both: return "both";
    }
    return "baseline";
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed config '" + path + "': " + e.what());
    }

    ExperimentConfig cfg;
    maybe(j, "seeds", cfg.seeds);
    maybe(j, "n_train", cfg.n_train);
    maybe(j, "n_eval", cfg.n_eval);
    maybe(j, "data_seed", cfg.data_seed);
    maybe(j, "n_chains", cfg.n_chains);
    maybe(j, "cache_dir", cfg.cache_dir);
    maybe(j, "out_dir", cfg.out_dir);
    if (j.contains("classifier")) {
        const auto& c = j["classifier"];
        maybe(c, "lr", cfg.classifier_cfg.lr);
        maybe(c, "batch_size", cfg.classifier_cfg.batch_size);
        maybe(c, "steps", cfg.classifier_cfg.steps);
        maybe(c, "eval_interval", cfg.classifier_cfg.eval_interval);
        maybe(c, "eval_examples", cfg.classifier_cfg.eval_examples);
        maybe(c, "seed", cfg.classifier_cfg.seed);
        maybe(c, "pipeline_depth", cfg.classifier_cfg.pipeline_depth);
    }
    if (j.contains("policy")) {
        const auto& c = j["policy"];
        maybe(c, "lr", cfg.policy_cfg.lr);
        maybe(c, "batch_size", cfg.policy_cfg.batch_size);
        maybe(c, "steps", cfg.policy_cfg.steps);
        maybe(c, "seed", cfg.policy_cfg.seed);
    }
    if (j.contains("proposer")) {
        const auto& c = j["proposer"];
        std::string mode = "image";
        maybe(c, "mode", mode);
        cfg.proposer.mode = mode == "video" ? ProposerMode::VideoStyle : ProposerMode::ImageStyle;
        maybe(c, "K", cfg.proposer.K);
        maybe(c, "p_off_task", cfg.proposer.p_off_task);
        maybe(c, "severity_min", cfg.proposer.severity_min);
        maybe(c, "severity_max", cfg.proposer.severity_max);
        maybe(c, "subgoal_horizon", cfg.proposer.subgoal_horizon);
        maybe(c, "clip_length", cfg.proposer.clip_length);
    }
    if (j.contains("chain")) {
        const auto& c = j["chain"];
        maybe(c, "chain_length", cfg.chain.chain_length);
        maybe(c, "max_steps_per_task", cfg.chain.max_steps_per_task);
        maybe(c, "refresh_period", cfg.chain.refresh_period);
    }
    if (j.contains("cells")) {
        cfg.cells.clear();
        for (const auto& c : j["cells"]) {
            CellSpec spec;
            spec.kind = cell_kind_from_string(c.at("kind").get<std::string>());
            if (c.contains("K")) spec.K = c.at("K").get<int>();
            cfg.cells.push_back(spec);
        }
    }
    return cfg;
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
    json j;
    j["seeds"] = cfg.seeds;
    j["n_train"] = cfg.n_train;
    j["n_eval"] = cfg.n_eval;
    j["data_seed"] = cfg.data_seed;
    j["n_chains"] = cfg.n_chains;
    j["cache_dir"] = cfg.cache_dir;
    j["out_dir"] = cfg.out_dir;
    j["classifier"] = {{"lr", cfg.classifier_cfg.lr},
                       {"batch_size", cfg.classifier_cfg.batch_size},
                       {"steps", cfg.classifier_cfg.steps},
                       {"eval_interval", cfg.classifier_cfg.eval_interval},
                       {"eval_examples", cfg.classifier_cfg.eval_examples},
                       {"seed", cfg.classifier_cfg.seed},
                       {"pipeline_depth", cfg.classifier_cfg.pipeline_depth}};
    j["policy"] = {{"lr", cfg.policy_cfg.lr},
                   {"batch_size", cfg.policy_cfg.batch_size},
                   {"steps", cfg.policy_cfg.steps},
                   {"seed", cfg.policy_cfg.seed}};
    j["proposer"] = {{"mode", cfg.proposer.mode == ProposerMode::VideoStyle ? "video" : "image"},
                     {"K", cfg.proposer.K},
                     {"p_off_task", cfg.proposer.p_off_task},
                     {"severity_min", cfg.proposer.severity_min},
                     {"severity_max", cfg.proposer.severity_max},
                     {"subgoal_horizon", cfg.proposer.subgoal_horizon},
                     {"clip_length", cfg.proposer.clip_length}};
    j["chain"] = {{"chain_length", cfg.chain.chain_length},
                  {"max_steps_per_task", cfg.chain.max_steps_per_task},
                  {"refresh_period", cfg.chain.refresh_period}};
    j["cells"] = json::array();
    for (const auto& c : cfg.cells)
        j["cells"].push_back({{"kind", cell_kind_to_string(c.kind)}, {"K", c.K}});
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// component cache

std::string resolve_cache_dir(const ExperimentConfig& cfg) {
    if (!cfg.cache_dir.empty()) return cfg.cache_dir;
    if (const char* env = std::getenv("SGLAB_CACHE_DIR"); env && *env) return env;
    return ".sglab-cache";
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string data_key(const ExperimentConfig& cfg) {
    return std::to_string(cfg.n_train) + "|" + std::to_string(cfg.n_eval) + "|" +
           std::to_string(cfg.data_seed);
}

std::string mode_str(AugMode m) { return m == AugMode::Desynchronized ? "desync" : "sync"; }

}  // namespace

bool ensure_classifier(const ExperimentConfig& cfg, AugMode mode, const Dataset& train_ds,
                       const Dataset& eval_ds, ClassifierNet& net) {
    const auto& c = cfg.classifier_cfg;
    const std::string key = "clf|" + mode_str(mode) + "|" + data_key(cfg) + "|" +
                            std::to_string(c.lr) + "|" + std::to_string(c.batch_size) + "|" +
                            std::to_string(c.steps) + "|" + std::to_string(c.seed);
    const auto dir = std::filesystem::path(resolve_cache_dir(cfg));
    std::filesystem::create_directories(dir);
    const std::string path =
        (dir / ("classifier_" + mode_str(mode) + "_" + hex64(fnv1a(key)) + ".ckpt")).string();

    net.init(c.seed);
    if (std::filesystem::exists(path)) {
        try {
            load_classifier(net, path);
            return false;
        } catch (const std::exception& e) {
            std::cerr << "warning: stale classifier cache (" << e.what() << "); retraining\n";
            net.init(c.seed);
        }
    }
    const auto result = train_classifier(net, train_ds, &eval_ds, c, mode);
    json meta;
    meta["component"] = "classifier";
    meta["aug_mode"] = mode_str(mode);
    meta["vocab_hash"] = hex64(vocabulary_hash());
    meta["config_key"] = key;
    meta["final_eval_accuracy"] = result.final_eval_accuracy;
    meta["train_seconds"] = result.train_seconds;
    meta["arch"] = {{"vocab", net.arch.vocab},
                    {"embed_dim", net.arch.embed_dim},
                    {"head_width", net.arch.head_width},
                    {"dropout", net.arch.dropout}};
    save_classifier(net, path, meta.dump(2));
    return true;
}

bool ensure_policy(const ExperimentConfig& cfg, AugMode mode, const Dataset& train_ds,
                   PolicyNet& net) {
    const auto& c = cfg.policy_cfg;
    const std::string key = "gc|" + mode_str(mode) + "|" + data_key(cfg) + "|" +
                            std::to_string(c.lr) + "|" + std::to_string(c.batch_size) + "|" +
                            std::to_string(c.steps) + "|" + std::to_string(c.seed);
    const auto dir = std::filesystem::path(resolve_cache_dir(cfg));
    std::filesystem::create_directories(dir);
    const std::string path =
        (dir / ("policy_" + mode_str(mode) + "_" + hex64(fnv1a(key)) + ".ckpt")).string();

    net.init(c.seed);
    auto params = net.parameters();
    if (std::filesystem::exists(path)) {
        try {
            load_checkpoint(path, params);
            return false;
        } catch (const std::exception& e) {
            std::cerr << "warning: stale policy cache (" << e.what() << "); retraining\n";
            net.init(c.seed);
        }
    }
    train_gc_policy(net, train_ds, c, mode);
    save_checkpoint(path, params);
    return true;
}

bool ensure_idm(const ExperimentConfig& cfg, const Dataset& train_ds, IdmNet& net) {
    const auto& c = cfg.policy_cfg;
    const std::string key = "idm|" + data_key(cfg) + "|" + std::to_string(c.lr) + "|" +
                            std::to_string(c.batch_size) + "|" + std::to_string(c.steps) + "|" +
                            std::to_string(c.seed);
    const auto dir = std::filesystem::path(resolve_cache_dir(cfg));
    std::filesystem::create_directories(dir);
    const std::string path = (dir / ("idm_" + hex64(fnv1a(key)) + ".ckpt")).string();

    net.init(c.seed);
    auto params = net.parameters();
    if (std::filesystem::exists(path)) {
        try {
            load_checkpoint(path, params);
            return false;
        } catch (const std::exception& e) {
            std::cerr << "warning: stale idm cache (" << e.what() << "); retraining\n";
            net.init(c.seed);
        }
    }
    train_idm(net, train_ds, c);
    save_checkpoint(path, params);
    return true;
}

// ---------------------------------------------------------------------------
// experiment

std::vector<Metrics> run_experiment(const ExperimentConfig& cfg) {
    const Dataset train_ds =
        generate_dataset(cfg.n_train, cfg.data_seed, InstructionMix::training_mix());
    const Dataset eval_ds = generate_dataset(
        cfg.n_eval, derive_seed(cfg.data_seed, 0xe7a1ULL), InstructionMix::eval_mix());

    bool need_clf_sync = false, need_clf_desync = false;
    bool need_pol_sync = false, need_pol_desync = false;
    for (const auto& cell : cfg.cells) {
        if (cell.uses_filtering()) {
            (cell.classifier_mode() == AugMode::Desynchronized ? need_clf_desync
                                                               : need_clf_sync) = true;
        }
        (cell.policy_mode() == AugMode::Desynchronized ? need_pol_desync : need_pol_sync) =
            true;
    }

    ClassifierNet clf_sync, clf_desync;
    PolicyNet pol_sync, pol_desync;
    if (need_clf_sync) ensure_classifier(cfg, AugMode::Synchronized, train_ds, eval_ds, clf_sync);
    if (need_clf_desync)
        ensure_classifier(cfg, AugMode::Desynchronized, train_ds, eval_ds, clf_desync);
    if (need_pol_sync) ensure_policy(cfg, AugMode::Synchronized, train_ds, pol_sync);
    if (need_pol_desync) ensure_policy(cfg, AugMode::Desynchronized, train_ds, pol_desync);

    std::vector<Metrics> rows;
    for (const auto& cell : cfg.cells) {
        ProposerConfig prop = cfg.proposer;
        prop.K = cell.K;
        Stack stack;
        stack.proposer = &prop;
        stack.policy = cell.policy_mode() == AugMode::Desynchronized ? &pol_desync : &pol_sync;
        if (cell.uses_filtering())
            stack.classifier = cell.classifier_mode() == AugMode::Desynchronized ? &clf_desync
                                                                                 : &clf_sync;
        validate_stack(stack, cfg.chain);

        for (std::uint64_t seed : cfg.seeds) {
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<ChainResult> chains(cfg.n_chains);
            // chain seeds shared across cells: paired comparisons
#pragma omp parallel for schedule(dynamic)
            for (int c = 0; c < cfg.n_chains; ++c) {
                const auto tasks = sample_chain_tasks(derive_seed(seed, 0x7a5cULL, c),
                                                      cfg.chain.chain_length);
                chains[c] =
                    run_task_chain(derive_seed(seed, 0xe417ULL, c), tasks, stack, cfg.chain);
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back(aggregate_metrics(cell.name(), seed, chains, secs));
            std::cerr << "cell " << cell.name() << " seed " << seed
                      << ": avg_len=" << rows.back().avg_len
                      << " off_task=" << rows.back().off_task_rate << " (" << secs << "s)\n";
        }
    }

    std::filesystem::create_directories(cfg.out_dir);
    const auto out = std::filesystem::path(cfg.out_dir);
    emit_report(rows, (out / "metrics.csv").string(), (out / "summary.txt").string());
    std::ofstream((out / "metrics.json").string()) << metrics_to_json(rows);
    std::ofstream((out / "config.json").string()) << experiment_config_json(cfg);
    return rows;
}

// ---------------------------------------------------------------------------
// reports

namespace {
std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}
}  // namespace

std::string metrics_to_csv(const std::vector<Metrics>& rows) {
    std::string out = "cell,seed,n1,n2,n3,n4,n5,avg_len,off_task_rate\n";
    for (const auto& m : rows) {
        out += m.cell + "," + std::to_string(m.seed);
        for (int n = 0; n < 5; ++n) out += "," + fixed3(m.frac_at_least[n]);
        out += "," + fixed3(m.avg_len) + "," + fixed3(m.off_task_rate) + "\n";
    }
    return out;
}

std::string metrics_summary(const std::vector<Metrics>& rows,
                            const std::vector<std::string>& cell_order) {
    std::string out;
    out += "                       tasks completed in a row\n";
    out += "cell            1      2      3      4      5      avg len  off-task\n";
    for (const auto& cell : cell_order) {
        std::array<double, 5> f{};
        double avg = 0.0, off = 0.0;
        int count = 0;
        for (const auto& m : rows) {
            if (m.cell != cell) continue;
            for (int n = 0; n < 5; ++n) f[n] += m.frac_at_least[n];
            avg += m.avg_len;
            off += m.off_task_rate;
            ++count;
        }
        if (count == 0) continue;
        char line[160];
        std::snprintf(line, sizeof line,
                      "%-14s %5.1f%% %5.1f%% %5.1f%% %5.1f%% %5.1f%%   %6.2f   %6.3f\n",
                      cell.c_str(), 100.0 * f[0] / count, 100.0 * f[1] / count,
                      100.0 * f[2] / count, 100.0 * f[3] / count, 100.0 * f[4] / count,
                      avg / count, off / count);
        out += line;
    }
    return out;
}

void emit_report(const std::vector<Metrics>& rows, const std::string& csv_path,
                 const std::string& summary_path) {
    {
        std::ofstream os(csv_path);
        if (!os) throw std::runtime_error("emit_report: cannot write '" + csv_path + "'");
        os << metrics_to_csv(rows);
        if (!os) throw std::runtime_error("emit_report: write failed for '" + csv_path + "'");
    }
    std::vector<std::string> order;
    for (const auto& m : rows)
        if (std::find(order.begin(), order.end(), m.cell) == order.end())
            order.push_back(m.cell);
    std::ofstream os(summary_path);
    if (!os) throw std::runtime_error("emit_report: cannot write '" + summary_path + "'");
    os << metrics_summary(rows, order);
}

std::string metrics_to_json(const std::vector<Metrics>& rows) {
    json j = json::array();
    for (const auto& m : rows) {
        json r;
        r["cell"] = m.cell;
        r["seed"] = m.seed;
        r["frac_at_least"] = m.frac_at_least;
        r["avg_len"] = m.avg_len;
        r["off_task_rate"] = m.off_task_rate;
        r["per_task_success"] = m.per_task_success;
        r["wall_clock_sec"] = m.wall_clock_sec;
        j.push_back(r);
    }
    return j.dump(2);
}

std::vector<Metrics> metrics_from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open metrics '" + path + "'");
    json j;
    is >> j;
    std::vector<Metrics> rows;
    for (const auto& r : j) {
        Metrics m;
        m.cell = r.at("cell").get<std::string>();
        m.seed = r.at("seed").get<std::uint64_t>();
        m.frac_at_least = r.at("frac_at_least").get<std::array<double, 5>>();
        m.avg_len = r.at("avg_len").get<double>();
        m.off_task_rate = r.at("off_task_rate").get<double>();
        m.per_task_success = r.at("per_task_success").get<std::array<double, 5>>();
        m.wall_clock_sec = r.at("wall_clock_sec").get<double>();
        rows.push_back(m);
    }
    return rows;
}

}  // namespace sglab
