#pragma once

#include <array>
#include <string>
#include <vector>

#include "sglab/classifier.hpp"
#include "sglab/filtering.hpp"
#include "sglab/policy.hpp"
#include "sglab/proposer.hpp"

namespace sglab {

struct ChainConfig {
    int chain_length = 5;
    int max_steps_per_task = 100;
    int refresh_period = 20;  // must equal the proposer subgoal horizon in ImageStyle
};

// Non-owning bundle of the pieces an episode runs on. classifier == nullptr
// means no filtering (uniform-random selection among the K candidates).
struct Stack {
    const ProposerConfig* proposer = nullptr;
    const ClassifierNet* classifier = nullptr;
    const PolicyNet* policy = nullptr;  // ImageStyle control
    const IdmNet* idm = nullptr;        // VideoStyle control
};

// Throws on inconsistent components (missing controller for the mode,
// refresh/horizon mismatch, vocabulary overflow).
void validate_stack(const Stack& stack, const ChainConfig& cfg);

struct SelectionRecord {
    int selected = 0;
    Provenance provenance = Provenance::Unknown;
    bool filtered = false;
};

struct EpisodeResult {
    bool success = false;
    int steps = 0;
    std::vector<SelectionRecord> decisions;
};

// One task in a fresh scene.
EpisodeResult run_episode(std::uint64_t env_seed, const Instruction& instr,
                          const Stack& stack, const ChainConfig& cfg,
                          const SceneOptions& scene = {});

// One task continuing from (and mutating) an existing scene state.
EpisodeResult run_task(WorldState& state, const Instruction& instr, const Stack& stack,
                       const ChainConfig& cfg, std::uint64_t task_seed);

struct ChainResult {
    int length = 0;  // consecutive successes before the first failure
    std::array<bool, 8> task_ok{};
    int tasks_attempted = 0;
    std::vector<SelectionRecord> decisions;
};

// Five tasks over distinct objects, containers restricted to held-in tokens.
std::vector<Instruction> sample_chain_tasks(std::uint64_t seed, int length);

// Tasks run in order in one scene without reset; stops at the first failure.
ChainResult run_task_chain(std::uint64_t env_seed, const std::vector<Instruction>& tasks,
                           const Stack& stack, const ChainConfig& cfg);

// ---------------------------------------------------------------------------
// experiment grid

enum class CellKind { Baseline, FilterOnly, DesyncOnly, Both };

struct CellSpec {
    CellKind kind = CellKind::Baseline;
    int K = 8;
    std::string name() const;
    bool uses_filtering() const {
        return kind == CellKind::FilterOnly || kind == CellKind::Both;
    }
    AugMode policy_mode() const {
        return (kind == CellKind::DesyncOnly || kind == CellKind::Both)
                   ? AugMode::Desynchronized
                   : AugMode::Synchronized;
    }
    AugMode classifier_mode() const {
        return kind == CellKind::Both ? AugMode::Desynchronized : AugMode::Synchronized;
    }
};

struct Metrics {
    std::string cell;
    std::uint64_t seed = 0;
    std::array<double, 5> frac_at_least{};     // fraction of chains completing >= n tasks
    double avg_len = 0.0;                      // == sum of frac_at_least
    double off_task_rate = 0.0;                // provenance-tagged selections only
    std::array<double, 5> per_task_success{};  // success rate at chain position, among attempts
    double wall_clock_sec = 0.0;
};

Metrics aggregate_metrics(const std::string& cell, std::uint64_t seed,
                          const std::vector<ChainResult>& chains, double wall_clock_sec);

struct ExperimentConfig {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    int n_train = 2000;
    int n_eval = 300;
    std::uint64_t data_seed = 42;
    ClassifierTrainConfig classifier_cfg;
    PolicyTrainConfig policy_cfg;
    ProposerConfig proposer;  // K is overridden per cell
    ChainConfig chain;
    int n_chains = 100;
    std::vector<CellSpec> cells = default_cells();
    std::string cache_dir;  // empty: $SGLAB_CACHE_DIR, else ".sglab-cache"
    std::string out_dir = "out";

    static std::vector<CellSpec> default_cells();
};

// JSON round-trip; missing keys keep defaults.
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_json(const ExperimentConfig& cfg);

std::string resolve_cache_dir(const ExperimentConfig& cfg);

// Cached component training: loads a checkpoint matching the config hash or
// trains and stores one. Returns true when training ran.
bool ensure_classifier(const ExperimentConfig& cfg, AugMode mode, const Dataset& train_ds,
                       const Dataset& eval_ds, ClassifierNet& net);
bool ensure_policy(const ExperimentConfig& cfg, AugMode mode, const Dataset& train_ds,
                   PolicyNet& net);
bool ensure_idm(const ExperimentConfig& cfg, const Dataset& train_ds, IdmNet& net);

// Runs every cell x seed, writes metrics.csv, summary.txt and metrics.json
// under out_dir, and returns the metric rows in cell-major order.
std::vector<Metrics> run_experiment(const ExperimentConfig& cfg);

// CSV schema: cell,seed,n1,n2,n3,n4,n5,avg_len,off_task_rate with all
// fractions in 3-decimal fixed format.
std::string metrics_to_csv(const std::vector<Metrics>& rows);
std::string metrics_summary(const std::vector<Metrics>& rows,
                            const std::vector<std::string>& cell_order);
void emit_report(const std::vector<Metrics>& rows, const std::string& csv_path,
                 const std::string& summary_path);

std::string metrics_to_json(const std::vector<Metrics>& rows);
std::vector<Metrics> metrics_from_json_file(const std::string& path);

}  // namespace sglab
