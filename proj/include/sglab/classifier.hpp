#pragma once

#include <string>
#include <vector>

#include "sglab/augment.hpp"
#include "sglab/encoder.hpp"
#include "sglab/sampler.hpp"
#include "sglab/world.hpp"

namespace sglab {

// Subgoal classifier: separate state/goal encoders, both FiLM-conditioned on
// the instruction embedding, and a two-layer 256-wide MLP head ending in a
// sigmoid. Scores the probability that the s -> g transition progresses the
// instruction.
struct ClassifierArch {
    int vocab = Instruction::kVocabSize;
    int embed_dim = 64;
    int head_width = 256;
    float dropout = 0.1f;
};

struct ClassifierNet {
    ClassifierArch arch;
    nn::Embedding embed;
    ConvEncoder enc_s, enc_g;
    nn::Dense h1, h2, h3;
    nn::Dropout drop;

    struct Cache {
        nn::Embedding::Cache emb;
        ConvEncoder::Cache s, g;
        nn::Dense::Cache h1, h2, h3;
        nn::Relu::Cache r1, r2;
        nn::Dropout::Cache d1, d2;
        Tensor p;  // sigmoid output, kept for backward
        int n = 0;
    };

    explicit ClassifierNet(const ClassifierArch& a = {});
    void init(std::uint64_t seed);
    std::vector<nn::ParamRef> parameters();

    // s, g: [3, N, 32, 32]; returns probabilities [N].
    Tensor forward(const Tensor& s, const Tensor& g, const std::vector<int>& tokens,
                   bool train, Rng* drop_rng, Cache* cache) const;
    // dp: gradient w.r.t. the probabilities (the sigmoid is handled here).
    void backward(const Tensor& dp, Cache& cache);

    // Eval-mode probability for a single (s, g, l); pure and thread-safe.
    float score(const ImageF& s, const ImageF& g, int token) const;
    // One state against K goals, same instruction; element i matches
    // score(s, goals[i], token) bitwise.
    std::vector<float> score_goals(const ImageF& s, const std::vector<const ImageF*>& goals,
                                   int token) const;
};

struct ClassifierTrainConfig {
    float lr = 3e-4f;
    int batch_size = 256;
    int steps = 20000;
    int eval_interval = 2000;
    int eval_examples = 2000;
    std::uint64_t seed = 0;
    int pipeline_depth = 2;  // bounded batch queue; 0 = synchronous
};

struct TrainLogEntry {
    int step;
    float loss;
    float eval_accuracy;  // NaN when not evaluated at this step
};

struct ClassifierTrainResult {
    std::vector<TrainLogEntry> log;
    float final_eval_accuracy = 0.0f;
    double train_seconds = 0.0;
};

// Per step: sample_batch -> augment_pair(s, g) per example -> forward -> BCE
// -> Adam. eval_ds (optional) provides the frozen balanced held-out set.
ClassifierTrainResult train_classifier(ClassifierNet& net, const Dataset& train_ds,
                                       const Dataset* eval_ds,
                                       const ClassifierTrainConfig& cfg, AugMode aug_mode);

// Frozen balanced evaluation set (50% positives, negatives split 40/40/20).
struct EvalSet {
    std::vector<ClassifierExample> examples;
};
EvalSet make_eval_set(const Dataset& ds, int n_examples, std::uint64_t seed);

// Accuracy of thresholding at 0.5. An optional corruption severity applies
// inject_artifacts to every goal image (artifact-robustness probes).
float eval_classifier_accuracy(const ClassifierNet& net, const EvalSet& set,
                               float goal_corruption_severity = 0.0f,
                               std::uint64_t corruption_seed = 0);

// Checkpoint plus a JSON sidecar (arch, vocabulary hash, train config,
// final metrics) at path + ".json".
void save_classifier(ClassifierNet& net, const std::string& path,
                     const std::string& meta_json);
void load_classifier(ClassifierNet& net, const std::string& path);

std::uint64_t vocabulary_hash();

}  // namespace sglab
