#pragma once

#include "sglab/augment.hpp"
#include "sglab/encoder.hpp"
#include "sglab/world.hpp"

namespace sglab {

// Low-level controllers. Both regress normalized deltas (units of kMaxDelta)
// and classify the gripper command 3-way; emitted actions are clipped to the
// action bounds.

struct PolicyHead {
    nn::Dense h1, h2, h3;  // ... -> 256 -> 256 -> 5 (dx, dy, 3 gripper logits)

    struct Cache {
        nn::Dense::Cache h1, h2, h3;
        nn::Relu::Cache r1, r2;
    };

    PolicyHead() = default;
    PolicyHead(const std::string& prefix, int in_dim, int width = 256);
    void init(Rng& rng);
    Tensor forward(const Tensor& feat, Cache* cache) const;  // [N, 5]
    Tensor backward(const Tensor& dout, Cache& cache);
    void collect(std::vector<nn::ParamRef>& out);
};

// Goal-conditioned policy: dual unconditioned encoders over (s, g).
struct PolicyNet {
    ConvEncoder enc_s, enc_g;
    PolicyHead head;

    struct Cache {
        ConvEncoder::Cache s, g;
        PolicyHead::Cache head;
    };

    PolicyNet();
    void init(std::uint64_t seed);
    std::vector<nn::ParamRef> parameters();
    Tensor forward(const Tensor& s, const Tensor& g, Cache* cache) const;
    void backward(const Tensor& dout, Cache& cache);
};

// Inverse dynamics model: single encoder over the 6-channel stack of two
// consecutive frames.
struct IdmNet {
    ConvEncoder enc;
    PolicyHead head;

    struct Cache {
        ConvEncoder::Cache enc;
        PolicyHead::Cache head;
    };

    IdmNet();
    void init(std::uint64_t seed);
    std::vector<nn::ParamRef> parameters();
    Tensor forward(const Tensor& pair, Cache* cache) const;  // pair: [6,N,32,32]
    void backward(const Tensor& dout, Cache& cache);
};

Action policy_action(const PolicyNet& net, const ImageF& s, const ImageF& g);
Action idm_action(const IdmNet& net, const ImageF& frame_a, const ImageF& frame_b);

struct PolicyTrainConfig {
    float lr = 3e-4f;
    int batch_size = 128;
    int steps = 12000;
    int horizon_min = 16;  // hindsight goal horizon, matching the sampler
    int horizon_max = 24;
    std::uint64_t seed = 0;
};

struct PolicyLogEntry {
    int step;
    float loss;
};

// Hindsight-relabeled behavior cloning: samples (s_t, a_t, g = frame_{t+k}),
// k uniform in [horizon_min, horizon_max] (clamped at the trajectory end),
// augment_pair per aug_mode, MSE on normalized deltas plus cross-entropy on
// the gripper.
std::vector<PolicyLogEntry> train_gc_policy(PolicyNet& net, const Dataset& ds,
                                            const PolicyTrainConfig& cfg, AugMode aug_mode);

// Supervised on consecutive frame pairs; augmentation is synchronized (at
// inference both frames come from the same generated clip).
std::vector<PolicyLogEntry> train_idm(IdmNet& net, const Dataset& ds,
                                      const PolicyTrainConfig& cfg);

struct IdmEval {
    float delta_r2 = 0.0f;      // 1 - MSE/variance on (dx, dy)
    float gripper_accuracy = 0.0f;
};
IdmEval eval_idm(const IdmNet& net, const Dataset& ds, int max_pairs = 4000,
                 std::uint64_t seed = 7);

}  // namespace sglab
