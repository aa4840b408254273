#pragma once

#include <vector>

#include "sglab/rng.hpp"
#include "sglab/world.hpp"

namespace sglab {

enum class ExampleKind { Positive, WrongInstruction, WrongGoal, ReverseDirection };

// Training atom for the subgoal classifier. Images are references into the
// source dataset; provenance indices are retained for audit and never fed to
// the model.
struct ClassifierExample {
    const Image8* s = nullptr;
    const Image8* g = nullptr;
    int token = 0;
    int label = 0;  // 1 iff kind == Positive
    ExampleKind kind = ExampleKind::Positive;

    // provenance
    int s_traj = -1, g_traj = -1;
    int t_index = -1, g_index = -1;
    int horizon_k = 0;
    bool clamped = false;
};

struct SamplerConfig {
    int horizon_min = 16;
    int horizon_max = 24;
    double positive_fraction = 0.5;
    // split of the negative half
    double frac_wrong_instruction = 0.4;
    double frac_reverse_direction = 0.4;
    double frac_wrong_goal = 0.2;
};

// Draws classifier examples from successful trajectories of a dataset.
class ExampleSampler {
public:
    ExampleSampler(const Dataset& ds, SamplerConfig cfg = {});

    // Positive: s = frame t, g = frame min(t+k, T-1) of the same successful
    // trajectory, k uniform in [horizon_min, horizon_max], t uniform in
    // [0, T-2].
    ClassifierExample sample_positive(Rng& rng) const;

    // kind must be one of the negative constructions.
    ClassifierExample make_negative(ExampleKind kind, Rng& rng) const;

    // Each slot is drawn independently: positive with probability
    // positive_fraction, otherwise a negative kind per the configured split;
    // the batch is then shuffled.
    std::vector<ClassifierExample> sample_batch(int batch_size, Rng& rng) const;

    const std::vector<int>& eligible_trajectories() const { return eligible_; }

private:
    const Dataset* ds_;
    SamplerConfig cfg_;
    std::vector<int> eligible_;  // successful and longer than horizon_min
    bool multi_instruction_ = false;
};

}  // namespace sglab
