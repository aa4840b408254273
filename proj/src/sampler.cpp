#include "sglab/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace sglab {

ExampleSampler::ExampleSampler(const Dataset& ds, SamplerConfig cfg)
    : ds_(&ds), cfg_(cfg) {
    if (cfg_.horizon_min > cfg_.horizon_max)
        throw std::invalid_argument("sampler: horizon_min must be <= horizon_max");
    for (std::size_t i = 0; i < ds.trajs.size(); ++i) {
        const auto& t = ds.trajs[i];
        if (t.success && static_cast<int>(t.frames.size()) > cfg_.horizon_min)
            eligible_.push_back(static_cast<int>(i));
    }
    int first_token = -1;
    for (int i : eligible_) {
        const int tok = ds.trajs[i].instr.token();
        if (first_token < 0) first_token = tok;
        else if (tok != first_token) {
            multi_instruction_ = true;
            break;
        }
    }
}

ClassifierExample ExampleSampler::sample_positive(Rng& rng) const {
    if (eligible_.empty())
        throw std::runtime_error("sampler: no eligible (successful, long enough) trajectory");
    const int ti = eligible_[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(eligible_.size()) - 1))];
    const auto& traj = ds_->trajs[ti];
    const int T = static_cast<int>(traj.frames.size());
    const int t = static_cast<int>(rng.uniform_int(0, T - 2));
    const int k = static_cast<int>(rng.uniform_int(cfg_.horizon_min, cfg_.horizon_max));
    const int gi = std::min(t + k, T - 1);

    ClassifierExample ex;
    ex.s = &traj.frames[t];
    ex.g = &traj.frames[gi];
    ex.token = traj.instr.token();
    ex.label = 1;
    ex.kind = ExampleKind::Positive;
    ex.s_traj = ti;
    ex.g_traj = ti;
    ex.t_index = t;
    ex.g_index = gi;
    ex.horizon_k = k;
    ex.clamped = (t + k) > (T - 1);
    return ex;
}

ClassifierExample ExampleSampler::make_negative(ExampleKind kind, Rng& rng) const {
    if (kind == ExampleKind::Positive)
        throw std::invalid_argument("make_negative: Positive is not a negative construction");

    if (kind == ExampleKind::ReverseDirection) {
        ClassifierExample ex = sample_positive(rng);
        std::swap(ex.s, ex.g);
        std::swap(ex.t_index, ex.g_index);
        ex.label = 0;
        ex.kind = ExampleKind::ReverseDirection;
        return ex;
    }

    if (kind == ExampleKind::WrongInstruction) {
        if (!multi_instruction_)
            throw std::runtime_error("sampler: wrong-instruction negatives need >= 2 instructions");
        ClassifierExample ex = sample_positive(rng);
        for (int guard = 0; guard < 100000; ++guard) {
            const int oi = eligible_[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(eligible_.size()) - 1))];
            const int tok = ds_->trajs[oi].instr.token();
            if (tok != ex.token) {
                ex.token = tok;
                ex.label = 0;
                ex.kind = ExampleKind::WrongInstruction;
                return ex;
            }
        }
        throw std::runtime_error("sampler: failed to draw a differing instruction");
    }

    // WrongGoal: s and l from one positive, g from a positive of a different
    // trajectory.
    if (eligible_.size() < 2)
        throw std::runtime_error("sampler: wrong-goal negatives need >= 2 trajectories");
    ClassifierExample ex = sample_positive(rng);
    for (int guard = 0; guard < 100000; ++guard) {
        ClassifierExample other = sample_positive(rng);
        if (other.s_traj != ex.s_traj) {
            ex.g = other.g;
            ex.g_traj = other.g_traj;
            ex.g_index = other.g_index;
            ex.label = 0;
            ex.kind = ExampleKind::WrongGoal;
            return ex;
        }
    }
    throw std::runtime_error("sampler: failed to draw a goal from a different trajectory");
}

std::vector<ClassifierExample> ExampleSampler::sample_batch(int batch_size, Rng& rng) const {
    if (batch_size < 1) throw std::invalid_argument("sample_batch: batch_size must be >= 1");
    std::vector<ClassifierExample> out;
    out.reserve(batch_size);
    const double p_pos = cfg_.positive_fraction;
    const double neg_total =
        cfg_.frac_wrong_instruction + cfg_.frac_reverse_direction + cfg_.frac_wrong_goal;
    for (int i = 0; i < batch_size; ++i) {
        const double r = rng.uniform();
        if (r < p_pos) {
            out.push_back(sample_positive(rng));
            continue;
        }
        const double rn = (r - p_pos) / (1.0 - p_pos) * neg_total;
        ExampleKind kind;
        if (rn < cfg_.frac_wrong_instruction)
            kind = ExampleKind::WrongInstruction;
        else if (rn < cfg_.frac_wrong_instruction + cfg_.frac_reverse_direction)
            kind = ExampleKind::ReverseDirection;
        else
            kind = ExampleKind::WrongGoal;
        out.push_back(make_negative(kind, rng));
    }
    for (int i = batch_size - 1; i > 0; --i)
        std::swap(out[i], out[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    return out;
}

}  // namespace sglab
