#include "sglab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sglab {

namespace {
inline float clampf(float v, float lo, float hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

PolicyHead::PolicyHead(const std::string& prefix, int in_dim, int width)
    : h1(prefix + "/h1", in_dim, width),
      h2(prefix + "/h2", width, width),
      h3(prefix + "/h3", width, 5) {}

void PolicyHead::init(Rng& rng) {
    h1.init(rng);
    h2.init(rng);
    h3.init(rng, 0.01f);
}

Tensor PolicyHead::forward(const Tensor& feat, Cache* cache) const {
    Tensor h = h1.forward(feat, cache ? &cache->h1 : nullptr);
    h = nn::Relu::forward(h, cache ? &cache->r1 : nullptr);
    h = h2.forward(h, cache ? &cache->h2 : nullptr);
    h = nn::Relu::forward(h, cache ? &cache->r2 : nullptr);
    return h3.forward(h, cache ? &cache->h3 : nullptr);
}

Tensor PolicyHead::backward(const Tensor& dout, Cache& cache) {
    Tensor d = h3.backward(dout, cache.h3);
    d = nn::Relu::backward(d, cache.r2);
    d = h2.backward(d, cache.h2);
    d = nn::Relu::backward(d, cache.r1);
    return h1.backward(d, cache.h1);
}

void PolicyHead::collect(std::vector<nn::ParamRef>& out) {
    h1.collect(out);
    h2.collect(out);
    h3.collect(out);
}

// ---------------------------------------------------------------------------

PolicyNet::PolicyNet()
    : enc_s("gc/enc_s", 3, 0),
      enc_g("gc/enc_g", 3, 0),
      head("gc/head", 2 * ConvEncoder::kFeatureDim) {}

void PolicyNet::init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x90c1ULL));
    enc_s.init(rng);
    enc_g.init(rng);
    head.init(rng);
}

std::vector<nn::ParamRef> PolicyNet::parameters() {
    std::vector<nn::ParamRef> out;
    enc_s.collect(out);
    enc_g.collect(out);
    head.collect(out);
    return out;
}

Tensor PolicyNet::forward(const Tensor& s, const Tensor& g, Cache* cache) const {
    const Tensor fs = enc_s.forward(s, nullptr, cache ? &cache->s : nullptr);
    const Tensor fg = enc_g.forward(g, nullptr, cache ? &cache->g : nullptr);
    const int N = fs.shape[0];
    const int F = fs.shape[1];
    Tensor cat({N, 2 * F});
    for (int n = 0; n < N; ++n) {
        std::copy_n(fs.ptr() + static_cast<std::size_t>(n) * F, F,
                    cat.ptr() + static_cast<std::size_t>(n) * 2 * F);
        std::copy_n(fg.ptr() + static_cast<std::size_t>(n) * F, F,
                    cat.ptr() + static_cast<std::size_t>(n) * 2 * F + F);
    }
    return head.forward(cat, cache ? &cache->head : nullptr);
}

void PolicyNet::backward(const Tensor& dout, Cache& cache) {
    const Tensor dcat = head.backward(dout, cache.head);
    const int N = dcat.shape[0];
    const int F = dcat.shape[1] / 2;
    Tensor ds({N, F}), dg({N, F});
    for (int n = 0; n < N; ++n) {
        std::copy_n(dcat.ptr() + static_cast<std::size_t>(n) * 2 * F, F,
                    ds.ptr() + static_cast<std::size_t>(n) * F);
        std::copy_n(dcat.ptr() + static_cast<std::size_t>(n) * 2 * F + F, F,
                    dg.ptr() + static_cast<std::size_t>(n) * F);
    }
    enc_s.backward(ds, cache.s, nullptr);
    enc_g.backward(dg, cache.g, nullptr);
}

// ---------------------------------------------------------------------------

IdmNet::IdmNet() : enc("idm/enc", 6, 0), head("idm/head", ConvEncoder::kFeatureDim) {}

void IdmNet::init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1d11ULL));
    enc.init(rng);
    head.init(rng);
}

std::vector<nn::ParamRef> IdmNet::parameters() {
    std::vector<nn::ParamRef> out;
    enc.collect(out);
    head.collect(out);
    return out;
}

Tensor IdmNet::forward(const Tensor& pair, Cache* cache) const {
    const Tensor f = enc.forward(pair, nullptr, cache ? &cache->enc : nullptr);
    return head.forward(f, cache ? &cache->head : nullptr);
}

void IdmNet::backward(const Tensor& dout, Cache& cache) {
    const Tensor df = head.backward(dout, cache.head);
    enc.backward(df, cache.enc, nullptr);
}

// ---------------------------------------------------------------------------
// inference

namespace {

Action decode_action(const float* out) {
    Action a;
    a.dx = clampf(out[0] * kMaxDelta, -kMaxDelta, kMaxDelta);
    a.dy = clampf(out[1] * kMaxDelta, -kMaxDelta, kMaxDelta);
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (out[2 + k] > out[2 + best]) best = k;
    a.grip = static_cast<Grip>(best);
    return a;
}

// [6, N, H, W] stack of two frames
Tensor pair_to_batch(const ImageF& a, const ImageF& b) {
    const int H = a.h, W = a.w;
    Tensor t({6, 1, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int c = 0; c < 3; ++c)
        for (std::size_t p = 0; p < plane; ++p) {
            t.data[static_cast<std::size_t>(c) * plane + p] = a.px[p * 3 + c];
            t.data[static_cast<std::size_t>(3 + c) * plane + p] = b.px[p * 3 + c];
        }
    return t;
}

}  // namespace

Action policy_action(const PolicyNet& net, const ImageF& s, const ImageF& g) {
    const Tensor st = image_to_batch(s);
    const Tensor gt = image_to_batch(g);
    const Tensor out = net.forward(st, gt, nullptr);
    return decode_action(out.ptr());
}

Action idm_action(const IdmNet& net, const ImageF& frame_a, const ImageF& frame_b) {
    const Tensor pair = pair_to_batch(frame_a, frame_b);
    const Tensor out = net.forward(pair, nullptr);
    return decode_action(out.ptr());
}

// ---------------------------------------------------------------------------
// training

namespace {

struct ControlSample {
    const Image8* s;
    const Image8* g;
    Action action;
};

// Trajectories usable for control training: anything with at least one
// transition (hindsight relabeling does not require success).
std::vector<int> control_eligible(const Dataset& ds) {
    std::vector<int> out;
    for (std::size_t i = 0; i < ds.trajs.size(); ++i)
        if (ds.trajs[i].actions.size() >= 1) out.push_back(static_cast<int>(i));
    if (out.empty()) throw std::runtime_error("policy training: dataset has no actions");
    return out;
}

ControlSample sample_hindsight(const Dataset& ds, const std::vector<int>& eligible,
                               const PolicyTrainConfig& cfg, Rng& rng) {
    const auto& traj = ds.trajs[static_cast<std::size_t>(eligible[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))])];
    const int T = static_cast<int>(traj.frames.size());
    const int t = static_cast<int>(rng.uniform_int(0, T - 2));
    const int k = static_cast<int>(rng.uniform_int(cfg.horizon_min, cfg.horizon_max));
    const int gi = std::min(t + k, T - 1);
    return {&traj.frames[t], &traj.frames[gi], traj.actions[t]};
}

ControlSample sample_pair(const Dataset& ds, const std::vector<int>& eligible, Rng& rng) {
    const auto& traj = ds.trajs[static_cast<std::size_t>(eligible[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))])];
    const int T = static_cast<int>(traj.frames.size());
    const int t = static_cast<int>(rng.uniform_int(0, T - 2));
    return {&traj.frames[t], &traj.frames[t + 1], traj.actions[t]};
}

// Combined loss on the 5-wide output: MSE on normalized deltas plus
// cross-entropy on the gripper logits. Returns loss, fills dout.
float control_loss(const Tensor& out, const std::vector<Action>& labels, Tensor& dout) {
    const int N = out.shape[0];
    dout = Tensor(out.shape);
    double mse = 0.0;
    Tensor grip_logits({N, 3});
    std::vector<int> grip_labels(N);
    for (int n = 0; n < N; ++n) {
        const float* o = out.ptr() + static_cast<std::size_t>(n) * 5;
        const float tx = labels[n].dx / kMaxDelta;
        const float ty = labels[n].dy / kMaxDelta;
        const float ex = o[0] - tx;
        const float ey = o[1] - ty;
        mse += ex * ex + ey * ey;
        dout.data[static_cast<std::size_t>(n) * 5 + 0] = 2.0f * ex / static_cast<float>(N);
        dout.data[static_cast<std::size_t>(n) * 5 + 1] = 2.0f * ey / static_cast<float>(N);
        for (int k = 0; k < 3; ++k)
            grip_logits.data[static_cast<std::size_t>(n) * 3 + k] = o[2 + k];
        grip_labels[n] = static_cast<int>(labels[n].grip);
    }
    Tensor dgrip;
    const float ce = nn::softmax_ce(grip_logits, grip_labels, dgrip);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < 3; ++k)
            dout.data[static_cast<std::size_t>(n) * 5 + 2 + k] =
                dgrip.data[static_cast<std::size_t>(n) * 3 + k];
    return static_cast<float>(mse / N) + ce;
}

}  // namespace

std::vector<PolicyLogEntry> train_gc_policy(PolicyNet& net, const Dataset& ds,
                                            const PolicyTrainConfig& cfg, AugMode aug_mode) {
    const auto eligible = control_eligible(ds);
    auto params = net.parameters();
    nn::Adam adam;
    adam.cfg.lr = cfg.lr;
    adam.init(params);

    std::vector<PolicyLogEntry> log;
    PolicyNet::Cache cache;
    const std::size_t plane = static_cast<std::size_t>(kImageSize) * kImageSize;

    for (int step = 0; step < cfg.steps; ++step) {
        Rng brng(derive_seed(cfg.seed, 0x90ba7ULL, step));
        const int N = cfg.batch_size;
        std::vector<ControlSample> samples;
        samples.reserve(N);
        for (int i = 0; i < N; ++i) samples.push_back(sample_hindsight(ds, eligible, cfg, brng));

        Tensor s({3, N, kImageSize, kImageSize});
        Tensor g({3, N, kImageSize, kImageSize});
        std::vector<Action> labels(N);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < N; ++i) {
            Rng arng(derive_seed(cfg.seed, 0x90a6ULL, step, i));
            const auto [sa, ga] = augment_pair(dequantize(*samples[i].s),
                                               dequantize(*samples[i].g), aug_mode, arng);
            for (int c = 0; c < 3; ++c) {
                float* sd = s.ptr() + (static_cast<std::size_t>(c) * N + i) * plane;
                float* gd = g.ptr() + (static_cast<std::size_t>(c) * N + i) * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    sd[p] = sa.px[p * 3 + c];
                    gd[p] = ga.px[p * 3 + c];
                }
            }
            labels[i] = samples[i].action;
        }

        const Tensor out = net.forward(s, g, &cache);
        Tensor dout;
        const float loss = control_loss(out, labels, dout);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_gc_policy: non-finite loss at step " +
                                     std::to_string(step));
        nn::zero_grads(params);
        net.backward(dout, cache);
        adam.update(params);
        if (step % 500 == 0 || step == cfg.steps - 1) log.push_back({step, loss});
    }
    return log;
}

std::vector<PolicyLogEntry> train_idm(IdmNet& net, const Dataset& ds,
                                      const PolicyTrainConfig& cfg) {
    const auto eligible = control_eligible(ds);
    auto params = net.parameters();
    nn::Adam adam;
    adam.cfg.lr = cfg.lr;
    adam.init(params);

    std::vector<PolicyLogEntry> log;
    IdmNet::Cache cache;
    const std::size_t plane = static_cast<std::size_t>(kImageSize) * kImageSize;

    for (int step = 0; step < cfg.steps; ++step) {
        Rng brng(derive_seed(cfg.seed, 0x1dba7ULL, step));
        const int N = cfg.batch_size;
        std::vector<ControlSample> samples;
        samples.reserve(N);
        for (int i = 0; i < N; ++i) samples.push_back(sample_pair(ds, eligible, brng));

        Tensor pair({6, N, kImageSize, kImageSize});
        std::vector<Action> labels(N);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < N; ++i) {
            Rng arng(derive_seed(cfg.seed, 0x1da6ULL, step, i));
            const auto [fa, fb] = augment_pair(dequantize(*samples[i].s),
                                               dequantize(*samples[i].g),
                                               AugMode::Synchronized, arng);
            for (int c = 0; c < 3; ++c) {
                float* ad = pair.ptr() + (static_cast<std::size_t>(c) * N + i) * plane;
                float* bd = pair.ptr() + (static_cast<std::size_t>(3 + c) * N + i) * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    ad[p] = fa.px[p * 3 + c];
                    bd[p] = fb.px[p * 3 + c];
                }
            }
            labels[i] = samples[i].action;
        }

        const Tensor out = net.forward(pair, &cache);
        Tensor dout;
        const float loss = control_loss(out, labels, dout);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_idm: non-finite loss at step " +
                                     std::to_string(step));
        nn::zero_grads(params);
        net.backward(dout, cache);
        adam.update(params);
        if (step % 500 == 0 || step == cfg.steps - 1) log.push_back({step, loss});
    }
    return log;
}

IdmEval eval_idm(const IdmNet& net, const Dataset& ds, int max_pairs, std::uint64_t seed) {
    const auto eligible = control_eligible(ds);
    Rng rng(derive_seed(seed, 0x1de7aULL));
    double se = 0.0, var = 0.0;
    double mean_dx = 0.0, mean_dy = 0.0;
    int grip_correct = 0;

    std::vector<ControlSample> samples;
    for (int i = 0; i < max_pairs; ++i) samples.push_back(sample_pair(ds, eligible, rng));
    for (const auto& sm : samples) {
        mean_dx += sm.action.dx;
        mean_dy += sm.action.dy;
    }
    mean_dx /= samples.size();
    mean_dy /= samples.size();

    for (const auto& sm : samples) {
        const Action pred = idm_action(net, dequantize(*sm.s), dequantize(*sm.g));
        const double ex = pred.dx - sm.action.dx;
        const double ey = pred.dy - sm.action.dy;
        se += ex * ex + ey * ey;
        var += (sm.action.dx - mean_dx) * (sm.action.dx - mean_dx) +
               (sm.action.dy - mean_dy) * (sm.action.dy - mean_dy);
        if (pred.grip == sm.action.grip) ++grip_correct;
    }
    IdmEval ev;
    ev.delta_r2 = var > 0.0 ? static_cast<float>(1.0 - se / var) : 0.0f;
    ev.gripper_accuracy = static_cast<float>(grip_correct) / static_cast<float>(samples.size());
    return ev;
}

}  // namespace sglab
