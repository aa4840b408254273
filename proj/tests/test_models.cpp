#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "fd_oracle.hpp"
#include "sglab/classifier.hpp"
#include "sglab/policy.hpp"

using namespace sglab;

namespace {

const Dataset& tiny_dataset() {
    static const Dataset ds = generate_dataset(40, 31337, InstructionMix::training_mix());
    return ds;
}

ImageF random_image(Rng& rng) {
    ImageF im(kImageSize, kImageSize);
    for (auto& v : im.px) v = rng.uniformf(0.0f, 1.0f);
    return im;
}

std::vector<float> flatten_params(std::vector<nn::ParamRef>& params) {
    std::vector<float> out;
    for (const auto& p : params)
        out.insert(out.end(), p.value->data.begin(), p.value->data.end());
    return out;
}

}  // namespace

TEST_CASE("classifier init is deterministic per seed") {
    ClassifierNet a, b;
    a.init(99);
    b.init(99);
    auto pa = a.parameters();
    auto pb = b.parameters();
    CHECK(flatten_params(pa) == flatten_params(pb));
    ClassifierNet c;
    c.init(100);
    auto pc = c.parameters();
    CHECK(flatten_params(pa) != flatten_params(pc));
}

TEST_CASE("conditioning is the identity at init: all tokens score identically") {
    ClassifierNet net;
    net.init(7);
    Rng rng(8);
    const ImageF s = random_image(rng);
    const ImageF g = random_image(rng);
    const float p0 = net.score(s, g, 0);
    for (int t : {1, 5, 11, 23}) CHECK(net.score(s, g, t) == p0);
}

TEST_CASE("fresh classifier outputs probabilities in (0,1)") {
    ClassifierNet net;
    net.init(17);
    Rng rng(18);
    for (int i = 0; i < 20; ++i) {
        const float p = net.score(random_image(rng), random_image(rng), i % 24);
        CHECK(p > 0.0f);
        CHECK(p < 1.0f);
    }
}

TEST_CASE("score is pure: same inputs give identical outputs") {
    ClassifierNet net;
    net.init(27);
    Rng rng(28);
    const ImageF s = random_image(rng);
    const ImageF g = random_image(rng);
    CHECK(net.score(s, g, 3) == net.score(s, g, 3));
}

TEST_CASE("scores are invariant to batch context") {
    ClassifierNet net;
    net.init(37);
    Rng rng(38);
    const ImageF s = random_image(rng);
    std::vector<ImageF> goals;
    for (int i = 0; i < 8; ++i) goals.push_back(random_image(rng));
    std::vector<const ImageF*> ptrs;
    for (const auto& g : goals) ptrs.push_back(&g);
    const auto batch_scores = net.score_goals(s, ptrs, 5);
    for (int i = 0; i < 8; ++i) CHECK(batch_scores[i] == net.score(s, goals[i], 5));
}

TEST_CASE("unknown instruction token is rejected") {
    ClassifierNet net;
    net.init(47);
    Rng rng(48);
    const ImageF s = random_image(rng);
    const ImageF g = random_image(rng);
    CHECK_THROWS_AS(net.score(s, g, 24), std::runtime_error);
    CHECK_THROWS_AS(net.score(s, g, -3), std::runtime_error);
}

TEST_CASE("classifier gradients wire up end to end (sampled finite differences)") {
    ClassifierNet net;
    net.init(57);
    Rng rng(58);
    const int N = 2;
    Tensor s({3, N, kImageSize, kImageSize}), g({3, N, kImageSize, kImageSize});
    for (auto& v : s.data) v = rng.uniformf(0.0f, 1.0f);
    for (auto& v : g.data) v = rng.uniformf(0.0f, 1.0f);
    const std::vector<int> tokens{2, 9};
    const std::vector<int> labels{1, 0};

    ClassifierNet::Cache cache;
    const Tensor p = net.forward(s, g, tokens, /*train=*/false, nullptr, &cache);
    Tensor dp;
    nn::bce_loss_batch(p, labels, dp);
    auto params = net.parameters();
    nn::zero_grads(params);
    net.backward(dp, cache);

    // eval-mode float forward as the fd functional (loss in double), a
    // handful of coordinates per parameter tensor; loose tolerance, this is
    // a wiring check on top of the per-layer oracles
    const auto loss_fn = [&] {
        const Tensor pp = net.forward(s, g, tokens, false, nullptr, nullptr);
        double l = 0.0;
        for (int i = 0; i < N; ++i) l += nn::bce_loss(pp.data[i], labels[i]);
        return l / N;
    };
    Rng pick(59);
    int checked = 0, good = 0;
    for (auto& pr : params) {
        for (int rep = 0; rep < 3; ++rep) {
            const std::size_t i = static_cast<std::size_t>(
                pick.uniform_int(0, static_cast<std::int64_t>(pr.value->numel()) - 1));
            const float orig = pr.value->data[i];
            const float eps = 1e-2f;
            pr.value->data[i] = orig + eps;
            const double lp = loss_fn();
            pr.value->data[i] = orig - eps;
            const double lm = loss_fn();
            pr.value->data[i] = orig;
            const double fd = (lp - lm) / (2.0 * eps);
            const double an = pr.grad->data[i];
            ++checked;
            if (std::abs(an - fd) <= 0.05 * std::max({std::abs(an), std::abs(fd), 0.02}))
                ++good;
        }
    }
    // float32 noise and relu kinks can spoil individual coordinates
    CHECK(good >= checked * 9 / 10);
}

TEST_CASE("classifier checkpoints round-trip and reject mismatched nets") {
    ClassifierNet net;
    net.init(67);
    const auto path = std::filesystem::temp_directory_path() / "sglab_clf_test.ckpt";
    save_classifier(net, path.string(), "{\"test\":true}");

    ClassifierNet other;
    other.init(68);
    load_classifier(other, path.string());
    auto pa = net.parameters();
    auto pb = other.parameters();
    CHECK(flatten_params(pa) == flatten_params(pb));
    CHECK(std::filesystem::exists(path.string() + ".json"));
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("short classifier training: chance-level initial loss, deterministic, pipelined") {
    ClassifierTrainConfig cfg;
    cfg.steps = 8;
    cfg.batch_size = 16;
    cfg.eval_interval = 1000;
    cfg.seed = 5;
    cfg.pipeline_depth = 0;

    ClassifierNet a;
    a.init(cfg.seed);
    const auto log_a = train_classifier(a, tiny_dataset(), nullptr, cfg, AugMode::Desynchronized);
    REQUIRE(!log_a.log.empty());
    CHECK(log_a.log.front().step == 0);
    CHECK(log_a.log.front().loss == doctest::Approx(std::log(2.0)).epsilon(0.22));

    ClassifierNet b;
    b.init(cfg.seed);
    train_classifier(b, tiny_dataset(), nullptr, cfg, AugMode::Desynchronized);
    auto pa = a.parameters();
    auto pb = b.parameters();
    CHECK(flatten_params(pa) == flatten_params(pb));

    // the bounded-queue pipeline must not change the result
    ClassifierNet c;
    c.init(cfg.seed);
    ClassifierTrainConfig piped = cfg;
    piped.pipeline_depth = 2;
    train_classifier(c, tiny_dataset(), nullptr, piped, AugMode::Desynchronized);
    auto pc = c.parameters();
    CHECK(flatten_params(pa) == flatten_params(pc));
}

// ---------------------------------------------------------------------------

TEST_CASE("policy actions are deterministic and respect the bounds") {
    PolicyNet net;
    net.init(77);
    Rng rng(78);
    const ImageF s = random_image(rng);
    const ImageF g = random_image(rng);
    const Action a1 = policy_action(net, s, g);
    const Action a2 = policy_action(net, s, g);
    CHECK(a1.dx == a2.dx);
    CHECK(a1.dy == a2.dy);
    CHECK(a1.grip == a2.grip);

    for (int i = 0; i < 200; ++i) {
        const Action a = policy_action(net, random_image(rng), random_image(rng));
        CHECK(std::abs(a.dx) <= kMaxDelta);
        CHECK(std::abs(a.dy) <= kMaxDelta);
    }
}

TEST_CASE("short policy training is deterministic per seed") {
    PolicyTrainConfig cfg;
    cfg.steps = 6;
    cfg.batch_size = 8;
    cfg.seed = 4;
    PolicyNet a, b;
    a.init(cfg.seed);
    b.init(cfg.seed);
    train_gc_policy(a, tiny_dataset(), cfg, AugMode::Synchronized);
    train_gc_policy(b, tiny_dataset(), cfg, AugMode::Synchronized);
    auto pa = a.parameters();
    auto pb = b.parameters();
    CHECK(flatten_params(pa) == flatten_params(pb));
}

TEST_CASE("short idm training is deterministic per seed") {
    PolicyTrainConfig cfg;
    cfg.steps = 6;
    cfg.batch_size = 8;
    cfg.seed = 4;
    IdmNet a, b;
    a.init(cfg.seed);
    b.init(cfg.seed);
    train_idm(a, tiny_dataset(), cfg);
    train_idm(b, tiny_dataset(), cfg);
    auto pa = a.parameters();
    auto pb = b.parameters();
    CHECK(flatten_params(pa) == flatten_params(pb));

    Rng rng(80);
    const Action act = idm_action(a, random_image(rng), random_image(rng));
    CHECK(std::abs(act.dx) <= kMaxDelta);
    CHECK(std::abs(act.dy) <= kMaxDelta);
}
