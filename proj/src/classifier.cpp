#include "sglab/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "sglab/checkpoint.hpp"
#include "sglab/proposer.hpp"

namespace sglab {

namespace {

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    const int N = a.shape[0];
    const int xa = a.shape[1], xb = b.shape[1];
    Tensor out({N, xa + xb});
    for (int n = 0; n < N; ++n) {
        std::copy_n(a.ptr() + static_cast<std::size_t>(n) * xa, xa,
                    out.ptr() + static_cast<std::size_t>(n) * (xa + xb));
        std::copy_n(b.ptr() + static_cast<std::size_t>(n) * xb, xb,
                    out.ptr() + static_cast<std::size_t>(n) * (xa + xb) + xa);
    }
    return out;
}

void split_cols(const Tensor& d, int xa, Tensor& da, Tensor& db) {
    const int N = d.shape[0];
    const int xb = d.shape[1] - xa;
    da = Tensor({N, xa});
    db = Tensor({N, xb});
    for (int n = 0; n < N; ++n) {
        std::copy_n(d.ptr() + static_cast<std::size_t>(n) * (xa + xb), xa,
                    da.ptr() + static_cast<std::size_t>(n) * xa);
        std::copy_n(d.ptr() + static_cast<std::size_t>(n) * (xa + xb) + xa, xb,
                    db.ptr() + static_cast<std::size_t>(n) * xb);
    }
}

}  // namespace

ClassifierNet::ClassifierNet(const ClassifierArch& a)
    : arch(a),
      embed("embed", a.vocab, a.embed_dim),
      enc_s("enc_s", 3, a.embed_dim),
      enc_g("enc_g", 3, a.embed_dim),
      h1("head/h1", 2 * ConvEncoder::kFeatureDim, a.head_width),
      h2("head/h2", a.head_width, a.head_width),
      h3("head/h3", a.head_width, 1) {
    drop.rate = a.dropout;
}

void ClassifierNet::init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xc1a55ULL));
    embed.init(rng);
    enc_s.init(rng);
    enc_g.init(rng);
    h1.init(rng);
    h2.init(rng);
    // Calibrated output layer: small weights keep initial predictions near
    // 0.5 (chance-level BCE on balanced labels).
    h3.init(rng, 0.01f);
}

std::vector<nn::ParamRef> ClassifierNet::parameters() {
    std::vector<nn::ParamRef> out;
    embed.collect(out);
    enc_s.collect(out);
    enc_g.collect(out);
    h1.collect(out);
    h2.collect(out);
    h3.collect(out);
    return out;
}

Tensor ClassifierNet::forward(const Tensor& s, const Tensor& g,
                              const std::vector<int>& tokens, bool train, Rng* drop_rng,
                              Cache* cache) const {
    Cache local;
    Cache& cc = cache ? *cache : local;
    const Tensor z = embed.forward(tokens, cache ? &cc.emb : nullptr);
    const Tensor fs = enc_s.forward(s, &z, cache ? &cc.s : nullptr);
    const Tensor fg = enc_g.forward(g, &z, cache ? &cc.g : nullptr);
    Tensor h = concat_cols(fs, fg);
    h = h1.forward(h, cache ? &cc.h1 : nullptr);
    h = nn::Relu::forward(h, cache ? &cc.r1 : nullptr);
    h = drop.forward(h, train, drop_rng, cache ? &cc.d1 : nullptr);
    h = h2.forward(h, cache ? &cc.h2 : nullptr);
    h = nn::Relu::forward(h, cache ? &cc.r2 : nullptr);
    h = drop.forward(h, train, drop_rng, cache ? &cc.d2 : nullptr);
    h = h3.forward(h, cache ? &cc.h3 : nullptr);
    Tensor p = nn::sigmoid(h);
    p.shape = {p.shape[0]};  // [N,1] -> [N]
    if (cache) {
        cc.p = p;
        cc.n = p.shape[0];
    }
    return p;
}

void ClassifierNet::backward(const Tensor& dp, Cache& cache) {
    const int N = cache.n;
    Tensor dlogit({N, 1});
    for (int n = 0; n < N; ++n) {
        const float p = cache.p.data[n];
        dlogit.data[n] = dp.data[n] * p * (1.0f - p);
    }
    Tensor d = h3.backward(dlogit, cache.h3);
    d = drop.backward(d, cache.d2);
    d = nn::Relu::backward(d, cache.r2);
    d = h2.backward(d, cache.h2);
    d = drop.backward(d, cache.d1);
    d = nn::Relu::backward(d, cache.r1);
    d = h1.backward(d, cache.h1);
    Tensor ds, dg;
    split_cols(d, ConvEncoder::kFeatureDim, ds, dg);
    Tensor dz({N, arch.embed_dim});
    enc_s.backward(ds, cache.s, &dz);
    enc_g.backward(dg, cache.g, &dz);
    embed.backward(dz, cache.emb);
}

float ClassifierNet::score(const ImageF& s, const ImageF& g, int token) const {
    const Tensor st = image_to_batch(s);
    const Tensor gt = image_to_batch(g);
    const Tensor p = forward(st, gt, {token}, /*train=*/false, nullptr, nullptr);
    return p.data[0];
}

std::vector<float> ClassifierNet::score_goals(const ImageF& s,
                                              const std::vector<const ImageF*>& goals,
                                              int token) const {
    if (goals.empty()) return {};
    std::vector<const ImageF*> srep(goals.size(), &s);
    const Tensor st = images_to_batch(srep);
    const Tensor gt = images_to_batch(goals);
    const std::vector<int> tokens(goals.size(), token);
    const Tensor p = forward(st, gt, tokens, /*train=*/false, nullptr, nullptr);
    return {p.data.begin(), p.data.end()};
}

// ---------------------------------------------------------------------------
// training

namespace {

struct Batch {
    Tensor s, g;
    std::vector<int> tokens;
    std::vector<int> labels;
};

// Deterministic per (cfg.seed, step): sampling consumes one derived stream,
// each slot's augmentation another, so thread scheduling cannot reorder rng
// consumption.
Batch build_batch(const ExampleSampler& sampler, const ClassifierTrainConfig& cfg,
                  AugMode mode, int step, bool parallel_augment) {
    Rng brng(derive_seed(cfg.seed, 0xba7c4ULL, step));
    const auto examples = sampler.sample_batch(cfg.batch_size, brng);
    const int N = static_cast<int>(examples.size());

    Batch batch;
    batch.s = Tensor({3, N, kImageSize, kImageSize});
    batch.g = Tensor({3, N, kImageSize, kImageSize});
    batch.tokens.resize(N);
    batch.labels.resize(N);

    const std::size_t plane = static_cast<std::size_t>(kImageSize) * kImageSize;
#pragma omp parallel for schedule(static) if (parallel_augment)
    for (int i = 0; i < N; ++i) {
        Rng arng(derive_seed(cfg.seed, 0xa06ULL, step, i));
        const auto [sa, ga] =
            augment_pair(dequantize(*examples[i].s), dequantize(*examples[i].g), mode, arng);
        for (int c = 0; c < 3; ++c) {
            float* sd = batch.s.ptr() + (static_cast<std::size_t>(c) * N + i) * plane;
            float* gd = batch.g.ptr() + (static_cast<std::size_t>(c) * N + i) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                sd[p] = sa.px[p * 3 + c];
                gd[p] = ga.px[p * 3 + c];
            }
        }
        batch.tokens[i] = examples[i].token;
        batch.labels[i] = examples[i].label;
    }
    return batch;
}

class BatchQueue {
public:
    explicit BatchQueue(std::size_t cap) : cap_(cap) {}

    void push(Batch&& b) {
        std::unique_lock lk(m_);
        cv_push_.wait(lk, [&] { return q_.size() < cap_ || closed_; });
        if (closed_) return;
        q_.push_back(std::move(b));
        cv_pop_.notify_one();
    }

    std::optional<Batch> pop() {
        std::unique_lock lk(m_);
        cv_pop_.wait(lk, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return std::nullopt;
        Batch b = std::move(q_.front());
        q_.pop_front();
        cv_push_.notify_one();
        return b;
    }

    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_pop_.notify_all();
        cv_push_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_push_, cv_pop_;
    std::deque<Batch> q_;
    std::size_t cap_;
    bool closed_ = false;
};

}  // namespace

EvalSet make_eval_set(const Dataset& ds, int n_examples, std::uint64_t seed) {
    ExampleSampler sampler(ds);
    Rng rng(derive_seed(seed, 0xea15ULL));
    EvalSet set;
    set.examples.reserve(n_examples);
    // balanced halves, negatives per the 40/40/20 split
    for (int i = 0; i < n_examples; ++i) {
        if (i % 2 == 0) {
            set.examples.push_back(sampler.sample_positive(rng));
        } else {
            const double r = rng.uniform();
            ExampleKind k = r < 0.4   ? ExampleKind::WrongInstruction
                            : r < 0.8 ? ExampleKind::ReverseDirection
                                      : ExampleKind::WrongGoal;
            set.examples.push_back(sampler.make_negative(k, rng));
        }
    }
    return set;
}

float eval_classifier_accuracy(const ClassifierNet& net, const EvalSet& set,
                               float goal_corruption_severity, std::uint64_t corruption_seed) {
    const int total = static_cast<int>(set.examples.size());
    if (total == 0) return 0.0f;
    int correct = 0;
    constexpr int kChunk = 256;
    const std::size_t plane = static_cast<std::size_t>(kImageSize) * kImageSize;
    for (int base = 0; base < total; base += kChunk) {
        const int n = std::min(kChunk, total - base);
        Tensor s({3, n, kImageSize, kImageSize});
        Tensor g({3, n, kImageSize, kImageSize});
        std::vector<int> tokens(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const auto& ex = set.examples[base + i];
            const ImageF si = dequantize(*ex.s);
            ImageF gi = dequantize(*ex.g);
            if (goal_corruption_severity > 0.0f) {
                Rng crng(derive_seed(corruption_seed, 0xc0abULL, base + i));
                gi = inject_artifacts(gi, goal_corruption_severity, crng);
            }
            for (int c = 0; c < 3; ++c) {
                float* sd = s.ptr() + (static_cast<std::size_t>(c) * n + i) * plane;
                float* gd = g.ptr() + (static_cast<std::size_t>(c) * n + i) * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    sd[p] = si.px[p * 3 + c];
                    gd[p] = gi.px[p * 3 + c];
                }
            }
            tokens[i] = ex.token;
        }
        const Tensor p = net.forward(s, g, tokens, /*train=*/false, nullptr, nullptr);
        for (int i = 0; i < n; ++i) {
            const int pred = p.data[i] >= 0.5f ? 1 : 0;
            if (pred == set.examples[base + i].label) ++correct;
        }
    }
    return static_cast<float>(correct) / static_cast<float>(total);
}

ClassifierTrainResult train_classifier(ClassifierNet& net, const Dataset& train_ds,
                                       const Dataset* eval_ds,
                                       const ClassifierTrainConfig& cfg, AugMode aug_mode) {
    const auto t0 = std::chrono::steady_clock::now();
    ExampleSampler sampler(train_ds);
    auto params = net.parameters();
    nn::Adam adam;
    adam.cfg.lr = cfg.lr;
    adam.init(params);

    EvalSet eval_set;
    if (eval_ds) eval_set = make_eval_set(*eval_ds, cfg.eval_examples, derive_seed(cfg.seed, 0xe5e7ULL));

    ClassifierTrainResult result;
    ClassifierNet::Cache cache;

    const auto train_step = [&](int step, Batch& batch) {
        Rng drop_rng(derive_seed(cfg.seed, 0xd209ULL, step));
        const Tensor p =
            net.forward(batch.s, batch.g, batch.tokens, /*train=*/true, &drop_rng, &cache);
        Tensor dp;
        const float loss = nn::bce_loss_batch(p, batch.labels, dp);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_classifier: non-finite loss at step " +
                                     std::to_string(step));
        nn::zero_grads(params);
        net.backward(dp, cache);
        adam.update(params);

        const bool log_now = step % std::max(1, cfg.eval_interval) == 0 || step == cfg.steps - 1;
        if (log_now) {
            float acc = std::numeric_limits<float>::quiet_NaN();
            if (eval_ds) acc = eval_classifier_accuracy(net, eval_set);
            result.log.push_back({step, loss, acc});
        }
    };

    if (cfg.pipeline_depth <= 0) {
        for (int step = 0; step < cfg.steps; ++step) {
            Batch b = build_batch(sampler, cfg, aug_mode, step, /*parallel_augment=*/true);
            train_step(step, b);
        }
    } else {
        BatchQueue queue(static_cast<std::size_t>(cfg.pipeline_depth));
        std::exception_ptr producer_error;
        std::thread producer([&] {
            try {
                for (int step = 0; step < cfg.steps; ++step)
                    queue.push(build_batch(sampler, cfg, aug_mode, step,
                                           /*parallel_augment=*/false));
            } catch (...) {
                producer_error = std::current_exception();
            }
            queue.close();
        });
        int step = 0;
        while (auto b = queue.pop()) {
            train_step(step, *b);
            ++step;
        }
        producer.join();
        if (producer_error) std::rethrow_exception(producer_error);
        if (step != cfg.steps)
            throw std::runtime_error("train_classifier: batch pipeline ended early");
    }

    if (eval_ds) result.final_eval_accuracy = eval_classifier_accuracy(net, eval_set);
    result.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// ---------------------------------------------------------------------------
// persistence

void save_classifier(ClassifierNet& net, const std::string& path,
                     const std::string& meta_json) {
    auto params = net.parameters();
    save_checkpoint(path, params);
    if (!meta_json.empty()) {
        std::ofstream os(path + ".json");
        if (!os) throw std::runtime_error("cannot write checkpoint sidecar for '" + path + "'");
        os << meta_json;
    }
}

void load_classifier(ClassifierNet& net, const std::string& path) {
    auto params = net.parameters();
    load_checkpoint(path, params);
}

std::uint64_t vocabulary_hash() {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (int t = 0; t < Instruction::kVocabSize; ++t)
        for (char c : Instruction::from_token(t).str()) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    return h;
}

}  // namespace sglab
