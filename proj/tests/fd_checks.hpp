#pragma once

// Per-layer-kind gradient checks against the double-precision fd oracle.
// Shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <map>
#include <string>

#include "fd_oracle.hpp"
#include "sglab/nn.hpp"
#include "sglab/rng.hpp"

namespace fdchecks {

using namespace sglab;

inline void fill_uniform(Tensor& t, Rng& rng, float lo = -1.0f, float hi = 1.0f) {
    for (auto& v : t.data) v = rng.uniformf(lo, hi);
}

inline void fill_away_from_zero(Tensor& t, Rng& rng) {
    for (auto& v : t.data) {
        const float mag = rng.uniformf(0.05f, 1.0f);
        v = rng.bernoulli(0.5) ? mag : -mag;
    }
}

inline std::vector<double> probe_weights(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    for (auto& v : w) v = rng.uniform(-0.5, 0.5);
    return w;
}

// Worst relative error per layer kind over `seeds` random small instances.
inline std::map<std::string, double> run_all(int seeds) {
    std::map<std::string, double> worst;
    for (const char* k :
         {"conv", "dense", "relu", "film", "gap", "dropout", "embedding", "softmax_ce"})
        worst[k] = 0.0;

    for (int seed = 0; seed < seeds; ++seed) {
        {  // conv
            Rng rng(derive_seed(2000, seed));
            const int cin = 2, cout = 3, N = 2, H = 6, W = 6;
            const int stride = seed % 2 ? 2 : 1;
            const int pad = seed % 2 ? 1 : 0;
            nn::Conv2d c("c", cin, cout, stride, pad);
            c.init(rng);
            Tensor x({cin, N, H, W});
            fill_uniform(x, rng, -0.5f, 0.5f);
            nn::Conv2d::Cache cache;
            const Tensor y = c.forward(x, &cache);
            const auto probe = probe_weights(y.numel(), rng);
            Tensor dy(y.shape);
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            c.gW.zero();
            c.gb.zero();
            const Tensor dx = c.backward(dy, cache);
            const auto loss = [&] {
                const auto yy =
                    fdoracle::conv2d_ref(x, c.W, c.b, cin, cout, N, H, W, stride, pad);
                double l = 0.0;
                for (std::size_t i = 0; i < yy.size(); ++i) l += probe[i] * yy[i];
                return l;
            };
            worst["conv"] = std::max(
                worst["conv"], fdoracle::max_rel_err({{c.W.ptr(), c.gW.ptr(), c.W.numel()},
                                                      {c.b.ptr(), c.gb.ptr(), c.b.numel()},
                                                      {x.ptr(), dx.ptr(), x.numel()}},
                                                     loss));
        }
        {  // dense
            Rng rng(derive_seed(1000, seed));
            const int N = 2, in = 8, out = 5;
            nn::Dense d("d", in, out);
            d.init(rng);
            Tensor x({N, in});
            fill_uniform(x, rng);
            const auto probe = probe_weights(static_cast<std::size_t>(N) * out, rng);
            nn::Dense::Cache cache;
            d.forward(x, &cache);
            Tensor dy({N, out});
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            d.gW.zero();
            d.gb.zero();
            const Tensor dx = d.backward(dy, cache);
            const auto loss = [&] {
                const auto y = fdoracle::dense_ref(x, d.W, d.b, N, in, out);
                double l = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) l += probe[i] * y[i];
                return l;
            };
            worst["dense"] = std::max(
                worst["dense"], fdoracle::max_rel_err({{d.W.ptr(), d.gW.ptr(), d.W.numel()},
                                                       {d.b.ptr(), d.gb.ptr(), d.b.numel()},
                                                       {x.ptr(), dx.ptr(), x.numel()}},
                                                      loss));
        }
        {  // relu
            Rng rng(derive_seed(3000, seed));
            Tensor x({2, 2, 8});
            fill_away_from_zero(x, rng);
            nn::Relu::Cache cache;
            nn::Relu::forward(x, &cache);
            const auto probe = probe_weights(x.numel(), rng);
            Tensor dy(x.shape);
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            const Tensor dx = nn::Relu::backward(dy, cache);
            const auto loss = [&] {
                double l = 0.0;
                for (std::size_t i = 0; i < x.numel(); ++i)
                    l += probe[i] * std::max(0.0, static_cast<double>(x.data[i]));
                return l;
            };
            worst["relu"] = std::max(
                worst["relu"], fdoracle::max_rel_err({{x.ptr(), dx.ptr(), x.numel()}}, loss));
        }
        {  // film
            Rng rng(derive_seed(4000, seed));
            const int C = 3, N = 2, HW = 4;
            Tensor x({C, N, HW}), gamma({N, C}), beta({N, C});
            fill_uniform(x, rng);
            fill_uniform(gamma, rng, 0.5f, 1.5f);
            fill_uniform(beta, rng, -0.5f, 0.5f);
            nn::FilmMod::Cache cache;
            nn::FilmMod::forward(x, gamma, beta, &cache);
            const auto probe = probe_weights(x.numel(), rng);
            Tensor dy(x.shape);
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            Tensor dgamma, dbeta;
            const Tensor dx = nn::FilmMod::backward(dy, cache, dgamma, dbeta);
            const auto loss = [&] {
                double l = 0.0;
                for (int c = 0; c < C; ++c)
                    for (int n = 0; n < N; ++n)
                        for (int p = 0; p < HW; ++p) {
                            const std::size_t xi =
                                (static_cast<std::size_t>(c) * N + n) * HW + p;
                            l += probe[xi] *
                                 (static_cast<double>(gamma.data[n * C + c]) * x.data[xi] +
                                  beta.data[n * C + c]);
                        }
                return l;
            };
            worst["film"] = std::max(
                worst["film"],
                fdoracle::max_rel_err({{x.ptr(), dx.ptr(), x.numel()},
                                       {gamma.ptr(), dgamma.ptr(), gamma.numel()},
                                       {beta.ptr(), dbeta.ptr(), beta.numel()}},
                                      loss));
        }
        {  // gap
            Rng rng(derive_seed(5000, seed));
            const int C = 4, N = 2, HW = 6;
            Tensor x({C, N, HW});
            fill_uniform(x, rng);
            nn::GlobalAvgPool::Cache cache;
            nn::GlobalAvgPool::forward(x, &cache);
            const auto probe = probe_weights(static_cast<std::size_t>(N) * C, rng);
            Tensor dy({N, C});
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            const Tensor dx = nn::GlobalAvgPool::backward(dy, cache);
            const auto loss = [&] {
                double l = 0.0;
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < C; ++c) {
                        double acc = 0.0;
                        for (int p = 0; p < HW; ++p)
                            acc += x.data[(static_cast<std::size_t>(c) * N + n) * HW + p];
                        l += probe[static_cast<std::size_t>(n) * C + c] * acc / HW;
                    }
                return l;
            };
            worst["gap"] = std::max(
                worst["gap"], fdoracle::max_rel_err({{x.ptr(), dx.ptr(), x.numel()}}, loss));
        }
        {  // dropout under a frozen mask
            Rng rng(derive_seed(6000, seed));
            nn::Dropout drop{0.3f};
            Tensor x({3, 7});
            fill_uniform(x, rng);
            Rng drng(derive_seed(6100, seed));
            nn::Dropout::Cache cache;
            drop.forward(x, true, &drng, &cache);
            const auto probe = probe_weights(x.numel(), rng);
            Tensor dy(x.shape);
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            const Tensor dx = drop.backward(dy, cache);
            const auto loss = [&] {
                double l = 0.0;
                for (std::size_t i = 0; i < x.numel(); ++i)
                    l += probe[i] * static_cast<double>(x.data[i]) * cache.scale[i];
                return l;
            };
            worst["dropout"] = std::max(
                worst["dropout"],
                fdoracle::max_rel_err({{x.ptr(), dx.ptr(), x.numel()}}, loss));
        }
        {  // embedding
            Rng rng(derive_seed(7000, seed));
            nn::Embedding emb("e", 6, 4);
            emb.init(rng);
            const std::vector<int> tokens{1, 4, 1};
            nn::Embedding::Cache cache;
            emb.forward(tokens, &cache);
            const auto probe = probe_weights(tokens.size() * 4, rng);
            Tensor dy({3, 4});
            for (std::size_t i = 0; i < dy.numel(); ++i)
                dy.data[i] = static_cast<float>(probe[i]);
            emb.gtable.zero();
            emb.backward(dy, cache);
            const auto loss = [&] {
                double l = 0.0;
                for (std::size_t n = 0; n < tokens.size(); ++n)
                    for (int k = 0; k < 4; ++k)
                        l += probe[n * 4 + k] *
                             emb.table.data[static_cast<std::size_t>(tokens[n]) * 4 + k];
                return l;
            };
            worst["embedding"] = std::max(
                worst["embedding"],
                fdoracle::max_rel_err(
                    {{emb.table.ptr(), emb.gtable.ptr(), emb.table.numel()}}, loss));
        }
        {  // softmax cross entropy
            Rng rng(derive_seed(8000, seed));
            Tensor logits({3, 3});
            fill_uniform(logits, rng, -2.0f, 2.0f);
            const std::vector<int> labels{0, 2, 1};
            Tensor dlogits;
            nn::softmax_ce(logits, labels, dlogits);
            const auto loss = [&] {
                double l = 0.0;
                for (int n = 0; n < 3; ++n) {
                    double mx = logits.data[n * 3];
                    for (int k = 1; k < 3; ++k)
                        mx = std::max(mx, static_cast<double>(logits.data[n * 3 + k]));
                    double z = 0.0;
                    for (int k = 0; k < 3; ++k)
                        z += std::exp(static_cast<double>(logits.data[n * 3 + k]) - mx);
                    l += -(static_cast<double>(logits.data[n * 3 + labels[n]]) - mx -
                           std::log(z));
                }
                return l / 3.0;
            };
            worst["softmax_ce"] = std::max(
                worst["softmax_ce"],
                fdoracle::max_rel_err({{logits.ptr(), dlogits.ptr(), logits.numel()}}, loss));
        }
    }
    return worst;
}

}  // namespace fdchecks
