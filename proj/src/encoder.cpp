#include "sglab/encoder.hpp"

#include <stdexcept>

namespace sglab {

ConvEncoder::ConvEncoder(std::string nm, int cin_, int embed_dim_)
    : name(std::move(nm)), cin(cin_), embed_dim(embed_dim_) {
    int in = cin;
    for (int b = 0; b < 4; ++b) {
        convs[b] = nn::Conv2d(name + "/conv" + std::to_string(b), in, kWidths[b],
                              /*stride=*/2, /*pad=*/1);
        in = kWidths[b];
        if (conditioned())
            film_gen[b] =
                nn::Dense(name + "/film" + std::to_string(b), embed_dim, 2 * kWidths[b]);
    }
}

void ConvEncoder::init(Rng& rng) {
    for (auto& c : convs) c.init(rng);
    if (!conditioned()) return;
    for (int b = 0; b < 4; ++b) {
        auto& f = film_gen[b];
        f.W.zero();
        f.b.zero();
        for (int c = 0; c < kWidths[b]; ++c) f.b.data[c] = 1.0f;  // scale 1, shift 0
    }
}

Tensor ConvEncoder::forward(const Tensor& x, const Tensor* z, Cache* cache) const {
    if (conditioned() && z == nullptr)
        throw std::runtime_error("encoder '" + name + "': missing conditioning input");
    Tensor h = x;
    for (int b = 0; b < 4; ++b) {
        h = convs[b].forward(h, cache ? &cache->conv[b] : nullptr);
        if (conditioned()) {
            const Tensor gb = film_gen[b].forward(*z, cache ? &cache->filmgen[b] : nullptr);
            const int N = gb.shape[0];
            const int C = kWidths[b];
            Tensor gamma({N, C}), beta({N, C});
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    gamma.data[static_cast<std::size_t>(n) * C + c] =
                        gb.data[static_cast<std::size_t>(n) * 2 * C + c];
                    beta.data[static_cast<std::size_t>(n) * C + c] =
                        gb.data[static_cast<std::size_t>(n) * 2 * C + C + c];
                }
            h = nn::FilmMod::forward(h, gamma, beta, cache ? &cache->film[b] : nullptr);
        }
        h = nn::Relu::forward(h, cache ? &cache->relu[b] : nullptr);
    }
    return nn::GlobalAvgPool::forward(h, cache ? &cache->gap : nullptr);
}

void ConvEncoder::backward(const Tensor& dfeat, Cache& cache, Tensor* dz) {
    Tensor d = nn::GlobalAvgPool::backward(dfeat, cache.gap);
    for (int b = 3; b >= 0; --b) {
        d = nn::Relu::backward(d, cache.relu[b]);
        if (conditioned()) {
            Tensor dgamma, dbeta;
            d = nn::FilmMod::backward(d, cache.film[b], dgamma, dbeta);
            const int N = dgamma.shape[0];
            const int C = kWidths[b];
            Tensor dgb({N, 2 * C});
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    dgb.data[static_cast<std::size_t>(n) * 2 * C + c] =
                        dgamma.data[static_cast<std::size_t>(n) * C + c];
                    dgb.data[static_cast<std::size_t>(n) * 2 * C + C + c] =
                        dbeta.data[static_cast<std::size_t>(n) * C + c];
                }
            const Tensor dzb = film_gen[b].backward(dgb, cache.filmgen[b]);
            if (dz)
                for (std::size_t i = 0; i < dzb.numel(); ++i) dz->data[i] += dzb.data[i];
        }
        d = convs[b].backward(d, cache.conv[b], /*need_dx=*/b > 0);
    }
}

void ConvEncoder::collect(std::vector<nn::ParamRef>& out) {
    for (int b = 0; b < 4; ++b) {
        convs[b].collect(out);
        if (conditioned()) film_gen[b].collect(out);
    }
}

Tensor images_to_batch(const std::vector<const ImageF*>& images) {
    if (images.empty()) throw std::invalid_argument("images_to_batch: empty batch");
    const int N = static_cast<int>(images.size());
    const int H = images[0]->h, W = images[0]->w;
    Tensor t({3, N, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int n = 0; n < N; ++n) {
        const ImageF& im = *images[n];
        if (im.h != H || im.w != W)
            throw std::invalid_argument("images_to_batch: inconsistent image sizes");
        for (int c = 0; c < 3; ++c) {
            float* dst = t.ptr() + (static_cast<std::size_t>(c) * N + n) * plane;
            const float* src = im.px.data();
            for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p * 3 + c];
        }
    }
    return t;
}

Tensor image_to_batch(const ImageF& image) {
    const std::vector<const ImageF*> one{&image};
    return images_to_batch(one);
}

}  // namespace sglab
