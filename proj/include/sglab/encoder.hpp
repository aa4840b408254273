#pragma once

#include <array>

#include "sglab/image.hpp"
#include "sglab/nn.hpp"

namespace sglab {

// 4-block CNN for 32x32 RGB inputs: each block is a 3x3 stride-2 convolution
// (widths 16/32/64/64), optionally FiLM-modulated by a conditioning vector,
// then ReLU; global average pooling yields a 64-d feature.
struct ConvEncoder {
    static constexpr std::array<int, 4> kWidths = {16, 32, 64, 64};
    static constexpr int kFeatureDim = 64;

    std::string name;
    int cin = 3;
    int embed_dim = 0;  // 0 = unconditioned
    std::array<nn::Conv2d, 4> convs;
    std::array<nn::Dense, 4> film_gen;  // embed_dim -> 2 * width

    struct Cache {
        std::array<nn::Conv2d::Cache, 4> conv;
        std::array<nn::Dense::Cache, 4> filmgen;
        std::array<nn::FilmMod::Cache, 4> film;
        std::array<nn::Relu::Cache, 4> relu;
        nn::GlobalAvgPool::Cache gap;
    };

    ConvEncoder() = default;
    ConvEncoder(std::string nm, int cin_, int embed_dim_);

    bool conditioned() const { return embed_dim > 0; }

    // He-uniform convs; FiLM generators start as the identity (zero weights,
    // bias = scale 1 / shift 0).
    void init(Rng& rng);

    // x: [cin, N, H, W]; z: [N, embed_dim] when conditioned, else ignored.
    // Returns pooled features [N, 64].
    Tensor forward(const Tensor& x, const Tensor* z, Cache* cache) const;

    // Accumulates parameter gradients; when conditioned, accumulates the
    // conditioning gradient into dz (shape [N, embed_dim], caller-zeroed).
    void backward(const Tensor& dfeat, Cache& cache, Tensor* dz);

    void collect(std::vector<nn::ParamRef>& out);
};

// Batch tensor [3, N, H, W] from float images.
Tensor images_to_batch(const std::vector<const ImageF*>& images);
Tensor image_to_batch(const ImageF& image);

}  // namespace sglab
