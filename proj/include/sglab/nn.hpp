#pragma once

#include <array>
#include <string>
#include <vector>

#include "sglab/rng.hpp"
#include "sglab/tensor.hpp"

namespace sglab::nn {

// Layers keep parameters and gradient accumulators; forward-pass caches are
// external so that a trained net can be shared read-only across threads.
// Activation layout through the conv stack is [C, N, H, W]; vector stages use
// [N, F].

struct ParamRef {
    std::string tag;
    Tensor* value;
    Tensor* grad;
};

// ---------------------------------------------------------------------------

struct Conv2d {
    std::string name;
    int cin = 0, cout = 0, kh = 3, kw = 3, stride = 1, pad = 0;
    Tensor W;   // [cout, cin*kh*kw]
    Tensor b;   // [cout]
    Tensor gW, gb;

    struct Cache {
        Tensor col;          // [cin*kh*kw, N*OH*OW]
        int N = 0, H = 0, Win = 0;
        bool valid = false;
    };

    Conv2d() = default;
    Conv2d(std::string nm, int cin_, int cout_, int stride_, int pad_);

    void init(Rng& rng);
    // x: [cin, N, H, W] -> y: [cout, N, OH, OW]. cache may be null in eval.
    Tensor forward(const Tensor& x, Cache* cache) const;
    // Accumulates gW/gb, returns dx (empty when need_dx is false, e.g. for the
    // first layer whose input is data).
    Tensor backward(const Tensor& dy, const Cache& cache, bool need_dx = true);
    void collect(std::vector<ParamRef>& out);
};

struct Dense {
    std::string name;
    int in = 0, out = 0;
    Tensor W;   // [out, in]
    Tensor b;   // [out]
    Tensor gW, gb;

    struct Cache {
        Tensor x;  // [N, in]
        bool valid = false;
    };

    Dense() = default;
    Dense(std::string nm, int in_, int out_);

    void init(Rng& rng, float scale = 1.0f);
    Tensor forward(const Tensor& x, Cache* cache) const;  // [N,in] -> [N,out]
    Tensor backward(const Tensor& dy, const Cache& cache);
    void collect(std::vector<ParamRef>& out);
};

struct Relu {
    struct Cache {
        Tensor y;
        bool valid = false;
    };
    static Tensor forward(const Tensor& x, Cache* cache);
    static Tensor backward(const Tensor& dy, const Cache& cache);
};

// Inverted dropout: at train time surviving activations are divided by the
// keep probability, eval is the identity.
struct Dropout {
    float rate = 0.0f;

    struct Cache {
        std::vector<float> scale;  // 0 or 1/keep per element
        bool valid = false;
    };

    Tensor forward(const Tensor& x, bool train, Rng* rng, Cache* cache) const;
    Tensor backward(const Tensor& dy, const Cache& cache) const;
};

// Feature-wise modulation of conv activations: y[c][n][p] = gamma[n][c] *
// x[c][n][p] + beta[n][c]. Parameterless; gamma/beta come from a Dense over
// the conditioning vector.
struct FilmMod {
    struct Cache {
        Tensor x, gamma;
        bool valid = false;
    };
    // x: [C,N,HW...], gamma/beta: [N,C]
    static Tensor forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                          Cache* cache);
    static Tensor backward(const Tensor& dy, const Cache& cache, Tensor& dgamma,
                           Tensor& dbeta);
};

struct GlobalAvgPool {
    struct Cache {
        std::vector<int> in_shape;
        bool valid = false;
    };
    static Tensor forward(const Tensor& x, Cache* cache);  // [C,N,H,W] -> [N,C]
    static Tensor backward(const Tensor& dy, const Cache& cache);
};

struct Embedding {
    std::string name;
    int vocab = 0, dim = 0;
    Tensor table;  // [vocab, dim]
    Tensor gtable;

    struct Cache {
        std::vector<int> tokens;
        bool valid = false;
    };

    Embedding() = default;
    Embedding(std::string nm, int vocab_, int dim_);
    void init(Rng& rng);
    Tensor forward(const std::vector<int>& tokens, Cache* cache) const;  // [N, dim]
    void backward(const Tensor& dy, const Cache& cache);
    void collect(std::vector<ParamRef>& out);
};

Tensor sigmoid(const Tensor& logits);
Tensor sigmoid_backward(const Tensor& dp, const Tensor& p);

// ---------------------------------------------------------------------------
// losses

// Binary cross entropy on a single prediction; p is clamped to
// [kBceEps, 1-kBceEps] before the logs.
inline constexpr float kBceEps = 1e-7f;
float bce_loss(float p, int label);
float bce_grad(float p, int label);  // d loss / d p

// Mean BCE over a batch; fills dp with per-element d(mean loss)/dp.
float bce_loss_batch(const Tensor& p, const std::vector<int>& labels, Tensor& dp);

// Softmax cross entropy over logits [N, K] with integer labels; returns mean
// loss and fills dlogits.
float softmax_ce(const Tensor& logits, const std::vector<int>& labels, Tensor& dlogits);

// ---------------------------------------------------------------------------
// optimizer

struct AdamConfig {
    float lr = 3e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct Adam {
    AdamConfig cfg;
    std::vector<Tensor> m, v;
    long step = 0;

    void init(const std::vector<ParamRef>& params);
    // Applies one update from the accumulated gradients; throws on non-finite
    // gradient entries, naming the parameter.
    void update(std::vector<ParamRef>& params);
};

void zero_grads(std::vector<ParamRef>& params);

// He-uniform in [-sqrt(6/fan_in), sqrt(6/fan_in)], row-major fill order.
void init_he_uniform(Tensor& t, int fan_in, Rng& rng, float scale = 1.0f);

}  // namespace sglab::nn
