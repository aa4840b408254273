#include "sglab/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sglab/kernels.hpp"

namespace sglab::nn {

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string nm, int cin_, int cout_, int stride_, int pad_)
    : name(std::move(nm)), cin(cin_), cout(cout_), stride(stride_), pad(pad_) {
    W = Tensor({cout, cin * kh * kw});
    b = Tensor({cout});
    gW = Tensor(W.shape);
    gb = Tensor(b.shape);
}

void Conv2d::init(Rng& rng) {
    init_he_uniform(W, cin * kh * kw, rng);
    b.zero();
}

Tensor Conv2d::forward(const Tensor& x, Cache* cache) const {
    if (x.shape.size() != 4 || x.shape[0] != cin)
        throw std::runtime_error("conv layer '" + name + "': expected input [" +
                                 std::to_string(cin) + ",N,H,W], got " + x.shape_str());
    const int N = x.shape[1], H = x.shape[2], Win = x.shape[3];
    const int OH = kernels::conv_out_dim(H, kh, stride, pad);
    const int OW = kernels::conv_out_dim(Win, kw, stride, pad);
    const int K = cin * kh * kw;
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;

    Tensor col({K, static_cast<int>(ncols)});
    kernels::im2col(x.ptr(), cin, N, H, Win, kh, kw, stride, pad, col.ptr());

    Tensor y({cout, N, OH, OW});
    kernels::gemm_nn(cout, K, static_cast<int>(ncols), W.ptr(), col.ptr(), y.ptr());

    float* yd = y.ptr();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cout; ++c) {
        const float bias = b.data[c];
        float* row = yd + static_cast<std::size_t>(c) * ncols;
#pragma omp simd
        for (std::size_t q = 0; q < ncols; ++q) row[q] += bias;
    }

    if (cache) {
        cache->col = std::move(col);
        cache->N = N;
        cache->H = H;
        cache->Win = Win;
        cache->valid = true;
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy, const Cache& cache, bool need_dx) {
    if (!cache.valid) throw std::runtime_error("conv layer '" + name + "': backward without cached forward");
    const int N = cache.N, H = cache.H, Win = cache.Win;
    const int OH = kernels::conv_out_dim(H, kh, stride, pad);
    const int OW = kernels::conv_out_dim(Win, kw, stride, pad);
    const int K = cin * kh * kw;
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;

    // dW += dy * col^T
    kernels::gemm_nt(cout, static_cast<int>(ncols), K, dy.ptr(), cache.col.ptr(), gW.ptr(),
                     /*accumulate=*/true);
    // db += row sums of dy
    const float* dyd = dy.ptr();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cout; ++c) {
        const float* row = dyd + static_cast<std::size_t>(c) * ncols;
        float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
        for (std::size_t q = 0; q < ncols; ++q) acc += row[q];
        gb.data[c] += acc;
    }

    if (!need_dx) return Tensor{};

    // dcol = W^T * dy, then scatter back to dx
    Tensor dcol({K, static_cast<int>(ncols)});
    kernels::gemm_tn(cout, K, static_cast<int>(ncols), W.ptr(), dy.ptr(), dcol.ptr());
    Tensor dx({cin, N, H, Win});
    kernels::col2im(dcol.ptr(), cin, N, H, Win, kh, kw, stride, pad, dx.ptr());
    return dx;
}

void Conv2d::collect(std::vector<ParamRef>& out) {
    out.push_back({name + "/W", &W, &gW});
    out.push_back({name + "/b", &b, &gb});
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string nm, int in_, int out_) : name(std::move(nm)), in(in_), out(out_) {
    W = Tensor({out, in});
    b = Tensor({out});
    gW = Tensor(W.shape);
    gb = Tensor(b.shape);
}

void Dense::init(Rng& rng, float scale) {
    init_he_uniform(W, in, rng, scale);
    b.zero();
}

Tensor Dense::forward(const Tensor& x, Cache* cache) const {
    if (x.shape.size() != 2 || x.shape[1] != in)
        throw std::runtime_error("dense layer '" + name + "': expected input [N," +
                                 std::to_string(in) + "], got " + x.shape_str());
    const int N = x.shape[0];
    Tensor y({N, out});
    // y = x * W^T
    kernels::gemm_nt(N, in, out, x.ptr(), W.ptr(), y.ptr());
    float* yd = y.ptr();
    const float* bd = b.ptr();
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        float* row = yd + static_cast<std::size_t>(n) * out;
#pragma omp simd
        for (int o = 0; o < out; ++o) row[o] += bd[o];
    }
    if (cache) {
        cache->x = x;
        cache->valid = true;
    }
    return y;
}

Tensor Dense::backward(const Tensor& dy, const Cache& cache) {
    if (!cache.valid) throw std::runtime_error("dense layer '" + name + "': backward without cached forward");
    const int N = dy.shape[0];
    // dW += dy^T * x
    kernels::gemm_tn(N, out, in, dy.ptr(), cache.x.ptr(), gW.ptr(), /*accumulate=*/true);
    // db += column sums of dy
    for (int n = 0; n < N; ++n) {
        const float* row = dy.ptr() + static_cast<std::size_t>(n) * out;
        for (int o = 0; o < out; ++o) gb.data[o] += row[o];
    }
    // dx = dy * W
    Tensor dx({N, in});
    kernels::gemm_nn(N, out, in, dy.ptr(), W.ptr(), dx.ptr());
    return dx;
}

void Dense::collect(std::vector<ParamRef>& out_refs) {
    out_refs.push_back({name + "/W", &W, &gW});
    out_refs.push_back({name + "/b", &b, &gb});
}

// ---------------------------------------------------------------------------
// Relu

Tensor Relu::forward(const Tensor& x, Cache* cache) {
    Tensor y = x;
    float* yd = y.ptr();
    const std::size_t n = y.numel();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        if (yd[i] < 0.0f) yd[i] = 0.0f;
    if (cache) {
        cache->y = y;
        cache->valid = true;
    }
    return y;
}

Tensor Relu::backward(const Tensor& dy, const Cache& cache) {
    if (!cache.valid) throw std::runtime_error("relu: backward without cached forward");
    Tensor dx = dy;
    const float* yd = cache.y.ptr();
    float* dxd = dx.ptr();
    const std::size_t n = dx.numel();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        if (yd[i] <= 0.0f) dxd[i] = 0.0f;
    return dx;
}

// ---------------------------------------------------------------------------
// Dropout

Tensor Dropout::forward(const Tensor& x, bool train, Rng* rng, Cache* cache) const {
    if (!train || rate <= 0.0f) {
        if (cache) {
            cache->scale.assign(x.numel(), 1.0f);
            cache->valid = true;
        }
        return x;
    }
    if (!rng) throw std::runtime_error("dropout: train mode requires an rng");
    const float keep = 1.0f - rate;
    const float inv = 1.0f / keep;
    Tensor y = x;
    if (cache) cache->scale.resize(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const float s = rng->uniform() < rate ? 0.0f : inv;
        y.data[i] *= s;
        if (cache) cache->scale[i] = s;
    }
    if (cache) cache->valid = true;
    return y;
}

Tensor Dropout::backward(const Tensor& dy, const Cache& cache) const {
    if (!cache.valid) throw std::runtime_error("dropout: backward without cached forward");
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] *= cache.scale[i];
    return dx;
}

// ---------------------------------------------------------------------------
// FilmMod

Tensor FilmMod::forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        Cache* cache) {
    const int C = x.shape[0];
    const int N = x.shape[1];
    const std::size_t HW = x.numel() / (static_cast<std::size_t>(C) * N);
    Tensor y(x.shape);
#pragma omp parallel for schedule(static) collapse(2)
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n) {
            const float g = gamma.data[static_cast<std::size_t>(n) * C + c];
            const float bt = beta.data[static_cast<std::size_t>(n) * C + c];
            const float* xp = x.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            float* yp = y.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
#pragma omp simd
            for (std::size_t p = 0; p < HW; ++p) yp[p] = g * xp[p] + bt;
        }
    if (cache) {
        cache->x = x;
        cache->gamma = gamma;
        cache->valid = true;
    }
    return y;
}

Tensor FilmMod::backward(const Tensor& dy, const Cache& cache, Tensor& dgamma,
                         Tensor& dbeta) {
    if (!cache.valid) throw std::runtime_error("film: backward without cached forward");
    const int C = dy.shape[0];
    const int N = dy.shape[1];
    const std::size_t HW = dy.numel() / (static_cast<std::size_t>(C) * N);
    Tensor dx(dy.shape);
    dgamma = Tensor({N, C});
    dbeta = Tensor({N, C});
#pragma omp parallel for schedule(static) collapse(2)
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n) {
            const float g = cache.gamma.data[static_cast<std::size_t>(n) * C + c];
            const float* dyp = dy.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            const float* xp = cache.x.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            float* dxp = dx.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            float dg = 0.0f, db = 0.0f;
#pragma omp simd reduction(+ : dg, db)
            for (std::size_t p = 0; p < HW; ++p) {
                dg += dyp[p] * xp[p];
                db += dyp[p];
                dxp[p] = dyp[p] * g;
            }
            dgamma.data[static_cast<std::size_t>(n) * C + c] = dg;
            dbeta.data[static_cast<std::size_t>(n) * C + c] = db;
        }
    return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, Cache* cache) {
    const int C = x.shape[0];
    const int N = x.shape[1];
    const std::size_t HW = x.numel() / (static_cast<std::size_t>(C) * N);
    Tensor y({N, C});
    const float inv = 1.0f / static_cast<float>(HW);
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n) {
            const float* xp = x.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            float acc = 0.0f;
            for (std::size_t p = 0; p < HW; ++p) acc += xp[p];
            y.data[static_cast<std::size_t>(n) * C + c] = acc * inv;
        }
    if (cache) {
        cache->in_shape = x.shape;
        cache->valid = true;
    }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy, const Cache& cache) {
    if (!cache.valid) throw std::runtime_error("gap: backward without cached forward");
    const int C = cache.in_shape[0];
    const int N = cache.in_shape[1];
    Tensor dx(cache.in_shape);
    const std::size_t HW = dx.numel() / (static_cast<std::size_t>(C) * N);
    const float inv = 1.0f / static_cast<float>(HW);
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n) {
            const float g = dy.data[static_cast<std::size_t>(n) * C + c] * inv;
            float* dxp = dx.ptr() + (static_cast<std::size_t>(c) * N + n) * HW;
            for (std::size_t p = 0; p < HW; ++p) dxp[p] = g;
        }
    return dx;
}

// ---------------------------------------------------------------------------
// Embedding

Embedding::Embedding(std::string nm, int vocab_, int dim_)
    : name(std::move(nm)), vocab(vocab_), dim(dim_) {
    table = Tensor({vocab, dim});
    gtable = Tensor(table.shape);
}

void Embedding::init(Rng& rng) {
    for (auto& v : table.data) v = rng.uniformf(-0.05f, 0.05f);
}

Tensor Embedding::forward(const std::vector<int>& tokens, Cache* cache) const {
    const int N = static_cast<int>(tokens.size());
    Tensor y({N, dim});
    for (int n = 0; n < N; ++n) {
        const int t = tokens[n];
        if (t < 0 || t >= vocab)
            throw std::runtime_error("embedding '" + name + "': token " + std::to_string(t) +
                                     " outside vocabulary of size " + std::to_string(vocab));
        std::memcpy(y.ptr() + static_cast<std::size_t>(n) * dim,
                    table.ptr() + static_cast<std::size_t>(t) * dim, sizeof(float) * dim);
    }
    if (cache) {
        cache->tokens = tokens;
        cache->valid = true;
    }
    return y;
}

void Embedding::backward(const Tensor& dy, const Cache& cache) {
    if (!cache.valid) throw std::runtime_error("embedding: backward without cached forward");
    for (std::size_t n = 0; n < cache.tokens.size(); ++n) {
        const int t = cache.tokens[n];
        float* g = gtable.ptr() + static_cast<std::size_t>(t) * dim;
        const float* d = dy.ptr() + n * dim;
        for (int i = 0; i < dim; ++i) g[i] += d[i];
    }
}

void Embedding::collect(std::vector<ParamRef>& out) {
    out.push_back({name + "/table", &table, &gtable});
}

// ---------------------------------------------------------------------------
// sigmoid + losses

Tensor sigmoid(const Tensor& logits) {
    Tensor p = logits;
    for (auto& v : p.data) v = 1.0f / (1.0f + std::exp(-v));
    return p;
}

Tensor sigmoid_backward(const Tensor& dp, const Tensor& p) {
    Tensor dl = dp;
    for (std::size_t i = 0; i < dl.numel(); ++i) dl.data[i] *= p.data[i] * (1.0f - p.data[i]);
    return dl;
}

static float clamp_p(float p) {
    if (p < kBceEps) return kBceEps;
    if (p > 1.0f - kBceEps) return 1.0f - kBceEps;
    return p;
}

float bce_loss(float p, int label) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("bce_loss: label must be 0 or 1, got " +
                                    std::to_string(label));
    const float pc = clamp_p(p);
    return label == 1 ? -std::log(pc) : -std::log(1.0f - pc);
}

float bce_grad(float p, int label) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("bce_grad: label must be 0 or 1, got " +
                                    std::to_string(label));
    const float pc = clamp_p(p);
    return label == 1 ? -1.0f / pc : 1.0f / (1.0f - pc);
}

float bce_loss_batch(const Tensor& p, const std::vector<int>& labels, Tensor& dp) {
    const std::size_t n = p.numel();
    if (labels.size() != n) throw std::invalid_argument("bce_loss_batch: size mismatch");
    dp = Tensor(p.shape);
    double loss = 0.0;
    const float invn = 1.0f / static_cast<float>(n);
    for (std::size_t i = 0; i < n; ++i) {
        loss += bce_loss(p.data[i], labels[i]);
        dp.data[i] = bce_grad(p.data[i], labels[i]) * invn;
    }
    return static_cast<float>(loss / static_cast<double>(n));
}

float softmax_ce(const Tensor& logits, const std::vector<int>& labels, Tensor& dlogits) {
    const int N = logits.shape[0];
    const int K = logits.shape[1];
    if (static_cast<int>(labels.size()) != N)
        throw std::invalid_argument("softmax_ce: size mismatch");
    dlogits = Tensor(logits.shape);
    double loss = 0.0;
    const float invn = 1.0f / static_cast<float>(N);
    for (int n = 0; n < N; ++n) {
        const float* row = logits.ptr() + static_cast<std::size_t>(n) * K;
        float* drow = dlogits.ptr() + static_cast<std::size_t>(n) * K;
        float mx = row[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        float z = 0.0f;
        for (int k = 0; k < K; ++k) z += std::exp(row[k] - mx);
        const int y = labels[n];
        if (y < 0 || y >= K) throw std::invalid_argument("softmax_ce: label out of range");
        loss += -(row[y] - mx - std::log(z));
        for (int k = 0; k < K; ++k) {
            const float pk = std::exp(row[k] - mx) / z;
            drow[k] = (pk - (k == y ? 1.0f : 0.0f)) * invn;
        }
    }
    return static_cast<float>(loss / N);
}

// ---------------------------------------------------------------------------
// Adam

void Adam::init(const std::vector<ParamRef>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
        m.emplace_back(p.value->shape);
        v.emplace_back(p.value->shape);
    }
    step = 0;
}

void Adam::update(std::vector<ParamRef>& params) {
    if (m.size() != params.size())
        throw std::runtime_error("adam: state/parameter count mismatch");
    for (const auto& p : params)
        for (float g : p.grad->data)
            if (!std::isfinite(g))
                throw std::runtime_error("adam: non-finite gradient in parameter '" + p.tag +
                                         "'");
    ++step;
    const float b1 = cfg.beta1, b2 = cfg.beta2;
    const float bc1 = 1.0f - std::pow(b1, static_cast<float>(step));
    const float bc2 = 1.0f - std::pow(b2, static_cast<float>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        float* w = params[i].value->ptr();
        const float* g = params[i].grad->ptr();
        float* mi = m[i].ptr();
        float* vi = v[i].ptr();
        const std::size_t n = params[i].value->numel();
#pragma omp parallel for schedule(static)
        for (std::size_t j = 0; j < n; ++j) {
            mi[j] = b1 * mi[j] + (1.0f - b1) * g[j];
            vi[j] = b2 * vi[j] + (1.0f - b2) * g[j] * g[j];
            const float mhat = mi[j] / bc1;
            const float vhat = vi[j] / bc2;
            w[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

void zero_grads(std::vector<ParamRef>& params) {
    for (auto& p : params) p.grad->zero();
}

void init_he_uniform(Tensor& t, int fan_in, Rng& rng, float scale) {
    const float limit = scale * std::sqrt(6.0f / static_cast<float>(fan_in));
    for (auto& v : t.data) v = rng.uniformf(-limit, limit);
}

}  // namespace sglab::nn
