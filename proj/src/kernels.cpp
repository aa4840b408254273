#include "sglab/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace sglab::kernels {

namespace {
constexpr int kNTile = 256;   // columns per parallel tile in nn/tn kernels
constexpr int kSplitK = 16;   // fixed K-split count in the nt kernel
}  // namespace

// ---------------------------------------------------------------------------
// references

void gemm_nn_ref(int M, int K, int N, const float* A, const float* B, float* C,
                 bool accumulate) {
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            float acc = 0.0f;
            for (int k = 0; k < K; ++k) acc += A[m * K + k] * B[k * N + n];
            C[m * N + n] = accumulate ? C[m * N + n] + acc : acc;
        }
}

void gemm_nt_ref(int M, int K, int N, const float* A, const float* B, float* C,
                 bool accumulate) {
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            float acc = 0.0f;
            for (int k = 0; k < K; ++k) acc += A[m * K + k] * B[n * K + k];
            C[m * N + n] = accumulate ? C[m * N + n] + acc : acc;
        }
}

void gemm_tn_ref(int P, int M, int N, const float* A, const float* B, float* C,
                 bool accumulate) {
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            float acc = 0.0f;
            for (int p = 0; p < P; ++p) acc += A[p * M + m] * B[p * N + n];
            C[m * N + n] = accumulate ? C[m * N + n] + acc : acc;
        }
}

// ---------------------------------------------------------------------------
// gemm_nn: parallel over N tiles; per tile, 4 A-rows at a time broadcast into
// vectorized accumulation along the tile.

void gemm_nn(int M, int K, int N, const float* A, const float* B, float* C,
             bool accumulate) {
    const int ntiles = (N + kNTile - 1) / kNTile;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < ntiles; ++t) {
        const int n0 = t * kNTile;
        const int nw = std::min(N, n0 + kNTile) - n0;
        float acc[4][kNTile];
        int m = 0;
        for (; m + 4 <= M; m += 4) {
            for (int i = 0; i < 4; ++i)
                for (int n = 0; n < nw; ++n) acc[i][n] = 0.0f;
            for (int k = 0; k < K; ++k) {
                const float a0 = A[(m + 0) * K + k];
                const float a1 = A[(m + 1) * K + k];
                const float a2 = A[(m + 2) * K + k];
                const float a3 = A[(m + 3) * K + k];
                const float* b = B + static_cast<std::size_t>(k) * N + n0;
#pragma omp simd
                for (int n = 0; n < nw; ++n) {
                    acc[0][n] += a0 * b[n];
                    acc[1][n] += a1 * b[n];
                    acc[2][n] += a2 * b[n];
                    acc[3][n] += a3 * b[n];
                }
            }
            for (int i = 0; i < 4; ++i) {
                float* c = C + static_cast<std::size_t>(m + i) * N + n0;
                if (accumulate)
                    for (int n = 0; n < nw; ++n) c[n] += acc[i][n];
                else
                    for (int n = 0; n < nw; ++n) c[n] = acc[i][n];
            }
        }
        for (; m < M; ++m) {
            float accs[kNTile];
            for (int n = 0; n < nw; ++n) accs[n] = 0.0f;
            for (int k = 0; k < K; ++k) {
                const float a0 = A[static_cast<std::size_t>(m) * K + k];
                const float* b = B + static_cast<std::size_t>(k) * N + n0;
#pragma omp simd
                for (int n = 0; n < nw; ++n) accs[n] += a0 * b[n];
            }
            float* c = C + static_cast<std::size_t>(m) * N + n0;
            if (accumulate)
                for (int n = 0; n < nw; ++n) c[n] += accs[n];
            else
                for (int n = 0; n < nw; ++n) c[n] = accs[n];
        }
    }
}

// ---------------------------------------------------------------------------
// gemm_tn: same tiling as gemm_nn with the A index transposed.

void gemm_tn(int P, int M, int N, const float* A, const float* B, float* C,
             bool accumulate) {
    const int ntiles = (N + kNTile - 1) / kNTile;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < ntiles; ++t) {
        const int n0 = t * kNTile;
        const int nw = std::min(N, n0 + kNTile) - n0;
        float acc[4][kNTile];
        int m = 0;
        for (; m + 4 <= M; m += 4) {
            for (int i = 0; i < 4; ++i)
                for (int n = 0; n < nw; ++n) acc[i][n] = 0.0f;
            for (int p = 0; p < P; ++p) {
                const float* arow = A + static_cast<std::size_t>(p) * M + m;
                const float a0 = arow[0];
                const float a1 = arow[1];
                const float a2 = arow[2];
                const float a3 = arow[3];
                const float* b = B + static_cast<std::size_t>(p) * N + n0;
#pragma omp simd
                for (int n = 0; n < nw; ++n) {
                    acc[0][n] += a0 * b[n];
                    acc[1][n] += a1 * b[n];
                    acc[2][n] += a2 * b[n];
                    acc[3][n] += a3 * b[n];
                }
            }
            for (int i = 0; i < 4; ++i) {
                float* c = C + static_cast<std::size_t>(m + i) * N + n0;
                if (accumulate)
                    for (int n = 0; n < nw; ++n) c[n] += acc[i][n];
                else
                    for (int n = 0; n < nw; ++n) c[n] = acc[i][n];
            }
        }
        for (; m < M; ++m) {
            float accs[kNTile];
            for (int n = 0; n < nw; ++n) accs[n] = 0.0f;
            for (int p = 0; p < P; ++p) {
                const float a0 = A[static_cast<std::size_t>(p) * M + m];
                const float* b = B + static_cast<std::size_t>(p) * N + n0;
#pragma omp simd
                for (int n = 0; n < nw; ++n) accs[n] += a0 * b[n];
            }
            float* c = C + static_cast<std::size_t>(m) * N + n0;
            if (accumulate)
                for (int n = 0; n < nw; ++n) c[n] += accs[n];
            else
                for (int n = 0; n < nw; ++n) c[n] = accs[n];
        }
    }
}

// ---------------------------------------------------------------------------
// gemm_nt: dot products over a (possibly very long) K. Split-K scheme: K is
// cut into kSplitK fixed slices, partial products are computed in parallel
// and reduced in slice order, so the summation order does not depend on the
// thread count. Each slice pass keeps its working set cache-resident.

void gemm_nt(int M, int K, int N, const float* A, const float* B, float* C,
             bool accumulate) {
    const std::size_t cn = static_cast<std::size_t>(M) * N;
    const int splits = std::min(kSplitK, std::max(1, K / 64));
    std::vector<float> partial(static_cast<std::size_t>(splits) * cn);
    const int kchunk = (K + splits - 1) / splits;

#pragma omp parallel for schedule(static)
    for (int s = 0; s < splits; ++s) {
        const int k0 = s * kchunk;
        const int kw = std::min(K, k0 + kchunk) - k0;
        float* P = partial.data() + static_cast<std::size_t>(s) * cn;
        for (int m = 0; m < M; ++m) {
            const float* a = A + static_cast<std::size_t>(m) * K + k0;
            for (int n = 0; n < N; ++n) {
                const float* b = B + static_cast<std::size_t>(n) * K + k0;
                float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
                for (int k = 0; k < kw; ++k) acc += a[k] * b[k];
                P[static_cast<std::size_t>(m) * N + n] = acc;
            }
        }
    }

    // fixed-order reduction over slices
    for (std::size_t i = 0; i < cn; ++i) {
        float acc = accumulate ? C[i] : 0.0f;
        for (int s = 0; s < splits; ++s) acc += partial[static_cast<std::size_t>(s) * cn + i];
        C[i] = acc;
    }
}

// ---------------------------------------------------------------------------
// im2col / col2im

int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

void im2col_ref(const float* x, int C, int N, int H, int W, int kh, int kw, int stride,
                int pad, float* col) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;
    for (int c = 0; c < C; ++c)
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
                const std::size_t r = (static_cast<std::size_t>(c) * kh + ky) * kw + kx;
                for (int n = 0; n < N; ++n)
                    for (int oh = 0; oh < OH; ++oh)
                        for (int ow = 0; ow < OW; ++ow) {
                            const int ih = oh * stride - pad + ky;
                            const int iw = ow * stride - pad + kx;
                            const std::size_t q =
                                (static_cast<std::size_t>(n) * OH + oh) * OW + ow;
                            float v = 0.0f;
                            if (ih >= 0 && ih < H && iw >= 0 && iw < W)
                                v = x[((static_cast<std::size_t>(c) * N + n) * H + ih) * W + iw];
                            col[r * ncols + q] = v;
                        }
            }
}

void im2col(const float* x, int C, int N, int H, int W, int kh, int kw, int stride,
            int pad, float* col) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;
    const int rows = C * kh * kw;
#pragma omp parallel for schedule(static) collapse(2)
    for (int r = 0; r < rows; ++r)
        for (int n = 0; n < N; ++n) {
            const int c = r / (kh * kw);
            const int ky = (r / kw) % kh;
            const int kx = r % kw;
            const float* xc = x + (static_cast<std::size_t>(c) * N + n) * H * W;
            float* out = col + r * ncols + static_cast<std::size_t>(n) * OH * OW;
            for (int oh = 0; oh < OH; ++oh) {
                const int ih = oh * stride - pad + ky;
                float* orow = out + static_cast<std::size_t>(oh) * OW;
                if (ih < 0 || ih >= H) {
                    std::memset(orow, 0, sizeof(float) * OW);
                    continue;
                }
                const float* xrow = xc + static_cast<std::size_t>(ih) * W;
                for (int ow = 0; ow < OW; ++ow) {
                    const int iw = ow * stride - pad + kx;
                    orow[ow] = (iw >= 0 && iw < W) ? xrow[iw] : 0.0f;
                }
            }
        }
}

void col2im_ref(const float* col, int C, int N, int H, int W, int kh, int kw, int stride,
                int pad, float* dx) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;
    for (int c = 0; c < C; ++c)
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
                const std::size_t r = (static_cast<std::size_t>(c) * kh + ky) * kw + kx;
                for (int n = 0; n < N; ++n)
                    for (int oh = 0; oh < OH; ++oh)
                        for (int ow = 0; ow < OW; ++ow) {
                            const int ih = oh * stride - pad + ky;
                            const int iw = ow * stride - pad + kx;
                            if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                            const std::size_t q =
                                (static_cast<std::size_t>(n) * OH + oh) * OW + ow;
                            dx[((static_cast<std::size_t>(c) * N + n) * H + ih) * W + iw] +=
                                col[r * ncols + q];
                        }
            }
}

// Parallel over (c, n): every thread owns disjoint dx[c][n] planes, and the
// (ky, kx, oh, ow) accumulation order within a plane matches the reference.
void col2im(const float* col, int C, int N, int H, int W, int kh, int kw, int stride,
            int pad, float* dx) {
    const int OH = conv_out_dim(H, kh, stride, pad);
    const int OW = conv_out_dim(W, kw, stride, pad);
    const std::size_t ncols = static_cast<std::size_t>(N) * OH * OW;
#pragma omp parallel for schedule(static) collapse(2)
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n) {
            float* plane = dx + (static_cast<std::size_t>(c) * N + n) * H * W;
            for (int ky = 0; ky < kh; ++ky)
                for (int kx = 0; kx < kw; ++kx) {
                    const std::size_t r = (static_cast<std::size_t>(c) * kh + ky) * kw + kx;
                    const float* src = col + r * ncols + static_cast<std::size_t>(n) * OH * OW;
                    for (int oh = 0; oh < OH; ++oh) {
                        const int ih = oh * stride - pad + ky;
                        if (ih < 0 || ih >= H) continue;
                        float* drow = plane + static_cast<std::size_t>(ih) * W;
                        const float* srow = src + static_cast<std::size_t>(oh) * OW;
                        for (int ow = 0; ow < OW; ++ow) {
                            const int iw = ow * stride - pad + kx;
                            if (iw >= 0 && iw < W) drow[iw] += srow[ow];
                        }
                    }
                }
        }
}

}  // namespace sglab::kernels
