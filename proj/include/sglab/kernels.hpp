#pragma once

namespace sglab::kernels {

// GEMM variants over row-major float buffers. The OpenMP versions partition
// work over independent output blocks and keep a fixed per-element
// accumulation order, so results are bitwise identical for any thread count.
//
// C[M x N] = A[M x K] * B[K x N]            (+ C if accumulate)
void gemm_nn(int M, int K, int N, const float* A, const float* B, float* C,
             bool accumulate = false);
// C[M x N] = A[M x K] * B[N x K]^T          (+ C if accumulate)
void gemm_nt(int M, int K, int N, const float* A, const float* B, float* C,
             bool accumulate = false);
// C[M x N] = A[P x M]^T * B[P x N]          (+ C if accumulate)
void gemm_tn(int P, int M, int N, const float* A, const float* B, float* C,
             bool accumulate = false);

// Naive single-threaded references. These are the correctness oracles for the
// parallel kernels and the baseline side of the benchmark.
void gemm_nn_ref(int M, int K, int N, const float* A, const float* B, float* C,
                 bool accumulate = false);
void gemm_nt_ref(int M, int K, int N, const float* A, const float* B, float* C,
                 bool accumulate = false);
void gemm_tn_ref(int P, int M, int N, const float* A, const float* B, float* C,
                 bool accumulate = false);

int conv_out_dim(int in, int k, int stride, int pad);

// im2col/col2im for activations stored as [C, N, H, W].
// col row index r = c*kh*kw + ky*kw + kx, column index q = n*OH*OW + oh*OW + ow.
void im2col(const float* x, int C, int N, int H, int W, int kh, int kw, int stride,
            int pad, float* col);
// Accumulates into dx; caller zeroes dx first.
void col2im(const float* col, int C, int N, int H, int W, int kh, int kw, int stride,
            int pad, float* dx);

void im2col_ref(const float* x, int C, int N, int H, int W, int kh, int kw, int stride,
                int pad, float* col);
void col2im_ref(const float* col, int C, int N, int H, int W, int kh, int kw, int stride,
                int pad, float* dx);

}  // namespace sglab::kernels
