// Times the OpenMP kernels against their serial references on the GEMM and
// im2col shapes this workload actually produces (conv blocks at batch 256).
#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "sglab/kernels.hpp"
#include "sglab/rng.hpp"

using namespace sglab;

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void fill(std::vector<float>& v, Rng& rng) {
    for (auto& x : v) x = rng.uniformf(-0.5f, 0.5f);
}

template <typename F>
double time_call(F&& f, double budget_sec = 0.6) {
    f();  // warmup
    int reps = 0;
    const double t0 = now();
    do {
        f();
        ++reps;
    } while (now() - t0 < budget_sec);
    return (now() - t0) / reps;
}

void bench_gemm(const char* tag, int M, int K, int N) {
    Rng rng(1234);
    std::vector<float> A(static_cast<std::size_t>(M) * K);
    std::vector<float> B(static_cast<std::size_t>(K) * N);
    std::vector<float> C(static_cast<std::size_t>(M) * N);
    fill(A, rng);
    fill(B, rng);
    const double flops = 2.0 * M * K * N;

    const double ts = time_call([&] { kernels::gemm_nn_ref(M, K, N, A.data(), B.data(), C.data()); });
    const double tp = time_call([&] { kernels::gemm_nn(M, K, N, A.data(), B.data(), C.data()); });
    std::printf("%-18s M=%-4d K=%-4d N=%-6d  serial %7.2f GF/s  omp %7.2f GF/s  speedup %4.1fx\n",
                tag, M, K, N, flops / ts / 1e9, flops / tp / 1e9, ts / tp);
}

void bench_im2col(const char* tag, int C, int N, int H, int W) {
    Rng rng(99);
    std::vector<float> x(static_cast<std::size_t>(C) * N * H * W);
    fill(x, rng);
    const int OH = kernels::conv_out_dim(H, 3, 2, 1);
    const int OW = kernels::conv_out_dim(W, 3, 2, 1);
    std::vector<float> col(static_cast<std::size_t>(C) * 9 * N * OH * OW);

    const double ts =
        time_call([&] { kernels::im2col_ref(x.data(), C, N, H, W, 3, 3, 2, 1, col.data()); });
    const double tp =
        time_call([&] { kernels::im2col(x.data(), C, N, H, W, 3, 3, 2, 1, col.data()); });
    std::printf("%-18s C=%-3d N=%-4d H=W=%-3d       serial %7.2f ms    omp %7.2f ms    speedup %4.1fx\n",
                tag, C, N, H, ts * 1e3, tp * 1e3, ts / tp);
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());

    // conv-as-GEMM forward shapes for the 4-block encoder at batch 256
    bench_gemm("conv1 fwd", 16, 27, 256 * 256);
    bench_gemm("conv2 fwd", 32, 144, 256 * 64);
    bench_gemm("conv3 fwd", 64, 288, 256 * 16);
    bench_gemm("conv4 fwd", 64, 576, 256 * 4);
    // head layers
    bench_gemm("head 128->256", 256, 128, 256);
    bench_gemm("head 256->256", 256, 256, 256);
    std::printf("\n");
    bench_im2col("im2col conv1", 3, 256, 32, 32);
    bench_im2col("im2col conv2", 16, 256, 16, 16);
    return 0;
}
