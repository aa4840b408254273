#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <omp.h>

#include <vector>

#include "sglab/kernels.hpp"
#include "sglab/rng.hpp"

using namespace sglab;

namespace {

std::vector<float> random_vec(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = rng.uniformf(-1.0f, 1.0f);
    return v;
}

void expect_close(const std::vector<float>& a, const std::vector<float>& b, float tol) {
    REQUIRE(a.size() == b.size());
    float worst = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float denom = std::max({std::abs(a[i]), std::abs(b[i]), 1.0f});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    CHECK(worst < tol);
}

}  // namespace

TEST_CASE("gemm_nn matches the serial reference on random shapes") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int M = 1 + static_cast<int>(rng.uniform_int(0, 70));
        const int K = 1 + static_cast<int>(rng.uniform_int(0, 90));
        const int N = 1 + static_cast<int>(rng.uniform_int(0, 500));
        auto A = random_vec(static_cast<std::size_t>(M) * K, rng);
        auto B = random_vec(static_cast<std::size_t>(K) * N, rng);
        std::vector<float> C1(static_cast<std::size_t>(M) * N, 0.5f);
        std::vector<float> C2 = C1;
        const bool acc = trial % 2 == 0;
        kernels::gemm_nn_ref(M, K, N, A.data(), B.data(), C1.data(), acc);
        kernels::gemm_nn(M, K, N, A.data(), B.data(), C2.data(), acc);
        expect_close(C1, C2, 1e-5f);
    }
}

TEST_CASE("gemm_nt matches the serial reference") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const int M = 1 + static_cast<int>(rng.uniform_int(0, 60));
        const int K = 1 + static_cast<int>(rng.uniform_int(0, 3000));
        const int N = 1 + static_cast<int>(rng.uniform_int(0, 60));
        auto A = random_vec(static_cast<std::size_t>(M) * K, rng);
        auto B = random_vec(static_cast<std::size_t>(N) * K, rng);
        std::vector<float> C1(static_cast<std::size_t>(M) * N, -0.25f);
        std::vector<float> C2 = C1;
        const bool acc = trial % 2 == 1;
        kernels::gemm_nt_ref(M, K, N, A.data(), B.data(), C1.data(), acc);
        kernels::gemm_nt(M, K, N, A.data(), B.data(), C2.data(), acc);
        expect_close(C1, C2, 1e-4f);
    }
}

TEST_CASE("gemm_tn matches the serial reference") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int P = 1 + static_cast<int>(rng.uniform_int(0, 200));
        const int M = 1 + static_cast<int>(rng.uniform_int(0, 60));
        const int N = 1 + static_cast<int>(rng.uniform_int(0, 500));
        auto A = random_vec(static_cast<std::size_t>(P) * M, rng);
        auto B = random_vec(static_cast<std::size_t>(P) * N, rng);
        std::vector<float> C1(static_cast<std::size_t>(M) * N, 1.0f);
        std::vector<float> C2 = C1;
        kernels::gemm_tn_ref(P, M, N, A.data(), B.data(), C1.data(), true);
        kernels::gemm_tn(P, M, N, A.data(), B.data(), C2.data(), true);
        expect_close(C1, C2, 1e-5f);
    }
}

TEST_CASE("parallel gemm is bitwise stable across thread counts") {
    Rng rng(14);
    const int M = 48, K = 384, N = 700;
    auto A = random_vec(static_cast<std::size_t>(M) * K, rng);
    auto B = random_vec(static_cast<std::size_t>(K) * N, rng);
    std::vector<float> C1(static_cast<std::size_t>(M) * N, 0.0f), C2 = C1, D1 = C1, D2 = C1;

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    kernels::gemm_nn(M, K, N, A.data(), B.data(), C1.data());
    kernels::gemm_nt(M, K, N, A.data(), B.data(), D1.data());
    omp_set_num_threads(saved > 1 ? saved : 2);
    kernels::gemm_nn(M, K, N, A.data(), B.data(), C2.data());
    kernels::gemm_nt(M, K, N, A.data(), B.data(), D2.data());
    omp_set_num_threads(saved);

    CHECK(C1 == C2);
    CHECK(D1 == D2);
}

TEST_CASE("im2col/col2im match their references") {
    Rng rng(15);
    for (const auto& [C, N, H, W, stride, pad] :
         {std::tuple{3, 4, 32, 32, 2, 1}, std::tuple{16, 2, 16, 16, 2, 1},
          std::tuple{2, 3, 5, 5, 1, 0}}) {
        auto x = random_vec(static_cast<std::size_t>(C) * N * H * W, rng);
        const int OH = kernels::conv_out_dim(H, 3, stride, pad);
        const int OW = kernels::conv_out_dim(W, 3, stride, pad);
        const std::size_t colsz = static_cast<std::size_t>(C) * 9 * N * OH * OW;
        std::vector<float> col1(colsz), col2(colsz);
        kernels::im2col_ref(x.data(), C, N, H, W, 3, 3, stride, pad, col1.data());
        kernels::im2col(x.data(), C, N, H, W, 3, 3, stride, pad, col2.data());
        CHECK(col1 == col2);

        auto dcol = random_vec(colsz, rng);
        std::vector<float> dx1(x.size(), 0.0f), dx2(x.size(), 0.0f);
        kernels::col2im_ref(dcol.data(), C, N, H, W, 3, 3, stride, pad, dx1.data());
        kernels::col2im(dcol.data(), C, N, H, W, 3, 3, stride, pad, dx2.data());
        CHECK(dx1 == dx2);
    }
}

TEST_CASE("conv output dims for the encoder chain") {
    CHECK(kernels::conv_out_dim(32, 3, 2, 1) == 16);
    CHECK(kernels::conv_out_dim(16, 3, 2, 1) == 8);
    CHECK(kernels::conv_out_dim(8, 3, 2, 1) == 4);
    CHECK(kernels::conv_out_dim(4, 3, 2, 1) == 2);
    CHECK(kernels::conv_out_dim(5, 3, 1, 0) == 3);
}
