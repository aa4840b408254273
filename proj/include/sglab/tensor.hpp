#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sglab {

// Dense row-major float tensor. Activation tensors in the conv stack use the
// layout {C, N, H, W} (channel-major over the batch) so that conv-as-GEMM
// outputs land directly in the next layer's input layout; vector stages use
// {N, F}.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), 0.0f) {}
    Tensor(std::vector<int> s, float fill) : shape(std::move(s)), data(numel_of(shape), fill) {}

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    float* ptr() { return data.data(); }
    const float* ptr() const { return data.data(); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void zero() { std::fill(data.begin(), data.end(), 0.0f); }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::string out = "[";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(s[i]);
        }
        return out + "]";
    }
    std::string shape_str() const { return shape_str(shape); }
};

inline void check_shape(const Tensor& t, const std::vector<int>& expect, const char* where) {
    if (t.shape != expect)
        throw std::runtime_error(std::string(where) + ": expected shape " +
                                 Tensor::shape_str(expect) + ", got " + t.shape_str());
}

}  // namespace sglab
