#include "sglab/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace sglab {

AugParams sample_aug_params(Rng& rng) {
    AugParams p;
    p.crop_scale = rng.uniformf(0.8f, 1.0f);
    p.crop_ratio = rng.uniformf(0.9f, 1.1f);
    p.crop_offset_row = static_cast<float>(rng.uniform());
    p.crop_offset_col = static_cast<float>(rng.uniform());
    p.brightness_delta = rng.uniformf(-0.2f, 0.2f);
    p.contrast_factor = rng.uniformf(0.8f, 1.2f);
    p.saturation_factor = rng.uniformf(0.8f, 1.2f);
    p.hue_delta = rng.uniformf(-0.1f, 0.1f);
    return p;
}

namespace {

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

// Uniform over the dim - crop + 1 in-bounds placements.
inline int placement(float frac, int dim, int crop) {
    const int slots = dim - crop + 1;
    int s = static_cast<int>(frac * static_cast<float>(slots));
    if (s >= slots) s = slots - 1;
    return s;
}

ImageF resized_crop(const ImageF& im, const AugParams& p) {
    const int H = im.h, W = im.w;
    const float sr = std::sqrt(p.crop_scale / p.crop_ratio);
    const float sc = std::sqrt(p.crop_scale * p.crop_ratio);
    const int ch = std::clamp(static_cast<int>(std::lround(H * sr)), 1, H);
    const int cw = std::clamp(static_cast<int>(std::lround(W * sc)), 1, W);
    const int top = placement(p.crop_offset_row, H, ch);
    const int left = placement(p.crop_offset_col, W, cw);

    ImageF out(H, W);
    // corner-aligned sampling grid over the crop window
    const float ystep = H > 1 ? static_cast<float>(ch - 1) / static_cast<float>(H - 1) : 0.0f;
    const float xstep = W > 1 ? static_cast<float>(cw - 1) / static_cast<float>(W - 1) : 0.0f;
    for (int y = 0; y < H; ++y) {
        const float fy = top + y * ystep;
        int y0 = static_cast<int>(fy);
        if (y0 > H - 2) y0 = H - 2;
        const float wy = fy - static_cast<float>(y0);
        for (int x = 0; x < W; ++x) {
            const float fx = left + x * xstep;
            int x0 = static_cast<int>(fx);
            if (x0 > W - 2) x0 = W - 2;
            const float wx = fx - static_cast<float>(x0);
            const float* p00 = im.at(y0, x0);
            const float* p01 = im.at(y0, x0 + 1);
            const float* p10 = im.at(y0 + 1, x0);
            const float* p11 = im.at(y0 + 1, x0 + 1);
            float* o = out.at(y, x);
            for (int c = 0; c < 3; ++c) {
                const float a = p00[c] + wx * (p01[c] - p00[c]);
                const float b = p10[c] + wx * (p11[c] - p10[c]);
                o[c] = a + wy * (b - a);
            }
        }
    }
    return out;
}

}  // namespace

ImageF apply_aug(const ImageF& image, const AugParams& params) {
    for (float v : image.px)
        if (!std::isfinite(v)) throw std::runtime_error("apply_aug: non-finite pixel value");

    ImageF im = resized_crop(image, params);

    // brightness
    for (auto& v : im.px) v = clamp01(v + params.brightness_delta);

    // contrast about the mean luma
    double lsum = 0.0;
    const std::size_t npx = im.px.size() / 3;
    for (std::size_t i = 0; i < npx; ++i) lsum += luma(im.px.data() + i * 3);
    const float lbar = static_cast<float>(lsum / static_cast<double>(npx));
    for (auto& v : im.px) v = clamp01(lbar + params.contrast_factor * (v - lbar));

    // saturation about the per-pixel gray value
    for (std::size_t i = 0; i < npx; ++i) {
        float* p = im.px.data() + i * 3;
        const float g = luma(p);
        for (int c = 0; c < 3; ++c) p[c] = clamp01(g + params.saturation_factor * (p[c] - g));
    }

    // hue rotation in HSV; hue_delta is in half-turns, H spans a full turn
    if (params.hue_delta != 0.0f) {
        const float shift = params.hue_delta * 0.5f;
        for (std::size_t i = 0; i < npx; ++i) {
            float* p = im.px.data() + i * 3;
            float hsv[3];
            rgb_to_hsv(p, hsv);
            hsv[0] += shift;
            hsv[0] -= std::floor(hsv[0]);
            hsv_to_rgb(hsv, p);
            for (int c = 0; c < 3; ++c) p[c] = clamp01(p[c]);
        }
    }
    return im;
}

std::pair<ImageF, ImageF> augment_pair(const ImageF& s, const ImageF& g, AugMode mode,
                                       Rng& rng) {
    if (mode == AugMode::Synchronized) {
        const AugParams p = sample_aug_params(rng);
        return {apply_aug(s, p), apply_aug(g, p)};
    }
    const AugParams ps = sample_aug_params(rng);
    const AugParams pg = sample_aug_params(rng);
    return {apply_aug(s, ps), apply_aug(g, pg)};
}

}  // namespace sglab
