#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace sglab {

// Images are HWC RGB. Float images hold values in [0,1]; byte images are the
// storage format (value = round(255 * v)).
struct ImageF {
    int h = 0, w = 0;
    std::vector<float> px;  // h*w*3

    ImageF() = default;
    ImageF(int h_, int w_) : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_ * 3, 0.0f) {}

    float* at(int y, int x) { return px.data() + (static_cast<std::size_t>(y) * w + x) * 3; }
    const float* at(int y, int x) const {
        return px.data() + (static_cast<std::size_t>(y) * w + x) * 3;
    }
};

struct Image8 {
    int h = 0, w = 0;
    std::vector<std::uint8_t> px;  // h*w*3

    Image8() = default;
    Image8(int h_, int w_) : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_ * 3, 0) {}
};

inline Image8 quantize(const ImageF& im) {
    Image8 out(im.h, im.w);
    for (std::size_t i = 0; i < im.px.size(); ++i) {
        const float v = std::clamp(im.px[i], 0.0f, 1.0f);
        out.px[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    return out;
}

inline ImageF dequantize(const Image8& im) {
    ImageF out(im.h, im.w);
    for (std::size_t i = 0; i < im.px.size(); ++i)
        out.px[i] = static_cast<float>(im.px[i]) * (1.0f / 255.0f);
    return out;
}

// ITU-R BT.601 luma.
inline float luma(const float* rgb) {
    return 0.299f * rgb[0] + 0.587f * rgb[1] + 0.114f * rgb[2];
}

// Standard RGB <-> HSV with h in [0,1) (full turn).
inline void rgb_to_hsv(const float* rgb, float* hsv) {
    const float r = rgb[0], g = rgb[1], b = rgb[2];
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float d = mx - mn;
    float h = 0.0f;
    if (d > 0.0f) {
        if (mx == r)
            h = (g - b) / d;
        else if (mx == g)
            h = 2.0f + (b - r) / d;
        else
            h = 4.0f + (r - g) / d;
        h /= 6.0f;
        if (h < 0.0f) h += 1.0f;
    }
    hsv[0] = h;
    hsv[1] = mx > 0.0f ? d / mx : 0.0f;
    hsv[2] = mx;
}

inline void hsv_to_rgb(const float* hsv, float* rgb) {
    const float h = hsv[0] * 6.0f, s = hsv[1], v = hsv[2];
    const int i = static_cast<int>(std::floor(h)) % 6;
    const float f = h - std::floor(h);
    const float p = v * (1.0f - s);
    const float q = v * (1.0f - s * f);
    const float t = v * (1.0f - s * (1.0f - f));
    switch (i) {
        case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
        case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
        case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
        case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
        case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
        default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
    }
}

}  // namespace sglab
