#pragma once

#include "sglab/image.hpp"
#include "sglab/rng.hpp"

namespace sglab {

// One realization of the augmentation pipeline parameters. All fields are
// sampled uniformly from their intervals:
//   crop_scale in [0.8, 1.0], crop_ratio in [0.9, 1.1],
//   crop_offset fractions in [0, 1),
//   brightness_delta in [-0.2, 0.2], contrast_factor in [0.8, 1.2],
//   saturation_factor in [0.8, 1.2], hue_delta in [-0.1, 0.1] (half-turns).
struct AugParams {
    float crop_scale = 1.0f;
    float crop_ratio = 1.0f;
    float crop_offset_row = 0.5f;
    float crop_offset_col = 0.5f;
    float brightness_delta = 0.0f;
    float contrast_factor = 1.0f;
    float saturation_factor = 1.0f;
    float hue_delta = 0.0f;

    bool operator==(const AugParams&) const = default;

    static AugParams identity() { return AugParams{}; }
};

enum class AugMode { Synchronized, Desynchronized };

// Consumes exactly 8 uniform draws in field declaration order.
AugParams sample_aug_params(Rng& rng);

// Pipeline order: resized crop, brightness, contrast, saturation, hue;
// output clamped to [0,1] after each color stage.
//   crop:       crop_h = clamp(round(H*sqrt(scale/ratio)), 1, H),
//               crop_w = clamp(round(W*sqrt(scale*ratio)), 1, W),
//               top/left uniform over in-bounds placements via the offset
//               fractions; bilinear resize back to H x W on a corner-aligned
//               grid.
//   brightness: v + delta
//   contrast:   Lbar + factor*(v - Lbar), Lbar = mean BT.601 luma of the image
//   saturation: gray + factor*(v - gray), gray = per-pixel BT.601 luma
//   hue:        HSV hue rotated by hue_delta half-turns (skipped when the
//               delta is exactly zero)
ImageF apply_aug(const ImageF& image, const AugParams& params);

// Synchronized: one parameter draw applied to both images (8 rng draws).
// Desynchronized: independent draws for s and g in that order (16 rng draws).
std::pair<ImageF, ImageF> augment_pair(const ImageF& s, const ImageF& g, AugMode mode,
                                       Rng& rng);

}  // namespace sglab
