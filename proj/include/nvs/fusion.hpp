#pragma once

#include <optional>
#include <string_view>

#include "nvs/raster.hpp"

namespace nvs {

// Ways to merge the warped (depth-branch) image with a pixel-branch image.
enum class FusionRule {
  kPredictedMask,  // (1 - m) * warped + m * pixel
  kAverage,        // 0.5 * warped + 0.5 * pixel
  kVisibilityMask, // vis * warped + (1 - vis) * pixel
};

std::string_view to_string(FusionRule rule);
// Accepts "predicted-mask", "average", "visibility-mask". Throws
// InvalidArgumentError otherwise.
FusionRule parse_fusion_rule(std::string_view name);

// Mask weight 1 selects the pixel-branch image.
Image fuse_predicted_mask(const Image& warped, const Image& pixel, const Mask& m);

Image fuse_average(const Image& warped, const Image& pixel);

// Mask weight 1 selects the warped image. Note the polarity is opposite to
// fuse_predicted_mask.
Image fuse_visibility(const Image& warped, const Image& pixel,
                      const VisibilityMask& vis);

// Dispatches on `rule`; kAverage ignores the mask, the others require it.
Image fuse(FusionRule rule, const Image& warped, const Image& pixel,
           const std::optional<Mask>& mask);

}  // namespace nvs
