#include "nvs/fusion.hpp"

#include <algorithm>
#include <string>

#include "nvs/errors.hpp"

namespace nvs {

namespace {

void require_same(const Image& warped, const Image& pixel) {
  if (!warped.same_shape(pixel)) {
    throw ShapeError("fusion inputs must have identical shape");
  }
}

void require_mask_extent(const Image& img, const Mask& m) {
  if (!img.same_extent(m)) {
    throw ShapeError("fusion mask extent differs from the images");
  }
}

// Per pixel: w_warped(m) * warped + w_pixel(m) * pixel, clamped to the
// interval spanned by the two inputs.
template <typename Weights>
Image blend(const Image& warped, const Image& pixel, const Mask* mask,
            Weights weights) {
  const int channels = warped.channels();
  std::vector<double> out(warped.size());
  const auto a = warped.data();
  const auto b = pixel.data();
  for (std::size_t p = 0; p < warped.pixel_count(); ++p) {
    const double m = mask != nullptr ? mask->data()[p] : 0.0;
    const auto [wa, wb] = weights(m);
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = p * channels + c;
      const double v = wa * a[i] + wb * b[i];
      out[i] = std::clamp(v, std::min(a[i], b[i]), std::max(a[i], b[i]));
    }
  }
  return Image(warped.width(), warped.height(), channels, std::move(out));
}

struct WeightPair {
  double warped;
  double pixel;
};

}  // namespace

std::string_view to_string(FusionRule rule) {
  switch (rule) {
    case FusionRule::kPredictedMask:
      return "predicted-mask";
    case FusionRule::kAverage:
      return "average";
    case FusionRule::kVisibilityMask:
      return "visibility-mask";
  }
  return "unknown";
}

FusionRule parse_fusion_rule(std::string_view name) {
  if (name == "predicted-mask") return FusionRule::kPredictedMask;
  if (name == "average") return FusionRule::kAverage;
  if (name == "visibility-mask") return FusionRule::kVisibilityMask;
  throw InvalidArgumentError("unknown fusion rule '" + std::string(name) + "'");
}

Image fuse_predicted_mask(const Image& warped, const Image& pixel, const Mask& m) {
  require_same(warped, pixel);
  require_mask_extent(warped, m);
  return blend(warped, pixel, &m,
               [](double w) { return WeightPair{1.0 - w, w}; });
}

Image fuse_average(const Image& warped, const Image& pixel) {
  require_same(warped, pixel);
  return blend(warped, pixel, nullptr,
               [](double) { return WeightPair{0.5, 0.5}; });
}

Image fuse_visibility(const Image& warped, const Image& pixel,
                      const VisibilityMask& vis) {
  require_same(warped, pixel);
  require_mask_extent(warped, vis);
  return blend(warped, pixel, &vis,
               [](double w) { return WeightPair{w, 1.0 - w}; });
}

Image fuse(FusionRule rule, const Image& warped, const Image& pixel,
           const std::optional<Mask>& mask) {
  switch (rule) {
    case FusionRule::kAverage:
      return fuse_average(warped, pixel);
    case FusionRule::kPredictedMask:
    case FusionRule::kVisibilityMask:
      if (!mask) {
        throw InvalidArgumentError(std::string(to_string(rule)) +
                                   " fusion requires a mask");
      }
      return rule == FusionRule::kPredictedMask
                 ? fuse_predicted_mask(warped, pixel, *mask)
                 : fuse_visibility(warped, pixel, *mask);
  }
  throw InvalidArgumentError("unknown fusion rule");
}

}  // namespace nvs
