#include "nvs/warping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvs/errors.hpp"

namespace nvs {

namespace {

struct Footprint {
  int x0, y0;
  double fx, fy;  // fractional offsets in [0,1)
};

Footprint footprint_of(const PixelCoord& at) {
  const double xf = std::floor(at.u);
  const double yf = std::floor(at.v);
  return {static_cast<int>(xf), static_cast<int>(yf), at.u - xf, at.v - yf};
}

// Pixel value with zero outside the image.
double tap(const Image& img, int x, int y, int c) {
  return img.contains(x, y) ? img.at(x, y, c) : 0.0;
}

}  // namespace

bool footprint_intersects(const Image& img, const PixelCoord& at) {
  return at.u > -1.0 && at.u < static_cast<double>(img.width()) && at.v > -1.0 &&
         at.v < static_cast<double>(img.height());
}

void bilinear_sample(const Image& img, const PixelCoord& at, std::span<double> out) {
  const int channels = img.channels();
  if (static_cast<int>(out.size()) < channels) {
    throw ShapeError("bilinear_sample output span too small");
  }
  if (!footprint_intersects(img, at)) {
    std::fill(out.begin(), out.begin() + channels, 0.0);
    return;
  }
  const Footprint f = footprint_of(at);
  const double w00 = (1.0 - f.fx) * (1.0 - f.fy);
  const double w10 = f.fx * (1.0 - f.fy);
  const double w01 = (1.0 - f.fx) * f.fy;
  const double w11 = f.fx * f.fy;
  for (int c = 0; c < channels; ++c) {
    out[c] = w00 * tap(img, f.x0, f.y0, c) + w10 * tap(img, f.x0 + 1, f.y0, c) +
             w01 * tap(img, f.x0, f.y0 + 1, c) +
             w11 * tap(img, f.x0 + 1, f.y0 + 1, c);
  }
}

std::vector<double> bilinear_sample(const Image& img, const PixelCoord& at) {
  std::vector<double> out(static_cast<std::size_t>(img.channels()));
  bilinear_sample(img, at, out);
  return out;
}

SampleGradient bilinear_sample_gradient(const Image& img, const PixelCoord& at) {
  const auto channels = static_cast<std::size_t>(img.channels());
  SampleGradient g{std::vector<double>(channels, 0.0),
                   std::vector<double>(channels, 0.0),
                   std::vector<double>(channels, 0.0)};
  if (!footprint_intersects(img, at)) return g;
  const Footprint f = footprint_of(at);
  for (int c = 0; c < img.channels(); ++c) {
    const double i00 = tap(img, f.x0, f.y0, c);
    const double i10 = tap(img, f.x0 + 1, f.y0, c);
    const double i01 = tap(img, f.x0, f.y0 + 1, c);
    const double i11 = tap(img, f.x0 + 1, f.y0 + 1, c);
    g.value[c] = (1.0 - f.fx) * (1.0 - f.fy) * i00 + f.fx * (1.0 - f.fy) * i10 +
                 (1.0 - f.fx) * f.fy * i01 + f.fx * f.fy * i11;
    g.d_du[c] = (1.0 - f.fy) * (i10 - i00) + f.fy * (i11 - i01);
    g.d_dv[c] = (1.0 - f.fx) * (i01 - i00) + f.fx * (i11 - i10);
  }
  return g;
}

WarpResult inverse_warp(const Image& src, const DepthMap& tgt_depth,
                        const Pose& tgt_to_src, const Intrinsics& K) {
  if (!src.same_extent(tgt_depth)) {
    throw ShapeError("inverse_warp: source image and target depth differ in size");
  }
  const int w = src.width();
  const int h = src.height();
  const int channels = src.channels();
  std::vector<double> color(src.size(), 0.0);
  std::vector<double> mask(src.pixel_count(), 0.0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = tgt_depth.depth(x, y);
      if (!(d > 0.0)) continue;
      const Point3 in_src = transform_point(
          backproject({static_cast<double>(x), static_cast<double>(y)}, d, K),
          tgt_to_src);
      if (!(in_src.z() > 0.0)) continue;
      const PixelCoord at = project(in_src, K);
      if (!footprint_intersects(src, at)) continue;
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      bilinear_sample(src, at,
                      std::span<double>(color).subspan(p * channels, channels));
      mask[p] = 1.0;
    }
  }
  // Clamp guards against round-off pushing a convex combination past 1.
  for (double& v : color) v = std::clamp(v, 0.0, 1.0);
  return {Image(w, h, channels, std::move(color)), Mask(w, h, std::move(mask))};
}

DepthWarpResult forward_warp_depth(const DepthMap& src_depth, const Pose& src_to_tgt,
                                   const Intrinsics& K) {
  const int w = src_depth.width();
  const int h = src_depth.height();
  std::vector<double> zbuf(src_depth.pixel_count(), 0.0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = src_depth.depth(x, y);
      if (!(d > 0.0)) continue;
      const Point3 in_tgt = transform_point(
          backproject({static_cast<double>(x), static_cast<double>(y)}, d, K),
          src_to_tgt);
      if (!(in_tgt.z() > 0.0)) continue;
      const PixelCoord at = project(in_tgt, K);
      const double xr = std::floor(at.u + 0.5);
      const double yr = std::floor(at.v + 0.5);
      if (!(xr >= 0.0 && yr >= 0.0 && xr < w && yr < h)) continue;
      const std::size_t p =
          static_cast<std::size_t>(yr) * w + static_cast<std::size_t>(xr);
      double& slot = zbuf[p];
      if (slot == 0.0 || in_tgt.z() < slot) slot = in_tgt.z();
    }
  }
  std::vector<double> mask(zbuf.size());
  std::transform(zbuf.begin(), zbuf.end(), mask.begin(),
                 [](double z) { return z > 0.0 ? 1.0 : 0.0; });
  return {DepthMap(w, h, std::move(zbuf)), Mask(w, h, std::move(mask))};
}

SourceWarpResult warp_from_source_depth(const Image& src, const DepthMap& src_depth,
                                        const Pose& src_to_tgt,
                                        const Intrinsics& K) {
  if (!src.same_extent(src_depth)) {
    throw ShapeError(
        "warp_from_source_depth: source image and depth differ in size");
  }
  DepthWarpResult fwd = forward_warp_depth(src_depth, src_to_tgt, K);
  WarpResult inv = inverse_warp(src, fwd.depth, invert(src_to_tgt), K);
  return {std::move(inv.image), std::move(fwd.depth), std::move(fwd.mask)};
}

namespace {

// Separable max/min filter over a (2r+1)^2 square restricted to the grid.
std::vector<double> square_filter(const std::vector<double>& in, int w, int h, int r,
                                  bool take_max) {
  auto pick = [take_max](double a, double b) {
    return take_max ? std::max(a, b) : std::min(a, b);
  };
  std::vector<double> rows(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = in[static_cast<std::size_t>(y) * w + x];
      for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
        acc = pick(acc, in[static_cast<std::size_t>(y) * w + xx]);
      }
      rows[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  std::vector<double> out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = rows[static_cast<std::size_t>(y) * w + x];
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        acc = pick(acc, rows[static_cast<std::size_t>(yy) * w + x]);
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

VisibilityMask densify_mask(const VisibilityMask& mask, int radius) {
  if (radius < 0) throw InvalidArgumentError("densify radius must be >= 0");
  if (!mask.is_binary()) {
    throw InvalidArgumentError("densify_mask expects a binary mask");
  }
  const int w = mask.width();
  const int h = mask.height();
  std::vector<double> data(mask.data().begin(), mask.data().end());
  if (radius == 0) return Mask(w, h, std::move(data));
  const std::vector<double> dilated = square_filter(data, w, h, radius, true);
  return Mask(w, h, square_filter(dilated, w, h, radius, false));
}

}  // namespace nvs
