#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "nvs/raster.hpp"

namespace nvs {

enum class SsimWeighting { kUniform, kGaussian };

// Windowed SSIM settings. Defaults: 11x11 uniform window, c1 = 0.01^2,
// c2 = 0.03^2 for unit-range images. Gaussian weighting uses sigma.
struct SsimParams {
  int window = 11;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
  SsimWeighting weighting = SsimWeighting::kUniform;
  double sigma = 1.5;

  // Throws InvalidArgumentError when the window is even or < 3, a constant
  // is non-positive, or sigma is non-positive for gaussian weighting.
  void validate() const;
};

SsimWeighting parse_ssim_weighting(std::string_view name);
std::string_view to_string(SsimWeighting w);

// Mean absolute difference over all h*w*C values. With a mask, each pixel is
// weighted by its mask value and the result is normalized by sum(mask) * C;
// an all-zero mask throws InvalidArgumentError.
double l1_error(const Image& x, const Image& y,
                const std::optional<Mask>& mask = std::nullopt);

// Mean SSIM over all valid (unpadded, stride 1) window positions, averaged
// over channels. Throws ShapeError if the images differ or are smaller than
// the window.
double ssim(const Image& x, const Image& y, const SsimParams& params = {});

// SSIM of a single channel.
double ssim_channel(const Image& x, const Image& y, int channel,
                    const SsimParams& params = {});

// Normalized window weights, row-major window x window, summing to 1.
std::vector<double> ssim_window_weights(const SsimParams& params);

// Loss terms of the view-synthesis objective, evaluated on supplied values.
struct LossWeights {
  double l1 = 10.0;
  double gan = 2.0;
  double vgg = 0.5;
};

// l1(pred, tgt) + l1(warped, tgt) + l1(pixel, tgt).
double recon_loss(const Image& pred, const Image& warped, const Image& pixel,
                  const Image& tgt);

// (1 - score)^2 for a discriminator score.
double lsgan_loss(double score);

// Euclidean distance between two feature vectors. Throws ShapeError when the
// lengths differ and InvalidArgumentError on non-finite entries.
double perceptual_loss(std::span<const double> f_tgt, std::span<const double> f_pixel);

double total_loss(double recon, double lsgan, double vgg, const LossWeights& w = {});

}  // namespace nvs
