#include "nvs/metrics.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "nvs/errors.hpp"

namespace nvs {

void SsimParams::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgumentError("SSIM window must be odd and >= 3");
  }
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw InvalidArgumentError("SSIM constants must be positive");
  }
  if (weighting == SsimWeighting::kGaussian && !(sigma > 0.0)) {
    throw InvalidArgumentError("SSIM gaussian sigma must be positive");
  }
}

SsimWeighting parse_ssim_weighting(std::string_view name) {
  if (name == "uniform") return SsimWeighting::kUniform;
  if (name == "gaussian") return SsimWeighting::kGaussian;
  throw InvalidArgumentError("unknown SSIM weighting '" + std::string(name) + "'");
}

std::string_view to_string(SsimWeighting w) {
  return w == SsimWeighting::kUniform ? "uniform" : "gaussian";
}

double l1_error(const Image& x, const Image& y, const std::optional<Mask>& mask) {
  if (!x.same_shape(y)) throw ShapeError("l1_error: images differ in shape");
  const auto a = x.data();
  const auto b = y.data();
  const int channels = x.channels();
  if (!mask) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
  }
  if (!x.same_extent(*mask)) throw ShapeError("l1_error: mask extent differs");
  const auto m = mask->data();
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (m[p] == 0.0) continue;
    double px = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = p * channels + c;
      px += std::abs(a[i] - b[i]);
    }
    sum += m[p] * px;
    weight += m[p];
  }
  if (weight == 0.0) throw InvalidArgumentError("l1_error: mask selects no pixels");
  return sum / (weight * channels);
}

namespace {

// Separable 1D weights; both supported weightings factor as an outer product.
std::vector<double> separable_weights(const SsimParams& params) {
  const int n = params.window;
  std::vector<double> g(n, 1.0 / n);
  if (params.weighting == SsimWeighting::kGaussian) {
    const int half = n / 2;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = i - half;
      g[i] = std::exp(-(d * d) / (2.0 * params.sigma * params.sigma));
      total += g[i];
    }
    for (double& v : g) v /= total;
  }
  return g;
}

// Weighted window sums of f(x, y) over valid positions; output is
// (w - n + 1) x (h - n + 1).
template <typename F>
std::vector<double> window_filter(const Image& x, const Image& y, int channel,
                                  const std::vector<double>& g, F f) {
  const int w = x.width();
  const int h = x.height();
  const int n = static_cast<int>(g.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> horiz(static_cast<std::size_t>(ow) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        acc += g[k] * f(x.at(c + k, r, channel), y.at(c + k, r, channel));
      }
      horiz[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        acc += g[k] * horiz[static_cast<std::size_t>(r + k) * ow + c];
      }
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<double> ssim_window_weights(const SsimParams& params) {
  params.validate();
  const std::vector<double> g = separable_weights(params);
  const std::size_t n = g.size();
  std::vector<double> w(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) w[r * n + c] = g[r] * g[c];
  }
  return w;
}

double ssim_channel(const Image& x, const Image& y, int channel,
                    const SsimParams& params) {
  params.validate();
  if (!x.same_shape(y)) throw ShapeError("ssim: images differ in shape");
  if (channel < 0 || channel >= x.channels()) {
    throw InvalidArgumentError("ssim: channel out of range");
  }
  if (x.width() < params.window || x.height() < params.window) {
    std::ostringstream msg;
    msg << "ssim: image " << x.width() << "x" << x.height()
        << " is smaller than the " << params.window << "x" << params.window
        << " window";
    throw ShapeError(msg.str());
  }
  const std::vector<double> g = separable_weights(params);
  const auto mx = window_filter(x, y, channel, g, [](double a, double) { return a; });
  const auto my = window_filter(x, y, channel, g, [](double, double b) { return b; });
  const auto mxx = window_filter(x, y, channel, g, [](double a, double) { return a * a; });
  const auto myy = window_filter(x, y, channel, g, [](double, double b) { return b * b; });
  const auto mxy = window_filter(x, y, channel, g, [](double a, double b) { return a * b; });

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double ux = mx[i];
    const double uy = my[i];
    const double vx = mxx[i] - ux * ux;
    const double vy = myy[i] - uy * uy;
    const double cxy = mxy[i] - ux * uy;
    total += ((2.0 * ux * uy + params.c1) * (2.0 * cxy + params.c2)) /
             ((ux * ux + uy * uy + params.c1) * (vx + vy + params.c2));
  }
  return total / static_cast<double>(mx.size());
}

double ssim(const Image& x, const Image& y, const SsimParams& params) {
  if (!x.same_shape(y)) throw ShapeError("ssim: images differ in shape");
  double sum = 0.0;
  for (int c = 0; c < x.channels(); ++c) sum += ssim_channel(x, y, c, params);
  return sum / x.channels();
}

double recon_loss(const Image& pred, const Image& warped, const Image& pixel,
                  const Image& tgt) {
  return l1_error(pred, tgt) + l1_error(warped, tgt) + l1_error(pixel, tgt);
}

double lsgan_loss(double score) {
  if (!std::isfinite(score)) {
    throw InvalidArgumentError("discriminator score must be finite");
  }
  const double d = 1.0 - score;
  return d * d;
}

double perceptual_loss(std::span<const double> f_tgt, std::span<const double> f_pixel) {
  if (f_tgt.size() != f_pixel.size()) {
    throw ShapeError("perceptual_loss: feature vectors differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < f_tgt.size(); ++i) {
    if (!std::isfinite(f_tgt[i]) || !std::isfinite(f_pixel[i])) {
      throw InvalidArgumentError("perceptual_loss: non-finite feature");
    }
    const double d = f_tgt[i] - f_pixel[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double total_loss(double recon, double lsgan, double vgg, const LossWeights& w) {
  if (!std::isfinite(recon) || !std::isfinite(lsgan) || !std::isfinite(vgg)) {
    throw InvalidArgumentError("total_loss: loss terms must be finite");
  }
  if (w.l1 < 0.0 || w.gan < 0.0 || w.vgg < 0.0) {
    throw InvalidArgumentError("total_loss: weights must be non-negative");
  }
  return w.l1 * recon + w.gan * lsgan + w.vgg * vgg;
}

}  // namespace nvs
