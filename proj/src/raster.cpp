#include "nvs/raster.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvs/errors.hpp"

namespace nvs {

namespace {

std::string shape_string(int w, int h, int c) {
  std::ostringstream s;
  s << w << "x" << h << "x" << c;
  return s.str();
}

template <typename Pred>
void require_all(const std::vector<double>& data, Pred pred, const char* what) {
  for (const double v : data) {
    if (!pred(v)) {
      std::ostringstream msg;
      msg << what << " (found " << v << ")";
      throw InvalidArgumentError(msg.str());
    }
  }
}

std::vector<double> crop_data(const Raster& r, const CropWindow& w) {
  if (w.side <= 0 || w.x0 < 0 || w.y0 < 0 || w.x0 + w.side > r.width() ||
      w.y0 + w.side > r.height()) {
    throw ShapeError("crop window exceeds raster bounds");
  }
  const int c = r.channels();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w.side) * w.side * c);
  for (int y = w.y0; y < w.y0 + w.side; ++y) {
    for (int x = w.x0; x < w.x0 + w.side; ++x) {
      for (int k = 0; k < c; ++k) out.push_back(r.at(x, y, k));
    }
  }
  return out;
}

}  // namespace

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw ShapeError("raster dimensions must be positive, got " +
                     shape_string(width, height, channels));
  }
  const std::size_t expected = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  if (data_.size() != expected) {
    std::ostringstream msg;
    msg << "raster " << shape_string(width, height, channels) << " needs "
        << expected << " values, got " << data_.size();
    throw ShapeError(msg.str());
  }
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : Raster(width, height, channels, std::move(data)) {
  if (channels != 1 && channels != 3) {
    throw ShapeError("images must have 1 or 3 channels");
  }
  require_all(
      data_, [](double v) { return v >= 0.0 && v <= 1.0; },
      "image values must lie in [0,1]");
}

Image Image::Filled(int width, int height, int channels, double value) {
  return Image(width, height, channels,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                       std::max(height, 0) * std::max(channels, 0),
                                   value));
}

DepthMap::DepthMap(int width, int height, std::vector<double> data)
    : Raster(width, height, 1, std::move(data)) {
  require_all(
      data_, [](double v) { return std::isfinite(v) && v >= 0.0; },
      "depths must be finite and non-negative");
}

DepthMap DepthMap::Filled(int width, int height, double value) {
  return DepthMap(width, height,
                  std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                          std::max(height, 0),
                                      value));
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v > 0.0; }));
}

Mask::Mask(int width, int height, std::vector<double> data)
    : Raster(width, height, 1, std::move(data)) {
  require_all(
      data_, [](double v) { return v >= 0.0 && v <= 1.0; },
      "mask weights must lie in [0,1]");
}

Mask Mask::Filled(int width, int height, double value) {
  return Mask(width, height,
              std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                      std::max(height, 0),
                                  value));
}

bool Mask::is_binary() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

std::size_t Mask::count_set() const {
  return static_cast<std::size_t>(
      std::count(data_.begin(), data_.end(), 1.0));
}

double Mask::sum() const {
  double s = 0.0;
  for (const double v : data_) s += v;
  return s;
}

CropWindow center_crop_window(int width, int height, int side) {
  if (side <= 0) throw InvalidArgumentError("crop side must be positive");
  if (width < side || height < side) {
    std::ostringstream msg;
    msg << "cannot crop " << width << "x" << height << " to " << side;
    throw ShapeError(msg.str());
  }
  return {(width - side) / 2, (height - side) / 2, side};
}

Image crop(const Image& img, const CropWindow& w) {
  return Image(w.side, w.side, img.channels(), crop_data(img, w));
}

DepthMap crop(const DepthMap& depth, const CropWindow& w) {
  return DepthMap(w.side, w.side, crop_data(depth, w));
}

Mask crop(const Mask& mask, const CropWindow& w) {
  return Mask(w.side, w.side, crop_data(mask, w));
}

}  // namespace nvs
