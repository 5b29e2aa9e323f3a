#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nvs {

// Row-major, channel-interleaved grid of doubles. Derived types enforce their
// own value-range invariants at construction; the base only checks shape.
class Raster {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const { return data_.size(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<const double> data() const { return data_; }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  bool same_extent(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const Raster&) const = default;

 protected:
  Raster(int width, int height, int channels, std::vector<double> data);

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  int channels_;
  std::vector<double> data_;
};

// Color or gray image, 1 or 3 channels, values in [0,1].
class Image : public Raster {
 public:
  Image(int width, int height, int channels, std::vector<double> data);
  static Image Filled(int width, int height, int channels, double value);
};

// Depths in millimeters; 0 marks a missing value.
class DepthMap : public Raster {
 public:
  DepthMap(int width, int height, std::vector<double> data);
  static DepthMap Filled(int width, int height, double value);

  double depth(int x, int y) const { return at(x, y); }
  bool valid(int x, int y) const { return at(x, y) > 0.0; }
  std::size_t valid_count() const;
};

// Per-pixel weights in [0,1]. Used both for predicted (soft) masks and for
// visibility masks, which are binary when produced by forward warping.
class Mask : public Raster {
 public:
  Mask(int width, int height, std::vector<double> data);
  static Mask Filled(int width, int height, double value);

  bool is_binary() const;
  // Number of entries equal to 1.
  std::size_t count_set() const;
  double sum() const;
};

using VisibilityMask = Mask;

// Center crop of any raster with its top-left offset.
struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
};

CropWindow center_crop_window(int width, int height, int side);

Image crop(const Image& img, const CropWindow& w);
DepthMap crop(const DepthMap& depth, const CropWindow& w);
Mask crop(const Mask& mask, const CropWindow& w);

}  // namespace nvs
