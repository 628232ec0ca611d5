#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace corneal {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Hsv {
  double h = 0.0;  // degrees in [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

/// Row-major 8-bit RGB raster. `scale` is the size factor relative to the original capture.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, Rgb fill = {});
  ImageBuffer(int width, int height, std::vector<std::uint8_t> pixels, double scale = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double scale() const { return scale_; }
  void set_scale(double s) { scale_ = s; }
  bool empty() const { return pixels_.empty(); }

  Rgb at(int u, int v) const {
    const std::size_t i = index(u, v);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int u, int v, Rgb c) {
    const std::size_t i = index(u, v);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  std::span<const std::uint8_t> data() const { return pixels_; }
  std::span<std::uint8_t> data() { return pixels_; }

  bool operator==(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && pixels_ == o.pixels_;
  }

 private:
  std::size_t index(int u, int v) const {
    return (static_cast<std::size_t>(v) * width_ + u) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  double scale_ = 1.0;
  std::vector<std::uint8_t> pixels_;
};

struct RegionOfInterest {
  int u0 = 0;
  int v0 = 0;
  int w = 0;
  int h = 0;

  bool inside(int width, int height) const {
    return u0 >= 0 && v0 >= 0 && w >= 1 && h >= 1 && u0 + w <= width && v0 + h <= height;
  }
  /// The same region in an image downscaled by `factor` (origin and size rounded).
  RegionOfInterest scaled(double factor) const;
};

/// Loads PNG or binary PPM (P6), detected from the file's magic bytes.
ImageBuffer load_image(const std::filesystem::path& path);
/// Writes PNG or PPM depending on the extension (.png, .ppm, .pnm).
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

ImageBuffer crop(const ImageBuffer& img, const RegionOfInterest& roi);

/// Area-average downscaling; the result's scale tag is img.scale() * factor.
ImageBuffer rescale(const ImageBuffer& img, double factor);

Hsv rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(const Hsv& c);

/// Rec. 601 luma in [0, 1].
inline double luma(Rgb c) { return (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0; }

}  // namespace corneal
