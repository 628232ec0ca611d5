#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "corneal/geometry.hpp"
#include "corneal/imaging.hpp"
#include "corneal/pose.hpp"

namespace corneal {

struct CornealSample {
  int u = 0;  // source pixel
  int v = 0;
  Vec3 point = Vec3::Zero();   // on the corneal sphere
  Vec3 normal = Vec3::UnitZ();  // outward
  Vec3 reflected = Vec3::UnitZ();
  Rgb color;
};

/// Equirectangular map of reflected-ray directions in the camera frame.
/// Texel (i, j) has longitude 2 pi (i + 0.5) / W - pi and latitude pi (j + 0.5) / H - pi / 2,
/// with longitude 0 / latitude 0 looking back along -Z and latitude growing with +Y.
class EnvironmentMap {
 public:
  EnvironmentMap() = default;
  EnvironmentMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  /// Number of samples that landed in the texel; 0 for holes and filled texels.
  std::uint32_t hits(int i, int j) const { return hits_[index(i, j)]; }
  /// True for holes that received a color from the nearest observed texel.
  bool filled(int i, int j) const { return filled_[index(i, j)] != 0; }
  bool covered(int i, int j) const { return hits(i, j) > 0 || filled(i, j); }
  Rgb color(int i, int j) const { return color_[index(i, j)]; }
  /// Mean corneal surface point of the samples behind the texel.
  const Vec3& origin(int i, int j) const { return origin_[index(i, j)]; }

  Vec3 texel_direction(int i, int j) const;
  /// Texel containing a direction (need not be normalized).
  std::pair<int, int> texel_of(const Vec3& dir) const;

  std::size_t observed_count() const;
  std::size_t filled_count() const;
  std::uint64_t total_hits() const;

  /// Color raster of the map; texels without coverage are black.
  ImageBuffer to_image() const;

  EyePose pose;  // pose the map was unwrapped with

 private:
  friend EnvironmentMap unwrap(std::span<const CornealSample>, int, int);
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> color_;
  std::vector<std::uint32_t> hits_;
  std::vector<std::uint8_t> filled_;
  std::vector<Vec3> origin_;
};

/// Back-projects every pixel strictly inside `e` onto the corneal cap of `pose` and reflects
/// the camera ray there. `cam` must describe the pixel grid of `img` (scaled and cropped).
/// Throws Error(Stage::Unwrap) when no pixel hits the cap.
std::vector<CornealSample> corneal_samples(const ImageBuffer& img, const Ellipse& e, const EyePose& pose,
                                           const PinholeCamera& cam);

/// Forward splatting into a W x H equirectangular map followed by nearest-neighbour hole
/// filling inside the convex hull of the observed texels.
EnvironmentMap unwrap(std::span<const CornealSample> samples, int width, int height);

/// Median angle (degrees) between reflected directions of horizontally adjacent pixels
/// inside the ellipse, in the pixel grid described by `cam`.
double angular_resolution(const Ellipse& e, const EyePose& pose, const PinholeCamera& cam);

/// Reflected direction for one pixel, when its camera ray hits the corneal cap.
std::optional<CornealSample> back_project(const PinholeCamera& cam, const EyePose& pose, int u, int v);

}  // namespace corneal
