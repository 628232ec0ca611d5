#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "corneal/geometry.hpp"
#include "corneal/imaging.hpp"
#include "corneal/pose.hpp"

namespace corneal {

/// Synthetic capture: a two-sphere eye mirroring a flat scene with a red rectangle and a
/// blue square, seen by a pinhole camera. Scene positions use plane axes (x right, y up)
/// on the plane z = plane_z in the camera frame.
struct SceneConfig {
  // Full-capture camera.
  PinholeCamera camera{34000.0, 3680.0, 2456.0, 7360, 4912};
  RegionOfInterest eye_region{3180, 1956, 1000, 1000};

  // Eye placement: limbus center at (lateral_x, lateral_y, distance); the optical axis is
  // -Z tilted by `tilt` towards the image-plane direction `tilt_azimuth` (0 = +X, pi/2 = +Y).
  double eye_distance = 400.0;
  double tilt = 0.19739555984988078;  // atan(80 / 400): looking at the device center
  double tilt_azimuth = 1.5707963267948966;
  double lateral_x = 0.0;
  double lateral_y = 0.0;
  EyeConstants eye;

  double plane_z = 0.0;
  double rect_x = 0.0;  // rectangle midpoint, plane axes, mm
  double rect_y = -80.0;
  double rect_width = 70.0;
  double rect_height = 140.0;
  double square_dx = 100.0;  // square midpoint relative to the rectangle midpoint
  double square_dy = 0.0;
  double square_size = 20.0;

  Rgb rect_color{220, 30, 30};
  Rgb square_color{30, 60, 220};
  Rgb plane_color{70, 70, 70};
  Rgb background_color{200, 160, 140};  // skin around the eye
  Rgb sclera_color{235, 230, 225};
  Rgb iris_color{90, 60, 40};
  Rgb ring_color{25, 20, 15};
  double reflectivity = 0.85;
  double ring_width = 2.0;  // px, dark limbal ring inside the limbus boundary
  double brightness = 1.0;  // multiplies the reflected scene radiance

  int supersampling = 2;  // per axis
  double noise_sigma = 0.0;  // gray levels
  std::uint64_t noise_seed = 0;
  int position_id = 0;

  bool valid() const;
  EyePose true_pose() const;
};

struct GroundTruth {
  Ellipse ellipse;  // full-capture pixels
  EyePose pose;
  double dx = 0.0;  // square minus rectangle midpoint, plane axes, mm
  double dy = 0.0;
  RegionOfInterest eye_region;
  int square_pixels = 0;  // eye-region pixels whose reflection sees the square
  int rect_pixels = 0;
  int position_id = 0;  // 1..9 in grids, 0 otherwise
};

/// Perspective image of the limbus circle, as an exact conic in full-capture pixels.
Ellipse analytic_limbus(const SceneConfig& cfg);

/// Renders the full capture, or only `window` (full-capture coordinates) when given.
std::pair<ImageBuffer, GroundTruth> render(const SceneConfig& cfg,
                                           const std::optional<RegionOfInterest>& window = std::nullopt);

/// Reflected direction of the ray through a full-capture pixel center, if it hits the cap.
std::optional<Vec3> trace_reflection(const SceneConfig& cfg, double u, double v);

/// The nine square placements {100, 200, 300} x {100, 0, -100} mm, row-major from the top.
std::vector<SceneConfig> grid_configs(const SceneConfig& base);

std::vector<std::pair<ImageBuffer, GroundTruth>> render_grid(
    const SceneConfig& base, const std::optional<RegionOfInterest>& window = std::nullopt);

}  // namespace corneal
