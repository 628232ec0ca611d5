#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "corneal/config.hpp"
#include "corneal/imaging.hpp"
#include "corneal/limbus.hpp"
#include "corneal/pose.hpp"
#include "corneal/scene.hpp"
#include "corneal/unwrap.hpp"

namespace corneal {

/// A full-resolution capture, or a window of one whose pixel (0,0) sits at (origin_u, origin_v)
/// of the full capture. Windows used with downscaling should start on multiples of 8.
struct Capture {
  ImageBuffer image;
  int origin_u = 0;
  int origin_v = 0;
};

/// Eye region of a capture at one scale, with the camera that sees its pixel grid.
struct EyeRegion {
  ImageBuffer image;
  PinholeCamera camera;  // scaled and cropped
  double scale = 1.0;
  int u0 = 0;  // crop origin in the scaled full-capture grid
  int v0 = 0;

  /// Converts an ellipse found in `image` into full-capture pixels.
  Ellipse to_full(const Ellipse& e) const;
};

/// Rescale, then crop the configured eye region (or the centered square).
EyeRegion prepare_eye_region(const Capture& capture, const Config& cfg, double scale);

struct LocateResult {
  LimbusDetection limbus;
  Ellipse full_ellipse;
  EyePose pose;
  std::size_t samples = 0;
  EnvironmentMap map;
  ObjectDetection rect;
  ObjectDetection square;
  ScenePlane plane;
  RelativePosition position;
};

/// Runs detection, pose, unwrapping and scene analysis on a prepared eye region. Each stage
/// throws Error with its own Stage; missing objects raise Stage::Objects naming the object.
/// `edges` may carry a precomputed edge set of `eye.image`.
LocateResult locate(const EyeRegion& eye, const Config& cfg, std::uint64_t seed,
                    const std::vector<EdgePoint>* edges = nullptr);

LocateResult locate(const Capture& capture, const Config& cfg, double scale, std::uint64_t seed);

/// Environment map only (detection, pose, unwrap).
LocateResult unwrap_capture(const Capture& capture, const Config& cfg, double scale, std::uint64_t seed);

}  // namespace corneal
