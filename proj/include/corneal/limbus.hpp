#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "corneal/geometry.hpp"
#include "corneal/imaging.hpp"

namespace corneal {

struct EdgePoint {
  double u = 0.0;
  double v = 0.0;
  double direction = 0.0;  // gradient direction, radians (points from dark to bright)
  double magnitude = 0.0;  // luma units in [0, 1] per pixel
};

/// Limbus detector parameters, in pixels of the image being searched.
struct RansacParams {
  int iterations = 2000;
  double inlier_threshold = 1.5;
  double min_inlier_fraction = 0.3;
  double gradient_threshold = 30.0 / 255.0;
  double r_min = 150.0;
  double r_max = 600.0;
  /// Largest angle between an inlier's gradient and the ellipse's outward normal
  /// (the iris is darker than the sclera). Values >= pi disable the polarity test.
  double max_normal_angle = 0.7853981633974483;

  bool valid() const;
};

/// Scale-independent detector settings; `resolve` turns them into pixel units for one image.
struct LimbusSettings {
  int iterations = 2000;
  double inlier_threshold = 1.5;  // at full capture scale
  double inlier_threshold_floor = 0.75;
  double min_inlier_fraction = 0.3;
  double gradient_threshold = 30.0 / 255.0;
  double r_min_fraction = 0.15;  // of min(w, h)
  double r_max_fraction = 0.6;
  double max_normal_angle_deg = 45.0;

  RansacParams resolve(int width, int height, double scale) const;
};

struct LimbusDetection {
  Ellipse ellipse;
  int inliers = 0;
  double support = 0.0;  // inliers / candidate edge points
  std::uint64_t seed = 0;
};

/// Crops `roi`, or the centered square of side min(w, h) when no ROI is given.
ImageBuffer select_eye_region(const ImageBuffer& img, const std::optional<RegionOfInterest>& roi);

/// Thinned edge points (3x3 Sobel, non-maximum suppression, sub-pixel peak).
/// Throws Error(Stage::Limbus) when fewer than 5 points survive.
std::vector<EdgePoint> extract_edges(const ImageBuffer& img, const RansacParams& params);

/// Exact conic through five points. Empty for degenerate samples, non-ellipses,
/// or semi-axes outside [r_min, r_max].
std::optional<Ellipse> fit_ellipse_minimal(std::span<const EdgePoint> points, double r_min, double r_max);
std::optional<Ellipse> fit_ellipse_minimal(std::span<const Vec2> points, double r_min, double r_max);

/// Direct least-squares ellipse fit (ellipse-specific constraint 4AC - B^2 = 1).
std::optional<Ellipse> fit_ellipse_least_squares(std::span<const Vec2> points);

/// Gradient-normalized algebraic distance |Q| / |grad Q| of a point to a conic.
double approx_distance(const Conic& q, double u, double v);

/// RANSAC limbus search over the edge points of `img`; deterministic in (img, params, seed).
LimbusDetection detect_limbus(const ImageBuffer& img, const RansacParams& params, std::uint64_t seed);

/// RANSAC over a prepared edge set (the part of detect_limbus after edge extraction).
LimbusDetection detect_limbus(std::span<const EdgePoint> edges, const RansacParams& params,
                              std::uint64_t seed);

}  // namespace corneal
