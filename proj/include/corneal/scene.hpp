#pragma once

#include <string>
#include <variant>
#include <vector>

#include "corneal/geometry.hpp"
#include "corneal/unwrap.hpp"

namespace corneal {

struct ColorBlobSpec {
  std::string name;
  double hue_lo = 0.0;  // degrees; hue_lo > hue_hi wraps through 0
  double hue_hi = 360.0;
  double s_min = 0.0;
  double v_min = 0.0;
  int min_area = 1;  // texels

  bool matches(const Hsv& c) const;
};

// Weighted first and second moments of where a blob's texel rays meet a fronto-parallel plane.
// A texel with origin o and tan-plane direction b lands at a + D*b on the plane z = z_ref - D,
// where a = o_xy + (o_z - z_ref) * b. The mirror is non-central, so a is not constant.
struct PlaneFootprint {
  double z_ref = 0.0;
  Vec2 mean_a = Vec2::Zero();
  Vec2 mean_b = Vec2::Zero();
  Vec2 var_a = Vec2::Zero();
  Vec2 cov_ab = Vec2::Zero();
  Vec2 var_b = Vec2::Zero();

  Vec2 center(double depth) const { return mean_a + depth * mean_b; }
  // Full width of the uniform box with the same variance, per axis.
  Vec2 extent(double depth) const;
};

struct ObjectDetection {
  std::string name;
  Vec3 direction = -Vec3::UnitZ();  // unit centroid direction, camera frame
  double angular_width = 0.0;       // radians
  double angular_height = 0.0;
  Vec3 origin = Vec3::Zero();  // mean reflection origin on the cornea
  int texels = 0;
  PlaneFootprint footprint;
};

struct ScenePlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = -Vec3::UnitZ();
  double depth = 0.0;  // distance from the rectangle's reflection origin along the normal
};

struct RelativePosition {
  double dx = 0.0;  // mm, plane x axis (camera +X)
  double dy = 0.0;  // mm, plane y axis (camera -Y, i.e. up)
  double plane_depth = 0.0;
};

/// Outcome of detect_objects for one blob spec: a detection, or its name when nothing matched.
struct ObjectNotFound {
  std::string name;
};
using ObjectResult = std::variant<ObjectDetection, ObjectNotFound>;

/// HSV gate, 4-connected components, largest component above the minimum area.
/// Angular extents are gnomonic about -Z: angle = 2 atan(extent / 2), with extent the width of
/// the uniform box having the blob's solid-angle-weighted tan-plane variance (sqrt(12 var)).
/// Second moments shrug off the ragged, threshold-dependent rim that corner spans pick up.
std::vector<ObjectResult> detect_objects(const EnvironmentMap& map, const std::vector<ColorBlobSpec>& specs);

/// Fronto-parallel plane through the rectangle from its known metric size. The depth solves
/// footprint.extent(D) == size per axis (origin-aware form of size = 2 D tan(angle / 2));
/// the plane depth is the geometric mean of the two. Throws Error(Stage::Plane) on degenerate
/// boxes or when width- and height-derived depths disagree by more than 25%.
ScenePlane reconstruct_plane(const ObjectDetection& rect, double width_mm, double height_mm);

/// Offset of the square's footprint center from the rectangle's, measured on the plane.
RelativePosition relative_position(const ObjectDetection& square, const ObjectDetection& rect,
                                   const ScenePlane& plane);

/// Default red rectangle and blue square gates.
std::vector<ColorBlobSpec> default_blob_specs();

}  // namespace corneal
