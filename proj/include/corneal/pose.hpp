#pragma once

#include "corneal/geometry.hpp"

namespace corneal {

/// Two-sphere eye model constants. Only the corneal sphere takes part in the computation;
/// the eyeball radius is kept for rendering.
struct EyeConstants {
  double cornea_radius = 7.8;   // r_C, mm
  double limbus_radius = 5.55;  // r_L, mm
  double eyeball_radius = 12.0;

  bool valid() const { return limbus_radius > 0.0 && limbus_radius < cornea_radius && eyeball_radius > limbus_radius; }
  /// Distance from the corneal sphere center to the limbus plane.
  double limbus_offset() const;
};

struct EyePose {
  Vec3 limbus_center = Vec3::Zero();  // L
  Vec3 axis = -Vec3::UnitZ();         // g, unit, points out of the eye
  Sphere cornea;                      // center C = L - d_LC g

  /// Pose for a given limbus center and optical axis.
  static EyePose from_axis(const Vec3& limbus_center, const Vec3& axis, const EyeConstants& k);
};

/// Weak-perspective distance from the pinhole to the limbus center: f r_L / a.
/// The ellipse must be in full-capture pixels.
double limbus_distance(const Ellipse& e, const PinholeCamera& cam, const EyeConstants& k);

/// Eye pose from the limbus ellipse (full-capture pixels).
/// Throws Error(Stage::Pose) when no candidate axis faces the camera.
EyePose estimate_eye_pose(const Ellipse& e, const PinholeCamera& cam, const EyeConstants& k);

}  // namespace corneal
