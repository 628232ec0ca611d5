#include "corneal/pose.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "corneal/error.hpp"

namespace corneal {

double EyeConstants::limbus_offset() const {
  return std::sqrt(cornea_radius * cornea_radius - limbus_radius * limbus_radius);
}

EyePose EyePose::from_axis(const Vec3& limbus_center, const Vec3& axis, const EyeConstants& k) {
  EyePose p;
  p.limbus_center = limbus_center;
  p.axis = axis.normalized();
  p.cornea.center = limbus_center - k.limbus_offset() * p.axis;
  p.cornea.radius = k.cornea_radius;
  return p;
}

double limbus_distance(const Ellipse& e, const PinholeCamera& cam, const EyeConstants& k) {
  return cam.f * k.limbus_radius / e.a;
}

EyePose estimate_eye_pose(const Ellipse& e, const PinholeCamera& cam, const EyeConstants& k) {
  if (!e.valid()) throw Error(Stage::Pose, "invalid limbus ellipse");
  const double d = limbus_distance(e, cam, k);
  const Vec3 center = (d / cam.f) * Vec3(e.cx - cam.px, e.cy - cam.py, cam.f);

  const double tilt = std::acos(std::clamp(e.b / e.a, -1.0, 1.0));
  // The circle's normal leans along the ellipse's minor axis.
  const Vec2 minor(-std::sin(e.theta), std::cos(e.theta));
  const std::array<Vec3, 2> candidates = {
      Vec3(std::sin(tilt) * minor.x(), std::sin(tilt) * minor.y(), -std::cos(tilt)),
      Vec3(-std::sin(tilt) * minor.x(), -std::sin(tilt) * minor.y(), -std::cos(tilt))};

  // Under perspective the far half of the tilted limbus shrinks, displacing the ellipse
  // center against the lean of the axis. Pick the candidate whose predicted displacement
  // (-g_xy) agrees with the ellipse center's offset from the principal point.
  const Vec2 offset(e.cx - cam.px, e.cy - cam.py);
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Vec3& g = candidates[i];
    if (!(g.z() < 0.0)) continue;
    const double score = -(g.x() * offset.x() + g.y() * offset.y());
    if (best < 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  if (best < 0) throw Error(Stage::Pose, "ambiguous pose: no candidate axis faces the camera");
  return EyePose::from_axis(center, candidates[best], k);
}

}  // namespace corneal
