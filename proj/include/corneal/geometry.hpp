#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace corneal {

// Camera frame: right-handed, origin at the pinhole, +Z into the scene,
// +X right, +Y down. Lengths in millimeters, angles in radians.
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 dir = Vec3::UnitZ();  // unit length
};

/// Square-pixel, zero-skew pinhole camera. Pixel centers sit on integer coordinates.
struct PinholeCamera {
  double f = 1.0;   // focal length, pixels
  double px = 0.0;  // principal point, pixels
  double py = 0.0;
  int width = 1;
  int height = 1;

  bool valid() const;

  /// Camera seeing the same rays through an image downscaled by `factor` with box filtering.
  PinholeCamera scaled(double factor) const;
  /// Camera of a crop whose pixel (0,0) is pixel (u0,v0) of this camera.
  PinholeCamera cropped(int u0, int v0, int w, int h) const;
};

/// Ellipse in pixel coordinates. Invariants: a >= b > 0, theta in [0, pi).
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 1.0;  // semi-major
  double b = 1.0;  // semi-minor
  double theta = 0.0;  // direction of the major axis

  bool valid() const;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// General conic A u^2 + B uv + C v^2 + D u + E v + F = 0, stored as {A,B,C,D,E,F}.
using Conic = std::array<double, 6>;

struct SphereHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

/// Pinhole projection. Throws Error(Stage::Geometry) when p.z <= 1e-9.
Vec2 project(const PinholeCamera& camera, const Vec3& p);

/// Ray from the pinhole through pixel (u, v).
Ray pixel_ray(const PinholeCamera& camera, double u, double v);

/// Mirror reflection r = i - 2(n.i)n of a unit incident direction about a unit normal.
Vec3 reflect(const Vec3& incident, const Vec3& normal);

/// Nearest intersection with t > 1e-9; the normal points outward.
std::optional<SphereHit> intersect_sphere(const Ray& ray, const Sphere& s);

Conic to_conic(const Ellipse& e);

/// Inverse of to_conic. Empty when the conic is not a real, non-degenerate ellipse.
std::optional<Ellipse> from_conic(const Conic& q);

/// Value of the conic polynomial at (u, v).
double conic_value(const Conic& q, double u, double v);
/// Gradient of the conic polynomial at (u, v).
Vec2 conic_gradient(const Conic& q, double u, double v);

/// Rescale a conic so that it is negative inside the ellipse and its coefficient vector has unit norm.
Conic normalize_conic(const Conic& q);

/// Point on the ellipse boundary at parameter t.
Vec2 ellipse_point(const Ellipse& e, double t);

/// Angle between two unit vectors, robust near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

}  // namespace corneal
