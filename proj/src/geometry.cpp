#include "corneal/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "corneal/error.hpp"

namespace corneal {

bool PinholeCamera::valid() const {
  return f > 0.0 && width >= 1 && height >= 1 && px >= 0.0 && px < width && py >= 0.0 &&
         py < height;
}

PinholeCamera PinholeCamera::scaled(double factor) const {
  PinholeCamera c = *this;
  c.f = f * factor;
  c.px = (px + 0.5) * factor - 0.5;
  c.py = (py + 0.5) * factor - 0.5;
  c.width = static_cast<int>(std::lround(width * factor));
  c.height = static_cast<int>(std::lround(height * factor));
  return c;
}

PinholeCamera PinholeCamera::cropped(int u0, int v0, int w, int h) const {
  PinholeCamera c = *this;
  c.px = px - u0;
  c.py = py - v0;
  c.width = w;
  c.height = h;
  return c;
}

bool Ellipse::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && b > 0.0 && a >= b && theta >= 0.0 &&
         theta < std::numbers::pi;
}

Vec2 project(const PinholeCamera& camera, const Vec3& p) {
  if (p.z() <= 1e-9) throw Error(Stage::Geometry, "project: point at or behind the pinhole");
  return {camera.f * p.x() / p.z() + camera.px, camera.f * p.y() / p.z() + camera.py};
}

Ray pixel_ray(const PinholeCamera& camera, double u, double v) {
  Ray r;
  r.dir = Vec3((u - camera.px) / camera.f, (v - camera.py) / camera.f, 1.0).normalized();
  return r;
}

Vec3 reflect(const Vec3& incident, const Vec3& normal) {
  return (incident - 2.0 * normal.dot(incident) * normal).normalized();
}

std::optional<SphereHit> intersect_sphere(const Ray& ray, const Sphere& s) {
  // |o + t d - c|^2 = r^2 with |d| = 1.
  const Vec3 oc = ray.origin - s.center;
  const double half_b = oc.dot(ray.dir);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = half_b * half_b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = half_b > 0.0 ? -(half_b + root) : -(half_b - root);
  double t0 = q;
  double t1 = q != 0.0 ? c / q : q;
  if (t0 > t1) std::swap(t0, t1);
  double t = t0;
  if (t <= 1e-9) t = t1;
  if (t <= 1e-9) return std::nullopt;
  SphereHit hit;
  hit.t = t;
  hit.point = ray.origin + t * ray.dir;
  hit.normal = (hit.point - s.center) / s.radius;
  hit.normal.normalize();
  return hit;
}

Conic to_conic(const Ellipse& e) {
  const double s = std::sin(e.theta);
  const double c = std::cos(e.theta);
  const double a2 = e.a * e.a;
  const double b2 = e.b * e.b;
  const double A = a2 * s * s + b2 * c * c;
  const double B = 2.0 * (b2 - a2) * s * c;
  const double C = a2 * c * c + b2 * s * s;
  const double D = -2.0 * A * e.cx - B * e.cy;
  const double E = -B * e.cx - 2.0 * C * e.cy;
  const double F = A * e.cx * e.cx + B * e.cx * e.cy + C * e.cy * e.cy - a2 * b2;
  return {A, B, C, D, E, F};
}

std::optional<Ellipse> from_conic(const Conic& q_in) {
  Conic q = q_in;
  for (double v : q) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  double A = q[0], B = q[1], C = q[2];
  const double det = 4.0 * A * C - B * B;
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0 || det <= 1e-14 * scale * scale) return std::nullopt;

  // Center: gradient vanishes.
  const double cx = (B * q[4] - 2.0 * C * q[3]) / det;
  const double cy = (B * q[3] - 2.0 * A * q[4]) / det;
  double f0 = q[5] + 0.5 * (q[3] * cx + q[4] * cy);

  if (A < 0.0) {  // det > 0 so A and C share a sign
    A = -A;
    B = -B;
    C = -C;
    f0 = -f0;
  }
  if (!(f0 < 0.0)) return std::nullopt;

  // Eigenvalues of [[A, B/2], [B/2, C]].
  const double mean = 0.5 * (A + C);
  const double diff = std::hypot(0.5 * (A - C), 0.5 * B);
  const double lmin = mean - diff;
  const double lmax = mean + diff;
  if (!(lmin > 0.0)) return std::nullopt;

  Ellipse e;
  e.cx = cx;
  e.cy = cy;
  e.a = std::sqrt(-f0 / lmin);
  e.b = std::sqrt(-f0 / lmax);
  if (diff <= 1e-15 * mean) {
    e.theta = 0.0;
  } else {
    // Eigenvector of lmin; pick the better-conditioned of the two equivalent forms.
    double vx, vy;
    if (A - lmin > C - lmin) {
      vx = -0.5 * B;
      vy = A - lmin;
    } else {
      vx = C - lmin;
      vy = -0.5 * B;
    }
    double th = std::atan2(vy, vx);
    if (th < 0.0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    e.theta = th;
  }
  if (!e.valid()) return std::nullopt;
  return e;
}

double conic_value(const Conic& q, double u, double v) {
  return q[0] * u * u + q[1] * u * v + q[2] * v * v + q[3] * u + q[4] * v + q[5];
}

Vec2 conic_gradient(const Conic& q, double u, double v) {
  return {2.0 * q[0] * u + q[1] * v + q[3], q[1] * u + 2.0 * q[2] * v + q[4]};
}

Conic normalize_conic(const Conic& q) {
  double n = 0.0;
  for (double v : q) n += v * v;
  n = std::sqrt(n);
  if (n == 0.0) return q;
  // Inside is where the quadratic form (positive definite after the flip) is small.
  const double sign = q[0] + q[2] < 0.0 ? -1.0 : 1.0;
  Conic out;
  for (int i = 0; i < 6; ++i) out[i] = sign * q[i] / n;
  return out;
}

Vec2 ellipse_point(const Ellipse& e, double t) {
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  const double x = e.a * std::cos(t);
  const double y = e.b * std::sin(t);
  return {e.cx + c * x - s * y, e.cy + s * x + c * y};
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace corneal
