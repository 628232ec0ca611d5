#include "corneal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "corneal/error.hpp"

namespace corneal {

namespace {

struct Radiance {
  double r = 0, g = 0, b = 0;
  Radiance& operator+=(const Radiance& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
};

Radiance rad(Rgb c, double w = 1.0) { return {w * c.r, w * c.g, w * c.b}; }

// Geometry shared by every ray of one render.
struct Tracer {
  const SceneConfig& cfg;
  EyePose pose;
  Sphere eyeball;
  Conic limbus_conic;  // normalized, full-capture pixels
  Vec3 rect_center, square_center;

  explicit Tracer(const SceneConfig& c) : cfg(c), pose(c.true_pose()) {
    const double r_e = cfg.eye.eyeball_radius;
    const double r_l = cfg.eye.limbus_radius;
    eyeball.center = pose.limbus_center - std::sqrt(r_e * r_e - r_l * r_l) * pose.axis;
    eyeball.radius = r_e;
    limbus_conic = normalize_conic(to_conic(analytic_limbus(cfg)));
    rect_center = {cfg.rect_x, -cfg.rect_y, cfg.plane_z};
    square_center = {cfg.rect_x + cfg.square_dx, -(cfg.rect_y + cfg.square_dy), cfg.plane_z};
  }

  enum class Surface { Skin, Sclera, Cornea };
  enum class Object { None, Plane, Rect, Square };

  struct Hit {
    Surface surface = Surface::Skin;
    Object object = Object::None;
    Vec3 reflected = Vec3::Zero();
  };

  Object scene_object(const Vec3& origin, const Vec3& dir) const {
    if (std::abs(dir.z()) < 1e-12) return Object::None;
    const double t = (cfg.plane_z - origin.z()) / dir.z();
    if (t <= 0.0) return Object::None;
    const Vec3 q = origin + t * dir;
    const double hs = 0.5 * cfg.square_size;
    if (std::abs(q.x() - square_center.x()) <= hs && std::abs(q.y() - square_center.y()) <= hs) {
      return Object::Square;
    }
    if (std::abs(q.x() - rect_center.x()) <= 0.5 * cfg.rect_width &&
        std::abs(q.y() - rect_center.y()) <= 0.5 * cfg.rect_height) {
      return Object::Rect;
    }
    return Object::Plane;
  }

  Hit trace(double u, double v) const {
    const Ray ray = pixel_ray(cfg.camera, u, v);
    Hit h;
    const auto c = intersect_sphere(ray, pose.cornea);
    if (c && pose.axis.dot(c->point - pose.limbus_center) >= 0.0) {
      h.surface = Surface::Cornea;
      h.reflected = reflect(ray.dir, c->normal);
      h.object = scene_object(c->point, h.reflected);
      return h;
    }
    if (intersect_sphere(ray, eyeball)) h.surface = Surface::Sclera;
    return h;
  }

  Radiance shade(double u, double v) const {
    const Hit h = trace(u, v);
    switch (h.surface) {
      case Surface::Skin: return rad(cfg.background_color);
      case Surface::Sclera: return rad(cfg.sclera_color);
      case Surface::Cornea: break;
    }
    if (approx_image_distance(u, v) <= cfg.ring_width) return rad(cfg.ring_color);
    Rgb scene = cfg.plane_color;
    if (h.object == Object::Rect) scene = cfg.rect_color;
    if (h.object == Object::Square) scene = cfg.square_color;
    const double rho = cfg.reflectivity;
    Radiance out = rad(scene, rho * cfg.brightness);
    out += rad(cfg.iris_color, 1.0 - rho);
    return out;
  }

  double approx_image_distance(double u, double v) const {
    const Vec2 g = conic_gradient(limbus_conic, u, v);
    return std::abs(conic_value(limbus_conic, u, v)) / g.norm();
  }
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

bool SceneConfig::valid() const {
  return camera.valid() && eye.valid() && eye_distance > eye.cornea_radius && rect_width > 0.0 &&
         rect_height > 0.0 && square_size > 0.0 && reflectivity > 0.0 && reflectivity <= 1.0 &&
         supersampling >= 1 && noise_sigma >= 0.0 && ring_width >= 0.0 && tilt >= 0.0 &&
         tilt < 1.5 && plane_z < eye_distance - eye.cornea_radius && brightness > 0.0 &&
         eye_region.inside(camera.width, camera.height);
}

EyePose SceneConfig::true_pose() const {
  const Vec3 axis(std::sin(tilt) * std::cos(tilt_azimuth), std::sin(tilt) * std::sin(tilt_azimuth), -std::cos(tilt));
  return EyePose::from_axis(Vec3(lateral_x, lateral_y, eye_distance), axis, eye);
}

Ellipse analytic_limbus(const SceneConfig& cfg) {
  // Rays m = (u - px, v - py, f) meet the limbus plane at P = (g.L / g.m) m; the image conic is
  // |P - L|^2 = r^2 multiplied through by (g.m)^2.
  const EyePose pose = cfg.true_pose();
  const Eigen::Vector3d g = pose.axis;
  const Eigen::Vector3d l = pose.limbus_center;
  const double gl = g.dot(l);
  const double r = cfg.eye.limbus_radius;
  const Eigen::Matrix3d q = gl * gl * Eigen::Matrix3d::Identity() - gl * (l * g.transpose() + g * l.transpose()) +
                            (l.squaredNorm() - r * r) * g * g.transpose();
  Eigen::Matrix3d h;
  h << 1, 0, -cfg.camera.px, 0, 1, -cfg.camera.py, 0, 0, cfg.camera.f;
  const Eigen::Matrix3d m = h.transpose() * q * h;
  const auto e = from_conic({m(0, 0), 2 * m(0, 1), m(1, 1), 2 * m(0, 2), 2 * m(1, 2), m(2, 2)});
  if (!e) throw Error(Stage::Config, "limbus does not project to an ellipse");
  return *e;
}

std::optional<Vec3> trace_reflection(const SceneConfig& cfg, double u, double v) {
  const Tracer tracer(cfg);
  const auto h = tracer.trace(u, v);
  if (h.surface != Tracer::Surface::Cornea) return std::nullopt;
  return h.reflected;
}

std::pair<ImageBuffer, GroundTruth> render(const SceneConfig& cfg, const std::optional<RegionOfInterest>& window) {
  if (!cfg.valid()) throw Error(Stage::Config, "invalid scene configuration");
  const Tracer tracer(cfg);
  const RegionOfInterest frame = window.value_or(RegionOfInterest{0, 0, cfg.camera.width, cfg.camera.height});
  if (!frame.inside(cfg.camera.width, cfg.camera.height)) {
    throw Error(Stage::Config, "render window exceeds the sensor");
  }
  ImageBuffer img(frame.w, frame.h, cfg.background_color);

  // Only pixels that can see the eyeball need tracing.
  const Vec3 ec = tracer.eyeball.center;
  const double reach = cfg.camera.f * tracer.eyeball.radius / (ec.z() - tracer.eyeball.radius) + 4.0;
  const Vec2 ep = project(cfg.camera, ec);
  const int u_lo = std::max(frame.u0, static_cast<int>(std::floor(ep.x() - reach)));
  const int u_hi = std::min(frame.u0 + frame.w - 1, static_cast<int>(std::ceil(ep.x() + reach)));
  const int v_lo = std::max(frame.v0, static_cast<int>(std::floor(ep.y() - reach)));
  const int v_hi = std::min(frame.v0 + frame.h - 1, static_cast<int>(std::ceil(ep.y() + reach)));

  // Supersample the eye region (plus a margin); elsewhere one ray per pixel suffices.
  const RegionOfInterest& roi = cfg.eye_region;
  const int margin = 16;
  const int n = cfg.supersampling;

  std::mt19937_64 rng(cfg.noise_seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);

  GroundTruth truth;
  for (int v = u_lo <= u_hi ? v_lo : v_hi + 1; v <= v_hi; ++v) {
    for (int u = u_lo; u <= u_hi; ++u) {
      const bool fine = u >= roi.u0 - margin && u < roi.u0 + roi.w + margin && v >= roi.v0 - margin &&
                        v < roi.v0 + roi.h + margin;
      const int k = fine ? n : 1;
      Radiance acc;
      for (int sy = 0; sy < k; ++sy) {
        for (int sx = 0; sx < k; ++sx) {
          acc += tracer.shade(u + (sx + 0.5) / k - 0.5, v + (sy + 0.5) / k - 0.5);
        }
      }
      const double inv = 1.0 / (k * k);
      img.set(u - frame.u0, v - frame.v0, {to_byte(acc.r * inv), to_byte(acc.g * inv), to_byte(acc.b * inv)});
    }
  }
  if (cfg.noise_sigma > 0.0) {
    for (auto& px : img.data()) px = to_byte(px + noise(rng));
  }

  // Bookkeeping of what the eye region reflects, at pixel centers.
  for (int v = roi.v0; v < roi.v0 + roi.h; ++v) {
    for (int u = roi.u0; u < roi.u0 + roi.w; ++u) {
      const auto h = tracer.trace(u, v);
      if (h.surface != Tracer::Surface::Cornea) continue;
      truth.square_pixels += h.object == Tracer::Object::Square;
      truth.rect_pixels += h.object == Tracer::Object::Rect;
    }
  }
  truth.ellipse = analytic_limbus(cfg);
  truth.pose = tracer.pose;
  truth.dx = cfg.square_dx;
  truth.dy = cfg.square_dy;
  truth.eye_region = roi;
  truth.position_id = cfg.position_id;
  return {std::move(img), truth};
}

std::vector<SceneConfig> grid_configs(const SceneConfig& base) {
  std::vector<SceneConfig> out;
  const double ys[3] = {100.0, 0.0, -100.0};
  const double xs[3] = {100.0, 200.0, 300.0};
  int id = 1;
  for (double y : ys) {
    for (double x : xs) {
      SceneConfig c = base;
      c.square_dx = x;
      c.square_dy = y;
      c.position_id = id++;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::pair<ImageBuffer, GroundTruth>> render_grid(const SceneConfig& base,
                                                             const std::optional<RegionOfInterest>& window) {
  std::vector<std::pair<ImageBuffer, GroundTruth>> out;
  for (const SceneConfig& c : grid_configs(base)) out.push_back(render(c, window));
  return out;
}

}  // namespace corneal
