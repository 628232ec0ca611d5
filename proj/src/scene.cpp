#include "corneal/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corneal/error.hpp"

namespace corneal {

namespace {

// Tan-plane coordinates of a direction about -Z.
Vec2 gnomonic(const Vec3& d) { return {d.x() / -d.z(), d.y() / -d.z()}; }

}  // namespace

bool ColorBlobSpec::matches(const Hsv& c) const {
  if (c.s < s_min || c.v < v_min) return false;
  if (hue_lo <= hue_hi) return c.h >= hue_lo && c.h <= hue_hi;
  return c.h >= hue_lo || c.h <= hue_hi;
}

std::vector<ColorBlobSpec> default_blob_specs() {
  return {{"red", 345.0, 15.0, 0.5, 0.3, 20}, {"blue", 210.0, 270.0, 0.5, 0.3, 20}};
}

std::vector<ObjectResult> detect_objects(const EnvironmentMap& map, const std::vector<ColorBlobSpec>& specs) {
  const int w = map.width(), h = map.height();
  if (w == 0 || map.observed_count() == 0) throw Error(Stage::Objects, "environment map has no coverage");
  std::vector<ObjectResult> results;
  std::vector<int> label(static_cast<std::size_t>(w) * h);
  std::vector<std::pair<int, int>> stack;
  for (const ColorBlobSpec& spec : specs) {
    std::vector<char> hit(label.size(), 0);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        if (map.covered(i, j) && spec.matches(rgb_to_hsv(map.color(i, j)))) hit[static_cast<std::size_t>(j) * w + i] = 1;
      }
    }
    std::fill(label.begin(), label.end(), -1);
    std::vector<std::pair<int, int>> best;
    int next = 0;
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * w + i;
        if (!hit[k] || label[k] >= 0) continue;
        std::vector<std::pair<int, int>> members;
        stack.assign(1, {i, j});
        label[k] = next;
        while (!stack.empty()) {
          const auto [ci, cj] = stack.back();
          stack.pop_back();
          members.emplace_back(ci, cj);
          const int ni[4] = {ci + 1, ci - 1, ci, ci};
          const int nj[4] = {cj, cj, cj + 1, cj - 1};
          for (int n = 0; n < 4; ++n) {
            if (ni[n] < 0 || nj[n] < 0 || ni[n] >= w || nj[n] >= h) continue;
            const std::size_t nk = static_cast<std::size_t>(nj[n]) * w + ni[n];
            if (!hit[nk] || label[nk] >= 0) continue;
            label[nk] = next;
            stack.emplace_back(ni[n], nj[n]);
          }
        }
        ++next;
        if (members.size() > best.size()) best = std::move(members);
      }
    }
    if (static_cast<int>(best.size()) < spec.min_area || best.empty()) {
      results.emplace_back(ObjectNotFound{spec.name});
      continue;
    }
    ObjectDetection det;
    det.name = spec.name;
    det.texels = static_cast<int>(best.size());
    // Texel weights are solid angle mapped onto the tan plane: cos(lat) dlon dlat / |d_z|^3.
    struct Ray2 {
      Vec3 o;
      Vec2 b;
      double w;
    };
    std::vector<Ray2> rays;
    rays.reserve(best.size());
    Vec3 dir_sum = Vec3::Zero(), origin_sum = Vec3::Zero();
    double wsum = 0.0;
    for (const auto& [i, j] : best) {
      const Vec3 d = map.texel_direction(i, j);
      dir_sum += d;
      origin_sum += map.origin(i, j);
      if (d.z() > -1e-3) continue;
      const double lat = std::asin(std::clamp(d.y(), -1.0, 1.0));
      const double wt = std::cos(lat) / std::pow(-d.z(), 3);
      rays.push_back({map.origin(i, j), gnomonic(d), wt});
      wsum += wt;
    }
    det.direction = dir_sum.normalized();
    det.origin = origin_sum / static_cast<double>(best.size());
    if (wsum > 0.0) {
      PlaneFootprint& fp = det.footprint;
      fp.z_ref = det.origin.z();
      Vec2 sa = Vec2::Zero(), sb = Vec2::Zero(), saa = Vec2::Zero(), sab = Vec2::Zero(), sbb = Vec2::Zero();
      for (const Ray2& r : rays) {
        const Vec2 av = r.o.head<2>() + (r.o.z() - fp.z_ref) * r.b;
        sa += r.w * av;
        sb += r.w * r.b;
        saa += r.w * av.cwiseProduct(av);
        sab += r.w * av.cwiseProduct(r.b);
        sbb += r.w * r.b.cwiseProduct(r.b);
      }
      fp.mean_a = sa / wsum;
      fp.mean_b = sb / wsum;
      fp.var_a = (saa / wsum - fp.mean_a.cwiseProduct(fp.mean_a)).cwiseMax(0.0);
      fp.cov_ab = sab / wsum - fp.mean_a.cwiseProduct(fp.mean_b);
      fp.var_b = (sbb / wsum - fp.mean_b.cwiseProduct(fp.mean_b)).cwiseMax(0.0);
      det.angular_width = 2.0 * std::atan(0.5 * std::sqrt(12.0 * fp.var_b.x()));
      det.angular_height = 2.0 * std::atan(0.5 * std::sqrt(12.0 * fp.var_b.y()));
    }
    results.emplace_back(std::move(det));
  }
  return results;
}

ScenePlane reconstruct_plane(const ObjectDetection& rect, double width_mm, double height_mm) {
  const PlaneFootprint& fp = rect.footprint;
  if (!(width_mm > 0.0 && height_mm > 0.0)) throw Error(Stage::Plane, "inconsistent size: non-positive rectangle size");
  // var_b D^2 + 2 cov D + var_a = size^2 / 12, larger root.
  const auto solve = [](double va, double cov, double vb, double size) {
    if (!(vb > 1e-14)) return std::numeric_limits<double>::quiet_NaN();
    const double disc = cov * cov - vb * (va - size * size / 12.0);
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (-cov + std::sqrt(disc)) / vb;
  };
  const double depth_w = solve(fp.var_a.x(), fp.cov_ab.x(), fp.var_b.x(), width_mm);
  const double depth_h = solve(fp.var_a.y(), fp.cov_ab.y(), fp.var_b.y(), height_mm);
  if (!(depth_w > 0.0 && depth_h > 0.0) || !std::isfinite(depth_w) || !std::isfinite(depth_h)) {
    throw Error(Stage::Plane, "inconsistent size: degenerate angular box");
  }
  if (!(rect.direction.z() < 0.0)) throw Error(Stage::Plane, "rectangle direction does not face the camera side");
  if (std::max(depth_w, depth_h) > 1.25 * std::min(depth_w, depth_h)) {
    throw Error(Stage::Plane, "inconsistent size: width and height give different depths");
  }
  ScenePlane plane;
  plane.depth = std::sqrt(depth_w * depth_h);
  plane.normal = -Vec3::UnitZ();
  const Vec2 c = fp.center(plane.depth);
  plane.point = Vec3(c.x(), c.y(), fp.z_ref - plane.depth);
  return plane;
}

RelativePosition relative_position(const ObjectDetection& square, const ObjectDetection& rect,
                                   const ScenePlane& plane) {
  if (std::abs(std::abs(plane.normal.z()) - 1.0) > 1e-9) {
    throw Error(Stage::Position, "scene plane is not fronto-parallel");
  }
  const auto hit = [&](const ObjectDetection& o) {
    if (std::abs(o.direction.z()) < 1e-9 || o.direction.z() > 0.0) {
      throw Error(Stage::Position, "ray parallel to the scene plane");
    }
    return o.footprint.center(o.footprint.z_ref - plane.point.z());
  };
  const Vec2 delta = hit(square) - hit(rect);
  RelativePosition r;
  r.dx = delta.x();
  r.dy = -delta.y();
  r.plane_depth = plane.depth;
  return r;
}

Vec2 PlaneFootprint::extent(double depth) const {
  const Vec2 var = var_a + 2.0 * depth * cov_ab + depth * depth * var_b;
  return (12.0 * var.cwiseMax(0.0)).cwiseSqrt();
}

}  // namespace corneal
