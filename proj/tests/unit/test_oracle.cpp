#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "corneal/error.hpp"
#include "corneal/harness.hpp"
#include "corneal/oracle.hpp"
#include "corneal/unwrap.hpp"
#include "fixtures.hpp"

using namespace corneal;

TEST_SUITE("oracle") {

TEST_CASE("fronto-parallel eye: rendered limbus matches the analytic ellipse") {
  Config cfg;
  SceneConfig sc = cfg.scene_config();
  sc.tilt = 0.0;
  const Ellipse truth = analytic_limbus(sc);
  CHECK(truth.a == doctest::Approx(truth.b).epsilon(1e-9));
  CHECK(truth.a == doctest::Approx(sc.camera.f * sc.eye.limbus_radius / sc.eye_distance).epsilon(1e-3));
  const RegionOfInterest w = aligned_eye_window(sc);
  const Capture cap{render(sc, w).first, w.u0, w.v0};
  const EyeRegion eye = prepare_eye_region(cap, cfg, 1.0);
  const auto det = detect_limbus(eye.image, cfg.limbus.resolve(1000, 1000, 1.0), 2);
  const Ellipse fit = eye.to_full(det.ellipse);
  CHECK(std::abs(fit.a / truth.a - 1.0) < 0.01);
  CHECK(std::hypot(fit.cx - truth.cx, fit.cy - truth.cy) < 0.5);
  CHECK(std::abs(fit.a - truth.a) < 0.5);
  CHECK(std::abs(fit.b - truth.b) < 0.5);
}

TEST_CASE("analytic ellipse equals the projected limbus circle") {
  SceneConfig sc;
  sc.tilt = 0.4;
  sc.tilt_azimuth = 2.0;
  sc.lateral_x = 15;
  const EyePose p = sc.true_pose();
  const Conic q = normalize_conic(to_conic(analytic_limbus(sc)));
  // orthonormal basis of the limbus plane
  const Vec3 e1 = p.axis.unitOrthogonal();
  const Vec3 e2 = p.axis.cross(e1);
  for (int k = 0; k < 36; ++k) {
    const double t = k * std::numbers::pi / 18;
    const Vec3 x = p.limbus_center + sc.eye.limbus_radius * (std::cos(t) * e1 + std::sin(t) * e2);
    const Vec2 uv = project(sc.camera, x);
    CHECK(approx_distance(q, uv.x(), uv.y()) < 1e-6);
  }
}

TEST_CASE("a pure mirror of a uniform plane shows only the plane") {
  SceneConfig sc;
  sc.reflectivity = 1.0;
  sc.ring_width = 0.0;
  sc.plane_color = {20, 200, 40};
  sc.rect_x = 1e5;  // both objects far out of view
  sc.square_dx = 0;
  const auto [img, truth] = render(sc, sc.eye_region);
  const Conic q = normalize_conic(to_conic(truth.ellipse));
  int checked = 0;
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width(); ++u) {
      const double x = u + sc.eye_region.u0, y = v + sc.eye_region.v0;
      if (conic_value(q, x, y) >= 0 || approx_distance(q, x, y) < 1.5) continue;
      REQUIRE(img.at(u, v) == sc.plane_color);
      ++checked;
    }
  CHECK(checked > 600000);
}

TEST_CASE("grid bookkeeping") {
  const SceneConfig base;
  const auto grid = grid_configs(base);
  REQUIRE(grid.size() == 9);
  std::set<std::pair<double, double>> cells;
  for (const SceneConfig& c : grid) cells.insert({c.square_dx, c.square_dy});
  CHECK(cells.size() == 9);
  for (double x : {100.0, 200.0, 300.0})
    for (double y : {-100.0, 0.0, 100.0}) CHECK(cells.count({x, y}) == 1);
  CHECK(grid[0].position_id == 1);
  CHECK(grid[0].square_dy == 100.0);
  CHECK(grid[0].square_dx == 100.0);
  CHECK(grid[8].position_id == 9);
  CHECK(grid[7].square_dx == 200.0);
  CHECK(grid[7].square_dy == -100.0);
}

TEST_CASE("every grid reflection lands on the cap") {
  const SceneConfig base = Config{}.scene_config();
  const auto renders = render_grid(base, aligned_eye_window(base));
  REQUIRE(renders.size() == 9);
  for (const auto& [img, t] : renders) {
    CHECK(t.square_pixels > 20);
    CHECK(t.rect_pixels > 200);
    CHECK(img.width() == aligned_eye_window(base).w);
  }
  CHECK(renders[7].second.dx == 200.0);
  CHECK(renders[7].second.dy == -100.0);
  CHECK(renders[7].second.position_id == 8);
}

TEST_CASE("windows reproduce the full capture") {
  SceneConfig sc;
  sc.supersampling = 1;
  const RegionOfInterest w{3600, 2400, 64, 48};
  const ImageBuffer win = render(sc, w).first;
  const ImageBuffer full = render(sc).first;
  REQUIRE(full.width() == 7360);
  CHECK(crop(full, w) == win);
}

TEST_CASE("renderer and back-projection are inverse maps") {
  const SceneConfig sc;
  const EyePose pose = sc.true_pose();
  int n = 0;
  for (int v = sc.eye_region.v0; v < sc.eye_region.v0 + sc.eye_region.h; v += 7)
    for (int u = sc.eye_region.u0; u < sc.eye_region.u0 + sc.eye_region.w; u += 7) {
      const auto r = trace_reflection(sc, u, v);
      const auto s = back_project(sc.camera, pose, u, v);
      REQUIRE(r.has_value() == s.has_value());
      if (!r) continue;
      REQUIRE(angle_between(*r, s->reflected) < 1e-6);
      ++n;
    }
  CHECK(n > 10000);
}

TEST_CASE("noise is seeded") {
  SceneConfig sc;
  sc.noise_sigma = 2.0;
  sc.noise_seed = 5;
  const RegionOfInterest w{3600, 2400, 32, 32};
  const ImageBuffer a = render(sc, w).first;
  CHECK(render(sc, w).first == a);
  sc.noise_seed = 6;
  CHECK_FALSE(render(sc, w).first == a);
  sc.noise_sigma = 0.0;
  CHECK_FALSE(render(sc, w).first == a);
}

TEST_CASE("invalid configs are rejected") {
  SceneConfig sc;
  sc.eye_distance = -1;
  CHECK_FALSE(sc.valid());
  try {
    render(sc, RegionOfInterest{0, 0, 8, 8});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.stage() == Stage::Config);
  }
}

}  // TEST_SUITE
