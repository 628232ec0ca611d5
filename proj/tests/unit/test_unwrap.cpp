#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corneal/error.hpp"
#include "corneal/harness.hpp"
#include "corneal/scene.hpp"
#include "corneal/unwrap.hpp"
#include "fixtures.hpp"

using namespace corneal;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Unwrapped {
  std::vector<CornealSample> samples;
  EnvironmentMap map;
};

// Unwrap a window render with the true pose and the analytic ellipse (no estimation).
Unwrapped unwrap_truth(const SceneConfig& sc, int w = 1024, int h = 512) {
  const RegionOfInterest roi = sc.eye_region;
  const ImageBuffer img = render(sc, roi).first;
  const PinholeCamera cam = sc.camera.cropped(roi.u0, roi.v0, roi.w, roi.h);
  Ellipse e = analytic_limbus(sc);
  e.cx -= roi.u0;
  e.cy -= roi.v0;
  Unwrapped out;
  out.samples = corneal_samples(img, e, sc.true_pose(), cam);
  out.map = unwrap(out.samples, w, h);
  return out;
}

double hue_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 360.0 - d);
}

}  // namespace

TEST_SUITE("unwrap") {

TEST_CASE("the specular pole reflects straight back") {
  const EyeConstants k;
  const PinholeCamera cam{34000, 3680, 2456, 7360, 4912};
  const EyePose pose = EyePose::from_axis({0, 0, 400}, -Vec3::UnitZ(), k);
  const auto s = back_project(cam, pose, 3680, 2456);
  REQUIRE(s);
  CHECK((s->reflected - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((s->normal - Vec3(0, 0, -1)).norm() < 1e-12);
  // pixels off the cornea give nothing
  CHECK_FALSE(back_project(cam, pose, 0, 0));
}

TEST_CASE("samples lie on the cornea and obey the mirror law") {
  const Config cfg;
  const SceneConfig sc = cfg.scene_config();
  const auto u = unwrap_truth(sc);
  const EyePose pose = sc.true_pose();
  REQUIRE(u.samples.size() > 100000);
  for (const CornealSample& s : u.samples) {
    REQUIRE(std::abs((s.point - pose.cornea.center).norm() - pose.cornea.radius) < 1e-6);
    const Vec3 in = s.point.normalized();
    REQUIRE(std::abs(angle_between(-in, s.normal) - angle_between(s.reflected, s.normal)) < 1e-9);
    REQUIRE(pose.axis.dot(s.point - pose.limbus_center) >= 0.0);
  }
  SUBCASE("every sample is counted exactly once") {
    CHECK(u.map.total_hits() == u.samples.size());
    CHECK(u.map.observed_count() > 0);
  }
}

TEST_CASE("an inconsistent pose yields no samples") {
  const EyeConstants k;
  const PinholeCamera cam{34000, 3680, 2456, 7360, 4912};
  const EyePose far_away = EyePose::from_axis({500, 0, 400}, -Vec3::UnitZ(), k);
  const ImageBuffer img(7360, 4912);
  try {
    corneal_samples(img, {3680, 2456, 50, 50, 0}, far_away, cam);
    FAIL("expected an unwrap error");
  } catch (const Error& e) {
    CHECK(e.stage() == Stage::Unwrap);
  }
}

TEST_CASE("zero samples make an empty map") {
  const EnvironmentMap m = unwrap({}, 128, 64);
  CHECK(m.observed_count() == 0);
  CHECK(m.filled_count() == 0);
  CHECK(m.width() == 128);
  CHECK_THROWS_AS(unwrap({}, 32, 16), Error);
}

TEST_CASE("texel lookup inverts texel directions") {
  const EnvironmentMap m(1024, 512);
  for (int j = 0; j < 512; j += 7)
    for (int i = 0; i < 1024; i += 13) {
      const auto [a, b] = m.texel_of(m.texel_direction(i, j));
      REQUIRE(a == i);
      REQUIRE(b == j);
    }
  // longitude 0 looks back along -Z, latitude grows with +Y
  CHECK(m.texel_of({0, 0, -1}) == std::pair<int, int>{512, 256});
  CHECK(m.texel_of({0, 0.5, -1}).second > 256);
  CHECK(m.texel_of({0.5, 0, -1}).first > 512);
}

TEST_CASE("doubling the map halves the texel center error") {
  std::mt19937_64 rng(4);
  const EnvironmentMap coarse(256, 128), fine(512, 256);
  double e1 = 0, e2 = 0;
  for (int k = 0; k < 2000; ++k) {
    Vec3 d = fixtures::random_unit(rng);
    if (std::abs(d.y()) > 0.9) continue;  // keep away from the poles
    const auto [i1, j1] = coarse.texel_of(d);
    const auto [i2, j2] = fine.texel_of(d);
    e1 += angle_between(d, coarse.texel_direction(i1, j1));
    e2 += angle_between(d, fine.texel_direction(i2, j2));
  }
  CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("hole filling stays inside the hull of observed texels") {
  std::vector<CornealSample> s;
  EnvironmentMap grid(128, 64);
  for (auto [i, j] : {std::pair{10, 10}, {30, 10}, {10, 30}, {30, 30}}) {
    CornealSample c;
    c.reflected = grid.texel_direction(i, j);
    c.color = {200, 0, 0};
    s.push_back(c);
  }
  const EnvironmentMap m = unwrap(s, 128, 64);
  CHECK(m.observed_count() == 4);
  CHECK(m.covered(20, 20));
  CHECK(m.filled(20, 20));
  CHECK(m.color(20, 20) == Rgb{200, 0, 0});
  CHECK_FALSE(m.covered(31, 20));
  CHECK_FALSE(m.covered(40, 40));
  CHECK(m.filled_count() == 21 * 21 - 4);
}

TEST_CASE("red half-plane unwraps to a contiguous band of red") {
  Config cfg;
  SceneConfig sc = cfg.scene_config();
  sc.tilt = 0.0;
  sc.reflectivity = 1.0;
  sc.rect_x = -1e6;  // covers every plane point left of x = 0, even at grazing angles
  sc.rect_y = 0.0;
  sc.rect_width = 2e6;
  sc.rect_height = 4e6;
  sc.square_dx = 10000.0;
  const auto u = unwrap_truth(sc);
  const ColorBlobSpec red = cfg.rect_spec;
  int red_rows = 0;
  for (int j = 0; j < u.map.height(); ++j) {
    int first = -1, last = -1, count = 0;
    for (int i = 0; i < u.map.width(); ++i) {
      if (u.map.hits(i, j) == 0) continue;
      const Hsv h = rgb_to_hsv(u.map.color(i, j));
      if (!red.matches(h)) continue;
      if (first < 0) first = i;
      last = i;
      ++count;
      if (h.s > 0.9) REQUIRE(hue_distance(h.h, rgb_to_hsv(sc.rect_color).h) < 2.0);
    }
    if (count == 0) continue;
    ++red_rows;
    // red band in the left half of the view; no observed non-red texel inside it
    for (int i = first; i <= last; ++i) {
      if (u.map.hits(i, j) > 0) REQUIRE(red.matches(rgb_to_hsv(u.map.color(i, j))));
    }
    CHECK(u.map.texel_direction(first, j).x() < 0.0);
  }
  CHECK(red_rows > 50);
}

TEST_CASE("a small square sends its reflection through the brightest sample") {
  Config cfg;
  SceneConfig sc = cfg.scene_config();
  sc.rect_x = 5000.0;  // rectangle out of view
  sc.square_dx = -5000.0 + 40.0;
  sc.square_dy = 20.0;
  sc.square_size = 3.0;
  sc.square_color = {255, 255, 255};
  const auto u = unwrap_truth(sc);
  const CornealSample* best = nullptr;
  double best_luma = -1;
  for (const CornealSample& s : u.samples) {
    if (luma(s.color) > best_luma) {
      best_luma = luma(s.color);
      best = &s;
    }
  }
  REQUIRE(best);
  const Vec3 q(40.0, -(sc.rect_y + 20.0), sc.plane_z);  // plane y points up, camera y down
  const Vec3 d = q - best->point;
  const double miss = (d - d.dot(best->reflected) * best->reflected).norm();
  CHECK(miss < 2.0);
}

TEST_CASE("blob centroids keep their analytic angular separation") {
  const Config cfg;
  const SceneConfig sc = cfg.scene_config();
  const auto u = unwrap_truth(sc);
  const auto found = detect_objects(u.map, {cfg.rect_spec, cfg.square_spec});
  const auto& rect = std::get<ObjectDetection>(found[0]);
  const auto& square = std::get<ObjectDetection>(found[1]);
  const Vec3 rc(sc.rect_x, -sc.rect_y, sc.plane_z);
  const Vec3 qc(sc.rect_x + sc.square_dx, -(sc.rect_y + sc.square_dy), sc.plane_z);
  const double expected = angle_between((rc - rect.origin).normalized(), (qc - square.origin).normalized());
  const double measured = angle_between(rect.direction, square.direction);
  const double texel = 2.0 * std::numbers::pi / u.map.width();
  CHECK(std::abs(measured - expected) < 2.0 * texel);
}

TEST_CASE("angular resolution at full and lowest scale") {
  const Config cfg;
  const SceneConfig sc = cfg.scene_config();
  const EyePose pose = sc.true_pose();
  const Ellipse e = analytic_limbus(sc);
  const double full = angular_resolution(e, pose, cfg.camera);
  CHECK(full > 0.08);
  CHECK(full < 0.2);
  const double s = 0.125;
  const Ellipse small{(e.cx + 0.5) * s - 0.5, (e.cy + 0.5) * s - 0.5, e.a * s, e.b * s, e.theta};
  const double low = angular_resolution(small, pose, cfg.camera.scaled(s));
  CHECK(low > 0.6);
  CHECK(low < 1.6);
  CHECK(low / full == doctest::Approx(8.0).epsilon(0.1));
  const Ellipse half{(e.cx + 0.5) * 0.5 - 0.5, (e.cy + 0.5) * 0.5 - 0.5, e.a * 0.5, e.b * 0.5, e.theta};
  CHECK(angular_resolution(half, pose, cfg.camera.scaled(0.5)) / full == doctest::Approx(2.0).epsilon(0.05));
}

}  // TEST_SUITE
