#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corneal/error.hpp"
#include "corneal/geometry.hpp"
#include "fixtures.hpp"

using namespace corneal;

namespace {

const PinholeCamera kCam{28800.0, 3680.0, 2456.0, 7360, 4912};

double distance_to_ray(const Ray& r, const Vec3& p) {
  const Vec3 d = p - r.origin;
  return (d - d.dot(r.dir) * r.dir).norm();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("project: on-axis point lands on the principal point") {
  const Vec2 uv = project(kCam, {0, 0, 400});
  CHECK(uv.x() == doctest::Approx(3680.0));
  CHECK(uv.y() == doctest::Approx(2456.0));
}

TEST_CASE("project: limbus edge at 400 mm") {
  const PinholeCamera cam{28800.0, 0.0, 0.0, 100, 100};
  const Vec2 uv = project(cam, {5.55, 0, 400});
  CHECK(uv.x() == doctest::Approx(399.6).epsilon(1e-12));
  CHECK(uv.y() == 0.0);
}

TEST_CASE("project: points at or behind the pinhole are rejected") {
  for (double z : {0.0, 1e-10, -5.0}) {
    try {
      project(kCam, {1, 1, z});
      FAIL("expected a geometry error");
    } catch (const Error& e) {
      CHECK(e.stage() == Stage::Geometry);
    }
  }
}

TEST_CASE("pixel_ray: principal point and 45 degree ray") {
  const Ray axis = pixel_ray(kCam, kCam.px, kCam.py);
  CHECK((axis.dir - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(axis.origin.norm() == 0.0);
  const Ray diag = pixel_ray(kCam, kCam.px + kCam.f, kCam.py);
  CHECK((diag.dir - Vec3(1, 0, 1).normalized()).norm() < 1e-12);
}

TEST_CASE("pixel_ray: projective scale invariance") {
  const Ray r = pixel_ray(kCam, 1234.25, 987.5);
  for (double t : {1.0, 17.0, 400.0, 1e5}) {
    const Vec2 uv = project(kCam, t * r.dir);
    CHECK(uv.x() == doctest::Approx(1234.25).epsilon(1e-12));
    CHECK(uv.y() == doctest::Approx(987.5).epsilon(1e-12));
  }
}

TEST_CASE("projection round trip, 1000 random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> z(100, 1000), xy(-0.2, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const double zz = z(rng);
    const Vec3 p(xy(rng) * zz, xy(rng) * zz, zz);
    const Ray r = pixel_ray(kCam, project(kCam, p).x(), project(kCam, p).y());
    REQUIRE(distance_to_ray(r, p) < 1e-6);
    REQUIRE((r.dir - p.normalized()).norm() < 1e-9);
  }
}

TEST_CASE("scaled camera sees the ray through the box center") {
  for (double s : {0.5, 0.25, 0.125}) {
    const PinholeCamera c = kCam.scaled(s);
    const int k = static_cast<int>(std::lround(1.0 / s));
    // Scaled pixel (3, 7) averages full pixels [3k, 4k) x [7k, 8k).
    const double u = 3 * k + (k - 1) / 2.0, v = 7 * k + (k - 1) / 2.0;
    CHECK((pixel_ray(c, 3, 7).dir - pixel_ray(kCam, u, v).dir).norm() < 1e-12);
  }
  const PinholeCamera crop = kCam.cropped(100, 50, 20, 30);
  CHECK(crop.width == 20);
  CHECK((pixel_ray(crop, 0, 0).dir - pixel_ray(kCam, 100, 50).dir).norm() < 1e-15);
}

TEST_CASE("reflect: head-on and 45 degree mirror") {
  CHECK((reflect({0, 0, 1}, {0, 0, -1}) - Vec3(0, 0, -1)).norm() < 1e-15);
  const double h = 1.0 / std::sqrt(2.0);
  CHECK((reflect({1, 0, 0}, {-h, 0, -h}) - Vec3(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("reflection law, 1000 random pairs") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 i = fixtures::random_unit(rng);
    Vec3 n = fixtures::random_unit(rng);
    if (n.dot(i) > 0) n = -n;
    const Vec3 r = reflect(i, n);
    REQUIRE(std::abs(r.norm() - 1.0) < 1e-9);
    REQUIRE(std::abs(angle_between(-i, n) - angle_between(r, n)) < 1e-9);
    // coplanar with i and n
    REQUIRE(std::abs(r.dot(i.cross(n))) < 1e-9);
  }
}

TEST_CASE("intersect_sphere: near pole hit and a miss") {
  const Sphere s{{0, 0, 400}, 7.8};
  const auto hit = intersect_sphere({Vec3::Zero(), Vec3::UnitZ()}, s);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(392.2).epsilon(1e-14));
  CHECK((hit->normal - Vec3(0, 0, -1)).norm() < 1e-15);
  CHECK_FALSE(intersect_sphere({Vec3::Zero(), Vec3::UnitY()}, s));
  // behind the origin
  CHECK_FALSE(intersect_sphere({Vec3::Zero(), -Vec3::UnitZ()}, s));
}

TEST_CASE("sphere membership, 1000 random hitting rays") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1), rad(1, 20), dist(50, 800);
  int hits = 0;
  for (int k = 0; k < 1000; ++k) {
    const Sphere s{Vec3(u(rng) * 50, u(rng) * 50, dist(rng)), rad(rng)};
    // aim at a random point inside the sphere so that the ray always hits
    const Vec3 target = s.center + 0.99 * s.radius * std::abs(u(rng)) * fixtures::random_unit(rng);
    const Vec3 origin(u(rng) * 10, u(rng) * 10, u(rng) * 10);
    const auto hit = intersect_sphere({origin, (target - origin).normalized()}, s);
    REQUIRE(hit);
    ++hits;
    REQUIRE(std::abs((hit->point - s.center).norm() - s.radius) < 1e-9);
    REQUIRE((hit->normal - (hit->point - s.center) / s.radius).norm() < 1e-9);
  }
  CHECK(hits == 1000);
}

TEST_CASE("conic of a circle has A == C and B == 0") {
  for (double th : {0.0, 0.7, 2.5}) {
    const Conic q = to_conic({0, 0, 100, 100, th});
    CHECK(q[0] == doctest::Approx(q[2]).epsilon(1e-12));
    CHECK(std::abs(q[1]) < 1e-12 * std::abs(q[0]));
  }
}

TEST_CASE("conic round trip of a tilted ellipse") {
  const Ellipse e{500, 500, 200, 160, 0.3};
  const auto back = from_conic(to_conic(e));
  REQUIRE(back);
  CHECK(back->cx == doctest::Approx(500).epsilon(1e-6));
  CHECK(back->cy == doctest::Approx(500).epsilon(1e-6));
  CHECK(back->a == doctest::Approx(200).epsilon(1e-6));
  CHECK(back->b == doctest::Approx(160).epsilon(1e-6));
  CHECK(back->theta == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("hyperbolas and parabolas are not ellipses") {
  CHECK_FALSE(from_conic({1, 0, -1, 0, 0, -1}));  // u^2 - v^2 = 1
  CHECK_FALSE(from_conic({1, 2, 1, 0, 0, -1}));   // (u + v)^2 = 1
  CHECK_FALSE(from_conic({1, 0, 1, 0, 0, 1}));    // imaginary circle
}

TEST_CASE("conic round trip, 1000 random ellipses") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> c(-2000, 8000), ax(5, 900), ratio(0.05, 1.0), th(0, std::numbers::pi);
  for (int k = 0; k < 1000; ++k) {
    Ellipse e{c(rng), c(rng), ax(rng), 0, th(rng)};
    e.b = e.a * ratio(rng);
    const auto back = from_conic(to_conic(e));
    REQUIRE(back);
    const double scale = std::max({std::abs(e.cx), std::abs(e.cy), e.a});
    REQUIRE(std::abs(back->cx - e.cx) < 1e-6 * scale);
    REQUIRE(std::abs(back->cy - e.cy) < 1e-6 * scale);
    REQUIRE(std::abs(back->a - e.a) < 1e-6 * e.a);
    REQUIRE(std::abs(back->b - e.b) < 1e-6 * e.a);
    if (e.b < 0.99 * e.a) {
      double dth = std::abs(back->theta - e.theta);
      dth = std::min(dth, std::numbers::pi - dth);
      REQUIRE(dth < 1e-6);
    }
  }
}

TEST_CASE("normalized conic is negative inside and zero on the boundary") {
  const Ellipse e{10, -4, 30, 12, 1.1};
  const Conic q = normalize_conic(to_conic(e));
  double norm = 0;
  for (double v : q) norm += v * v;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0));
  CHECK(conic_value(q, e.cx, e.cy) < 0.0);
  for (double t = 0; t < 6.28; t += 0.5) {
    const Vec2 p = ellipse_point(e, t);
    CHECK(std::abs(conic_value(q, p.x(), p.y())) < 1e-9);
    // outward gradient
    CHECK(conic_gradient(q, p.x(), p.y()).dot(p - Vec2(e.cx, e.cy)) > 0.0);
  }
}

TEST_CASE("angle_between stays accurate near 0 and pi") {
  const Vec3 a = Vec3::UnitZ();
  const Vec3 b = Vec3(1e-9, 0, 1).normalized();
  CHECK(angle_between(a, b) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(angle_between(a, -b) == doctest::Approx(std::numbers::pi - 1e-9).epsilon(1e-15));
}

}  // TEST_SUITE
