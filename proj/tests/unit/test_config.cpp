#include <doctest.h>

#include <filesystem>
#include <set>

#include "corneal/config.hpp"
#include "corneal/error.hpp"
#include "corneal/serialize.hpp"

using namespace corneal;

TEST_SUITE("config") {

TEST_CASE("every key is documented and unique") {
  std::set<std::string> names;
  for (const ConfigKey& k : config_keys()) {
    CHECK_FALSE(k.help.empty());
    CHECK(names.insert(k.name).second);
  }
  for (const char* must : {"camera.f", "roi", "limbus.iterations", "unwrap.width", "objects.rect.width_mm",
                           "objects.square.hue_lo_deg", "protocol.scales", "protocol.runs", "oracle.noise_sigma"}) {
    CHECK(names.count(must) == 1);
  }
}

TEST_CASE("dump and parse round trip") {
  Config c;
  c.camera.f = 30000;
  c.scales = {1.0, 0.5};
  c.roi.reset();
  c.scene.rect_color = {1, 2, 3};
  const std::string text = dump_config(c);
  const Config back = parse_config(text);
  CHECK(dump_config(back) == text);
  CHECK(back.camera.f == 30000);
  CHECK_FALSE(back.roi.has_value());
  CHECK(back.scene.rect_color == Rgb{1, 2, 3});
}

TEST_CASE("defaults survive a round trip bit for bit") {
  CHECK(dump_config(parse_config(dump_config(Config{}))) == dump_config(Config{}));
}

TEST_CASE("comments, blanks and overrides") {
  Config c = parse_config("# header\n\ncamera.f = 12345  # trailing\nprotocol.runs=3\n");
  CHECK(c.camera.f == 12345);
  CHECK(c.runs == 3);
  apply_override(c, "roi=10,20,300,400");
  REQUIRE(c.roi);
  CHECK(c.roi->u0 == 10);
  CHECK(c.roi->h == 400);
  apply_override(c, "protocol.scales = 1, 0.25");
  CHECK(c.scales == std::vector<double>{1.0, 0.25});
  apply_override(c, "limbus.gradient_threshold = 51");
  CHECK(c.limbus.gradient_threshold == doctest::Approx(0.2));
}

TEST_CASE("bad input is a config error") {
  for (const char* bad : {"nonsense.key = 1", "camera.f = abc", "camera.f", "protocol.runs = 2.5",
                          "oracle.rect_color = 1,2", "roi = 1,2,3", "protocol.scales = "}) {
    try {
      parse_config(bad);
      FAIL("accepted: " << std::string(bad));
    } catch (const Error& e) {
      CHECK(e.stage() == Stage::Config);
    }
  }
  CHECK_THROWS_AS(load_config("/nonexistent/corneal.cfg"), Error);
}

TEST_CASE("validation") {
  Config c;
  CHECK_NOTHROW(c.validate());
  c.scales = {0.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = Config{};
  c.runs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = Config{};
  c.eye.limbus_radius = 9.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("shared settings reach the oracle") {
  Config c;
  c.camera.f = 30000;
  c.eye.cornea_radius = 8.0;
  c.rect_width = 50;
  const SceneConfig sc = c.scene_config();
  CHECK(sc.camera.f == 30000);
  CHECK(sc.eye.cornea_radius == 8.0);
  CHECK(sc.rect_width == 50);
  CHECK(sc.eye_region.u0 == c.roi->u0);
}

TEST_CASE("the shipped config file matches the defaults") {
  const auto path = std::filesystem::path(CORNEAL_SOURCE_DIR) / "config" / "default.cfg";
  REQUIRE(std::filesystem::exists(path));
  CHECK(dump_config(load_config(path)) == dump_config(Config{}));
  // loading over a modified base must reset every key
  Config odd;
  odd.camera.f = 1;
  odd.runs = 99;
  CHECK(dump_config(load_config(path, odd)) == dump_config(Config{}));
}

TEST_CASE("pose and ellipse JSON") {
  const EyePose p = EyePose::from_axis({1, 2, 400}, Vec3(0.1, 0.2, -1).normalized(), EyeConstants{});
  const Json j = to_json(p);
  CHECK(j.contains("L"));
  CHECK(j.contains("g"));
  CHECK(j.contains("C"));
  CHECK(j["r_C"] == 7.8);
  const EyePose back = pose_from_json(j);
  CHECK(back.limbus_center == p.limbus_center);
  CHECK(back.axis == p.axis);
  const Ellipse e{1, 2, 30, 20, 0.5};
  const Ellipse eb = ellipse_from_json(to_json(e));
  CHECK(eb.a == 30);
  CHECK(eb.theta == 0.5);
}

}  // TEST_SUITE
