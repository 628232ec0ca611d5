#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "corneal/error.hpp"
#include "corneal/imaging.hpp"

using namespace corneal;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "corneal_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ImageBuffer random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  ImageBuffer img(w, h);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(d(rng));
  return img;
}

double mean_gray(const ImageBuffer& img) {
  double s = 0;
  for (auto b : img.data()) s += b;
  return s / static_cast<double>(img.data().size());
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("png and ppm round trips are lossless") {
  const ImageBuffer img = random_image(16, 16, 3);
  for (const char* name : {"rt.png", "rt.ppm"}) {
    const auto p = temp_path(name);
    save_image(img, p);
    CHECK(load_image(p) == img);
  }
}

TEST_CASE("format is detected from content, not the extension") {
  const ImageBuffer img = random_image(9, 5, 4);
  const auto p = temp_path("really_a_png.ppm.bin");
  save_image(img, temp_path("tmp.png"));
  std::filesystem::copy_file(temp_path("tmp.png"), p, std::filesystem::copy_options::overwrite_existing);
  CHECK(load_image(p) == img);
}

TEST_CASE("load errors") {
  try {
    load_image(temp_path("does_not_exist.png"));
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.stage() == Stage::Io);
  }
  const auto junk = temp_path("junk.png");
  std::ofstream(junk) << "not an image at all";
  CHECK_THROWS_AS(load_image(junk), Error);
  const auto truncated = temp_path("trunc.ppm");
  std::ofstream(truncated, std::ios::binary) << "P6\n10 10\n255\n" << std::string(20, 'x');
  CHECK_THROWS_AS(load_image(truncated), Error);
}

TEST_CASE("a full-size capture keeps its dimensions") {
  const ImageBuffer img(7360, 4912, Rgb{70, 70, 70});
  const auto p = temp_path("full.png");
  save_image(img, p);
  const ImageBuffer back = load_image(p);
  CHECK(back.width() == 7360);
  CHECK(back.height() == 4912);
}

TEST_CASE("rescale sizes of the eye region") {
  const ImageBuffer img(1000, 1000, Rgb{1, 2, 3});
  CHECK(rescale(img, 0.5).width() == 500);
  CHECK(rescale(img, 0.25).height() == 250);
  const ImageBuffer small = rescale(img, 0.125);
  CHECK(small.width() == 125);
  CHECK(small.height() == 125);
  CHECK(small.scale() == 0.125);
}

TEST_CASE("rescale keeps constants, identity at 1 and the mean") {
  const ImageBuffer flat(64, 64, Rgb{200, 10, 99});
  for (double f : {1.0, 0.5, 0.25, 0.125}) {
    const ImageBuffer r = rescale(flat, f);
    for (int v = 0; v < r.height(); ++v)
      for (int u = 0; u < r.width(); ++u) REQUIRE(r.at(u, v) == Rgb{200, 10, 99});
  }
  const ImageBuffer img = random_image(128, 96, 5);
  CHECK(rescale(img, 1.0) == img);
  for (double f : {0.5, 0.25, 0.125}) CHECK(std::abs(mean_gray(rescale(img, f)) - mean_gray(img)) <= 1.0);
}

TEST_CASE("rescale box average of a 2x2 block") {
  ImageBuffer img(16, 16, Rgb{0, 0, 0});
  img.set(0, 0, {100, 0, 0});
  img.set(1, 0, {100, 0, 0});
  const ImageBuffer r = rescale(img, 0.5);
  CHECK(r.at(0, 0).r == 50);
  CHECK(r.at(1, 0).r == 0);
}

TEST_CASE("rescale rejects tiny outputs and bad factors") {
  CHECK_THROWS_AS(rescale(ImageBuffer(56, 56), 0.125), Error);
  CHECK_THROWS_AS(rescale(ImageBuffer(64, 64), 0.0), Error);
  CHECK_THROWS_AS(rescale(ImageBuffer(64, 64), 1.5), Error);
}

TEST_CASE("crop and out-of-bounds regions") {
  ImageBuffer img(20, 10);
  img.set(5, 3, {1, 2, 3});
  const ImageBuffer c = crop(img, {5, 3, 4, 4});
  CHECK(c.width() == 4);
  CHECK(c.at(0, 0) == Rgb{1, 2, 3});
  CHECK_THROWS_AS(crop(img, {18, 0, 4, 4}), Error);
  CHECK_THROWS_AS(crop(img, {-1, 0, 4, 4}), Error);
}

TEST_CASE("hsv of pure colors and gray") {
  Hsv h = rgb_to_hsv({255, 0, 0});
  CHECK(h.h == 0.0);
  CHECK(h.s == 1.0);
  CHECK(h.v == 1.0);
  h = rgb_to_hsv({0, 0, 255});
  CHECK(h.h == doctest::Approx(240.0));
  CHECK(h.s == 1.0);
  h = rgb_to_hsv({128, 128, 128});
  CHECK(h.h == 0.0);
  CHECK(h.s == 0.0);
  CHECK(h.v == doctest::Approx(0.502).epsilon(1e-3));
  // hues just below red wrap to [0, 360)
  h = rgb_to_hsv({255, 0, 1});
  CHECK(h.h > 359.0);
  CHECK(h.h < 360.0);
}

TEST_CASE("hsv round trip on pure hues") {
  for (int deg = 0; deg < 360; ++deg) {
    const Rgb c = hsv_to_rgb({static_cast<double>(deg), 1.0, 1.0});
    const Rgb back = hsv_to_rgb(rgb_to_hsv(c));
    REQUIRE(std::abs(c.r - back.r) <= 1);
    REQUIRE(std::abs(c.g - back.g) <= 1);
    REQUIRE(std::abs(c.b - back.b) <= 1);
  }
}

TEST_CASE("region scaling") {
  const RegionOfInterest r{3180, 1956, 1000, 1000};
  const RegionOfInterest s = r.scaled(0.125);
  CHECK(s.w == 125);
  CHECK(s.h == 125);
  CHECK(r.inside(7360, 4912));
  CHECK_FALSE(r.inside(4000, 2000));
}

}  // TEST_SUITE
