#include "corneal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "corneal/error.hpp"

namespace corneal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw Error(Stage::Config, "config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(Stage::Config, "config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error(Stage::Config, "config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw Error(Stage::Config, "config key '" + key + "': expected at least one number");
  return out;
}

Rgb to_rgb(const std::string& key, const std::string& text) {
  const auto v = to_list(key, text);
  if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](double c) { return c < 0 || c > 255 || c != std::floor(c); })) {
    throw Error(Stage::Config, "config key '" + key + "': expected r,g,b in 0..255");
  }
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
}

std::string from_rgb(Rgb c) {
  return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

std::string from_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

constexpr double kDeg = std::numbers::pi / 180.0;

ConfigKey num(std::string name, std::string help, double Config::*field) {
  return {name, help, [field](const Config& c) { return fmt(c.*field); },
          [field, name](Config& c, const std::string& v) { c.*field = to_double(name, v); }};
}

template <typename Get, typename Set>
ConfigKey key(std::string name, std::string help, Get get, Set set) {
  return {std::move(name), std::move(help), std::function<std::string(const Config&)>(get),
          std::function<void(Config&, const std::string&)>(set)};
}

void add_blob_keys(std::vector<ConfigKey>& keys, const std::string& prefix, ColorBlobSpec Config::*spec) {
  keys.push_back(key(prefix + ".name", "label reported for the detection",
                     [spec](const Config& c) { return (c.*spec).name; },
                     [spec](Config& c, const std::string& v) { (c.*spec).name = trim(v); }));
  keys.push_back(key(prefix + ".hue_lo_deg", "lower hue bound (wraps through 0 when above hue_hi)",
                     [spec](const Config& c) { return fmt((c.*spec).hue_lo); },
                     [spec, prefix](Config& c, const std::string& v) { (c.*spec).hue_lo = to_double(prefix, v); }));
  keys.push_back(key(prefix + ".hue_hi_deg", "upper hue bound",
                     [spec](const Config& c) { return fmt((c.*spec).hue_hi); },
                     [spec, prefix](Config& c, const std::string& v) { (c.*spec).hue_hi = to_double(prefix, v); }));
  keys.push_back(key(prefix + ".s_min", "minimum HSV saturation",
                     [spec](const Config& c) { return fmt((c.*spec).s_min); },
                     [spec, prefix](Config& c, const std::string& v) { (c.*spec).s_min = to_double(prefix, v); }));
  keys.push_back(key(prefix + ".v_min", "minimum HSV value",
                     [spec](const Config& c) { return fmt((c.*spec).v_min); },
                     [spec, prefix](Config& c, const std::string& v) { (c.*spec).v_min = to_double(prefix, v); }));
  keys.push_back(key(prefix + ".min_area", "minimum component size, texels",
                     [spec](const Config& c) { return std::to_string((c.*spec).min_area); },
                     [spec, prefix](Config& c, const std::string& v) { (c.*spec).min_area = static_cast<int>(to_int(prefix, v)); }));
}

ConfigKey scene_num(std::string name, std::string help, double SceneConfig::*field, double unit = 1.0) {
  return key(name, help, [field, unit](const Config& c) { return fmt(c.scene.*field / unit); },
             [field, unit, name](Config& c, const std::string& v) { c.scene.*field = to_double(name, v) * unit; });
}

ConfigKey scene_rgb(std::string name, std::string help, Rgb SceneConfig::*field) {
  return key(name, help, [field](const Config& c) { return from_rgb(c.scene.*field); },
             [field, name](Config& c, const std::string& v) { c.scene.*field = to_rgb(name, v); });
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> k;
  k.push_back(key("camera.f", "focal length of the full capture, px",
                  [](const Config& c) { return fmt(c.camera.f); },
                  [](Config& c, const std::string& v) { c.camera.f = to_double("camera.f", v); }));
  k.push_back(key("camera.px", "principal point x, px", [](const Config& c) { return fmt(c.camera.px); },
                  [](Config& c, const std::string& v) { c.camera.px = to_double("camera.px", v); }));
  k.push_back(key("camera.py", "principal point y, px", [](const Config& c) { return fmt(c.camera.py); },
                  [](Config& c, const std::string& v) { c.camera.py = to_double("camera.py", v); }));
  k.push_back(key("camera.width", "capture width, px", [](const Config& c) { return std::to_string(c.camera.width); },
                  [](Config& c, const std::string& v) { c.camera.width = static_cast<int>(to_int("camera.width", v)); }));
  k.push_back(key("camera.height", "capture height, px", [](const Config& c) { return std::to_string(c.camera.height); },
                  [](Config& c, const std::string& v) { c.camera.height = static_cast<int>(to_int("camera.height", v)); }));
  k.push_back(key("eye.cornea_radius_mm", "corneal sphere radius r_C",
                  [](const Config& c) { return fmt(c.eye.cornea_radius); },
                  [](Config& c, const std::string& v) { c.eye.cornea_radius = to_double("eye.cornea_radius_mm", v); }));
  k.push_back(key("eye.limbus_radius_mm", "limbus radius r_L",
                  [](const Config& c) { return fmt(c.eye.limbus_radius); },
                  [](Config& c, const std::string& v) { c.eye.limbus_radius = to_double("eye.limbus_radius_mm", v); }));
  k.push_back(key("eye.eyeball_radius_mm", "eyeball sphere radius (rendering only)",
                  [](const Config& c) { return fmt(c.eye.eyeball_radius); },
                  [](Config& c, const std::string& v) { c.eye.eyeball_radius = to_double("eye.eyeball_radius_mm", v); }));
  k.push_back(key("roi", "eye region u0,v0,w,h in full-capture px, or 'none' for the centered square",
                  [](const Config& c) {
                    if (!c.roi) return std::string("none");
                    return std::to_string(c.roi->u0) + "," + std::to_string(c.roi->v0) + "," +
                           std::to_string(c.roi->w) + "," + std::to_string(c.roi->h);
                  },
                  [](Config& c, const std::string& v) {
                    if (trim(v) == "none") {
                      c.roi.reset();
                      return;
                    }
                    const auto l = to_list("roi", v);
                    if (l.size() != 4) throw Error(Stage::Config, "config key 'roi': expected u0,v0,w,h");
                    c.roi = RegionOfInterest{static_cast<int>(l[0]), static_cast<int>(l[1]), static_cast<int>(l[2]),
                                             static_cast<int>(l[3])};
                  }));

  k.push_back(key("limbus.iterations", "RANSAC iterations",
                  [](const Config& c) { return std::to_string(c.limbus.iterations); },
                  [](Config& c, const std::string& v) { c.limbus.iterations = static_cast<int>(to_int("limbus.iterations", v)); }));
  k.push_back(key("limbus.inlier_threshold_px", "inlier distance at full scale; multiplied by the image scale",
                  [](const Config& c) { return fmt(c.limbus.inlier_threshold); },
                  [](Config& c, const std::string& v) { c.limbus.inlier_threshold = to_double("limbus.inlier_threshold_px", v); }));
  k.push_back(key("limbus.inlier_threshold_floor_px", "lower bound of the scaled inlier distance",
                  [](const Config& c) { return fmt(c.limbus.inlier_threshold_floor); },
                  [](Config& c, const std::string& v) { c.limbus.inlier_threshold_floor = to_double("limbus.inlier_threshold_floor_px", v); }));
  k.push_back(key("limbus.min_inlier_fraction", "minimum inliers / edge points for a detection",
                  [](const Config& c) { return fmt(c.limbus.min_inlier_fraction); },
                  [](Config& c, const std::string& v) { c.limbus.min_inlier_fraction = to_double("limbus.min_inlier_fraction", v); }));
  k.push_back(key("limbus.gradient_threshold", "edge magnitude threshold, gray levels (0..255)",
                  [](const Config& c) { return fmt(c.limbus.gradient_threshold * 255.0); },
                  [](Config& c, const std::string& v) { c.limbus.gradient_threshold = to_double("limbus.gradient_threshold", v) / 255.0; }));
  k.push_back(key("limbus.r_min_fraction", "smallest semi-axis as a fraction of min(w, h) of the eye region",
                  [](const Config& c) { return fmt(c.limbus.r_min_fraction); },
                  [](Config& c, const std::string& v) { c.limbus.r_min_fraction = to_double("limbus.r_min_fraction", v); }));
  k.push_back(key("limbus.r_max_fraction", "largest semi-axis as a fraction of min(w, h) of the eye region",
                  [](const Config& c) { return fmt(c.limbus.r_max_fraction); },
                  [](Config& c, const std::string& v) { c.limbus.r_max_fraction = to_double("limbus.r_max_fraction", v); }));
  k.push_back(key("limbus.max_normal_angle_deg", "largest angle between edge gradient and ellipse normal (>=180 disables)",
                  [](const Config& c) { return fmt(c.limbus.max_normal_angle_deg); },
                  [](Config& c, const std::string& v) { c.limbus.max_normal_angle_deg = to_double("limbus.max_normal_angle_deg", v); }));

  k.push_back(key("unwrap.width", "environment map width, texels",
                  [](const Config& c) { return std::to_string(c.map_width); },
                  [](Config& c, const std::string& v) { c.map_width = static_cast<int>(to_int("unwrap.width", v)); }));
  k.push_back(key("unwrap.height", "environment map height, texels",
                  [](const Config& c) { return std::to_string(c.map_height); },
                  [](Config& c, const std::string& v) { c.map_height = static_cast<int>(to_int("unwrap.height", v)); }));

  add_blob_keys(k, "objects.rect", &Config::rect_spec);
  k.push_back(num("objects.rect.width_mm", "physical rectangle width", &Config::rect_width));
  k.push_back(num("objects.rect.height_mm", "physical rectangle height", &Config::rect_height));
  add_blob_keys(k, "objects.square", &Config::square_spec);

  k.push_back(key("protocol.scales", "comma-separated rescale factors",
                  [](const Config& c) { return from_list(c.scales); },
                  [](Config& c, const std::string& v) { c.scales = to_list("protocol.scales", v); }));
  k.push_back(key("protocol.runs", "RANSAC repetitions per image and scale",
                  [](const Config& c) { return std::to_string(c.runs); },
                  [](Config& c, const std::string& v) { c.runs = static_cast<int>(to_int("protocol.runs", v)); }));
  k.push_back(key("protocol.base_seed", "seed of record 0; record i uses base_seed + i",
                  [](const Config& c) { return std::to_string(c.base_seed); },
                  [](Config& c, const std::string& v) { c.base_seed = static_cast<std::uint64_t>(to_int("protocol.base_seed", v)); }));
  k.push_back(key("protocol.threads", "worker threads for evaluate (results do not depend on it)",
                  [](const Config& c) { return std::to_string(c.threads); },
                  [](Config& c, const std::string& v) { c.threads = static_cast<int>(to_int("protocol.threads", v)); }));

  k.push_back(scene_num("oracle.eye_distance_mm", "pinhole to limbus center depth", &SceneConfig::eye_distance));
  k.push_back(scene_num("oracle.tilt_deg", "angle between the optical axis and -Z", &SceneConfig::tilt, kDeg));
  k.push_back(scene_num("oracle.tilt_azimuth_deg", "image-plane direction of the tilt (0 = +x, 90 = down)",
                        &SceneConfig::tilt_azimuth, kDeg));
  k.push_back(scene_num("oracle.lateral_x_mm", "limbus center x", &SceneConfig::lateral_x));
  k.push_back(scene_num("oracle.lateral_y_mm", "limbus center y (camera frame, down)", &SceneConfig::lateral_y));
  k.push_back(scene_num("oracle.plane_z_mm", "camera-frame depth of the object plane", &SceneConfig::plane_z));
  k.push_back(scene_num("oracle.rect_x_mm", "rectangle midpoint x (plane axes)", &SceneConfig::rect_x));
  k.push_back(scene_num("oracle.rect_y_mm", "rectangle midpoint y (plane axes, up)", &SceneConfig::rect_y));
  k.push_back(scene_num("oracle.square_dx_mm", "square offset from the rectangle, x", &SceneConfig::square_dx));
  k.push_back(scene_num("oracle.square_dy_mm", "square offset from the rectangle, y (up)", &SceneConfig::square_dy));
  k.push_back(scene_num("oracle.square_size_mm", "square edge length", &SceneConfig::square_size));
  k.push_back(scene_rgb("oracle.rect_color", "rectangle r,g,b", &SceneConfig::rect_color));
  k.push_back(scene_rgb("oracle.square_color", "square r,g,b", &SceneConfig::square_color));
  k.push_back(scene_rgb("oracle.plane_color", "object plane r,g,b", &SceneConfig::plane_color));
  k.push_back(scene_rgb("oracle.background_color", "skin around the eye r,g,b", &SceneConfig::background_color));
  k.push_back(scene_rgb("oracle.sclera_color", "sclera r,g,b", &SceneConfig::sclera_color));
  k.push_back(scene_rgb("oracle.iris_color", "iris r,g,b (mixed into the reflection)", &SceneConfig::iris_color));
  k.push_back(scene_rgb("oracle.ring_color", "limbal ring r,g,b", &SceneConfig::ring_color));
  k.push_back(scene_num("oracle.reflectivity", "weight of the reflected scene over the iris, (0, 1]", &SceneConfig::reflectivity));
  k.push_back(scene_num("oracle.ring_width_px", "limbal ring width", &SceneConfig::ring_width));
  k.push_back(scene_num("oracle.brightness", "scale of the reflected scene radiance", &SceneConfig::brightness));
  k.push_back(key("oracle.supersampling", "samples per pixel axis inside the eye region",
                  [](const Config& c) { return std::to_string(c.scene.supersampling); },
                  [](Config& c, const std::string& v) { c.scene.supersampling = static_cast<int>(to_int("oracle.supersampling", v)); }));
  k.push_back(scene_num("oracle.noise_sigma", "additive Gaussian pixel noise, gray levels", &SceneConfig::noise_sigma));
  k.push_back(key("oracle.noise_seed", "seed of the pixel noise",
                  [](const Config& c) { return std::to_string(c.scene.noise_seed); },
                  [](Config& c, const std::string& v) { c.scene.noise_seed = static_cast<std::uint64_t>(to_int("oracle.noise_seed", v)); }));
  k.push_back(key("oracle.full_frame", "synth writes whole captures (true) or eye-region windows (false)",
                  [](const Config& c) { return std::string(c.full_frame ? "true" : "false"); },
                  [](Config& c, const std::string& v) { c.full_frame = to_bool("oracle.full_frame", v); }));
  return k;
}

}  // namespace

SceneConfig Config::scene_config() const {
  SceneConfig s = scene;
  s.camera = camera;
  s.eye = eye;
  if (roi) s.eye_region = *roi;
  s.rect_width = rect_width;
  s.rect_height = rect_height;
  return s;
}

void Config::validate() const {
  const auto fail = [](const std::string& m) { throw Error(Stage::Config, "invalid configuration: " + m); };
  if (!camera.valid()) fail("camera");
  if (!eye.valid()) fail("eye constants");
  if (roi && !roi->inside(camera.width, camera.height)) fail("roi outside the capture");
  if (limbus.iterations < 1 || limbus.inlier_threshold <= 0.0 || limbus.r_min_fraction <= 0.0 ||
      limbus.r_min_fraction >= limbus.r_max_fraction) {
    fail("limbus settings");
  }
  if (map_width < 64 || map_height < 64) fail("environment map smaller than 64x64");
  if (rect_width <= 0.0 || rect_height <= 0.0) fail("rectangle size");
  if (scales.empty() || std::any_of(scales.begin(), scales.end(), [](double s) { return !(s > 0.0 && s <= 1.0); })) {
    fail("scales must lie in (0, 1]");
  }
  if (runs < 1) fail("runs");
  if (threads < 1) fail("threads");
  if (!scene_config().valid()) fail("oracle scene");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void apply_override(Config& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(Stage::Config, "expected key = value, got '" + assignment + "'");
  const std::string name = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  for (const ConfigKey& k : config_keys()) {
    if (k.name == name) {
      k.set(cfg, value);
      return;
    }
  }
  throw Error(Stage::Config, "unknown config key '" + name + "'");
}

Config parse_config(const std::string& text, Config base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    try {
      apply_override(base, line);
    } catch (const Error& e) {
      throw Error(Stage::Config, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error(Stage::Config, "cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const Config& cfg) {
  std::string out;
  for (const ConfigKey& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

std::vector<double> parse_number_list(const std::string& text) { return to_list("list", text); }

}  // namespace corneal
