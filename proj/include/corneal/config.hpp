#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corneal/geometry.hpp"
#include "corneal/imaging.hpp"
#include "corneal/limbus.hpp"
#include "corneal/oracle.hpp"
#include "corneal/pose.hpp"
#include "corneal/scene.hpp"

namespace corneal {

/// Everything the pipeline, the oracle and the evaluation protocol read. The estimator and the
/// renderer share the camera, the eye constants and the rectangle size.
struct Config {
  PinholeCamera camera{34000.0, 3680.0, 2456.0, 7360, 4912};
  EyeConstants eye;
  std::optional<RegionOfInterest> roi = RegionOfInterest{3180, 1956, 1000, 1000};

  LimbusSettings limbus;
  int map_width = 1024;
  int map_height = 512;

  ColorBlobSpec rect_spec{"red", 345.0, 15.0, 0.5, 0.3, 20};
  ColorBlobSpec square_spec{"blue", 210.0, 270.0, 0.5, 0.3, 20};
  double rect_width = 70.0;
  double rect_height = 140.0;

  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  int runs = 20;
  std::uint64_t base_seed = 1;
  int threads = 1;

  /// Oracle-only settings; camera, eye, eye region and rectangle size come from the fields above.
  SceneConfig scene;
  bool full_frame = true;  // synth writes whole captures rather than eye-region windows

  SceneConfig scene_config() const;
  void validate() const;  // throws Error(Stage::Config)
};

/// One documented configuration key.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

const std::vector<ConfigKey>& config_keys();

/// Parses `key = value` lines ('#' starts a comment) on top of `base`.
Config parse_config(const std::string& text, Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});
/// Applies one `key=value` override.
void apply_override(Config& cfg, const std::string& assignment);
/// Serializes every key with its current value, in registry order.
std::string dump_config(const Config& cfg);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace corneal
