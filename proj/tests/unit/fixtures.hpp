#pragma once

#include <random>

#include "corneal/harness.hpp"
#include "corneal/oracle.hpp"

namespace fixtures {

// Default grid scene (square at +100, 0), eye-region window. Rendered once per process.
inline const corneal::Capture& default_capture() {
  static const corneal::Capture cap = [] {
    const corneal::Config cfg;
    corneal::SceneConfig sc = cfg.scene_config();
    const auto w = corneal::aligned_eye_window(sc);
    return corneal::Capture{corneal::render(sc, w).first, w.u0, w.v0};
  }();
  return cap;
}

inline corneal::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  corneal::Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

}  // namespace fixtures
