#include "corneal/pipeline.hpp"

#include <cmath>

#include "corneal/error.hpp"

namespace corneal {

Ellipse EyeRegion::to_full(const Ellipse& e) const {
  Ellipse out = e;
  out.cx = (e.cx + u0 + 0.5) / scale - 0.5;
  out.cy = (e.cy + v0 + 0.5) / scale - 0.5;
  out.a = e.a / scale;
  out.b = e.b / scale;
  return out;
}

EyeRegion prepare_eye_region(const Capture& capture, const Config& cfg, double scale) {
  EyeRegion eye;
  eye.scale = scale;
  const ImageBuffer scaled = scale == 1.0 ? capture.image : rescale(capture.image, scale);
  const int ou = static_cast<int>(std::lround(capture.origin_u * scale));
  const int ov = static_cast<int>(std::lround(capture.origin_v * scale));

  std::optional<RegionOfInterest> local;
  if (cfg.roi) {
    RegionOfInterest r = cfg.roi->scaled(scale);
    r.u0 -= ou;
    r.v0 -= ov;
    local = r;
  }
  eye.image = select_eye_region(scaled, local);
  eye.image.set_scale(scale);
  if (local) {
    eye.u0 = local->u0 + ou;
    eye.v0 = local->v0 + ov;
  } else {
    const int side = std::min(scaled.width(), scaled.height());
    eye.u0 = (scaled.width() - side) / 2 + ou;
    eye.v0 = (scaled.height() - side) / 2 + ov;
  }
  eye.camera = cfg.camera.scaled(scale).cropped(eye.u0, eye.v0, eye.image.width(), eye.image.height());
  return eye;
}

namespace {

LocateResult detect_and_unwrap(const EyeRegion& eye, const Config& cfg, std::uint64_t seed,
                               const std::vector<EdgePoint>* edges) {
  LocateResult r;
  const RansacParams params = cfg.limbus.resolve(eye.image.width(), eye.image.height(), eye.scale);
  if (edges) {
    r.limbus = detect_limbus(std::span<const EdgePoint>(*edges), params, seed);
  } else {
    r.limbus = detect_limbus(eye.image, params, seed);
  }
  r.full_ellipse = eye.to_full(r.limbus.ellipse);
  r.pose = estimate_eye_pose(r.full_ellipse, cfg.camera, cfg.eye);
  const auto samples = corneal_samples(eye.image, r.limbus.ellipse, r.pose, eye.camera);
  r.samples = samples.size();
  r.map = unwrap(samples, cfg.map_width, cfg.map_height);
  r.map.pose = r.pose;
  return r;
}

}  // namespace

LocateResult locate(const EyeRegion& eye, const Config& cfg, std::uint64_t seed, const std::vector<EdgePoint>* edges) {
  LocateResult r = detect_and_unwrap(eye, cfg, seed, edges);
  const auto found = detect_objects(r.map, {cfg.rect_spec, cfg.square_spec});
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (const auto* miss = std::get_if<ObjectNotFound>(&found[i])) {
      throw Error(Stage::Objects, "object-not-found(" + miss->name + ")");
    }
  }
  r.rect = std::get<ObjectDetection>(found[0]);
  r.square = std::get<ObjectDetection>(found[1]);
  r.plane = reconstruct_plane(r.rect, cfg.rect_width, cfg.rect_height);
  r.position = relative_position(r.square, r.rect, r.plane);
  return r;
}

LocateResult locate(const Capture& capture, const Config& cfg, double scale, std::uint64_t seed) {
  return locate(prepare_eye_region(capture, cfg, scale), cfg, seed);
}

LocateResult unwrap_capture(const Capture& capture, const Config& cfg, double scale, std::uint64_t seed) {
  return detect_and_unwrap(prepare_eye_region(capture, cfg, scale), cfg, seed, nullptr);
}

}  // namespace corneal
