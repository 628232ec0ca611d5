#include "corneal/serialize.hpp"

#include "corneal/error.hpp"

namespace corneal {

namespace {
Vec3 vec_from_json(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::None: return "ok";
    case Stage::Config: return "config";
    case Stage::Io: return "io";
    case Stage::Eye: return "eye";
    case Stage::Limbus: return "limbus";
    case Stage::Pose: return "pose";
    case Stage::Unwrap: return "unwrap";
    case Stage::Objects: return "objects";
    case Stage::Plane: return "plane";
    case Stage::Position: return "position";
    case Stage::Dataset: return "dataset";
    case Stage::Geometry: return "geometry";
  }
  return "unknown";
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json to_json(const Ellipse& e) {
  return Json{{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}};
}

Json to_json(const LimbusDetection& d) {
  Json j = to_json(d.ellipse);
  j["inliers"] = d.inliers;
  j["support"] = d.support;
  j["seed"] = d.seed;
  return j;
}

Json to_json(const EyePose& p) {
  return Json{{"L", to_json(p.limbus_center)},
              {"g", to_json(p.axis)},
              {"C", to_json(p.cornea.center)},
              {"r_C", p.cornea.radius}};
}

EyePose pose_from_json(const Json& j) {
  EyePose p;
  p.limbus_center = vec_from_json(j.at("L"));
  p.axis = vec_from_json(j.at("g"));
  p.cornea.center = vec_from_json(j.at("C"));
  p.cornea.radius = j.at("r_C").get<double>();
  return p;
}

Ellipse ellipse_from_json(const Json& j) {
  return {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("a").get<double>(), j.at("b").get<double>(),
          j.at("theta").get<double>()};
}

Json to_json(const ObjectDetection& d) {
  return Json{{"name", d.name},
              {"direction", to_json(d.direction)},
              {"angular_width_rad", d.angular_width},
              {"angular_height_rad", d.angular_height},
              {"origin", to_json(d.origin)},
              {"texels", d.texels}};
}

Json position_json(const LocateResult& r) {
  Json j{{"dx_mm", r.position.dx}, {"dy_mm", r.position.dy}, {"plane_depth_mm", r.position.plane_depth}};
  j["detections"] = Json::array({to_json(r.rect), to_json(r.square)});
  j["limbus"] = to_json(r.limbus);
  j["pose"] = to_json(r.pose);
  return j;
}

Json map_sidecar_json(const EnvironmentMap& m) {
  const double observed = static_cast<double>(m.observed_count());
  const double filled = static_cast<double>(m.filled_count());
  return Json{{"W", m.width()},
              {"H", m.height()},
              {"pose", to_json(m.pose)},
              {"coverage",
               {{"samples", m.total_hits()},
                {"observed_texels", m.observed_count()},
                {"filled_texels", m.filled_count()},
                {"observed_fraction", observed + filled > 0 ? observed / (observed + filled) : 0.0}}}};
}

Json to_json(const GroundTruth& t, const std::optional<RegionOfInterest>& window) {
  Json j{{"position_id", t.position_id},
         {"dx", t.dx},
         {"dy", t.dy},
         {"ellipse", to_json(t.ellipse)},
         {"pose", to_json(t.pose)},
         {"eye_region", {t.eye_region.u0, t.eye_region.v0, t.eye_region.w, t.eye_region.h}},
         {"square_pixels", t.square_pixels},
         {"rect_pixels", t.rect_pixels}};
  if (window) j["window"] = {window->u0, window->v0, window->w, window->h};
  return j;
}

Json to_json(const EvalSummary& s) {
  Json scales = Json::array();
  for (const ScaleSummary& sc : s.scales) {
    Json cols = Json::object();
    for (const auto& [x, v] : sc.mean_abs_by_column) {
      Json key = x;
      cols[key.dump()] = v;
    }
    scales.push_back(Json{{"scale", sc.scale},
                          {"ok", sc.ok},
                          {"failures", sc.failures},
                          {"rms_mm", sc.rms},
                          {"sd_mm", sc.sd},
                          {"mean_mm", sc.mean},
                          {"rms_x_mm", sc.rms_x},
                          {"rms_y_mm", sc.rms_y},
                          {"mean_err_by_column_mm", cols}});
  }
  return Json{{"sd_kind", "population"}, {"scales", scales}};
}

}  // namespace corneal
