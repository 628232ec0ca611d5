#pragma once

#include <json.hpp>

#include "corneal/harness.hpp"
#include "corneal/limbus.hpp"
#include "corneal/oracle.hpp"
#include "corneal/pipeline.hpp"
#include "corneal/pose.hpp"
#include "corneal/scene.hpp"
#include "corneal/unwrap.hpp"

namespace corneal {

using Json = nlohmann::ordered_json;

Json to_json(const Vec3& v);
Json to_json(const Ellipse& e);
/// {cx, cy, a, b, theta, inliers, support, seed}
Json to_json(const LimbusDetection& d);
/// {L, g, C, r_C}
Json to_json(const EyePose& p);
Json to_json(const ObjectDetection& d);
/// {dx_mm, dy_mm, plane_depth_mm, detections}
Json position_json(const LocateResult& r);
/// {W, H, pose, coverage}
Json map_sidecar_json(const EnvironmentMap& m);
Json to_json(const GroundTruth& t, const std::optional<RegionOfInterest>& window = std::nullopt);
Json to_json(const EvalSummary& s);

EyePose pose_from_json(const Json& j);
Ellipse ellipse_from_json(const Json& j);

}  // namespace corneal
