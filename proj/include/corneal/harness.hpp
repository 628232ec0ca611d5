#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corneal/config.hpp"
#include "corneal/oracle.hpp"
#include "corneal/pipeline.hpp"

namespace corneal {

struct DatasetEntry {
  std::string name;
  int position_id = 0;
  double truth_x = 0.0;  // square minus rectangle, plane axes, mm
  double truth_y = 0.0;
  std::function<Capture()> load;
};

using Dataset = std::vector<DatasetEntry>;

/// Loads a capture; a `<stem>.json` sidecar with "window": [u0, v0, w, h] places it in the
/// full frame.
Capture load_capture(const std::filesystem::path& image);

/// PNG/PPM captures with a `<stem>.json` truth sidecar, in file-name order.
Dataset dataset_from_directory(const std::filesystem::path& dir);

/// The nine grid renders of `cfg`, rendered lazily. With `window_only` set, only an 8-aligned
/// window around the eye region is rendered (identical eye-region pixels at every scale).
Dataset dataset_from_oracle(const Config& cfg, bool window_only = true);

/// Render window covering the eye region, aligned to 8 px so that downscaling by 1/2, 1/4
/// and 1/8 reproduces the full-frame pixels.
RegionOfInterest aligned_eye_window(const SceneConfig& cfg);

struct EvalRecord {
  int run_id = 0;  // global record index
  int position_id = 0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  double truth_x = 0.0;
  double truth_y = 0.0;
  std::optional<double> est_x, est_y, err_x, err_y, err_euclid;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct ScaleSummary {
  double scale = 1.0;
  int ok = 0;
  int failures = 0;
  double rms = 0.0;   // sqrt(mean err_euclid^2) over ok records
  double sd = 0.0;    // population SD of err_euclid
  double mean = 0.0;  // mean err_euclid
  double rms_x = 0.0;
  double rms_y = 0.0;
  std::map<double, double> mean_abs_by_column;  // truth x -> mean err_euclid
};

struct EvalSummary {
  std::vector<ScaleSummary> scales;  // in order of first appearance
  const ScaleSummary* find(double scale) const;
};

/// Evaluates every (image, scale, run); record i uses seed base_seed + i. Stage failures are
/// recorded as statuses. Throws Error(Stage::Dataset) on an empty dataset.
std::vector<EvalRecord> run_protocol(const Dataset& data, const Config& cfg);

/// Throws Error(Stage::Dataset) when no record succeeded.
EvalSummary summarize(const std::vector<EvalRecord>& records);

std::string records_to_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> records_from_csv(const std::string& csv);

}  // namespace corneal
