#include "corneal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "corneal/error.hpp"
#include "corneal/serialize.hpp"

namespace corneal {

namespace {

std::string status_of(const Error& e) {
  if (e.stage() == Stage::Objects) {
    const std::string what = e.what();
    if (what.rfind("object-not-found", 0) == 0) return what;
  }
  return stage_name(e.stage());
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(Stage::Dataset, "malformed number in CSV: '" + s + "'");
  }
  return v;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

void fail_record(EvalRecord& r, const std::string& status) {
  r.status = status;
  r.est_x = r.est_y = r.err_x = r.err_y = r.err_euclid = std::nullopt;
}

}  // namespace

const ScaleSummary* EvalSummary::find(double scale) const {
  for (const ScaleSummary& s : scales) {
    if (s.scale == scale) return &s;
  }
  return nullptr;
}

RegionOfInterest aligned_eye_window(const SceneConfig& cfg) {
  const RegionOfInterest& roi = cfg.eye_region;
  const int margin = 8;
  const int u0 = std::max(0, (roi.u0 - margin) / 8 * 8);
  const int v0 = std::max(0, (roi.v0 - margin) / 8 * 8);
  const int u1 = std::min(cfg.camera.width, (roi.u0 + roi.w + margin + 7) / 8 * 8);
  const int v1 = std::min(cfg.camera.height, (roi.v0 + roi.h + margin + 7) / 8 * 8);
  return {u0, v0, u1 - u0, v1 - v0};
}

Dataset dataset_from_oracle(const Config& cfg, bool window_only) {
  Dataset data;
  for (const SceneConfig& sc : grid_configs(cfg.scene_config())) {
    DatasetEntry e;
    e.name = "position_" + std::to_string(sc.position_id);
    e.position_id = sc.position_id;
    e.truth_x = sc.square_dx;
    e.truth_y = sc.square_dy;
    e.load = [sc, window_only]() {
      Capture c;
      if (window_only) {
        const RegionOfInterest w = aligned_eye_window(sc);
        c.image = render(sc, w).first;
        c.origin_u = w.u0;
        c.origin_v = w.v0;
      } else {
        c.image = render(sc).first;
      }
      return c;
    };
    data.push_back(std::move(e));
  }
  return data;
}

Capture load_capture(const std::filesystem::path& image) {
  Capture c{load_image(image), 0, 0};
  auto sidecar = image;
  sidecar.replace_extension(".json");
  if (!std::filesystem::exists(sidecar)) return c;
  std::ifstream in(sidecar);
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Stage::Io, "malformed sidecar " + sidecar.string());
  if (j.is_object() && j.contains("window")) {
    c.origin_u = j["window"].at(0).get<int>();
    c.origin_v = j["window"].at(1).get<int>();
  }
  return c;
}

Dataset dataset_from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(Stage::Dataset, "dataset directory not found: " + dir.string());
  std::vector<std::filesystem::path> images;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".ppm" && ext != ".pnm") continue;
    auto truth = entry.path();
    truth.replace_extension(".json");
    if (std::filesystem::exists(truth)) images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  Dataset data;
  for (const auto& path : images) {
    auto truth_path = path;
    truth_path.replace_extension(".json");
    std::ifstream in(truth_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const std::exception& ex) {
      throw Error(Stage::Dataset, "malformed truth file " + truth_path.string() + ": " + ex.what());
    }
    DatasetEntry e;
    e.name = path.filename().string();
    e.position_id = j.value("position_id", 0);
    e.truth_x = j.at("dx").get<double>();
    e.truth_y = j.at("dy").get<double>();
    e.load = [path]() { return load_capture(path); };
    data.push_back(std::move(e));
  }
  return data;
}

std::vector<EvalRecord> run_protocol(const Dataset& data, const Config& cfg) {
  if (data.empty()) throw Error(Stage::Dataset, "dataset-empty: no images to evaluate");
  const std::size_t per_image = cfg.scales.size() * static_cast<std::size_t>(cfg.runs);
  std::vector<EvalRecord> records(data.size() * per_image);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DatasetEntry& entry = data[i / per_image];
    EvalRecord& r = records[i];
    r.run_id = static_cast<int>(i);
    r.position_id = entry.position_id;
    r.scale = cfg.scales[(i % per_image) / static_cast<std::size_t>(cfg.runs)];
    r.seed = cfg.base_seed + i;
    r.truth_x = entry.truth_x;
    r.truth_y = entry.truth_y;
  }

  for (std::size_t img = 0; img < data.size(); ++img) {
    std::optional<Capture> capture;
    std::string load_status;
    try {
      capture = data[img].load();
    } catch (const Error& e) {
      load_status = status_of(e);
    }
    for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
      const std::size_t first = img * per_image + s * static_cast<std::size_t>(cfg.runs);
      const auto fail_all = [&](const std::string& status) {
        for (int k = 0; k < cfg.runs; ++k) fail_record(records[first + k], status);
      };
      if (!capture) {
        fail_all(load_status);
        continue;
      }
      EyeRegion eye;
      std::vector<EdgePoint> edges;
      try {
        eye = prepare_eye_region(*capture, cfg, cfg.scales[s]);
        edges = extract_edges(eye.image, cfg.limbus.resolve(eye.image.width(), eye.image.height(), eye.scale));
      } catch (const Error& e) {
        fail_all(status_of(e));
        continue;
      }

      // Runs are independent; each worker writes only its own records.
      std::atomic<int> next{0};
      const auto worker = [&]() {
        for (int k = next++; k < cfg.runs; k = next++) {
          EvalRecord& r = records[first + k];
          try {
            const LocateResult res = locate(eye, cfg, r.seed, &edges);
            r.est_x = res.position.dx;
            r.est_y = res.position.dy;
            r.err_x = *r.est_x - r.truth_x;
            r.err_y = *r.est_y - r.truth_y;
            r.err_euclid = std::hypot(*r.err_x, *r.err_y);
            r.status = "ok";
          } catch (const Error& e) {
            fail_record(r, status_of(e));
          }
        }
      };
      const int n_threads = std::max(1, std::min(cfg.threads, cfg.runs));
      if (n_threads == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
    }
  }
  return records;
}

EvalSummary summarize(const std::vector<EvalRecord>& records) {
  EvalSummary out;
  struct Acc {
    double sum = 0, sum_sq = 0, sum_sq_x = 0, sum_sq_y = 0;
    std::map<double, std::pair<double, int>> columns;
  };
  std::vector<Acc> acc;
  int total_ok = 0;
  for (const EvalRecord& r : records) {
    auto it = std::find_if(out.scales.begin(), out.scales.end(), [&](const ScaleSummary& s) { return s.scale == r.scale; });
    if (it == out.scales.end()) {
      out.scales.push_back(ScaleSummary{});
      out.scales.back().scale = r.scale;
      acc.emplace_back();
      it = out.scales.end() - 1;
    }
    Acc& a = acc[static_cast<std::size_t>(it - out.scales.begin())];
    if (!r.ok() || !r.err_euclid) {
      ++it->failures;
      continue;
    }
    ++it->ok;
    ++total_ok;
    const double e = *r.err_euclid;
    a.sum += e;
    a.sum_sq += e * e;
    a.sum_sq_x += *r.err_x * *r.err_x;
    a.sum_sq_y += *r.err_y * *r.err_y;
    auto& col = a.columns[r.truth_x];
    col.first += e;
    ++col.second;
  }
  if (total_ok == 0) throw Error(Stage::Dataset, "all records failed; nothing to summarize");
  for (std::size_t i = 0; i < out.scales.size(); ++i) {
    ScaleSummary& s = out.scales[i];
    const Acc& a = acc[i];
    if (s.ok == 0) continue;
    const double n = s.ok;
    s.mean = a.sum / n;
    s.rms = std::sqrt(a.sum_sq / n);
    s.sd = std::sqrt(std::max(0.0, a.sum_sq / n - s.mean * s.mean));
    s.rms_x = std::sqrt(a.sum_sq_x / n);
    s.rms_y = std::sqrt(a.sum_sq_y / n);
    for (const auto& [x, v] : a.columns) s.mean_abs_by_column[x] = v.first / v.second;
  }
  return out;
}

std::string records_to_csv(const std::vector<EvalRecord>& records) {
  std::string out =
      "# corneal evaluation records; summary SD is the population standard deviation of err_euclid_mm\n"
      "run_id,position_id,scale,seed,truth_x_mm,truth_y_mm,est_x_mm,est_y_mm,err_x_mm,err_y_mm,err_euclid_mm,status\n";
  for (const EvalRecord& r : records) {
    out += std::to_string(r.run_id) + "," + std::to_string(r.position_id) + "," + fmt(r.scale) + "," +
           std::to_string(r.seed) + "," + fmt(r.truth_x) + "," + fmt(r.truth_y) + "," + fmt_opt(r.est_x) + "," +
           fmt_opt(r.est_y) + "," + fmt_opt(r.err_x) + "," + fmt_opt(r.err_y) + "," + fmt_opt(r.err_euclid) + "," +
           r.status + "\n";
  }
  return out;
}

std::vector<EvalRecord> records_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<EvalRecord> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 12) throw Error(Stage::Dataset, "CSV row with " + std::to_string(f.size()) + " fields");
    EvalRecord r;
    r.run_id = std::stoi(f[0]);
    r.position_id = std::stoi(f[1]);
    r.scale = parse_double(f[2]);
    r.seed = std::stoull(f[3]);
    r.truth_x = parse_double(f[4]);
    r.truth_y = parse_double(f[5]);
    r.est_x = parse_opt(f[6]);
    r.est_y = parse_opt(f[7]);
    r.err_x = parse_opt(f[8]);
    r.err_y = parse_opt(f[9]);
    r.err_euclid = parse_opt(f[10]);
    r.status = f[11];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace corneal
