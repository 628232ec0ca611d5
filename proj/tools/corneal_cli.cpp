// corneal: synthesize captures, locate the blue square, unwrap corneal reflections, evaluate.
// JSON goes to stdout, diagnostics to stderr; the exit code names the failing stage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corneal/config.hpp"
#include "corneal/error.hpp"
#include "corneal/harness.hpp"
#include "corneal/serialize.hpp"

using namespace corneal;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string scales, roi;
  std::optional<int> runs, threads;
  std::optional<double> noise;

  std::string out;
  std::string input;
  double scale = 1.0;
  bool oracle = false;
};

std::string help_footer() {
  std::string s =
      "Configuration keys (file lines or --set key=value; flags override both):\n";
  const Config defaults;
  for (const ConfigKey& k : config_keys()) {
    s += "  " + k.name + " = " + k.get(defaults) + "\n      " + k.help + "\n";
  }
  s += "\nExit codes:\n";
  for (Stage st : {Stage::Config, Stage::Io, Stage::Eye, Stage::Limbus, Stage::Pose, Stage::Unwrap, Stage::Objects,
                   Stage::Plane, Stage::Position, Stage::Dataset, Stage::Geometry}) {
    s += "  " + std::to_string(static_cast<int>(st)) + "  " + stage_name(st) + "\n";
  }
  return s;
}

Config build_config(const Options& o) {
  Config cfg = o.config_path.empty() ? Config{} : load_config(o.config_path);
  for (const std::string& s : o.sets) apply_override(cfg, s);
  if (o.seed) cfg.base_seed = *o.seed;
  if (!o.scales.empty()) apply_override(cfg, "protocol.scales=" + o.scales);
  if (o.runs) cfg.runs = *o.runs;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.roi.empty()) apply_override(cfg, "roi=" + o.roi);
  if (o.noise) cfg.scene.noise_sigma = *o.noise;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw Error(Stage::Io, "cannot write " + p.string());
}

int cmd_synth(const Options& o) {
  const Config cfg = build_config(o);
  const fs::path dir = o.out.empty() ? fs::path("synth") : fs::path(o.out);
  fs::create_directories(dir);
  const SceneConfig base = cfg.scene_config();
  Json files = Json::array();
  for (const SceneConfig& sc : grid_configs(base)) {
    std::optional<RegionOfInterest> window;
    if (!cfg.full_frame) window = aligned_eye_window(sc);
    const auto [img, truth] = render(sc, window);
    const std::string stem = "position_" + std::to_string(truth.position_id);
    save_image(img, dir / (stem + ".png"));
    write_text(dir / (stem + ".json"), to_json(truth, window).dump(2) + "\n");
    files.push_back(stem + ".png");
    std::cerr << "wrote " << (dir / (stem + ".png")).string() << "\n";
  }
  std::cout << Json{{"out", dir.string()}, {"images", files}}.dump(2) << "\n";
  return 0;
}

int cmd_locate(const Options& o) {
  const Config cfg = build_config(o);
  const Capture cap = load_capture(o.input);
  const LocateResult r = locate(cap, cfg, o.scale, cfg.base_seed);
  Json j{{"image", o.input}, {"scale", o.scale}, {"seed", cfg.base_seed}};
  j.update(position_json(r));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_unwrap(const Options& o) {
  const Config cfg = build_config(o);
  const Capture cap = load_capture(o.input);
  const LocateResult r = unwrap_capture(cap, cfg, o.scale, cfg.base_seed);
  const fs::path png = o.out.empty() ? fs::path("map.png") : fs::path(o.out);
  if (png.has_parent_path()) fs::create_directories(png.parent_path());
  save_image(r.map.to_image(), png);
  const Json side = map_sidecar_json(r.map);
  auto side_path = png;
  side_path.replace_extension(".json");
  write_text(side_path, side.dump(2) + "\n");
  std::cout << Json{{"map", png.string()}, {"sidecar", side_path.string()}, {"coverage", side["coverage"]}}.dump(2)
            << "\n";
  return 0;
}

int cmd_evaluate(const Options& o) {
  const Config cfg = build_config(o);
  if (o.oracle == !o.input.empty()) throw Error(Stage::Config, "evaluate needs a dataset directory or --oracle");
  const Dataset data = o.oracle ? dataset_from_oracle(cfg) : dataset_from_directory(o.input);
  std::cerr << "evaluating " << data.size() << " images x " << cfg.scales.size() << " scales x " << cfg.runs
            << " runs\n";
  const auto records = run_protocol(data, cfg);
  const fs::path dir = o.out.empty() ? fs::path("evaluation") : fs::path(o.out);
  write_text(dir / "records.csv", records_to_csv(records));
  Json summary{{"records", records.size()}};
  summary.update(to_json(summarize(records)));
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locate a blue square relative to a red rectangle from corneal reflections."};
  app.footer(help_footer());
  app.require_subcommand(1);
  Options o;

  app.add_option("--config", o.config_path, "configuration file (key = value lines)");
  app.add_option("--set", o.sets, "override one key, e.g. --set camera.f=30000");
  app.add_option("--seed", o.seed, "RANSAC seed (locate, unwrap) or base seed (evaluate); default protocol.base_seed");
  app.add_option("--scales", o.scales, "comma-separated scales, e.g. 1,0.5");
  app.add_option("--runs", o.runs, "repetitions per image and scale");
  app.add_option("--threads", o.threads, "evaluation worker threads");
  app.add_option("--roi", o.roi, "eye region u0,v0,w,h in full-capture pixels");
  app.add_option("--noise", o.noise, "oracle pixel noise sigma, gray levels");

  auto* synth = app.add_subcommand("synth", "render the nine grid captures with truth files");
  synth->add_option("--out", o.out, "output directory (default ./synth)");

  auto* loc = app.add_subcommand("locate", "print the square's position relative to the rectangle");
  loc->add_option("image", o.input, "capture (PNG/PPM); a <stem>.json with \"window\" places a cropped capture")
      ->required();
  loc->add_option("--scale", o.scale, "rescale factor applied before detection");

  auto* unw = app.add_subcommand("unwrap", "write the environment map and its sidecar");
  unw->add_option("image", o.input, "capture (PNG/PPM)")->required();
  unw->add_option("--scale", o.scale, "rescale factor applied before detection");
  unw->add_option("--out", o.out, "map PNG path (default ./map.png); sidecar gets .json");

  auto* ev = app.add_subcommand("evaluate", "run the repetition protocol and summarize errors");
  ev->add_option("dataset", o.input, "directory of captures with <stem>.json truth files");
  ev->add_flag("--oracle", o.oracle, "evaluate the rendered grid instead of a directory");
  ev->add_option("--out", o.out, "directory for records.csv and summary.json (default ./evaluation)");

  for (auto* sub : {synth, loc, unw, ev}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(Stage::Config);
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*loc) return cmd_locate(o);
    if (*unw) return cmd_unwrap(o);
    return cmd_evaluate(o);
  } catch (const Error& e) {
    std::cerr << "error (" << stage_name(e.stage()) << "): " << e.what() << "\n";
    return static_cast<int>(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
