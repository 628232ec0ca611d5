// Python bindings. Structured results cross the boundary as JSON text and are decoded with the
// json module, so the Python side sees plain dicts with the same fields as the CLI output.

#include <cstring>
#include <optional>
#include <string>
#include <utility>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "corneal/config.hpp"
#include "corneal/error.hpp"
#include "corneal/harness.hpp"
#include "corneal/serialize.hpp"

namespace py = pybind11;
using namespace corneal;

namespace {

using Pixels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

py::object loads(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ImageBuffer to_image(const Pixels& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(Stage::Io, "expected an H x W x 3 uint8 array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> px(a.data(), a.data() + a.size());
  return ImageBuffer(w, h, std::move(px));
}

Pixels to_array(const ImageBuffer& img) {
  Pixels a({img.height(), img.width(), 3});
  std::memcpy(a.mutable_data(), img.data().data(), img.data().size());
  return a;
}

Capture to_capture(const Pixels& image, std::pair<int, int> origin) {
  return {to_image(image), origin.first, origin.second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Corneal-reflection localization: oracle renders, pipeline and evaluation protocol.";

  static py::exception<Error> error(m, "CornealError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (exit code, stage name, message)
      py::tuple args = py::make_tuple(static_cast<int>(e.stage()), stage_name(e.stage()), e.what());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_static("parse", [](const std::string& text) { return parse_config(text); }, py::arg("text"))
      .def_static("load", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"))
      .def("set", [](Config& c, const std::string& a) { apply_override(c, a); }, py::arg("assignment"),
           "apply one 'key = value' override")
      .def("get",
           [](const Config& c, const std::string& key) {
             for (const ConfigKey& k : config_keys())
               if (k.name == key) return k.get(c);
             throw Error(Stage::Config, "unknown config key '" + key + "'");
           },
           py::arg("key"))
      .def("dump", &dump_config)
      .def("validate", &Config::validate);

  m.def("config_keys", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    const Config d;
    for (const ConfigKey& k : config_keys()) out.emplace_back(k.name, k.get(d), k.help);
    return out;
  }, "(name, default, help) for every configuration key");

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); }, py::arg("path"));
  m.def("save_image", [](const Pixels& a, const std::filesystem::path& p) { save_image(to_image(a), p); },
        py::arg("image"), py::arg("path"));

  m.def(
      "render",
      [](const Config& cfg, int position_id, bool window) {
        SceneConfig sc = cfg.scene_config();
        if (position_id != 0) {
          const auto grid = grid_configs(sc);
          if (position_id < 1 || position_id > static_cast<int>(grid.size()))
            throw Error(Stage::Config, "position_id must be 0 or 1..9");
          sc = grid[position_id - 1];
        }
        std::optional<RegionOfInterest> w;
        if (window) w = aligned_eye_window(sc);
        std::pair<ImageBuffer, GroundTruth> r;
        {
          py::gil_scoped_release unlock;
          r = render(sc, w);
        }
        const std::pair<int, int> origin = w ? std::pair{w->u0, w->v0} : std::pair{0, 0};
        return py::make_tuple(to_array(r.first), loads(to_json(r.second, w)), origin);
      },
      py::arg("config"), py::arg("position_id") = 0, py::arg("window") = true,
      "Render the configured scene (or grid position 1..9). Returns (image, truth, origin); with "
      "window=True only the 8-aligned eye-region window is drawn and origin is its full-frame corner.");

  m.def(
      "locate",
      [](const Pixels& image, const Config& cfg, double scale, std::uint64_t seed, std::pair<int, int> origin) {
        const Capture cap = to_capture(image, origin);
        py::gil_scoped_release unlock;
        const Json j = position_json(locate(cap, cfg, scale, seed));
        py::gil_scoped_acquire lock;
        return loads(j);
      },
      py::arg("image"), py::arg("config"), py::arg("scale") = 1.0, py::arg("seed") = 1,
      py::arg("origin") = std::pair{0, 0}, "Position of the blue square relative to the red rectangle, mm.");

  m.def(
      "locate_file",
      [](const std::filesystem::path& path, const Config& cfg, double scale, std::uint64_t seed) {
        py::gil_scoped_release unlock;
        const Json j = position_json(locate(load_capture(path), cfg, scale, seed));
        py::gil_scoped_acquire lock;
        return loads(j);
      },
      py::arg("path"), py::arg("config"), py::arg("scale") = 1.0, py::arg("seed") = 1);

  m.def(
      "unwrap",
      [](const Pixels& image, const Config& cfg, double scale, std::uint64_t seed, std::pair<int, int> origin) {
        const Capture cap = to_capture(image, origin);
        LocateResult r;
        {
          py::gil_scoped_release unlock;
          r = unwrap_capture(cap, cfg, scale, seed);
        }
        return py::make_tuple(to_array(r.map.to_image()), loads(map_sidecar_json(r.map)));
      },
      py::arg("image"), py::arg("config"), py::arg("scale") = 1.0, py::arg("seed") = 1,
      py::arg("origin") = std::pair{0, 0}, "Environment map image and its sidecar.");

  m.def(
      "evaluate",
      [](const Config& cfg, std::optional<std::filesystem::path> dataset) {
        std::vector<EvalRecord> records;
        Json summary;
        {
          py::gil_scoped_release unlock;
          const Dataset data = dataset ? dataset_from_directory(*dataset) : dataset_from_oracle(cfg);
          records = run_protocol(data, cfg);
          summary = Json{{"records", records.size()}};
          summary.update(to_json(summarize(records)));
        }
        return py::make_tuple(records_to_csv(records), loads(summary));
      },
      py::arg("config"), py::arg("dataset") = py::none(),
      "Run the protocol on a directory dataset, or on the rendered grid when dataset is None. "
      "Returns (csv text, summary).");
}
