#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "seldsynth/assets.hpp"
#include "seldsynth/geometry.hpp"
#include "seldsynth/metadata.hpp"
#include "seldsynth/metrics.hpp"
#include "seldsynth/pipeline.hpp"
#include "seldsynth/renderer.hpp"
#include "seldsynth/version.hpp"

namespace py = pybind11;
using namespace seldsynth;

namespace {

// Library plus its load report, so python callers see what was skipped.
struct LibraryHandle {
    AssetLibrary library;
    LoadReport report;
};

py::array_t<std::uint8_t> raster_to_array(const Raster& raster) {
    py::array_t<std::uint8_t> array(
        {raster.height, raster.width, raster.channels});
    std::memcpy(array.mutable_data(), raster.data.data(), raster.data.size());
    return array;
}

Raster array_to_raster(const py::array_t<std::uint8_t, py::array::c_style |
                                                           py::array::forcecast>& array) {
    if (array.ndim() != 3 || (array.shape(2) != 3 && array.shape(2) != 4))
        throw py::value_error("expected an (H, W, 3|4) uint8 array");
    Raster raster(static_cast<int>(array.shape(1)), static_cast<int>(array.shape(0)),
                  static_cast<int>(array.shape(2)));
    std::memcpy(raster.data.data(), array.data(), raster.data.size());
    return raster;
}

py::object json_loads(const std::string& text) {
    return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spatially aligned 360-degree video synthesis from SELD annotations, "
              "plus the DCASE SELD metrics";
    m.attr("__version__") = std::string(kToolVersion);
    m.attr("NUM_CLASSES") = kNumClasses;

    py::register_exception<Error>(m, "SeldSynthError", PyExc_RuntimeError);

    m.def("class_names", [] {
        std::vector<std::string> names;
        for (auto n : class_names()) names.emplace_back(n);
        return names;
    });
    m.def("class_id_from_name", &class_id_from_name, py::arg("name"));

    py::class_<EventAnnotation>(m, "EventAnnotation")
        .def(py::init<>())
        .def_readwrite("frame", &EventAnnotation::frame)
        .def_readwrite("class_id", &EventAnnotation::class_id)
        .def_readwrite("source_id", &EventAnnotation::source_id)
        .def_readwrite("azimuth_deg", &EventAnnotation::azimuth_deg)
        .def_readwrite("elevation_deg", &EventAnnotation::elevation_deg)
        .def_readwrite("distance", &EventAnnotation::distance)
        .def("__repr__", [](const EventAnnotation& a) {
            std::ostringstream out;
            out << "EventAnnotation(frame=" << a.frame << ", class_id=" << a.class_id
                << ", source_id=" << a.source_id << ", az=" << a.azimuth_deg
                << ", el=" << a.elevation_deg << ")";
            return out.str();
        });

    py::class_<SceneMetadata>(m, "SceneMetadata")
        .def(py::init<>())
        .def_readwrite("clip_id", &SceneMetadata::clip_id)
        .def_readwrite("annotations", &SceneMetadata::annotations)
        .def_readwrite("duration_frames", &SceneMetadata::duration_frames);

    py::class_<EventTrack::Sample>(m, "TrackSample")
        .def_readonly("frame", &EventTrack::Sample::frame)
        .def_readonly("azimuth_deg", &EventTrack::Sample::azimuth_deg)
        .def_readonly("elevation_deg", &EventTrack::Sample::elevation_deg)
        .def_readonly("distance", &EventTrack::Sample::distance);

    py::class_<EventTrack>(m, "EventTrack")
        .def_readonly("class_id", &EventTrack::class_id)
        .def_readonly("source_id", &EventTrack::source_id)
        .def_readonly("samples", &EventTrack::samples)
        .def("first_frame", &EventTrack::first_frame)
        .def("last_frame", &EventTrack::last_frame);

    m.def(
        "parse_metadata",
        [](const std::string& text, const std::string& clip_id) {
            return parse_metadata(std::string_view(text), clip_id);
        },
        py::arg("text"), py::arg("clip_id") = "scene");
    m.def(
        "parse_metadata_file",
        [](const std::filesystem::path& path) { return parse_metadata_file(path); },
        py::arg("path"));
    m.def("write_metadata",
          py::overload_cast<const SceneMetadata&>(&write_metadata), py::arg("scene"));
    m.def(
        "validate_polyphony",
        [](const SceneMetadata& scene, int max_polyphony) {
            std::vector<std::pair<std::int64_t, int>> out;
            for (const auto& v : validate_polyphony(scene, max_polyphony))
                out.emplace_back(v.frame, v.count);
            return out;
        },
        py::arg("scene"), py::arg("max_polyphony") = 3);
    m.def("build_tracks", &build_tracks, py::arg("scene"));

    py::class_<DoA>(m, "DoA")
        .def(py::init<double, double>(), py::arg("azimuth_deg"),
             py::arg("elevation_deg"))
        .def_readonly("azimuth_deg", &DoA::azimuth_deg)
        .def_readonly("elevation_deg", &DoA::elevation_deg)
        .def("__repr__", [](const DoA& d) {
            std::ostringstream out;
            out << "DoA(az=" << d.azimuth_deg << ", el=" << d.elevation_deg << ")";
            return out.str();
        });

    m.def(
        "doa_to_pixel",
        [](double az, double el, int width, int height) {
            const PixelPos pos = doa_to_pixel(DoA(az, el), width, height);
            return std::make_pair(pos.x, pos.y);
        },
        py::arg("azimuth_deg"), py::arg("elevation_deg"), py::arg("width") = 1920,
        py::arg("height") = 960);
    m.def(
        "pixel_to_doa",
        [](double x, double y, int width, int height) {
            return pixel_to_doa(PixelPos{x, y, width, height});
        },
        py::arg("x"), py::arg("y"), py::arg("width") = 1920, py::arg("height") = 960);
    m.def(
        "angular_distance",
        [](double az_a, double el_a, double az_b, double el_b) {
            return angular_distance_deg(DoA(az_a, el_a), DoA(az_b, el_b));
        },
        py::arg("az_a"), py::arg("el_a"), py::arg("az_b"), py::arg("el_b"));
    m.def("wrap_x", &wrap_x, py::arg("x"), py::arg("width"));
    m.def(
        "interpolate_track",
        [](const EventTrack& track, int label_period_ms, double video_fps) {
            return interpolate_track(track, label_period_ms, video_fps);
        },
        py::arg("track"), py::arg("label_period_ms") = 100, py::arg("video_fps") = 30.0);

    py::class_<LibraryHandle>(m, "AssetLibrary")
        .def_property_readonly("report",
                               [](const LibraryHandle& h) { return h.report.to_text(); })
        .def("tile_count",
             [](const LibraryHandle& h, int class_id) {
                 return h.library.tile_count(class_id);
             })
        .def_property_readonly("background_count", [](const LibraryHandle& h) {
            return h.library.backgrounds.size();
        });

    m.def(
        "load_library",
        [](const std::filesystem::path& tiles_root,
           const std::filesystem::path& backgrounds_root, int tile_size, int width,
           int height) {
            AssetLoadOptions options;
            options.tile_size = tile_size;
            options.background_width = width;
            options.background_height = height;
            auto handle = std::make_unique<LibraryHandle>();
            handle->library =
                load_library(tiles_root, backgrounds_root, options, &handle->report);
            return handle;
        },
        py::arg("tiles_root"), py::arg("backgrounds_root"), py::arg("tile_size") = 50,
        py::arg("width") = 1920, py::arg("height") = 960);

    py::class_<RenderPlan>(m, "RenderPlan")
        .def_readonly("clip_id", &RenderPlan::clip_id)
        .def_readonly("background_id", &RenderPlan::background_id)
        .def("frame_count", &RenderPlan::frame_count)
        .def_property_readonly("track_count", [](const RenderPlan& plan) {
            return plan.tracks.size();
        });

    m.def(
        "plan_render",
        [](const SceneMetadata& scene, const LibraryHandle& handle, int width,
           int height, int tile_size, double video_fps, int label_period_ms,
           bool marker_mode, std::uint64_t seed) {
            RenderConfig config;
            config.width = width;
            config.height = height;
            config.tile_size = tile_size;
            config.video_fps = video_fps;
            config.label_period_ms = label_period_ms;
            config.marker_mode = marker_mode;
            config.seed = seed;
            return plan_render(scene, handle.library, config);
        },
        py::arg("scene"), py::arg("library"), py::arg("width") = 1920,
        py::arg("height") = 960, py::arg("tile_size") = 50, py::arg("video_fps") = 30.0,
        py::arg("label_period_ms") = 100, py::arg("marker_mode") = false,
        py::arg("seed") = 0,
        py::keep_alive<0, 2>());  // the plan borrows tiles from the library

    m.def(
        "render_frame",
        [](const RenderPlan& plan, std::int64_t frame_index) {
            return raster_to_array(render_frame(plan, frame_index));
        },
        py::arg("plan"), py::arg("frame_index"));
    m.def(
        "render_clip_png",
        [](const RenderPlan& plan, const std::filesystem::path& dir) {
            PngDirSink sink(dir);
            return json_loads(render_clip(plan, sink).to_json());
        },
        py::arg("plan"), py::arg("frame_dir"));
    m.def(
        "recover_markers",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>&
               frame,
           const RenderPlan& plan, std::int64_t frame_index) {
            const Raster raster = array_to_raster(frame);
            std::vector<std::tuple<int, int, double, double>> out;
            for (const auto& d : recover_markers(raster, plan, frame_index))
                out.emplace_back(d.class_id, d.source_id, d.doa.azimuth_deg,
                                 d.doa.elevation_deg);
            return out;
        },
        py::arg("frame"), py::arg("plan"), py::arg("frame_index"));

    m.def(
        "score",
        [](const SceneMetadata& refs, const SceneMetadata& preds, double threshold) {
            return json_loads(score(refs, preds, threshold).to_json());
        },
        py::arg("refs"), py::arg("preds"), py::arg("threshold_deg") = 20.0);
    m.def(
        "score_files",
        [](const std::filesystem::path& ref, const std::filesystem::path& pred,
           double threshold) {
            return json_loads(score_files(ref, pred, threshold).to_json());
        },
        py::arg("ref_path"), py::arg("pred_path"), py::arg("threshold_deg") = 20.0);

    m.def(
        "generate",
        [](const std::filesystem::path& config_path) {
            const auto config = PipelineConfig::from_file(config_path);
            const auto summary = generate(config);
            std::vector<py::dict> out;
            for (const auto& c : summary.clips) {
                py::dict d;
                d["clip_id"] = c.clip_id;
                d["ok"] = c.ok;
                d["frames"] = c.frames;
                d["message"] = c.message;
                d["video_path"] = c.video_path;
                d["manifest_path"] = c.manifest_path;
                out.push_back(std::move(d));
            }
            return out;
        },
        py::arg("config_path"));
}
