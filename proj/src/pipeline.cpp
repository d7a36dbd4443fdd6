#include "seldsynth/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "seldsynth/errors.hpp"
#include "seldsynth/textutil.hpp"

namespace seldsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---- config -----------------------------------------------------------------

void PipelineConfig::validate() const {
    if (fps <= 0.0) throw ConfigError("fps must be > 0");
    if (width <= 0 || height <= 0) throw ConfigError("width and height must be > 0");
    if (tile_size <= 0 || tile_size % 2 != 0)
        throw ConfigError(fmt::format("tile_size must be a positive even number, got {}",
                                      tile_size));
    if (tile_size >= std::min(width, height) / 2)
        throw ConfigError(fmt::format(
            "tile_size {} must be smaller than min(width, height)/2 = {}", tile_size,
            std::min(width, height) / 2));
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (label_period_ms <= 0) throw ConfigError("label_period_ms must be > 0");
    if (max_polyphony < 1) throw ConfigError("max_polyphony must be >= 1");
    if (asset_fps <= 0.0) throw ConfigError("asset_fps must be > 0");
}

namespace {

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text,
                                         const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }

    PipelineConfig c;
    try {
        c.metadata_dir = resolve(base_dir, j.at("metadata_dir").get<std::string>());
        c.tiles_root = resolve(base_dir, j.at("tiles_root").get<std::string>());
        c.backgrounds_root =
            resolve(base_dir, j.at("backgrounds_root").get<std::string>());
        c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        if (j.contains("audio_dir") && !j.at("audio_dir").is_null())
            c.audio_dir = resolve(base_dir, j.at("audio_dir").get<std::string>());

        c.fps = j.value("fps", c.fps);
        c.width = j.value("width", c.width);
        c.height = j.value("height", c.height);
        c.tile_size = j.value("tile_size", c.tile_size);
        c.label_period_ms = j.value("label_period_ms", c.label_period_ms);
        c.max_polyphony = j.value("max_polyphony", c.max_polyphony);
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
        c.marker_mode = j.value("marker_mode", c.marker_mode);
        c.dump_frames = j.value("dump_frames", c.dump_frames);
        c.encoder_template = j.value("encoder", c.encoder_template);
        c.mux_template = j.value("mux", c.mux_template);
        c.asset_decoder_template = j.value("asset_decoder", c.asset_decoder_template);
        c.asset_fps = j.value("asset_fps", c.asset_fps);
        c.max_video_frames = j.value("max_video_frames", c.max_video_frames);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("bad config value: {}", e.what()));
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream text;
    text << file.rdbuf();
    return from_json(text.str(), path.parent_path());
}

RenderConfig PipelineConfig::render_config(std::uint64_t seed_for_clip) const {
    RenderConfig rc;
    rc.width = width;
    rc.height = height;
    rc.tile_size = tile_size;
    rc.video_fps = fps;
    rc.label_period_ms = label_period_ms;
    rc.marker_mode = marker_mode;
    rc.seed = seed_for_clip;
    return rc;
}

AssetLoadOptions PipelineConfig::asset_load_options() const {
    AssetLoadOptions o;
    o.tile_size = tile_size;
    o.background_width = width;
    o.background_height = height;
    o.video_decoder_template = asset_decoder_template;
    o.asset_fps = asset_fps;
    o.max_video_frames = max_video_frames;
    return o;
}

std::uint64_t clip_seed(std::uint64_t batch_seed, std::string_view clip_stem) {
    return mix_seed(batch_seed, fnv1a64(clip_stem));
}

// ---- batch machinery ----------------------------------------------------------

bool BatchSummary::all_ok() const {
    return std::all_of(clips.begin(), clips.end(),
                       [](const ClipResult& c) { return c.ok; });
}

std::string BatchSummary::to_text() const {
    std::ostringstream out;
    for (const auto& c : clips) {
        if (c.ok)
            out << fmt::format("ok\t{}\tframes={}\twall_ms={:.0f}{}\n", c.clip_id,
                               c.frames, c.wall_ms,
                               c.message.empty() ? "" : "\t" + c.message);
        else
            out << fmt::format("fail\t{}\t{}\n", c.clip_id, c.message);
    }
    return out.str();
}

namespace {

std::vector<fs::path> list_metadata_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ConfigError(fmt::format("metadata_dir '{}' is not a directory",
                                      dir.string()));
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    if (files.empty())
        throw ConfigError(fmt::format("no .csv metadata files in '{}'", dir.string()));
    return files;
}

struct SceneBundle {
    SceneMetadata scene;
    RenderPlan plan;
    std::vector<std::string> warnings;
};

SceneBundle prepare_clip(const fs::path& metadata_path, const PipelineConfig& config,
                         const AssetLibrary& library) {
    SceneBundle bundle;
    bundle.scene = parse_metadata_file(metadata_path, &bundle.warnings);

    const auto violations = validate_polyphony(bundle.scene, config.max_polyphony);
    if (!violations.empty())
        throw ValidationError(fmt::format(
            "polyphony exceeds {} at {} frame(s) (first: frame {} with {} events)",
            config.max_polyphony, violations.size(), violations.front().frame,
            violations.front().count));

    const std::uint64_t seed = clip_seed(config.seed, bundle.scene.clip_id);
    bundle.plan = plan_render(bundle.scene, library, config.render_config(seed));
    return bundle;
}

// Renders one clip to its configured sink(s); fills result.
void run_generate_clip(const fs::path& metadata_path, const PipelineConfig& config,
                       const AssetLibrary& library, ClipResult& result) {
    SceneBundle bundle = prepare_clip(metadata_path, config, library);
    const std::string& stem = bundle.scene.clip_id;

    Manifest manifest;
    fs::path video_path;
    if (config.dump_frames) {
        const fs::path frame_dir = config.output_dir / stem;
        PngDirSink sink(frame_dir);
        manifest = render_clip(bundle.plan, sink);
        video_path = frame_dir;
    } else {
        video_path = config.output_dir / (stem + ".mp4");
        const std::string templ = config.encoder_template.empty()
                                      ? default_encoder_template()
                                      : config.encoder_template;
        const std::string command = expand_template(
            templ, {{"width", std::to_string(config.width)},
                    {"height", std::to_string(config.height)},
                    {"fps", fmt::format("{}", config.fps)},
                    {"output", video_path.string()}});
        ProcessSink sink(command);
        manifest = render_clip(bundle.plan, sink);
    }

    if (config.audio_dir && !config.dump_frames) {
        const fs::path wav = *config.audio_dir / (stem + ".wav");
        if (fs::exists(wav)) {
            const fs::path muxed = config.output_dir / (stem + ".av.mp4");
            const std::string templ = config.mux_template.empty()
                                          ? default_mux_template()
                                          : config.mux_template;
            const std::string command =
                expand_template(templ, {{"video", video_path.string()},
                                        {"audio", wav.string()},
                                        {"output", muxed.string()}});
            // Audio is pass-through; a mux failure downgrades to video-only.
            if (std::system(command.c_str()) != 0)
                bundle.warnings.push_back(
                    fmt::format("mux failed, keeping video-only output: {}", command));
            else
                video_path = muxed;
        } else {
            bundle.warnings.push_back(
                fmt::format("no audio for stem '{}' in '{}'", stem,
                            config.audio_dir->string()));
        }
    }

    const fs::path manifest_path = config.output_dir / (stem + ".manifest.json");
    manifest.save(manifest_path);

    result.frames = bundle.plan.frame_count();
    result.video_path = video_path.string();
    result.manifest_path = manifest_path.string();
    if (!bundle.warnings.empty())
        result.message = fmt::format("warnings={}", bundle.warnings.size());
    result.ok = true;
}

// Bounded worker pool over the clip list; results land at fixed indices so
// the summary order is the clip-name order regardless of scheduling.
template <typename Fn>
BatchSummary run_batch(const std::vector<fs::path>& files, int workers, Fn&& per_clip,
                       std::ostream* log) {
    BatchSummary summary;
    summary.clips.resize(files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
        summary.clips[i].clip_id = files[i].stem().string();

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= files.size()) break;
            ClipResult& result = summary.clips[i];
            const auto start = std::chrono::steady_clock::now();
            try {
                per_clip(files[i], result);
            } catch (const std::exception& e) {
                result.ok = false;
                result.message = e.what();
            }
            result.wall_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            if (log) {
                std::lock_guard<std::mutex> lock(log_mutex);
                *log << (result.ok ? "done " : "failed ") << result.clip_id << "\n";
            }
        }
    };

    const int thread_count = std::max(1, std::min<int>(workers,
                                                       static_cast<int>(files.size())));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return summary;
}

}  // namespace

BatchSummary generate(const PipelineConfig& config, std::ostream* log) {
    config.validate();
    const auto files = list_metadata_files(config.metadata_dir);
    const AssetLibrary library =
        load_library(config.tiles_root, config.backgrounds_root,
                     config.asset_load_options());
    fs::create_directories(config.output_dir);

    return run_batch(
        files, config.workers,
        [&](const fs::path& path, ClipResult& result) {
            run_generate_clip(path, config, library, result);
        },
        log);
}

SceneMetadata detections_to_scene(
    const std::vector<std::vector<MarkerDetection>>& per_frame, double video_fps,
    int label_period_ms, std::int64_t duration_frames, std::string clip_id) {
    struct Best {
        double time_error;
        std::int64_t video_frame;
        DoA doa;
    };
    // (class, source, label frame) -> temporally closest detection.
    std::map<std::tuple<int, int, std::int64_t>, Best> best;

    for (std::size_t j = 0; j < per_frame.size(); ++j) {
        const double u = video_frame_label_time(static_cast<std::int64_t>(j), video_fps,
                                                label_period_ms);
        const auto label_frame = static_cast<std::int64_t>(std::llround(u));
        const double err = std::abs(u - static_cast<double>(label_frame));
        for (const auto& det : per_frame[j]) {
            const auto key = std::make_tuple(det.class_id, det.source_id, label_frame);
            auto it = best.find(key);
            if (it == best.end() || err < it->second.time_error)
                best[key] = {err, static_cast<std::int64_t>(j), det.doa};
        }
    }

    SceneMetadata scene;
    scene.clip_id = std::move(clip_id);
    scene.duration_frames = duration_frames;
    for (const auto& [key, value] : best) {
        EventAnnotation a;
        a.frame = std::get<2>(key);
        a.class_id = std::get<0>(key);
        a.source_id = std::get<1>(key);
        a.azimuth_deg = value.doa.azimuth_deg;
        a.elevation_deg = value.doa.elevation_deg;
        scene.annotations.push_back(a);
        scene.duration_frames = std::max(scene.duration_frames, a.frame + 1);
    }
    return scene;
}

MetricsReport verify(const PipelineConfig& config, std::ostream* log,
                     BatchSummary* summary_out) {
    config.validate();
    PipelineConfig marker_config = config;
    marker_config.marker_mode = true;  // forced; markers are the oracle

    const auto files = list_metadata_files(marker_config.metadata_dir);
    const AssetLibrary library =
        load_library(marker_config.tiles_root, marker_config.backgrounds_root,
                     marker_config.asset_load_options());

    Scorer scorer(20.0);
    std::mutex scorer_mutex;

    BatchSummary summary = run_batch(
        files, marker_config.workers,
        [&](const fs::path& path, ClipResult& result) {
            SceneBundle bundle = prepare_clip(path, marker_config, library);
            const std::int64_t n = bundle.plan.frame_count();

            std::vector<std::vector<MarkerDetection>> per_frame;
            per_frame.reserve(static_cast<std::size_t>(n));
            for (std::int64_t j = 0; j < n; ++j) {
                const Raster frame = render_frame(bundle.plan, j);
                per_frame.push_back(recover_markers(frame, bundle.plan, j));
            }

            const SceneMetadata preds = detections_to_scene(
                per_frame, marker_config.fps, marker_config.label_period_ms,
                bundle.scene.duration_frames, bundle.scene.clip_id);
            {
                std::lock_guard<std::mutex> lock(scorer_mutex);
                scorer.add(bundle.scene, preds);
            }
            result.frames = n;
            result.ok = true;
        },
        log);

    if (summary_out) *summary_out = std::move(summary);
    return scorer.report();
}

MetricsReport score_paths(const fs::path& ref_path, const fs::path& pred_path,
                          double threshold_deg, std::vector<std::string>* warnings) {
    const bool ref_dir = fs::is_directory(ref_path);
    const bool pred_dir = fs::is_directory(pred_path);
    if (ref_dir != pred_dir)
        throw ConfigError("--ref and --pred must both be files or both directories");

    if (!ref_dir) {
        if (!fs::exists(ref_path))
            throw ConfigError(fmt::format("reference '{}' does not exist",
                                          ref_path.string()));
        if (!fs::exists(pred_path))
            throw ConfigError(fmt::format("prediction '{}' does not exist",
                                          pred_path.string()));
        return score_files(ref_path, pred_path, threshold_deg, warnings);
    }

    std::map<std::string, fs::path> refs, preds;
    for (const auto& entry : fs::directory_iterator(ref_path))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            refs[entry.path().stem().string()] = entry.path();
    for (const auto& entry : fs::directory_iterator(pred_path))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            preds[entry.path().stem().string()] = entry.path();

    Scorer scorer(threshold_deg);
    int scored = 0;
    for (const auto& [stem, ref_file] : refs) {
        auto it = preds.find(stem);
        if (it == preds.end()) {
            if (warnings)
                warnings->push_back(
                    fmt::format("no prediction for reference stem '{}'", stem));
            continue;
        }
        std::vector<std::string> parse_warnings;
        const SceneMetadata ref = parse_metadata_file(ref_file, &parse_warnings);
        const SceneMetadata pred = parse_metadata_file(it->second, &parse_warnings);
        if (warnings)
            warnings->insert(warnings->end(), parse_warnings.begin(),
                             parse_warnings.end());
        scorer.add(ref, pred, warnings);
        ++scored;
    }
    for (const auto& [stem, pred_file] : preds)
        if (!refs.count(stem) && warnings)
            warnings->push_back(
                fmt::format("no reference for prediction stem '{}'", stem));

    if (scored == 0)
        throw ConfigError("no (reference, prediction) pairs share a file stem");
    return scorer.report();
}

}  // namespace seldsynth
