#include "seldsynth/renderer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "seldsynth/errors.hpp"
#include "seldsynth/imageio.hpp"
#include "seldsynth/rng.hpp"
#include "seldsynth/textutil.hpp"
#include "seldsynth/version.hpp"

namespace seldsynth {

namespace {

using json = nlohmann::json;

std::string ffmpeg_executable() {
    if (const char* env = std::getenv("SELDSYNTH_FFMPEG"); env && *env) return env;
    return "ffmpeg";
}

// Alpha-over with integer rounding; an opaque source replaces the
// destination byte-for-byte.
inline void blend_pixel(std::uint8_t* dst, const std::uint8_t* src) {
    const unsigned a = src[3];
    if (a == 255) {
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
        return;
    }
    if (a == 0) return;
    const unsigned ia = 255 - a;
    dst[0] = static_cast<std::uint8_t>((src[0] * a + dst[0] * ia + 127) / 255);
    dst[1] = static_cast<std::uint8_t>((src[1] * a + dst[1] * ia + 127) / 255);
    dst[2] = static_cast<std::uint8_t>((src[2] * a + dst[2] * ia + 127) / 255);
}

// Center-anchored placement: the tile covers [cx - s/2, cx + s/2) columns,
// wrapping across the x seam; rows clip at the top and bottom edges.
void composite_tile(Raster& canvas, const Raster& tile, int cx, int cy) {
    const int half = tile.width / 2;
    const int left = cx - half;
    const int top = cy - half;

    for (int r = 0; r < tile.height; ++r) {
        const int y = top + r;
        if (y < 0 || y >= canvas.height) continue;
        for (int c = 0; c < tile.width; ++c) {
            int x = (left + c) % canvas.width;
            if (x < 0) x += canvas.width;
            blend_pixel(canvas.pixel(x, y), tile.pixel(c, r));
        }
    }
}

Raster marker_patch(int class_id, int source_id, int tile_size) {
    const auto rgb = marker_color(class_id, source_id);
    const std::uint8_t rgba[4] = {rgb[0], rgb[1], rgb[2], 255};
    return Raster::filled(tile_size, tile_size, 4, rgba);
}

int asset_frame_index(const PlannedTrack& pt, double label_time, int label_period_ms) {
    const auto count = static_cast<std::int64_t>(pt.tile->frames.size());
    if (count <= 1) return 0;  // static tiles ignore native_fps
    const double seconds_since_onset =
        (label_time - static_cast<double>(pt.track.first_frame())) *
        (label_period_ms / 1000.0);
    auto idx = static_cast<std::int64_t>(
        std::floor(seconds_since_onset * pt.tile->native_fps));
    return static_cast<int>(((idx % count) + count) % count);
}

std::uint64_t track_tile_seed(std::uint64_t clip_seed, int class_id, int source_id,
                              int ordinal) {
    std::uint64_t s = mix_seed(clip_seed, fnv1a64("tile"));
    s = mix_seed(s, static_cast<std::uint64_t>(class_id));
    s = mix_seed(s, static_cast<std::uint64_t>(source_id));
    return mix_seed(s, static_cast<std::uint64_t>(ordinal));
}

}  // namespace

std::string default_encoder_template() {
    return ffmpeg_executable() +
           " -hide_banner -loglevel error -y -f rawvideo -pix_fmt rgb24"
           " -s {width}x{height} -r {fps} -i - -c:v libx264 -pix_fmt yuv420p"
           " {output}";
}

std::string default_mux_template() {
    return ffmpeg_executable() +
           " -hide_banner -loglevel error -y -i {video} -i {audio}"
           " -map 0:v -map 1:a -c copy {output}";
}

std::array<std::uint8_t, 3> marker_color(int class_id, int source_id) {
    // 13 fixed hues, full saturation, 3 brightness steps. v >= 0.5 keeps
    // every color distinct from the black marker-mode background.
    static constexpr double kValues[3] = {1.0, 0.75, 0.5};
    const double hue = class_id * (360.0 / kNumClasses);
    const double v = kValues[source_id % 3];

    const double h6 = hue / 60.0;
    const int sector = static_cast<int>(std::floor(h6)) % 6;
    const double f = h6 - std::floor(h6);
    const double p = 0.0;
    const double q = v * (1.0 - f);
    const double t = v * f;

    double r, g, b;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    return {static_cast<std::uint8_t>(std::lround(r * 255.0)),
            static_cast<std::uint8_t>(std::lround(g * 255.0)),
            static_cast<std::uint8_t>(std::lround(b * 255.0))};
}

std::int64_t RenderPlan::frame_count() const {
    const double frames = static_cast<double>(duration_frames) *
                          config.label_period_ms * config.video_fps / 1000.0;
    return static_cast<std::int64_t>(std::ceil(frames - 1e-9));
}

RenderPlan plan_render(const SceneMetadata& scene, const AssetLibrary& library,
                       const RenderConfig& config) {
    // Fail on missing class assets before any frame is rendered.
    std::set<int> classes;
    for (const auto& a : scene.annotations) classes.insert(a.class_id);
    for (int class_id : classes)
        if (library.tile_count(class_id) == 0)
            throw AssetError(fmt::format("clip '{}': no tiles for class {} ({})",
                                         scene.clip_id, class_id,
                                         class_name(class_id)));

    RenderPlan plan;
    plan.clip_id = scene.clip_id;
    plan.config = config;
    plan.duration_frames = scene.duration_frames;

    Rng background_rng(mix_seed(config.seed, fnv1a64("background")));
    const Background& bg = select_background(library, background_rng);
    plan.background = &bg;
    plan.background_id = bg.background_id;

    // Later onset on top; source id, class id, then per-pair ordinal break ties.
    auto tracks = build_tracks(scene);
    std::stable_sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
        return std::tuple(a.first_frame(), a.source_id, a.class_id) <
               std::tuple(b.first_frame(), b.source_id, b.class_id);
    });

    std::map<std::pair<int, int>, int> ordinals;
    for (auto& track : tracks) {
        const int ordinal = ordinals[{track.class_id, track.source_id}]++;
        Rng tile_rng(track_tile_seed(config.seed, track.class_id, track.source_id,
                                     ordinal));
        const AssetTile& tile = select_tile(library, track.class_id, tile_rng);
        PlannedTrack pt;
        pt.track = std::move(track);
        pt.tile = &tile;
        pt.asset_id = tile.asset_id;
        pt.z_order = static_cast<int>(plan.tracks.size());
        plan.tracks.push_back(std::move(pt));
    }
    return plan;
}

RenderPlan plan_from_manifest(const SceneMetadata& scene, const AssetLibrary& library,
                              const Manifest& manifest) {
    RenderConfig config;
    config.width = manifest.width;
    config.height = manifest.height;
    config.tile_size = manifest.tile_size;
    config.video_fps = manifest.video_fps;
    config.label_period_ms = manifest.label_period_ms;
    config.marker_mode = manifest.marker_mode;
    config.seed = manifest.seed;

    RenderPlan plan;
    plan.clip_id = manifest.clip_id;
    plan.config = config;
    plan.duration_frames = manifest.duration_frames;

    const Background* bg = library.find_background(manifest.background_id);
    if (!bg)
        throw AssetError(fmt::format("manifest background '{}' not in library",
                                     manifest.background_id));
    plan.background = bg;
    plan.background_id = manifest.background_id;

    auto tracks = build_tracks(scene);
    std::stable_sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
        return std::tuple(a.first_frame(), a.source_id, a.class_id) <
               std::tuple(b.first_frame(), b.source_id, b.class_id);
    });
    if (tracks.size() != manifest.events.size())
        throw AssetError(fmt::format(
            "manifest lists {} events but the scene produces {} tracks",
            manifest.events.size(), tracks.size()));

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto& event = manifest.events[i];
        if (event.class_id != tracks[i].class_id ||
            event.source_id != tracks[i].source_id)
            throw AssetError(fmt::format(
                "manifest event {} does not match the scene's track order", i));
        const AssetTile* tile = library.find_tile(event.asset_id);
        if (!tile)
            throw AssetError(fmt::format("manifest asset '{}' not in library",
                                         event.asset_id));
        PlannedTrack pt;
        pt.track = std::move(tracks[i]);
        pt.tile = tile;
        pt.asset_id = event.asset_id;
        pt.z_order = event.z_order;
        plan.tracks.push_back(std::move(pt));
    }
    return plan;
}

Raster render_frame(const RenderPlan& plan, std::int64_t frame_index) {
    const auto& cfg = plan.config;
    Raster frame;
    if (cfg.marker_mode) {
        frame = Raster(cfg.width, cfg.height, 3);  // black canvas
    } else {
        frame = plan.background->raster;
    }

    const double u = video_frame_label_time(frame_index, cfg.video_fps,
                                            cfg.label_period_ms);
    for (const auto& pt : plan.tracks) {
        auto doa = track_doa_at(pt.track, u);
        if (!doa) continue;

        const PixelPos pos = doa_to_pixel(*doa, cfg.width, cfg.height);
        int cx = static_cast<int>(std::lround(pos.x)) % cfg.width;
        const int cy = static_cast<int>(std::lround(pos.y));

        if (cfg.marker_mode) {
            composite_tile(frame, marker_patch(pt.track.class_id, pt.track.source_id,
                                               cfg.tile_size),
                           cx, cy);
        } else {
            const Raster& src =
                pt.tile->frames[static_cast<std::size_t>(asset_frame_index(
                    pt, u, cfg.label_period_ms))];
            composite_tile(frame, src, cx, cy);
        }
    }
    return frame;
}

Manifest render_clip(const RenderPlan& plan, FrameSink& sink) {
    const std::int64_t n = plan.frame_count();
    for (std::int64_t j = 0; j < n; ++j) sink.write_frame(render_frame(plan, j));
    sink.close();

    Manifest manifest;
    manifest.clip_id = plan.clip_id;
    manifest.seed = plan.config.seed;
    manifest.background_id = plan.background_id;
    manifest.video_fps = plan.config.video_fps;
    manifest.width = plan.config.width;
    manifest.height = plan.config.height;
    manifest.tile_size = plan.config.tile_size;
    manifest.label_period_ms = plan.config.label_period_ms;
    manifest.duration_frames = plan.duration_frames;
    manifest.marker_mode = plan.config.marker_mode;
    manifest.tool_version = std::string(kToolVersion);

    for (const auto& pt : plan.tracks) {
        auto emitted = interpolate_track(pt.track, plan.config.label_period_ms,
                                         plan.config.video_fps);
        ManifestEvent event;
        event.class_id = pt.track.class_id;
        event.source_id = pt.track.source_id;
        event.asset_id = pt.asset_id;
        event.z_order = pt.z_order;
        event.first_video_frame = emitted.empty() ? -1 : emitted.front().first;
        event.last_video_frame =
            emitted.empty() ? -1 : std::min(emitted.back().first, n - 1);
        manifest.events.push_back(std::move(event));
    }
    return manifest;
}

std::vector<MarkerDetection> recover_markers(const Raster& frame,
                                             const RenderPlan& plan,
                                             std::int64_t frame_index) {
    struct Accum {
        int class_id, source_id;
        std::array<std::uint8_t, 3> color;
        double sum_sin = 0.0, sum_cos = 0.0, sum_y = 0.0;
        std::int64_t count = 0;
    };

    const auto& cfg = plan.config;
    const double u = video_frame_label_time(frame_index, cfg.video_fps,
                                            cfg.label_period_ms);

    std::vector<Accum> expected;
    for (const auto& pt : plan.tracks)
        if (track_doa_at(pt.track, u))
            expected.push_back({pt.track.class_id, pt.track.source_id,
                                marker_color(pt.track.class_id, pt.track.source_id)});
    if (expected.empty()) return {};

    constexpr double kTwoPi = 6.283185307179586;
    for (int y = 0; y < frame.height; ++y) {
        const std::uint8_t* row = frame.pixel(0, y);
        for (int x = 0; x < frame.width; ++x) {
            const std::uint8_t* px = row + static_cast<std::size_t>(x) * frame.channels;
            if (px[0] == 0 && px[1] == 0 && px[2] == 0) continue;
            for (auto& acc : expected) {
                if (px[0] != acc.color[0] || px[1] != acc.color[1] ||
                    px[2] != acc.color[2])
                    continue;
                // Pixel centers; circular mean in x to survive the seam.
                const double theta = kTwoPi * (x + 0.5) / frame.width;
                acc.sum_sin += std::sin(theta);
                acc.sum_cos += std::cos(theta);
                acc.sum_y += y + 0.5;
                acc.count += 1;
                break;
            }
        }
    }

    std::vector<MarkerDetection> detections;
    for (const auto& acc : expected) {
        if (acc.count == 0) continue;  // fully occluded: legitimately absent
        const double theta = std::atan2(acc.sum_sin, acc.sum_cos);
        PixelPos pos;
        pos.width = frame.width;
        pos.height = frame.height;
        pos.x = wrap_x(theta / kTwoPi * frame.width - 0.5, frame.width);
        pos.y = acc.sum_y / static_cast<double>(acc.count);
        detections.push_back({acc.class_id, acc.source_id, pixel_to_doa(pos)});
    }
    return detections;
}

// ---- sinks ----------------------------------------------------------------

PngDirSink::PngDirSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void PngDirSink::write_frame(const Raster& rgb) {
    write_png(dir_ / fmt::format("frame_{:06}.png", index_++), rgb);
}

ProcessSink::ProcessSink(const std::string& command) : command_(command) {
    // A dying encoder must surface as a short write, not a fatal SIGPIPE.
    static const int sigpipe_ignored = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return 0;
    }();
    (void)sigpipe_ignored;

    pipe_ = popen(command.c_str(), "w");
    if (!pipe_) throw SinkError(fmt::format("cannot start encoder: {}", command), 0);
}

ProcessSink::~ProcessSink() {
    if (pipe_) pclose(pipe_);
}

void ProcessSink::write_frame(const Raster& rgb) {
    const std::size_t written = std::fwrite(rgb.data.data(), 1, rgb.data.size(), pipe_);
    if (written != rgb.data.size())
        throw SinkError(fmt::format("encoder pipe closed after {} frames: {}",
                                    frames_written_, command_),
                        frames_written_);
    ++frames_written_;
}

void ProcessSink::close() {
    if (!pipe_) return;
    const int status = pclose(pipe_);
    pipe_ = nullptr;
    if (status != 0)
        throw SinkError(fmt::format("encoder exited with status {} after {} frames: {}",
                                    status, frames_written_, command_),
                        frames_written_);
}

// ---- manifest -------------------------------------------------------------

std::string Manifest::to_json() const {
    json events_json = json::array();
    for (const auto& e : events)
        events_json.push_back({{"class_id", e.class_id},
                               {"source_id", e.source_id},
                               {"asset_id", e.asset_id},
                               {"first_video_frame", e.first_video_frame},
                               {"last_video_frame", e.last_video_frame},
                               {"z_order", e.z_order}});
    json j = {{"clip_id", clip_id},
              {"seed", seed},
              {"background_id", background_id},
              {"events", events_json},
              {"video_fps", video_fps},
              {"width", width},
              {"height", height},
              {"tile_size", tile_size},
              {"label_period_ms", label_period_ms},
              {"duration_frames", duration_frames},
              {"marker_mode", marker_mode},
              {"tool_version", tool_version}};
    return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
    json j = json::parse(text);
    Manifest m;
    m.clip_id = j.at("clip_id").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.background_id = j.at("background_id").get<std::string>();
    m.video_fps = j.at("video_fps").get<double>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.tile_size = j.at("tile_size").get<int>();
    m.label_period_ms = j.at("label_period_ms").get<int>();
    m.duration_frames = j.at("duration_frames").get<std::int64_t>();
    m.marker_mode = j.at("marker_mode").get<bool>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& e : j.at("events")) {
        ManifestEvent event;
        event.class_id = e.at("class_id").get<int>();
        event.source_id = e.at("source_id").get<int>();
        event.asset_id = e.at("asset_id").get<std::string>();
        event.first_video_frame = e.at("first_video_frame").get<std::int64_t>();
        event.last_video_frame = e.at("last_video_frame").get<std::int64_t>();
        event.z_order = e.at("z_order").get<int>();
        m.events.push_back(std::move(event));
    }
    return m;
}

void Manifest::save(const std::filesystem::path& path) const {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw Error(fmt::format("cannot write manifest '{}'", path.string()));
    const std::string text = to_json();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "rb");
    if (!f) throw Error(fmt::format("cannot read manifest '{}'", path.string()));
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
    std::fclose(f);
    return from_json(text);
}

}  // namespace seldsynth
