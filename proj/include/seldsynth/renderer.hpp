#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "seldsynth/assets.hpp"
#include "seldsynth/geometry.hpp"
#include "seldsynth/metadata.hpp"
#include "seldsynth/raster.hpp"

namespace seldsynth {

struct RenderConfig {
    int width = 1920;
    int height = 960;
    int tile_size = 50;
    double video_fps = 30.0;
    int label_period_ms = 100;
    bool marker_mode = false;
    std::uint64_t seed = 0;
};

struct PlannedTrack {
    EventTrack track;
    const AssetTile* tile = nullptr;
    std::string asset_id;
    int z_order = 0;  // ascending composite order; later onset on top
};

struct RenderPlan {
    std::string clip_id;
    RenderConfig config;
    const Background* background = nullptr;  // unused in marker mode (black canvas)
    std::string background_id;
    std::vector<PlannedTrack> tracks;  // in ascending z_order
    std::int64_t duration_frames = 0;  // label frames

    // ceil(duration_seconds * fps)
    std::int64_t frame_count() const;
};

struct ManifestEvent {
    int class_id = 0;
    int source_id = 0;
    std::string asset_id;
    std::int64_t first_video_frame = 0;
    std::int64_t last_video_frame = 0;
    int z_order = 0;
};

// Provenance sidecar; replaying one reproduces the clip bit-exactly.
struct Manifest {
    std::string clip_id;
    std::uint64_t seed = 0;
    std::string background_id;
    std::vector<ManifestEvent> events;
    double video_fps = 30.0;
    int width = 1920;
    int height = 960;
    int tile_size = 50;
    int label_period_ms = 100;
    std::int64_t duration_frames = 0;
    bool marker_mode = false;
    std::string tool_version;

    std::string to_json() const;
    static Manifest from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

// Ordered frame consumer. write_frame may throw SinkError.
class FrameSink {
public:
    virtual ~FrameSink() = default;
    virtual void write_frame(const Raster& rgb) = 0;
    virtual void close() {}
};

// Numbered PNGs (frame_000000.png, ...) for golden tests and determinism checks.
class PngDirSink : public FrameSink {
public:
    explicit PngDirSink(std::filesystem::path dir);
    void write_frame(const Raster& rgb) override;

private:
    std::filesystem::path dir_;
    std::int64_t index_ = 0;
};

// Pipes raw RGB24 into an external encoder process's stdin.
class ProcessSink : public FrameSink {
public:
    explicit ProcessSink(const std::string& command);
    ~ProcessSink() override;
    void write_frame(const Raster& rgb) override;
    void close() override;  // waits for the process; nonzero exit -> SinkError

private:
    std::FILE* pipe_ = nullptr;
    std::string command_;
    std::uint64_t frames_written_ = 0;
};

class NullSink : public FrameSink {
public:
    void write_frame(const Raster&) override { ++frames_; }
    std::int64_t frames() const { return frames_; }

private:
    std::int64_t frames_ = 0;
};

// Encoder command template used when the config does not override it.
// {width} {height} {fps} {output} placeholders; the ffmpeg executable can be
// redirected with the SELDSYNTH_FFMPEG environment variable.
std::string default_encoder_template();

// Mux command template: {video} {audio} {output}; audio is stream-copied.
std::string default_mux_template();

// Solid marker color for (class, source): 13 fixed hues by class,
// 3 brightness steps by source id. Never black.
std::array<std::uint8_t, 3> marker_color(int class_id, int source_id);

// Chooses one tile per track (seeded by clip seed, class, source, track
// ordinal), one background per clip, and assigns z order by onset.
// Throws AssetError when the scene needs a class with no tiles.
RenderPlan plan_render(const SceneMetadata& scene, const AssetLibrary& library,
                       const RenderConfig& config);

// Rebuilds the exact plan a manifest records (same assets, background,
// z order) for bit-identical re-rendering.
RenderPlan plan_from_manifest(const SceneMetadata& scene,
                              const AssetLibrary& library,
                              const Manifest& manifest);

// Composites every track active at this frame onto the background (or a
// black canvas in marker mode): center-anchored tiles, x wraps across the
// seam, y clips at the poles, alpha-over in ascending z order.
Raster render_frame(const RenderPlan& plan, std::int64_t frame_index);

// Streams all frames in order into the sink and returns the manifest.
Manifest render_clip(const RenderPlan& plan, FrameSink& sink);

struct MarkerDetection {
    int class_id = 0;
    int source_id = 0;
    DoA doa;
};

// Finds each expected marker's pixels in a marker-mode frame and
// inverse-projects their centroid (circular mean in x). Fully occluded
// markers are legitimately absent.
std::vector<MarkerDetection> recover_markers(const Raster& frame,
                                             const RenderPlan& plan,
                                             std::int64_t frame_index);

}  // namespace seldsynth
