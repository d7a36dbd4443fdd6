#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seldsynth/assets.hpp"
#include "seldsynth/metrics.hpp"
#include "seldsynth/renderer.hpp"

namespace seldsynth {

struct PipelineConfig {
    std::filesystem::path metadata_dir;
    std::filesystem::path tiles_root;
    std::filesystem::path backgrounds_root;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> audio_dir;  // FOA WAVs matched by stem

    double fps = 30.0;
    int width = 1920;
    int height = 960;
    int tile_size = 50;
    int label_period_ms = 100;
    int max_polyphony = 3;
    std::uint64_t seed = 0;
    int workers = 1;
    bool marker_mode = false;
    bool dump_frames = false;  // PNG frame dirs instead of encoding

    std::string encoder_template;  // empty -> default_encoder_template()
    std::string mux_template;      // empty -> default_mux_template()
    std::string asset_decoder_template;  // empty -> video assets skipped
    double asset_fps = 30.0;
    int max_video_frames = 900;

    // Throws ConfigError on out-of-contract values.
    void validate() const;

    static PipelineConfig from_json(const std::string& text,
                                    const std::filesystem::path& base_dir = {});
    static PipelineConfig from_file(const std::filesystem::path& path);

    RenderConfig render_config(std::uint64_t clip_seed) const;
    AssetLoadOptions asset_load_options() const;
};

// Per-clip seed: independent of which other clips are in the batch.
std::uint64_t clip_seed(std::uint64_t batch_seed, std::string_view clip_stem);

struct ClipResult {
    std::string clip_id;
    bool ok = false;
    std::int64_t frames = 0;
    double wall_ms = 0.0;
    std::string message;  // error text or warnings summary
    std::string video_path;
    std::string manifest_path;
};

struct BatchSummary {
    std::vector<ClipResult> clips;  // in clip-name order
    bool all_ok() const;
    // One machine-parseable line per clip.
    std::string to_text() const;
};

// parse -> validate -> plan -> render -> encode -> (mux) -> manifest for
// every metadata file. Per-clip failures are recorded and skipped.
BatchSummary generate(const PipelineConfig& config, std::ostream* log = nullptr);

// Marker-mode render of every clip, marker recovery per frame, conversion
// back to label-frame annotations, scored against the source metadata.
MetricsReport verify(const PipelineConfig& config, std::ostream* log = nullptr,
                     BatchSummary* summary = nullptr);

// Video-frame detections -> label-frame annotations (nearest label frame,
// deduplicated per (class, source, frame) by temporal proximity). Exposed
// for the alignment tests.
SceneMetadata detections_to_scene(
    const std::vector<std::vector<MarkerDetection>>& per_frame,
    double video_fps, int label_period_ms, std::int64_t duration_frames,
    std::string clip_id);

// score subcommand: file-vs-file or directory-vs-directory (paired by stem,
// unmatched stems warned and skipped).
MetricsReport score_paths(const std::filesystem::path& ref_path,
                          const std::filesystem::path& pred_path,
                          double threshold_deg,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace seldsynth
