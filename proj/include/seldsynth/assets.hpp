#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seldsynth/metadata.hpp"
#include "seldsynth/raster.hpp"
#include "seldsynth/rng.hpp"

namespace seldsynth {

// A visual asset normalized to tile size. Static images have one frame and
// native_fps 1; decoded video assets carry the configured decode rate.
struct AssetTile {
    int class_id = 0;
    std::string asset_id;  // path relative to tiles_root
    std::vector<Raster> frames;  // RGBA, each exactly tile_size x tile_size
    double native_fps = 1.0;
};

struct Background {
    std::string background_id;  // path relative to backgrounds_root
    Raster raster;              // RGB, exactly canvas size
};

struct AssetLoadOptions {
    int tile_size = 50;
    int background_width = 1920;
    int background_height = 960;
    // External decoder for video assets; placeholders {input} {width}
    // {height} {fps}. Must emit raw RGBA frames at {width}x{height} on
    // stdout, {fps} frames per second of source time. Empty: video assets
    // are skipped.
    std::string video_decoder_template;
    double asset_fps = 30.0;
    int max_video_frames = 900;  // memory cap; looping covers longer events
};

struct LoadReport {
    std::array<int, kNumClasses> tiles_per_class{};
    int backgrounds = 0;
    std::vector<std::pair<std::string, std::string>> skipped;  // (path, reason)
    std::string to_text() const;
};

struct AssetLibrary {
    std::map<int, std::vector<AssetTile>> tiles;  // class id -> lexicographic by path
    std::vector<Background> backgrounds;          // lexicographic by path

    const AssetTile* find_tile(std::string_view asset_id) const;
    const Background* find_background(std::string_view background_id) const;
    std::size_t tile_count(int class_id) const;
};

// Scans tiles_root/<class_name>/* and backgrounds_root/*, decoding and
// normalizing everything it can. Unknown class directories and an empty
// background set are errors; undecodable files are skipped and recorded in
// the report. Ordering is lexicographic by relative path so seeded
// selection is reproducible.
AssetLibrary load_library(const std::filesystem::path& tiles_root,
                          const std::filesystem::path& backgrounds_root,
                          const AssetLoadOptions& options = {},
                          LoadReport* report = nullptr);

// Uniform, deterministic under the supplied generator state.
const AssetTile& select_tile(const AssetLibrary& library, int class_id, Rng& rng);
const Background& select_background(const AssetLibrary& library, Rng& rng);

}  // namespace seldsynth
