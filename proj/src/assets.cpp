#include "seldsynth/assets.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "seldsynth/errors.hpp"
#include "seldsynth/imageio.hpp"
#include "seldsynth/textutil.hpp"

namespace seldsynth {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string e = path.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e;
}

bool is_still_image(const fs::path& path) {
    std::string e = lower_extension(path);
    return e == ".png" || e == ".jpg" || e == ".jpeg";
}

bool is_video(const fs::path& path) {
    std::string e = lower_extension(path);
    return e == ".mp4" || e == ".mov" || e == ".avi" || e == ".mkv" || e == ".webm";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() == directories) entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });
    return entries;
}

// Reads raw RGBA frames from the decoder command's stdout.
std::vector<Raster> decode_video_frames(const fs::path& path,
                                        const AssetLoadOptions& options,
                                        std::string* error) {
    const std::map<std::string, std::string> vars = {
        {"input", path.string()},
        {"width", std::to_string(options.tile_size)},
        {"height", std::to_string(options.tile_size)},
        {"fps", fmt::format("{}", options.asset_fps)},
    };
    const std::string command = expand_template(options.video_decoder_template, vars);

    std::FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        *error = fmt::format("cannot start decoder: {}", command);
        return {};
    }

    const std::size_t frame_bytes =
        static_cast<std::size_t>(options.tile_size) * options.tile_size * 4;
    std::vector<Raster> frames;
    while (static_cast<int>(frames.size()) < options.max_video_frames) {
        Raster frame(options.tile_size, options.tile_size, 4);
        std::size_t got = std::fread(frame.data.data(), 1, frame_bytes, pipe);
        if (got < frame_bytes) break;  // trailing partial frame is discarded
        frames.push_back(std::move(frame));
    }
    int status = pclose(pipe);
    if (frames.empty()) {
        *error = fmt::format("decoder produced no frames (exit {}): {}", status, command);
        return {};
    }
    return frames;
}

}  // namespace

std::string LoadReport::to_text() const {
    std::ostringstream out;
    out << "asset library load report\n";
    for (int c = 0; c < kNumClasses; ++c)
        out << fmt::format("  {:<20} {} tile(s)\n", class_name(c),
                           tiles_per_class[static_cast<std::size_t>(c)]);
    out << fmt::format("  backgrounds          {}\n", backgrounds);
    if (!skipped.empty()) {
        out << "skipped files\n";
        for (const auto& [path, reason] : skipped)
            out << fmt::format("  {}: {}\n", path, reason);
    }
    return out.str();
}

const AssetTile* AssetLibrary::find_tile(std::string_view asset_id) const {
    for (const auto& [class_id, class_tiles] : tiles)
        for (const auto& tile : class_tiles)
            if (tile.asset_id == asset_id) return &tile;
    return nullptr;
}

const Background* AssetLibrary::find_background(std::string_view background_id) const {
    for (const auto& bg : backgrounds)
        if (bg.background_id == background_id) return &bg;
    return nullptr;
}

std::size_t AssetLibrary::tile_count(int class_id) const {
    auto it = tiles.find(class_id);
    return it == tiles.end() ? 0 : it->second.size();
}

AssetLibrary load_library(const fs::path& tiles_root, const fs::path& backgrounds_root,
                          const AssetLoadOptions& options, LoadReport* report) {
    AssetLibrary library;
    LoadReport local_report;
    LoadReport& rep = report ? *report : local_report;
    rep = LoadReport{};

    if (!fs::is_directory(tiles_root))
        throw AssetError(fmt::format("tiles root '{}' is not a directory",
                                     tiles_root.string()));
    if (!fs::is_directory(backgrounds_root))
        throw AssetError(fmt::format("backgrounds root '{}' is not a directory",
                                     backgrounds_root.string()));

    for (const auto& class_dir : sorted_entries(tiles_root, true)) {
        const std::string dir_name = class_dir.filename().string();
        const int class_id = class_id_from_name(dir_name);
        if (class_id < 0)
            throw AssetError(fmt::format(
                "unknown class directory '{}' under '{}' (expected one of the 13 "
                "class names)",
                dir_name, tiles_root.string()));

        for (const auto& file : sorted_entries(class_dir, false)) {
            const std::string asset_id = dir_name + "/" + file.filename().string();
            AssetTile tile;
            tile.class_id = class_id;
            tile.asset_id = asset_id;

            if (is_still_image(file)) {
                try {
                    Raster raster = convert_channels(read_image(file), 4);
                    tile.frames.push_back(
                        resize_bilinear(raster, options.tile_size, options.tile_size));
                    tile.native_fps = 1.0;
                } catch (const AssetError& e) {
                    rep.skipped.emplace_back(asset_id, e.what());
                    continue;
                }
            } else if (is_video(file)) {
                if (options.video_decoder_template.empty()) {
                    rep.skipped.emplace_back(asset_id, "no video decoder configured");
                    continue;
                }
                std::string error;
                tile.frames = decode_video_frames(file, options, &error);
                if (tile.frames.empty()) {
                    rep.skipped.emplace_back(asset_id, error);
                    continue;
                }
                tile.native_fps = options.asset_fps;
            } else {
                rep.skipped.emplace_back(asset_id, "unsupported file type");
                continue;
            }

            rep.tiles_per_class[static_cast<std::size_t>(class_id)]++;
            library.tiles[class_id].push_back(std::move(tile));
        }
    }

    // Stray files at the top of tiles_root are not class assets.
    for (const auto& file : sorted_entries(tiles_root, false))
        rep.skipped.emplace_back(file.filename().string(),
                                 "file outside a class directory");

    for (const auto& file : sorted_entries(backgrounds_root, false)) {
        const std::string background_id = file.filename().string();
        if (!is_still_image(file)) {
            rep.skipped.emplace_back(background_id, "unsupported background type");
            continue;
        }
        try {
            Raster raster = convert_channels(read_image(file), 3);
            library.backgrounds.push_back(
                {background_id, resize_bilinear(raster, options.background_width,
                                                options.background_height)});
            rep.backgrounds++;
        } catch (const AssetError& e) {
            rep.skipped.emplace_back(background_id, e.what());
        }
    }

    if (library.backgrounds.empty())
        throw AssetError(fmt::format("no usable backgrounds in '{}'",
                                     backgrounds_root.string()));
    return library;
}

const AssetTile& select_tile(const AssetLibrary& library, int class_id, Rng& rng) {
    auto it = library.tiles.find(class_id);
    if (it == library.tiles.end() || it->second.empty())
        throw AssetError(fmt::format("no tiles for class {} ({})", class_id,
                                     class_id >= 0 && class_id < kNumClasses
                                         ? class_name(class_id)
                                         : "invalid"));
    return it->second[rng.uniform_below(it->second.size())];
}

const Background& select_background(const AssetLibrary& library, Rng& rng) {
    return library.backgrounds[rng.uniform_below(library.backgrounds.size())];
}

}  // namespace seldsynth
