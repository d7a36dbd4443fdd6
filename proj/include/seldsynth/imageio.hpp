#pragma once

#include <filesystem>

#include "seldsynth/raster.hpp"

namespace seldsynth {

// Decodes a PNG (as RGBA) or JPEG (as RGB) file. Throws AssetError on
// unreadable or unsupported input.
Raster read_image(const std::filesystem::path& path);

// Writes an RGB or RGBA raster as PNG.
void write_png(const std::filesystem::path& path, const Raster& raster);

}  // namespace seldsynth
