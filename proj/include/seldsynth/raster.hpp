#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace seldsynth {

// Interleaved 8-bit raster, row-major. channels is 3 (RGB) or 4 (RGBA).
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    Raster() = default;
    Raster(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, 0) {}

    static Raster filled(int w, int h, int c, const std::uint8_t* color) {
        Raster r(w, h, c);
        std::size_t n = static_cast<std::size_t>(w) * h;
        for (std::size_t i = 0; i < n; ++i)
            for (int ch = 0; ch < c; ++ch) r.data[i * c + ch] = color[ch];
        return r;
    }

    std::uint8_t* pixel(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }

    bool empty() const { return data.empty(); }

    friend bool operator==(const Raster&, const Raster&) = default;
};

// Bilinear resampling with half-pixel centers and clamp-to-edge. All
// channels (alpha included) are resampled identically. A same-size resize
// returns a byte-identical copy.
Raster resize_bilinear(const Raster& src, int dst_w, int dst_h);

// Drops or adds an opaque alpha channel as needed.
Raster convert_channels(const Raster& src, int channels);

}  // namespace seldsynth
