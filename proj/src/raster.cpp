#include "seldsynth/raster.hpp"

#include <algorithm>
#include <cmath>

namespace seldsynth {

Raster resize_bilinear(const Raster& src, int dst_w, int dst_h) {
    if (src.width == dst_w && src.height == dst_h) return src;

    Raster dst(dst_w, dst_h, src.channels);
    const double sx_scale = static_cast<double>(src.width) / dst_w;
    const double sy_scale = static_cast<double>(src.height) / dst_h;
    const int c = src.channels;

    for (int dy = 0; dy < dst_h; ++dy) {
        // Half-pixel centers, clamped to the edge before taking weights.
        const double sy = std::clamp((dy + 0.5) * sy_scale - 0.5, 0.0,
                                     static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double ty = sy - y0;

        for (int dx = 0; dx < dst_w; ++dx) {
            const double sx = std::clamp((dx + 0.5) * sx_scale - 0.5, 0.0,
                                         static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double tx = sx - x0;

            const std::uint8_t* p00 = src.pixel(x0, y0);
            const std::uint8_t* p10 = src.pixel(x1, y0);
            const std::uint8_t* p01 = src.pixel(x0, y1);
            const std::uint8_t* p11 = src.pixel(x1, y1);
            std::uint8_t* out = dst.pixel(dx, dy);

            for (int ch = 0; ch < c; ++ch) {
                double top = p00[ch] * (1.0 - tx) + p10[ch] * tx;
                double bottom = p01[ch] * (1.0 - tx) + p11[ch] * tx;
                double value = top * (1.0 - ty) + bottom * ty;
                out[ch] = static_cast<std::uint8_t>(std::lround(value));
            }
        }
    }
    return dst;
}

Raster convert_channels(const Raster& src, int channels) {
    if (src.channels == channels) return src;

    Raster dst(src.width, src.height, channels);
    const std::size_t n = static_cast<std::size_t>(src.width) * src.height;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* in = src.data.data() + i * src.channels;
        std::uint8_t* out = dst.data.data() + i * channels;
        out[0] = in[0];
        out[1] = in[1];
        out[2] = in[2];
        if (channels == 4) out[3] = src.channels == 4 ? in[3] : 255;
    }
    return dst;
}

}  // namespace seldsynth
