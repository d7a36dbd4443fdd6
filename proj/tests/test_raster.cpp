#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seldsynth/raster.hpp"

using namespace seldsynth;

TEST_CASE("identity resize is byte-identical") {
    Raster src(50, 50, 4);
    for (std::size_t i = 0; i < src.data.size(); ++i)
        src.data[i] = static_cast<std::uint8_t>(i * 31 + 7);
    CHECK(resize_bilinear(src, 50, 50) == src);
}

TEST_CASE("constant color survives downscaling") {
    const std::uint8_t color[4] = {12, 200, 99, 255};
    Raster src = Raster::filled(100, 100, 4, color);
    Raster dst = resize_bilinear(src, 50, 50);
    REQUIRE(dst.width == 50);
    REQUIRE(dst.height == 50);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 50; ++x)
            for (int c = 0; c < 4; ++c) CHECK(dst.pixel(x, y)[c] == color[c]);
}

TEST_CASE("2x1 black/white upscales to the hand-computed gradient") {
    Raster src(2, 1, 3);
    src.pixel(1, 0)[0] = src.pixel(1, 0)[1] = src.pixel(1, 0)[2] = 255;

    // Half-pixel centers at scale 1/2: source coords -0.25, 0.25, 0.75, 1.25
    // clamp to [0, 1] and weight as 0, 0.25, 0.75, 1 of white.
    Raster dst = resize_bilinear(src, 4, 1);
    const std::uint8_t expected[4] = {0, 64, 191, 255};
    for (int x = 0; x < 4; ++x) {
        CHECK(dst.pixel(x, 0)[0] == expected[x]);
        if (x > 0) CHECK(dst.pixel(x, 0)[0] > dst.pixel(x - 1, 0)[0]);  // monotone
    }
}

TEST_CASE("alpha is resampled exactly like color") {
    Raster rgba(4, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const auto v = static_cast<std::uint8_t>(x * 60 + y * 17);
            auto* p = rgba.pixel(x, y);
            p[0] = p[1] = p[2] = p[3] = v;
        }
    Raster resized = resize_bilinear(rgba, 9, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 9; ++x) {
            const auto* p = resized.pixel(x, y);
            CHECK(p[3] == p[0]);
            CHECK(p[3] == p[1]);
        }
}

TEST_CASE("channel conversion adds opaque alpha and drops it again") {
    Raster rgb(2, 2, 3);
    rgb.pixel(1, 1)[0] = 77;
    Raster rgba = convert_channels(rgb, 4);
    CHECK(rgba.channels == 4);
    CHECK(rgba.pixel(1, 1)[0] == 77);
    CHECK(rgba.pixel(0, 0)[3] == 255);
    CHECK(convert_channels(rgba, 3) == rgb);
}
