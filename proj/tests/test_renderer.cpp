#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "seldsynth/errors.hpp"
#include "seldsynth/imageio.hpp"
#include "seldsynth/renderer.hpp"
#include "testutil.hpp"

using namespace seldsynth;

namespace {

void write_solid_png(const std::filesystem::path& path, int w, int h,
                     std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::uint8_t color[3] = {r, g, b};
    write_png(path, Raster::filled(w, h, 3, color));
}

// One red knock tile, one blue bell tile, one gray gradient background.
struct RenderTree {
    test::TempDir dir{"renderer"};
    std::filesystem::path tiles = dir.path() / "tiles";
    std::filesystem::path backgrounds = dir.path() / "backgrounds";
    AssetLibrary library;

    RenderTree() {
        std::filesystem::create_directories(tiles / "knock");
        std::filesystem::create_directories(tiles / "bell");
        std::filesystem::create_directories(backgrounds);
        write_solid_png(tiles / "knock" / "red.png", 50, 50, 200, 0, 0);
        write_solid_png(tiles / "bell" / "blue.png", 50, 50, 0, 0, 200);

        Raster bg(1920, 960, 3);
        for (int y = 0; y < bg.height; ++y)
            for (int x = 0; x < bg.width; ++x) {
                auto* p = bg.pixel(x, y);
                p[0] = static_cast<std::uint8_t>(x % 251);
                p[1] = static_cast<std::uint8_t>(y % 249);
                p[2] = 60;
            }
        write_png(backgrounds / "grad.png", bg);
        library = load_library(tiles, backgrounds);
    }
};

bool pixel_is(const Raster& frame, int x, int y, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
    const auto* p = frame.pixel(x, y);
    return p[0] == r && p[1] == g && p[2] == b;
}

}  // namespace

TEST_CASE("empty scene renders the background byte for byte") {
    RenderTree tree;
    SceneMetadata scene;
    scene.clip_id = "empty";
    scene.duration_frames = 2;

    auto plan = plan_render(scene, tree.library, {});
    CHECK(plan.tracks.empty());
    Raster frame = render_frame(plan, 0);
    CHECK(frame == tree.library.backgrounds[0].raster);
}

TEST_CASE("a tile at the origin occupies rows 455-504 and cols 935-984") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,0,0", "one");
    auto plan = plan_render(scene, tree.library, {});
    Raster frame = render_frame(plan, 0);

    const Raster& bg = tree.library.backgrounds[0].raster;
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            const bool inside = y >= 455 && y <= 504 && x >= 935 && x <= 984;
            if (inside) {
                if (!pixel_is(frame, x, y, 200, 0, 0)) {
                    CAPTURE(x);
                    CAPTURE(y);
                    FAIL_CHECK("expected tile pixel");
                }
            } else if (std::memcmp(frame.pixel(x, y), bg.pixel(x, y), 3) != 0) {
                CAPTURE(x);
                CAPTURE(y);
                FAIL_CHECK("background disturbed outside the tile");
            }
        }
}

TEST_CASE("a tile at azimuth -180 wraps across the seam") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,-180,0", "seam");
    auto plan = plan_render(scene, tree.library, {});
    Raster frame = render_frame(plan, 0);

    for (int y = 455; y <= 504; ++y) {
        for (int x = 1895; x < 1920; ++x) CHECK(pixel_is(frame, x, y, 200, 0, 0));
        for (int x = 0; x < 25; ++x) CHECK(pixel_is(frame, x, y, 200, 0, 0));
    }
    // Just outside the two spans the background shows through.
    CHECK_FALSE(pixel_is(frame, 25, 480, 200, 0, 0));
    CHECK_FALSE(pixel_is(frame, 1894, 480, 200, 0, 0));
}

TEST_CASE("vertical placement clips at the poles instead of wrapping") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,0,90", "top");
    auto plan = plan_render(scene, tree.library, {});
    Raster frame = render_frame(plan, 0);
    // Center row 0: only rows 0..24 are painted.
    for (int y = 0; y < 25; ++y) CHECK(pixel_is(frame, 960, y, 200, 0, 0));
    CHECK_FALSE(pixel_is(frame, 960, 25, 200, 0, 0));
    // Bottom row of the canvas stays background.
    CHECK_FALSE(pixel_is(frame, 960, 959, 200, 0, 0));
}

TEST_CASE("later onset composites on top") {
    RenderTree tree;
    // knock starts at frame 0, bell at frame 1, same direction.
    auto scene = parse_metadata("0,12,0,0,0\n1,12,0,0,0\n1,11,1,0,0\n2,11,1,0,0",
                                "stack");
    RenderConfig config;
    config.video_fps = 10.0;  // one video frame per label frame
    auto plan = plan_render(scene, tree.library, config);
    REQUIRE(plan.tracks.size() == 2);
    CHECK(plan.tracks[0].z_order < plan.tracks[1].z_order);

    Raster at0 = render_frame(plan, 0);
    CHECK(pixel_is(at0, 960, 480, 200, 0, 0));  // knock alone
    Raster at1 = render_frame(plan, 1);
    CHECK(pixel_is(at1, 960, 480, 0, 0, 200));  // bell covers knock
}

TEST_CASE("alpha blending uses rounded integer alpha-over") {
    Raster canvas(4, 4, 3);  // black
    Raster tile(2, 2, 4);
    for (int i = 0; i < 4; ++i) {
        auto* p = tile.data.data() + i * 4;
        p[0] = 200;
        p[1] = 100;
        p[2] = 30;
        p[3] = 128;
    }
    RenderPlan plan;  // only used for dimensions in this helper-free check

    // Compose via render_frame machinery: build a one-track marker-free plan
    // around a hand-made tile.
    AssetTile asset;
    asset.class_id = 0;
    asset.asset_id = "hand";
    asset.frames.push_back(tile);
    Background bg{"black", canvas};

    plan.clip_id = "blend";
    plan.config = RenderConfig{4, 4, 2, 10.0, 100, false, 0};
    plan.background = &bg;
    plan.background_id = bg.background_id;
    plan.duration_frames = 1;
    EventTrack track{0, 0, {{0, 0.0, 0.0, {}}}};
    plan.tracks.push_back({track, &asset, asset.asset_id, 0});

    Raster frame = render_frame(plan, 0);
    // (200*128 + 0*127 + 127) / 255 = 100.9 -> 100, etc.
    const auto* center = frame.pixel(2, 2);
    CHECK(center[0] == 100);
    CHECK(center[1] == 50);
    CHECK(center[2] == 15);
}

TEST_CASE("animated tiles advance by onset time and loop") {
    Raster f0(2, 2, 4), f1(2, 2, 4), f2(2, 2, 4);
    f0.data[0] = 10;
    f1.data[0] = 20;
    f2.data[0] = 30;
    for (auto* f : {&f0, &f1, &f2})
        for (int i = 0; i < 4; ++i) f->data[static_cast<std::size_t>(i) * 4 + 3] = 255;

    AssetTile asset;
    asset.class_id = 0;
    asset.asset_id = "anim";
    asset.frames = {f0, f1, f2};
    asset.native_fps = 10.0;  // one asset frame per label frame

    Raster black(8, 8, 3);
    Background bg{"black", black};
    RenderPlan plan;
    plan.clip_id = "anim";
    plan.config = RenderConfig{8, 8, 2, 10.0, 100, false, 0};
    plan.background = &bg;
    plan.background_id = bg.background_id;
    plan.duration_frames = 5;
    EventTrack track{0, 0, {}};
    for (int f = 0; f < 5; ++f) track.samples.push_back({f, 0.0, 0.0, {}});
    plan.tracks.push_back({track, &asset, asset.asset_id, 0});

    // 10 fps on 100 ms labels: video frame j sits at onset + j asset frames.
    // The 2x2 tile centered at (4, 4) puts tile pixel (0, 0) at canvas (3, 3).
    CHECK(render_frame(plan, 0).pixel(3, 3)[0] == 10);
    CHECK(render_frame(plan, 1).pixel(3, 3)[0] == 20);
    CHECK(render_frame(plan, 2).pixel(3, 3)[0] == 30);
    CHECK(render_frame(plan, 3).pixel(3, 3)[0] == 10);  // loops
}

TEST_CASE("plans are deterministic and validated before rendering") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,10,0\n0,11,1,-60,20\n0,12,2,120,-30", "det");
    RenderConfig config;
    config.seed = 777;
    auto a = plan_render(scene, tree.library, config);
    auto b = plan_render(scene, tree.library, config);
    REQUIRE(a.tracks.size() == b.tracks.size());
    CHECK(a.background_id == b.background_id);
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
        CHECK(a.tracks[i].asset_id == b.tracks[i].asset_id);
        CHECK(a.tracks[i].z_order == b.tracks[i].z_order);
    }

    std::set<int> z;
    for (const auto& t : a.tracks) z.insert(t.z_order);
    CHECK(z.size() == 3);  // distinct z for simultaneous events

    // Missing class asset fails before any frame is rendered.
    auto missing = parse_metadata("0,3,0,0,0", "missing");
    CHECK_THROWS_AS(plan_render(missing, tree.library, config), AssetError);
}

TEST_CASE("render_clip emits ceil(duration * fps) frames") {
    RenderTree tree;
    SceneMetadata scene;
    scene.clip_id = "count";
    scene.duration_frames = 600;  // 60 s
    auto plan = plan_render(scene, tree.library, {});
    CHECK(plan.frame_count() == 1800);

    scene.duration_frames = 7;  // 0.7 s at 30 fps -> 21 frames
    CHECK(plan_render(scene, tree.library, {}).frame_count() == 21);

    RenderConfig odd;
    odd.video_fps = 25.0;
    scene.duration_frames = 3;  // 0.3 s at 25 fps -> ceil(7.5) = 8
    CHECK(plan_render(scene, tree.library, odd).frame_count() == 8);

    NullSink sink;
    scene.duration_frames = 10;  // 1 s
    auto manifest = render_clip(plan_render(scene, tree.library, {}), sink);
    CHECK(sink.frames() == 30);
    CHECK(manifest.clip_id == "count");
}

TEST_CASE("manifest records events and replays bit-exactly") {
    RenderTree tree;
    auto scene = parse_metadata(
        "0,12,0,10,0\n1,12,0,12,1\n2,12,0,14,2\n1,11,1,-60,20\n2,11,1,-61,21",
        "replay");
    RenderConfig config;
    config.seed = 42;
    auto plan = plan_render(scene, tree.library, config);

    NullSink sink;
    auto manifest = render_clip(plan, sink);
    REQUIRE(manifest.events.size() == 2);
    CHECK(manifest.seed == 42);
    CHECK(manifest.background_id == plan.background_id);
    CHECK(manifest.events[0].first_video_frame == 0);
    // knock lives through label time 3.0, but the clip has 9 video frames,
    // so the recorded range clamps to the last rendered frame.
    CHECK(manifest.events[0].last_video_frame == 8);

    const std::string round_trip = Manifest::from_json(manifest.to_json()).to_json();
    CHECK(round_trip == manifest.to_json());

    auto replay_plan = plan_from_manifest(scene, tree.library, manifest);
    for (std::int64_t j = 0; j < plan.frame_count(); ++j)
        CHECK(render_frame(replay_plan, j) == render_frame(plan, j));
}

TEST_CASE("marker colors are injective over 13 classes x 3 sources") {
    std::set<std::array<std::uint8_t, 3>> colors;
    for (int c = 0; c < kNumClasses; ++c)
        for (int s = 0; s < 3; ++s) {
            auto color = marker_color(c, s);
            CHECK(color != std::array<std::uint8_t, 3>{0, 0, 0});
            colors.insert(color);
        }
    CHECK(colors.size() == 39);
}

TEST_CASE("marker mode renders on black and recovers the direction") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,45,10", "marker");
    RenderConfig config;
    config.marker_mode = true;
    auto plan = plan_render(scene, tree.library, config);
    Raster frame = render_frame(plan, 0);

    // Background is black, not the library background.
    CHECK(pixel_is(frame, 5, 5, 0, 0, 0));

    auto detections = recover_markers(frame, plan, 0);
    REQUIRE(detections.size() == 1);
    CHECK(detections[0].class_id == 12);
    CHECK(detections[0].source_id == 0);
    CHECK(angular_distance_deg(detections[0].doa, DoA(45, 10)) < 0.5);
}

TEST_CASE("recovery on an empty frame finds nothing") {
    RenderTree tree;
    SceneMetadata scene;
    scene.clip_id = "empty";
    scene.duration_frames = 1;
    RenderConfig config;
    config.marker_mode = true;
    auto plan = plan_render(scene, tree.library, config);
    CHECK(recover_markers(render_frame(plan, 0), plan, 0).empty());
}

TEST_CASE("two separated markers recover with correct identities") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,45,10\n0,11,1,-120,-30", "two");
    RenderConfig config;
    config.marker_mode = true;
    auto plan = plan_render(scene, tree.library, config);
    auto detections = recover_markers(render_frame(plan, 0), plan, 0);
    REQUIRE(detections.size() == 2);
    for (const auto& d : detections) {
        if (d.class_id == 12)
            CHECK(angular_distance_deg(d.doa, DoA(45, 10)) < 0.5);
        else
            CHECK(angular_distance_deg(d.doa, DoA(-120, -30)) < 0.5);
    }
}

TEST_CASE("a fully occluded marker is absent") {
    RenderTree tree;
    // Same direction, bell onsets later so it fully covers knock.
    auto scene = parse_metadata("0,12,0,30,0\n1,12,0,30,0\n1,11,1,30,0", "occ");
    RenderConfig config;
    config.marker_mode = true;
    config.video_fps = 10.0;
    auto plan = plan_render(scene, tree.library, config);

    auto at1 = recover_markers(render_frame(plan, 1), plan, 1);
    REQUIRE(at1.size() == 1);
    CHECK(at1[0].class_id == 11);
}

TEST_CASE("a marker recovered across the seam uses the circular mean") {
    RenderTree tree;
    auto scene = parse_metadata("0,12,0,-180,0", "seammark");
    RenderConfig config;
    config.marker_mode = true;
    auto plan = plan_render(scene, tree.library, config);
    auto detections = recover_markers(render_frame(plan, 0), plan, 0);
    REQUIRE(detections.size() == 1);
    CHECK(angular_distance_deg(detections[0].doa, DoA(-180, 0)) < 0.5);
}

TEST_CASE("synchronization: projected tile centers stay within 0.25 degrees") {
    RenderTree tree;
    SceneMetadata scene;
    scene.clip_id = "sync";
    scene.duration_frames = 20;
    for (int f = 0; f < 20; ++f) {
        scene.annotations.push_back(
            {f, 12, 0, normalize_azimuth(170.0 + 2.5 * f), 10.0 - 0.5 * f, {}});
        scene.annotations.push_back({f, 11, 1, -60.0 + f, 20.0 + 2.0 * f, {}});
    }
    auto plan = plan_render(scene, tree.library, {});

    for (std::int64_t j = 0; j < plan.frame_count(); ++j) {
        const double u = video_frame_label_time(j, plan.config.video_fps,
                                                plan.config.label_period_ms);
        for (const auto& pt : plan.tracks) {
            auto doa = track_doa_at(pt.track, u);
            if (!doa) continue;
            const PixelPos pos = doa_to_pixel(*doa, 1920, 960);
            PixelPos rounded{wrap_x(std::round(pos.x), 1920), std::round(pos.y), 1920,
                             960};
            CHECK(angular_distance_deg(*doa, pixel_to_doa(rounded)) < 0.25);
        }
    }
}

TEST_CASE("process sink pipes frames and reports encoder failures") {
    test::TempDir dir("sink");
    const auto out_path = (dir.path() / "frames.raw").string();

    SUBCASE("bytes arrive in order") {
        {
            ProcessSink sink("cat > " + out_path);
            Raster frame(16, 8, 3);
            for (std::size_t i = 0; i < frame.data.size(); ++i)
                frame.data[i] = static_cast<std::uint8_t>(i);
            sink.write_frame(frame);
            sink.write_frame(frame);
            sink.close();
        }
        std::ifstream in(out_path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        REQUIRE(bytes.size() == 16 * 8 * 3 * 2);
        CHECK(static_cast<std::uint8_t>(bytes[5]) == 5);
    }

    SUBCASE("an encoder that dies mid-stream aborts with the frame count") {
        ProcessSink sink("exit 1");
        Raster frame(1920, 960, 3);
        bool threw = false;
        for (int i = 0; i < 100 && !threw; ++i) {
            try {
                sink.write_frame(frame);
            } catch (const SinkError& e) {
                threw = true;
                CHECK(e.frames_written() < 100);
            }
        }
        CHECK(threw);
    }

    SUBCASE("a nonzero encoder exit surfaces at close") {
        ProcessSink sink("cat > /dev/null; exit 3");
        Raster frame(4, 4, 3);
        sink.write_frame(frame);
        CHECK_THROWS_AS(sink.close(), SinkError);
    }
}

TEST_CASE("png sink writes numbered frames") {
    test::TempDir dir("pngsink");
    PngDirSink sink(dir.path() / "frames");
    Raster frame(8, 4, 3);
    frame.pixel(3, 2)[1] = 99;
    sink.write_frame(frame);
    sink.write_frame(frame);

    CHECK(std::filesystem::exists(dir.path() / "frames" / "frame_000000.png"));
    CHECK(std::filesystem::exists(dir.path() / "frames" / "frame_000001.png"));
    Raster back = read_image(dir.path() / "frames" / "frame_000001.png");
    CHECK(back.channels == 4);  // PNGs decode as RGBA
    CHECK(back.pixel(3, 2)[1] == 99);
}
