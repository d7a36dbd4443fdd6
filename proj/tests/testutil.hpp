#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seldsynth/metadata.hpp"

namespace seldsynth::test {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (prefix + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Random valid scene: at most one event per (frame, class), polyphony <= 3.
// Azimuths land on the open interval to stay clear of the +180 edge.
inline SceneMetadata random_scene(std::mt19937_64& rng, int frames = 20,
                                  bool with_distance = false) {
    SceneMetadata scene;
    scene.clip_id = "random";
    scene.duration_frames = frames;
    std::uniform_real_distribution<double> az(-179.0, 179.0);
    std::uniform_real_distribution<double> el(-89.0, 89.0);
    std::uniform_int_distribution<int> n_events(0, 3);
    std::uniform_int_distribution<int> any_class(0, kNumClasses - 1);
    std::uniform_real_distribution<double> dist(0.0, 500.0);

    for (int f = 0; f < frames; ++f) {
        const int n = n_events(rng);
        std::vector<int> classes;
        while (static_cast<int>(classes.size()) < n) {
            int c = any_class(rng);
            if (std::find(classes.begin(), classes.end(), c) == classes.end())
                classes.push_back(c);
        }
        for (int c : classes) {
            EventAnnotation a;
            a.frame = f;
            a.class_id = c;
            a.source_id = 0;
            a.azimuth_deg = az(rng);
            a.elevation_deg = el(rng);
            if (with_distance) a.distance = dist(rng);
            scene.annotations.push_back(a);
        }
    }
    return scene;
}

}  // namespace seldsynth::test
