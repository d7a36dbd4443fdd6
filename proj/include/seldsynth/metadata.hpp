#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seldsynth/errors.hpp"

namespace seldsynth {

inline constexpr int kNumClasses = 13;

// The 13 STARSS sound event classes. Index == class id. The names double
// as asset directory names (lowercase, underscores).
const std::array<std::string_view, kNumClasses>& class_names();

std::string_view class_name(int class_id);

// -1 if the name is not one of the 13 classes.
int class_id_from_name(std::string_view name);

// One row of SELD metadata. One label frame is 100 ms.
struct EventAnnotation {
    std::int64_t frame = 0;
    int class_id = 0;
    int source_id = 0;
    double azimuth_deg = 0.0;    // [-180, 180)
    double elevation_deg = 0.0;  // [-90, 90]
    std::optional<double> distance;  // passed through opaquely
};

struct SceneMetadata {
    std::string clip_id;
    std::vector<EventAnnotation> annotations;
    std::int64_t duration_frames = 0;  // >= max frame present
};

// Contiguous per-(class, source) trajectory; the unit the renderer animates.
// Samples are strictly increasing in frame and consecutive samples differ
// by exactly one label frame.
struct EventTrack {
    struct Sample {
        std::int64_t frame = 0;
        double azimuth_deg = 0.0;
        double elevation_deg = 0.0;
        std::optional<double> distance;
    };

    int class_id = 0;
    int source_id = 0;
    std::vector<Sample> samples;

    std::int64_t first_frame() const { return samples.front().frame; }
    std::int64_t last_frame() const { return samples.back().frame; }
};

struct PolyphonyViolation {
    std::int64_t frame = 0;
    int count = 0;
};

// Parses CSV rows of the form frame,class,source,azimuth,elevation[,distance].
// Whitespace around fields is tolerated, blank lines are skipped, no header
// row is accepted. Azimuth exactly +180 is normalized to -180 with a warning.
// Throws ParseError / ValidationError naming the offending line.
SceneMetadata parse_metadata(std::istream& input, std::string clip_id,
                             std::vector<std::string>* warnings = nullptr);

SceneMetadata parse_metadata(std::string_view text, std::string clip_id,
                             std::vector<std::string>* warnings = nullptr);

// clip_id is the file stem.
SceneMetadata parse_metadata_file(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr);

// Empty iff no frame has more than max_polyphony distinct (class, source)
// pairs active.
std::vector<PolyphonyViolation> validate_polyphony(const SceneMetadata& scene,
                                                   int max_polyphony = 3);

// Partitions the annotations into tracks. A gap of >= 2 label frames within
// one (class, source) pair ends a track and starts a new one. Tracks come
// out sorted by (first frame, class, source, ordinal).
std::vector<EventTrack> build_tracks(const SceneMetadata& scene);

// Inverse of parse_metadata: LF line endings, reals with round-trip
// precision, distance column only on rows that carry one.
void write_metadata(const SceneMetadata& scene, std::ostream& out);
std::string write_metadata(const SceneMetadata& scene);

}  // namespace seldsynth
