#include "seldsynth/metadata.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace seldsynth {

const std::array<std::string_view, kNumClasses>& class_names() {
    static const std::array<std::string_view, kNumClasses> names = {
        "female_speech", "male_speech",        "clapping", "telephone",
        "laughter",      "domestic_appliance", "footsteps", "door",
        "music",         "musical_instrument", "water_tap", "bell",
        "knock",
    };
    return names;
}

std::string_view class_name(int class_id) {
    return class_names().at(static_cast<std::size_t>(class_id));
}

int class_id_from_name(std::string_view name) {
    const auto& names = class_names();
    for (int i = 0; i < kNumClasses; ++i)
        if (names[static_cast<std::size_t>(i)] == name) return i;
    return -1;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::int64_t parse_int(std::string_view field, long line, std::string_view name) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(
            fmt::format("line {}: field '{}' is not an integer: '{}'", line, name, field),
            line);
    return value;
}

double parse_real(std::string_view field, long line, std::string_view name) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
        throw ParseError(
            fmt::format("line {}: field '{}' is not a number: '{}'", line, name, field),
            line);
    return value;
}

void append_real(std::string& out, double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, ptr);
}

}  // namespace

SceneMetadata parse_metadata(std::istream& input, std::string clip_id,
                             std::vector<std::string>* warnings) {
    SceneMetadata scene;
    scene.clip_id = std::move(clip_id);

    std::set<std::tuple<std::int64_t, int, int>> seen;
    std::string line;
    long line_no = 0;
    std::int64_t max_frame = -1;

    while (std::getline(input, line)) {
        ++line_no;
        std::string_view stripped = trim(line);
        if (stripped.empty()) continue;

        auto fields = split_fields(stripped);
        if (fields.size() != 5 && fields.size() != 6)
            throw ParseError(
                fmt::format("line {}: expected 5 or 6 comma-separated fields, got {}",
                            line_no, fields.size()),
                line_no);

        EventAnnotation a;
        a.frame = parse_int(fields[0], line_no, "frame");
        a.class_id = static_cast<int>(parse_int(fields[1], line_no, "class"));
        a.source_id = static_cast<int>(parse_int(fields[2], line_no, "source"));
        a.azimuth_deg = parse_real(fields[3], line_no, "azimuth");
        a.elevation_deg = parse_real(fields[4], line_no, "elevation");
        if (fields.size() == 6)
            a.distance = parse_real(fields[5], line_no, "distance");

        if (a.frame < 0)
            throw ValidationError(fmt::format("line {}: frame must be non-negative, got {}",
                                              line_no, a.frame),
                                  line_no);
        if (a.class_id < 0 || a.class_id >= kNumClasses)
            throw ValidationError(
                fmt::format("line {}: class {} out of range 0..{}", line_no, a.class_id,
                            kNumClasses - 1),
                line_no);
        if (a.source_id < 0)
            throw ValidationError(
                fmt::format("line {}: source must be non-negative, got {}", line_no,
                            a.source_id),
                line_no);
        if (a.azimuth_deg == 180.0) {
            a.azimuth_deg = -180.0;
            if (warnings)
                warnings->push_back(fmt::format(
                    "line {}: azimuth +180 normalized to -180", line_no));
        }
        if (a.azimuth_deg < -180.0 || a.azimuth_deg >= 180.0)
            throw ValidationError(
                fmt::format("line {}: azimuth {} outside [-180, 180)", line_no,
                            a.azimuth_deg),
                line_no);
        if (a.elevation_deg < -90.0 || a.elevation_deg > 90.0)
            throw ValidationError(
                fmt::format("line {}: elevation {} outside [-90, 90]", line_no,
                            a.elevation_deg),
                line_no);
        if (a.distance && *a.distance < 0.0)
            throw ValidationError(
                fmt::format("line {}: distance must be non-negative, got {}", line_no,
                            *a.distance),
                line_no);
        if (!seen.insert({a.frame, a.class_id, a.source_id}).second)
            throw ValidationError(
                fmt::format("line {}: duplicate (frame {}, class {}, source {})",
                            line_no, a.frame, a.class_id, a.source_id),
                line_no);

        max_frame = std::max(max_frame, a.frame);
        scene.annotations.push_back(a);
    }

    scene.duration_frames = max_frame + 1;
    return scene;
}

SceneMetadata parse_metadata(std::string_view text, std::string clip_id,
                             std::vector<std::string>* warnings) {
    std::istringstream stream{std::string(text)};
    return parse_metadata(stream, std::move(clip_id), warnings);
}

SceneMetadata parse_metadata_file(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings) {
    std::ifstream file(path);
    if (!file)
        throw ParseError(fmt::format("cannot open metadata file '{}'", path.string()), 0);
    return parse_metadata(file, path.stem().string(), warnings);
}

std::vector<PolyphonyViolation> validate_polyphony(const SceneMetadata& scene,
                                                   int max_polyphony) {
    // (frame, class, source) uniqueness holds post-parse, so the row count
    // per frame is the distinct active pair count.
    std::map<std::int64_t, int> per_frame;
    for (const auto& a : scene.annotations) ++per_frame[a.frame];

    std::vector<PolyphonyViolation> violations;
    for (const auto& [frame, count] : per_frame)
        if (count > max_polyphony) violations.push_back({frame, count});
    return violations;
}

std::vector<EventTrack> build_tracks(const SceneMetadata& scene) {
    std::map<std::pair<int, int>, std::vector<EventTrack::Sample>> groups;
    for (const auto& a : scene.annotations)
        groups[{a.class_id, a.source_id}].push_back(
            {a.frame, a.azimuth_deg, a.elevation_deg, a.distance});

    std::vector<EventTrack> tracks;
    for (auto& [key, samples] : groups) {
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a.frame < b.frame; });
        EventTrack track{key.first, key.second, {}};
        for (const auto& s : samples) {
            if (!track.samples.empty() && s.frame != track.samples.back().frame + 1) {
                tracks.push_back(std::move(track));
                track = EventTrack{key.first, key.second, {}};
            }
            track.samples.push_back(s);
        }
        if (!track.samples.empty()) tracks.push_back(std::move(track));
    }

    std::stable_sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
        return std::tuple(a.first_frame(), a.class_id, a.source_id) <
               std::tuple(b.first_frame(), b.class_id, b.source_id);
    });
    return tracks;
}

void write_metadata(const SceneMetadata& scene, std::ostream& out) {
    std::string buffer;
    for (const auto& a : scene.annotations) {
        buffer.clear();
        buffer += std::to_string(a.frame);
        buffer += ',';
        buffer += std::to_string(a.class_id);
        buffer += ',';
        buffer += std::to_string(a.source_id);
        buffer += ',';
        append_real(buffer, a.azimuth_deg);
        buffer += ',';
        append_real(buffer, a.elevation_deg);
        if (a.distance) {
            buffer += ',';
            append_real(buffer, *a.distance);
        }
        buffer += '\n';
        out << buffer;
    }
}

std::string write_metadata(const SceneMetadata& scene) {
    std::ostringstream out;
    write_metadata(scene, out);
    return out.str();
}

}  // namespace seldsynth
