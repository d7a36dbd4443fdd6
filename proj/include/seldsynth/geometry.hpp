#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "seldsynth/metadata.hpp"

namespace seldsynth {

// Wraps into [-180, 180).
double normalize_azimuth(double azimuth_deg);

// Direction of arrival. Azimuth is normalized on construction; positive
// azimuth is to the listener's left (DCASE convention).
struct DoA {
    DoA() = default;
    DoA(double az_deg, double el_deg)
        : azimuth_deg(normalize_azimuth(az_deg)), elevation_deg(el_deg) {}

    double azimuth_deg = 0.0;    // [-180, 180)
    double elevation_deg = 0.0;  // [-90, 90]
};

// Continuous position on an equirectangular canvas. x wraps modulo width,
// y does not (poles clip).
struct PixelPos {
    double x = 0.0;  // [0, width)
    double y = 0.0;  // [0, height]
    int width = 0;
    int height = 0;
};

// x mod width with nonnegative result.
double wrap_x(double x, int width);

// Equirectangular projection: x = wrap(width * (1/2 - az/360)),
// y = height * (1/2 - el/180). Azimuth 0 lands at x = width/2, positive
// azimuth moves left, elevation +90 lands at y = 0.
PixelPos doa_to_pixel(const DoA& doa, int width, int height);

// Exact algebraic inverse on the continuous domain. At the poles
// (y == 0 or y == height) azimuth is degenerate and 0 is returned.
DoA pixel_to_doa(const PixelPos& pos);

// Great-circle angle in degrees, in [0, 180].
double angular_distance_deg(const DoA& a, const DoA& b);

// Unit vector: x toward az 0, y toward az +90 (left), z up.
std::array<double, 3> doa_to_unit(const DoA& doa);
DoA unit_to_doa(const std::array<double, 3>& v);

// Spherical linear interpolation along the shorter great-circle arc.
// t in [0, 1]; t=0 gives a, t=1 gives b.
DoA slerp(const DoA& a, const DoA& b, double t);

// Label time of a video frame, in label-frame units (frame f spans
// [f, f+1) in this timebase).
double video_frame_label_time(std::int64_t video_frame, double video_fps,
                              int label_period_ms);

// DoA of a track at label time u (label-frame units). The track is live on
// [first_frame, last_frame + 1]: between samples the DoA is the slerp of the
// bracketing pair, during the final label period it holds the last sample.
// Outside that interval: nullopt (no extrapolation).
std::optional<DoA> track_doa_at(const EventTrack& track, double label_time);

// All video frames whose timestamp falls inside the track's live interval,
// with their interpolated DoAs.
std::vector<std::pair<std::int64_t, DoA>> interpolate_track(
    const EventTrack& track, int label_period_ms, double video_fps);

}  // namespace seldsynth
