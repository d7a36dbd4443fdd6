#include "seldsynth/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace seldsynth {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

}  // namespace

double normalize_azimuth(double azimuth_deg) {
    double az = std::fmod(azimuth_deg + 180.0, 360.0);
    if (az < 0.0) az += 360.0;
    return az - 180.0;
}

double wrap_x(double x, int width) {
    double w = static_cast<double>(width);
    double wrapped = std::fmod(x, w);
    if (wrapped < 0.0) wrapped += w;
    // fmod of a slightly negative x can land exactly on w after the add
    if (wrapped >= w) wrapped = 0.0;
    return wrapped;
}

PixelPos doa_to_pixel(const DoA& doa, int width, int height) {
    assert(width > 0 && height > 0);
    PixelPos pos;
    pos.width = width;
    pos.height = height;
    pos.x = wrap_x(width * (0.5 - doa.azimuth_deg / 360.0), width);
    pos.y = height * (0.5 - doa.elevation_deg / 180.0);
    return pos;
}

DoA pixel_to_doa(const PixelPos& pos) {
    double elevation = 180.0 * (0.5 - pos.y / pos.height);
    elevation = std::clamp(elevation, -90.0, 90.0);
    // Azimuth is degenerate at the poles; 0 by convention.
    if (elevation == 90.0 || elevation == -90.0) return DoA(0.0, elevation);
    double azimuth = 360.0 * (0.5 - pos.x / pos.width);
    return DoA(azimuth, elevation);
}

std::array<double, 3> doa_to_unit(const DoA& doa) {
    double az = deg_to_rad(doa.azimuth_deg);
    double el = deg_to_rad(doa.elevation_deg);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

DoA unit_to_doa(const std::array<double, 3>& v) {
    double z = std::clamp(v[2], -1.0, 1.0);
    double elevation = rad_to_deg(std::asin(z));
    if (v[0] == 0.0 && v[1] == 0.0) return DoA(0.0, elevation);
    double azimuth = rad_to_deg(std::atan2(v[1], v[0]));
    return DoA(azimuth, elevation);
}

double angular_distance_deg(const DoA& a, const DoA& b) {
    // arccos of the unit-vector dot product, evaluated as atan2(|cross|, dot):
    // same angle, but well conditioned near 0 and 180 where acos loses
    // ~7 digits. Identical inputs give exactly 0.
    const auto va = doa_to_unit(a);
    const auto vb = doa_to_unit(b);
    const double cx = va[1] * vb[2] - va[2] * vb[1];
    const double cy = va[2] * vb[0] - va[0] * vb[2];
    const double cz = va[0] * vb[1] - va[1] * vb[0];
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    const double dot = va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2];
    return rad_to_deg(std::atan2(cross, dot));
}

DoA slerp(const DoA& a, const DoA& b, double t) {
    auto va = doa_to_unit(a);
    auto vb = doa_to_unit(b);
    double dot = std::clamp(
        va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2], -1.0, 1.0);
    double omega = std::acos(dot);
    double sin_omega = std::sin(omega);

    double wa, wb;
    if (sin_omega < 1e-9) {
        // Coincident (or numerically antipodal, which valid 100 ms
        // annotation steps never are): linear blend is exact enough.
        wa = 1.0 - t;
        wb = t;
    } else {
        wa = std::sin((1.0 - t) * omega) / sin_omega;
        wb = std::sin(t * omega) / sin_omega;
    }

    std::array<double, 3> v = {wa * va[0] + wb * vb[0], wa * va[1] + wb * vb[1],
                               wa * va[2] + wb * vb[2]};
    double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 0.0) {
        v[0] /= norm;
        v[1] /= norm;
        v[2] /= norm;
    }
    return unit_to_doa(v);
}

double video_frame_label_time(std::int64_t video_frame, double video_fps,
                              int label_period_ms) {
    return static_cast<double>(video_frame) * 1000.0 /
           (video_fps * static_cast<double>(label_period_ms));
}

std::optional<DoA> track_doa_at(const EventTrack& track, double label_time) {
    if (track.samples.empty()) return std::nullopt;
    const double first = static_cast<double>(track.first_frame());
    const double last = static_cast<double>(track.last_frame());
    if (label_time < first || label_time > last + 1.0) return std::nullopt;

    if (label_time >= last) {
        const auto& s = track.samples.back();
        return DoA(s.azimuth_deg, s.elevation_deg);
    }

    // Samples are contiguous in frame, so the bracketing pair is an index.
    auto idx = static_cast<std::size_t>(std::floor(label_time - first));
    const auto& s0 = track.samples[idx];
    const auto& s1 = track.samples[idx + 1];
    double t = label_time - static_cast<double>(s0.frame);
    return slerp(DoA(s0.azimuth_deg, s0.elevation_deg),
                 DoA(s1.azimuth_deg, s1.elevation_deg), t);
}

std::vector<std::pair<std::int64_t, DoA>> interpolate_track(
    const EventTrack& track, int label_period_ms, double video_fps) {
    std::vector<std::pair<std::int64_t, DoA>> result;
    if (track.samples.empty() || video_fps <= 0.0) return result;

    const double first = static_cast<double>(track.first_frame());
    const double frames_per_label = video_fps * label_period_ms / 1000.0;

    auto j = static_cast<std::int64_t>(std::ceil(first * frames_per_label - 1e-9));
    if (j < 0) j = 0;
    while (video_frame_label_time(j, video_fps, label_period_ms) < first) ++j;

    for (;; ++j) {
        double u = video_frame_label_time(j, video_fps, label_period_ms);
        auto doa = track_doa_at(track, u);
        if (!doa) break;
        result.emplace_back(j, *doa);
    }
    return result;
}

}  // namespace seldsynth
