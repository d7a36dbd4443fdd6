#include "seldsynth/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace seldsynth {

namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// Shortest-augmenting-path assignment with potentials (Jonker-Volgenant
// flavor), O(rows^2 * cols). Rows are assigned greedily one at a time along
// a shortest alternating path, so the final matching minimizes total cost.
std::vector<int> hungarian_assignment(const std::vector<double>& cost, int rows,
                                      int cols) {
    if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

    const bool transposed = rows > cols;
    const int n = transposed ? cols : rows;  // n <= m
    const int m = transposed ? rows : cols;
    auto at = [&](int i, int j) {
        return transposed ? cost[static_cast<std::size_t>(j) * cols + i]
                          : cost[static_cast<std::size_t>(i) * cols + j];
    };

    // 1-based arrays; p[j] = row matched to column j, column 0 is virtual.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(rows, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        if (transposed)
            row_to_col[j - 1] = p[j] - 1;
        else
            row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

FrameClassMatch match_frame(const std::vector<DoA>& refs,
                            const std::vector<DoA>& preds) {
    FrameClassMatch result;
    const int r = static_cast<int>(refs.size());
    const int p = static_cast<int>(preds.size());

    std::vector<double> cost(static_cast<std::size_t>(r) * p);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < p; ++j)
            cost[static_cast<std::size_t>(i) * p + j] =
                angular_distance_deg(refs[static_cast<std::size_t>(i)],
                                     preds[static_cast<std::size_t>(j)]);

    const auto assignment = hungarian_assignment(cost, r, p);
    std::vector<char> pred_used(static_cast<std::size_t>(p), 0);
    for (int i = 0; i < r; ++i) {
        const int j = assignment[static_cast<std::size_t>(i)];
        if (j < 0) {
            result.unmatched_refs.push_back(i);
        } else {
            result.pairs.push_back({i, j, cost[static_cast<std::size_t>(i) * p + j]});
            pred_used[static_cast<std::size_t>(j)] = 1;
        }
    }
    for (int j = 0; j < p; ++j)
        if (!pred_used[static_cast<std::size_t>(j)]) result.unmatched_preds.push_back(j);
    return result;
}

// ---- counts ---------------------------------------------------------------

std::optional<double> ScoreCounts::error_rate() const {
    if (n_ref == 0) {
        if (subs + dels + ins == 0) return 0.0;
        return std::nullopt;  // insertions with an empty reference
    }
    return static_cast<double>(subs + dels + ins) / static_cast<double>(n_ref);
}

double ScoreCounts::f_score() const {
    const std::int64_t denom = 2 * tp_loc + fp + fn;
    if (denom == 0) return n_ref == 0 ? 1.0 : 0.0;  // vacuous-perfect case
    return 2.0 * static_cast<double>(tp_loc) / static_cast<double>(denom);
}

std::optional<double> ScoreCounts::localization_error() const {
    if (tp_class == 0) return std::nullopt;
    return le_sum / static_cast<double>(tp_class);
}

double ScoreCounts::localization_recall() const {
    if (n_ref == 0) return fp == 0 ? 1.0 : 0.0;
    return static_cast<double>(tp_class) / static_cast<double>(n_ref);
}

// ---- scorer ----------------------------------------------------------------

Scorer::Scorer(double threshold_deg)
    : threshold_deg_(threshold_deg), classes_(kNumClasses) {}

void Scorer::add(const SceneMetadata& refs, const SceneMetadata& preds,
                 std::vector<std::string>* warnings) {
    if (warnings && refs.duration_frames > 0 &&
        preds.duration_frames > refs.duration_frames)
        warnings->push_back(fmt::format(
            "'{}': predictions extend to frame {} beyond the reference duration {}; "
            "extra frames scored as insertions",
            preds.clip_id, preds.duration_frames - 1, refs.duration_frames));

    // (frame, class) cells.
    std::map<std::pair<std::int64_t, int>, std::pair<std::vector<DoA>, std::vector<DoA>>>
        cells;
    for (const auto& a : refs.annotations)
        cells[{a.frame, a.class_id}].first.emplace_back(a.azimuth_deg, a.elevation_deg);
    for (const auto& a : preds.annotations)
        cells[{a.frame, a.class_id}].second.emplace_back(a.azimuth_deg, a.elevation_deg);

    std::int64_t current_frame = -1;
    std::int64_t frame_fp = 0, frame_fn = 0;
    auto flush_frame = [&]() {
        if (current_frame < 0) return;
        frame_subs_ += std::min(frame_fp, frame_fn);
        frame_dels_ += std::max<std::int64_t>(0, frame_fn - frame_fp);
        frame_ins_ += std::max<std::int64_t>(0, frame_fp - frame_fn);
        frame_fp = frame_fn = 0;
    };

    // cells iterate in (frame, class) order, giving a fixed summation order.
    for (const auto& [key, cell] : cells) {
        const auto& [frame, class_id] = key;
        const auto& [cell_refs, cell_preds] = cell;
        if (frame != current_frame) {
            flush_frame();
            current_frame = frame;
        }

        auto& acc = classes_[static_cast<std::size_t>(class_id)];
        acc.seen = true;
        acc.n_ref += static_cast<std::int64_t>(cell_refs.size());

        const auto match = match_frame(cell_refs, cell_preds);
        std::int64_t cell_fp = static_cast<std::int64_t>(match.unmatched_preds.size());
        std::int64_t cell_fn = static_cast<std::int64_t>(match.unmatched_refs.size());
        for (const auto& pair : match.pairs) {
            acc.tp_class += 1;
            acc.le_sum += pair.distance_deg;
            if (pair.distance_deg <= threshold_deg_) {
                acc.tp_loc += 1;
            } else {
                // Localized too far away: an error for the location-aware
                // pair of metrics, still a class-aware detection for LE/LR.
                cell_fp += 1;
                cell_fn += 1;
            }
        }

        acc.fp += cell_fp;
        acc.fn += cell_fn;
        acc.subs += std::min(cell_fp, cell_fn);
        acc.dels += std::max<std::int64_t>(0, cell_fn - cell_fp);
        acc.ins += std::max<std::int64_t>(0, cell_fp - cell_fn);
        frame_fp += cell_fp;
        frame_fn += cell_fn;
    }
    flush_frame();
}

MetricsReport Scorer::report() const {
    MetricsReport report;
    report.threshold_deg = threshold_deg_;

    double f_sum = 0.0, lr_sum = 0.0, le_sum = 0.0;
    int active = 0, le_defined = 0;

    for (int c = 0; c < kNumClasses; ++c) {
        const auto& acc = classes_[static_cast<std::size_t>(c)];
        if (!acc.seen) continue;

        ClassReport cr;
        cr.class_id = c;
        cr.counts.tp_loc = acc.tp_loc;
        cr.counts.fp = acc.fp;
        cr.counts.fn = acc.fn;
        cr.counts.tp_class = acc.tp_class;
        cr.counts.n_ref = acc.n_ref;
        cr.counts.subs = acc.subs;
        cr.counts.dels = acc.dels;
        cr.counts.ins = acc.ins;
        cr.counts.le_sum = acc.le_sum;
        report.per_class.push_back(cr);

        report.micro.tp_loc += acc.tp_loc;
        report.micro.fp += acc.fp;
        report.micro.fn += acc.fn;
        report.micro.tp_class += acc.tp_class;
        report.micro.n_ref += acc.n_ref;
        report.micro.le_sum += acc.le_sum;

        active += 1;
        f_sum += cr.counts.f_score();
        lr_sum += cr.counts.localization_recall();
        if (auto le = cr.counts.localization_error()) {
            le_sum += *le;
            le_defined += 1;
        }
    }

    // Micro S/D/I come from whole frames, not per-class cells: min/max do
    // not distribute over the class sum.
    report.micro.subs = frame_subs_;
    report.micro.dels = frame_dels_;
    report.micro.ins = frame_ins_;

    if (active > 0) {
        report.macro_f = f_sum / active;
        report.macro_lr = lr_sum / active;
    } else {
        report.macro_f = 1.0;
        report.macro_lr = 1.0;
    }
    if (le_defined > 0) report.macro_le = le_sum / le_defined;
    return report;
}

double MetricsReport::headline_er() const {
    return micro.error_rate().value_or(
        std::numeric_limits<double>::quiet_NaN());
}

// ---- report formatting ------------------------------------------------------

namespace {

json counts_to_json(const ScoreCounts& c) {
    json j = {{"tp_loc", c.tp_loc}, {"fp", c.fp},
              {"fn", c.fn},         {"tp_class", c.tp_class},
              {"n_ref", c.n_ref},   {"S", c.subs},
              {"D", c.dels},        {"I", c.ins},
              {"F", c.f_score()},   {"LR", c.localization_recall()}};
    if (auto er = c.error_rate())
        j["ER"] = *er;
    else
        j["ER"] = nullptr;
    if (auto le = c.localization_error())
        j["LE_deg"] = *le;
    else
        j["LE_deg"] = nullptr;
    return j;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? fmt::format("{:7.2f}", *v) : fmt::format("{:>7}", "-");
}

}  // namespace

std::string MetricsReport::to_json() const {
    json per_class_json = json::object();
    for (const auto& cr : per_class)
        per_class_json[std::string(class_name(cr.class_id))] =
            counts_to_json(cr.counts);

    json j = {{"threshold_deg", threshold_deg},
              {"per_class", per_class_json},
              {"micro", counts_to_json(micro)},
              {"macro",
               {{"F", macro_f},
                {"LE_deg", macro_le ? json(*macro_le) : json(nullptr)},
                {"LR", macro_lr}}},
              {"headline",
               {{"ER", micro.error_rate() ? json(*micro.error_rate()) : json(nullptr)},
                {"F", macro_f},
                {"LE_deg", macro_le ? json(*macro_le) : json(nullptr)},
                {"LR", macro_lr}}}};
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_table_text() const {
    std::ostringstream out;
    out << fmt::format("{:<20} {:>7} {:>7} {:>7} {:>7}   {:>6} {:>6} {:>6}\n", "class",
                       "ER", "F", "LE", "LR", "TPloc", "FP", "FN");
    for (const auto& cr : per_class) {
        const auto& c = cr.counts;
        out << fmt::format("{:<20} {} {:7.3f} {} {:7.3f}   {:>6} {:>6} {:>6}\n",
                           class_name(cr.class_id), format_optional(c.error_rate()),
                           c.f_score(), format_optional(c.localization_error()),
                           c.localization_recall(), c.tp_loc, c.fp, c.fn);
    }
    out << fmt::format(
        "{:<20} {} {:7.3f} {} {:7.3f}   (ER micro; F/LE/LR macro)\n", "overall",
        format_optional(micro.error_rate()), macro_f, format_optional(macro_le),
        macro_lr);
    return out.str();
}

// ---- entry points -----------------------------------------------------------

MetricsReport score(const SceneMetadata& refs, const SceneMetadata& preds,
                    double threshold_deg, std::vector<std::string>* warnings) {
    Scorer scorer(threshold_deg);
    scorer.add(refs, preds, warnings);
    return scorer.report();
}

MetricsReport score_files(const std::filesystem::path& ref_path,
                          const std::filesystem::path& pred_path,
                          double threshold_deg, std::vector<std::string>* warnings) {
    SceneMetadata refs, preds;
    try {
        refs = parse_metadata_file(ref_path, warnings);
    } catch (const Error& e) {
        throw ParseError(fmt::format("reference '{}': {}", ref_path.string(), e.what()),
                         0);
    }
    try {
        preds = parse_metadata_file(pred_path, warnings);
    } catch (const Error& e) {
        throw ParseError(
            fmt::format("prediction '{}': {}", pred_path.string(), e.what()), 0);
    }
    return score(refs, preds, threshold_deg, warnings);
}

}  // namespace seldsynth
