#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seldsynth/geometry.hpp"
#include "seldsynth/metadata.hpp"

namespace seldsynth {

// Minimum-total-cost one-to-one assignment on a rectangular cost matrix
// (rows x cols, row-major). Returns col index per row, -1 for unassigned
// rows; exactly min(rows, cols) rows get assigned.
std::vector<int> hungarian_assignment(const std::vector<double>& cost,
                                      int rows, int cols);

struct MatchedPair {
    int ref_index = 0;
    int pred_index = 0;
    double distance_deg = 0.0;
};

// Optimal matching of one (frame, class) cell.
struct FrameClassMatch {
    std::vector<MatchedPair> pairs;
    std::vector<int> unmatched_refs;
    std::vector<int> unmatched_preds;
};

FrameClassMatch match_frame(const std::vector<DoA>& refs,
                            const std::vector<DoA>& preds);

// Raw counts for one class (or pooled).
struct ScoreCounts {
    std::int64_t tp_loc = 0;    // matched within threshold
    std::int64_t fp = 0;        // unmatched preds + over-threshold pairs
    std::int64_t fn = 0;        // unmatched refs + over-threshold pairs
    std::int64_t tp_class = 0;  // matched at any distance
    std::int64_t n_ref = 0;
    std::int64_t subs = 0, dels = 0, ins = 0;  // per-frame S/D/I, summed
    double le_sum = 0.0;  // over tp_class pairs

    std::optional<double> error_rate() const;
    double f_score() const;
    std::optional<double> localization_error() const;
    double localization_recall() const;
};

struct ClassReport {
    int class_id = 0;
    ScoreCounts counts;
};

struct MetricsReport {
    double threshold_deg = 20.0;
    std::vector<ClassReport> per_class;  // classes that occur in refs or preds

    // Micro: counts pooled over classes; S/D/I computed on whole frames.
    ScoreCounts micro;
    // Macro: per-class metric averages (LE skips classes where undefined).
    double macro_f = 0.0;
    std::optional<double> macro_le;
    double macro_lr = 0.0;

    // Headline convention: ER micro, F/LE/LR macro.
    double headline_er() const;
    double headline_f() const { return macro_f; }
    std::optional<double> headline_le() const { return macro_le; }
    double headline_lr() const { return macro_lr; }

    std::string to_json() const;
    std::string to_table_text() const;  // per-class table plus aggregates
};

// Frame-wise location-aware scoring with Hungarian matching per
// (frame, class) cell. Accumulate any number of ref/pred scene pairs, then
// take the report.
class Scorer {
public:
    explicit Scorer(double threshold_deg = 20.0);

    void add(const SceneMetadata& refs, const SceneMetadata& preds,
             std::vector<std::string>* warnings = nullptr);

    MetricsReport report() const;

private:
    struct ClassAccum {
        std::int64_t tp_loc = 0, fp = 0, fn = 0, tp_class = 0, n_ref = 0;
        std::int64_t subs = 0, dels = 0, ins = 0;
        double le_sum = 0.0;
        bool seen = false;
    };

    double threshold_deg_;
    std::vector<ClassAccum> classes_;
    std::int64_t frame_subs_ = 0, frame_dels_ = 0, frame_ins_ = 0;  // per-frame pooled
};

MetricsReport score(const SceneMetadata& refs, const SceneMetadata& preds,
                    double threshold_deg = 20.0,
                    std::vector<std::string>* warnings = nullptr);

MetricsReport score_files(const std::filesystem::path& ref_path,
                          const std::filesystem::path& pred_path,
                          double threshold_deg = 20.0,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace seldsynth
