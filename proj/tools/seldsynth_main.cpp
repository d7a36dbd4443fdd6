#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "seldsynth/pipeline.hpp"
#include "seldsynth/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOverrides {
    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 0;
    double fps = 0.0;
    bool marker_mode = false;
    bool dump_frames = false;
};

void add_common(CLI::App* cmd, CommonOverrides& o) {
    cmd->add_option("--config", o.config_path, "Pipeline config file (JSON)")
        ->required();
    cmd->add_option("--seed", o.seed, "Override the batch seed");
    cmd->add_option("--workers", o.workers, "Override the worker count");
    cmd->add_option("--fps", o.fps, "Override the output frame rate");
    cmd->add_flag("--marker-mode", o.marker_mode,
                  "Render solid class/source markers instead of tiles");
    cmd->add_flag("--dump-frames", o.dump_frames,
                  "Write numbered PNG frames instead of encoding video");
}

seldsynth::PipelineConfig load_config(const CLI::App* cmd, const CommonOverrides& o) {
    auto config = seldsynth::PipelineConfig::from_file(o.config_path);
    if (cmd->count("--seed")) config.seed = o.seed;
    if (cmd->count("--workers")) config.workers = o.workers;
    if (cmd->count("--fps")) config.fps = o.fps;
    if (cmd->count("--marker-mode")) config.marker_mode = true;
    if (cmd->count("--dump-frames")) config.dump_frames = true;
    config.validate();
    return config;
}

int run_generate(const CLI::App* cmd, const CommonOverrides& o) {
    const auto config = load_config(cmd, o);
    const auto summary = seldsynth::generate(config, &std::cerr);
    std::cout << summary.to_text();
    return summary.all_ok() ? kExitOk : kExitPartialFailure;
}

int run_verify(const CLI::App* cmd, const CommonOverrides& o) {
    const auto config = load_config(cmd, o);
    seldsynth::BatchSummary summary;
    const auto report = seldsynth::verify(config, &std::cerr, &summary);
    std::cout << summary.to_text();
    std::cout << report.to_table_text();
    return summary.all_ok() ? kExitOk : kExitPartialFailure;
}

int run_score(const std::string& ref, const std::string& pred, double threshold,
              const std::string& report_path) {
    std::vector<std::string> warnings;
    const auto report = seldsynth::score_paths(ref, pred, threshold, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << report.to_table_text();
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
            std::cerr << "error: cannot write report to '" << report_path << "'\n";
            return kExitPartialFailure;
        }
        out << report.to_json();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch 360-degree video synthesis from SELD annotations, "
                 "plus the DCASE SELD metrics"};
    app.set_version_flag("--version", std::string(seldsynth::kToolVersion));
    app.require_subcommand(1);

    CommonOverrides generate_opts;
    auto* generate_cmd = app.add_subcommand(
        "generate", "Render one video per metadata file");
    add_common(generate_cmd, generate_opts);

    CommonOverrides verify_opts;
    auto* verify_cmd = app.add_subcommand(
        "verify", "Marker-mode round trip: render, recover, score alignment");
    add_common(verify_cmd, verify_opts);

    std::string ref_path, pred_path, report_path;
    double threshold = 20.0;
    auto* score_cmd = app.add_subcommand(
        "score", "Score predictions against references (ER/F/LE/LR)");
    score_cmd->add_option("--ref", ref_path, "Reference file or directory")->required();
    score_cmd->add_option("--pred", pred_path, "Prediction file or directory")
        ->required();
    score_cmd->add_option("--threshold", threshold, "Angular threshold in degrees");
    score_cmd->add_option("--report", report_path, "Write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate_cmd->parsed()) return run_generate(generate_cmd, generate_opts);
        if (verify_cmd->parsed()) return run_verify(verify_cmd, verify_opts);
        if (score_cmd->parsed())
            return run_score(ref_path, pred_path, threshold, report_path);
    } catch (const seldsynth::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitUsage;
}
