#pragma once

// Implementations behind the command-line subcommands.

#include "usv/app/dataset.hpp"
#include "usv/metrics.hpp"
#include "usv/pipeline.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace usv::app {

/// One line per frame: "frame_index count" followed by, for each obstacle,
/// track_id source label cx cy yaw length width.
std::string format_obstacle_line(const fusion::ObstacleMap& map);

std::string timing_csv_header();
std::string format_timing_row(const fusion::TimingRow& row);

struct RunSummary {
    std::size_t frames = 0;
    std::size_t skipped = 0;
    std::vector<fusion::TimingRow> timing;
    std::string obstacle_text;

    /// Zero unless more than 10% of the frames were skipped.
    int exit_code() const;
};

/// Streams the dataset through the pipeline. When `output_dir` is non-empty,
/// writes obstacles.txt and timing.csv into it.
RunSummary run_pipeline(const fs::path& dataset_dir, fusion::PipelineConfig config,
                        const fs::path& output_dir);

struct OverlayPoint {
    double u = 0.0;
    double v = 0.0;
    double range = 0.0;
};

/// Pixel coordinates and range of every point of the frame's own cloud that
/// projects inside the image. Unknown frame throws ErrorCode::lookup.
std::vector<OverlayPoint> project_debug(const fs::path& dataset_dir, std::int64_t frame_index,
                                        double sync_slack = 0.05);
std::string format_overlay(const std::vector<OverlayPoint>& points);

struct EvalResult {
    metrics::EvalReport report;
    double gt_frame_coverage = 1.0;  // fraction of gt frames present in the predictions
};

EvalResult evaluate_files(const fs::path& predictions, const fs::path& ground_truth,
                          double iou_threshold, bool class_agnostic);
std::string format_eval_report(const EvalResult& result);
std::string format_eval_json(const EvalResult& result);

struct StageSummary {
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct ProfileSummary {
    std::array<StageSummary, fusion::kStageCount> stages{};
    StageSummary total;
    std::size_t rows = 0;
    std::size_t over_budget = 0;
    double budget_ms = 0.0;
};

/// Nearest-rank percentiles over all timing rows.
ProfileSummary summarize_timing(const std::vector<fusion::TimingRow>& rows, double budget_ms);

/// Budget is 1000 / frame_rate milliseconds per frame.
ProfileSummary profile_bundles(const std::vector<fusion::FrameBundle>& bundles,
                               const geometry::CalibrationModel& calibration,
                               const fusion::PipelineConfig& config, std::size_t repetitions);

/// Runs the pipeline `repetitions` times over the dataset with a fresh
/// pipeline each time and summarizes every timing row.
ProfileSummary profile_dataset(const fs::path& dataset_dir, const fusion::PipelineConfig& config,
                               std::size_t repetitions);
std::string format_profile(const ProfileSummary& summary);

/// Generates a scenario and writes it as a dataset. Returns the frame count.
std::size_t simulate_to(const sim::ScenarioConfig& config, const fs::path& output_dir);

}  // namespace usv::app
