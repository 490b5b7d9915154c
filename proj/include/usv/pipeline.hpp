#pragma once

// Per-frame orchestration of the fusion pipeline: accumulation, filtration,
// sea-plane projection, per-detection frustum clustering (camera path),
// whole-cloud clustering (LiDAR path), 3D tracking and hybrid labeling.

#include "usv/cloud.hpp"
#include "usv/fusion.hpp"
#include "usv/geometry.hpp"
#include "usv/tracking/tracker2d.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace usv::fusion {

struct FrameBundle {
    std::int64_t frame_index = 0;
    std::vector<tracking::Detection2D> detections;
    PointCloud cloud;
    std::optional<Eigen::Quaterniond> orientation;
    double cloud_timestamp = 0.0;
    std::optional<double> detection_timestamp;
    std::optional<double> orientation_timestamp;
};

struct PipelineConfig {
    std::size_t accumulation_window = 3;
    double r_min = 2.0;
    double r_max = 100.0;
    cloud::ClusterParams cluster;
    std::size_t frustum_min_size = 5;
    FusionConfig fusion;
    tracking::TrackerConfig tracker;
    double sync_slack = 0.05;
    double frame_rate = 10.0;
    double detection_min_confidence = 0.0;
    bool camera_path = true;
    bool lidar_path = true;
    bool sticky_labels = true;
    bool smooth_detections = false;

    /// Validates every nested parameter; throws ErrorCode::configuration.
    void validate() const;
};

enum class Stage : std::size_t {
    accumulate,
    filter,
    project,
    frustum_build,
    frustum_extract,
    frustum_cluster,
    camera_tracking,
    cloud_cluster,
    cloud_tracking,
    hybrid_label,
    count,
};

inline constexpr std::size_t kStageCount = static_cast<std::size_t>(Stage::count);

std::string_view stage_name(Stage s);

struct TimingRow {
    std::int64_t frame_index = 0;
    std::array<double, kStageCount> stage_ms{};
    double total_ms = 0.0;
};

struct ObstacleMap {
    std::int64_t frame_index = 0;
    std::vector<Obstacle3D> obstacles;         // final map
    std::vector<Obstacle3D> camera_obstacles;  // camera-path output before merging
    TimingRow timing;
};

class Pipeline {
public:
    Pipeline(PipelineConfig config, geometry::CalibrationModel calibration);

    /// Must be called with strictly increasing frame indices.
    ObstacleMap step(const FrameBundle& bundle);

    const PipelineConfig& config() const { return config_; }
    const geometry::CalibrationModel& calibration() const { return calib_; }

private:
    std::vector<Obstacle3D> camera_path(const FrameBundle& bundle,
                                        const std::vector<tracking::Detection2D>& detections,
                                        const PointCloud& conditioned, const PointCloud& rotated,
                                        const PointCloud& projected, TimingRow& timing);

    PipelineConfig config_;
    geometry::CalibrationModel calib_;
    cloud::CloudAccumulator accumulator_;
    tracking::Tracker2D tracker2d_;
    DistanceTracker camera_tracker_;
    DistanceTracker cloud_tracker_;
};

}  // namespace usv::fusion
