#pragma once

// Synthetic marine scenarios: rectangular hulls moving with constant
// acceleration, ray-cast LiDAR returns and noisy projected detections.
// Serves as ground truth for the pipeline and its tests.

#include "usv/cloud.hpp"
#include "usv/geometry.hpp"
#include "usv/pipeline.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace usv::sim {

struct BoatActor {
    double length = 10.0;
    double width = 3.0;
    double height = 3.0;
    Vec2 position = Vec2::Zero();  // hull center on the sea plane, m
    double yaw = 0.0;              // rad, direction of the length axis
    Vec2 velocity = Vec2::Zero();
    Vec2 acceleration = Vec2::Zero();
    ObjectClass class_id = ObjectClass::boat;
    std::uint64_t gt_track_id = 1;
};

struct BoatPose {
    Vec2 position;
    double yaw = 0.0;
};

struct LidarModel {
    double azimuth_resolution_deg = 0.2;
    double max_range = 100.0;
    double range_noise_sigma = 0.0;
    int channels = 16;
    double min_elevation_deg = -15.0;
    double max_elevation_deg = 15.0;
    double sensor_height = 1.5;  // above the sea surface, m
};

struct DetectorModel {
    double dropout = 0.0;
    double confidence_min = 0.6;
    double confidence_max = 1.0;
    double pixel_jitter_sigma = 0.0;
};

struct CameraModel {
    double focal = 500.0;
    int width = 640;
    int height = 480;
    Vec3 position{0.3, 0.0, -0.2};  // in the LiDAR frame
};

/// Optional sinusoidal roll/pitch of the vehicle.
struct SeaState {
    double roll_amplitude_deg = 0.0;
    double pitch_amplitude_deg = 0.0;
    double period = 4.0;  // s
};

struct ScenarioConfig {
    std::vector<BoatActor> boats;
    double frame_rate = 10.0;
    double duration = 10.0;
    LidarModel lidar;
    DetectorModel detector;
    CameraModel camera;
    SeaState sea;
    std::uint64_t seed = 1;

    std::size_t frame_count() const;
    /// Throws ErrorCode::invalid_scenario.
    void validate() const;
};

struct GroundTruthBoat {
    std::uint64_t gt_track_id = 0;
    ObjectClass class_id = ObjectClass::boat;
    std::optional<geometry::BBox2D> box2d;  // clipped to the image; absent when not in view
    cloud::OrientedBox box3d;              // sea-plane frame
};

struct ScenarioFrame {
    fusion::FrameBundle bundle;
    std::vector<GroundTruthBoat> truth;
};

struct Scenario {
    geometry::CalibrationModel calibration;
    std::vector<ScenarioFrame> frames;
};

/// Deterministic for a given config (including seed).
Scenario generate_scenario(const ScenarioConfig& config);

geometry::CalibrationModel camera_calibration(const CameraModel& camera);

BoatPose pose_at(const BoatActor& boat, double t);

/// Vehicle orientation (LiDAR frame -> level sea frame) at time t.
Eigen::Quaterniond orientation_at(const SeaState& sea, double t);

/// Ray-casts the LiDAR against the vertical faces of every hull (occlusion
/// between hulls included). Points are returned in the LiDAR frame. `noise`
/// may be null when range_noise_sigma is zero.
std::vector<Vec3> sample_hull_points(const std::vector<BoatActor>& boats,
                                     const std::vector<BoatPose>& poses, const LidarModel& lidar,
                                     const Eigen::Quaterniond& orientation,
                                     std::mt19937_64* noise);

/// Single-hull convenience overload.
std::vector<Vec3> sample_hull_points(const BoatActor& boat, const BoatPose& pose,
                                     const LidarModel& lidar);

/// Eight hull corners in the level sea frame centered below the sensor
/// (sea surface at z = -sensor_height).
std::vector<Vec3> hull_corners(const BoatActor& boat, const BoatPose& pose, double sensor_height);

}  // namespace usv::sim
