#pragma once

// On-disk dataset layout and stream synchronization.
//
//   calibration.txt       width height, then the 3x4 projection matrix
//   manifest.txt          frame_index timestamp cloud_path
//   clouds/NNNNNN.txt     x y z per line
//   detections.txt        frame_index timestamp class confidence x_min y_min x_max y_max
//   orientation.txt       timestamp qw qx qy qz                         (optional)
//   ground_truth.txt      detection columns plus gt_track_id            (simulated)
//   ground_truth_3d.txt   frame_index gt_track_id class cx cy yaw length width height
//
// Blank lines and lines starting with '#' are ignored everywhere.

#include "usv/metrics.hpp"
#include "usv/pipeline.hpp"
#include "usv/sim.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace usv::app {

namespace fs = std::filesystem;

struct CloudRecord {
    std::int64_t frame_index = 0;
    double timestamp = 0.0;
    std::string path;  // relative to the dataset root
};

struct DetectionSet {
    std::int64_t frame_index = 0;
    double timestamp = 0.0;
    std::vector<tracking::Detection2D> detections;
};

struct OrientationRecord {
    double timestamp = 0.0;
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct SyncedFrame {
    CloudRecord cloud;
    std::vector<tracking::Detection2D> detections;  // frame_index rewritten to the cloud's
    std::optional<double> detection_timestamp;
    std::optional<Eigen::Quaterniond> orientation;
    std::optional<double> orientation_timestamp;
};

/// For each cloud, attaches the nearest detection set and orientation whose
/// timestamps lie within `slack` seconds (ties go to the earlier record).
/// Every cloud yields exactly one frame, in input order. Throws
/// ErrorCode::sequencing when a stream is not time-ordered or cloud frame
/// indices do not increase.
std::vector<SyncedFrame> synchronize(const std::vector<CloudRecord>& clouds,
                                     const std::vector<DetectionSet>& detections,
                                     const std::vector<OrientationRecord>& orientations,
                                     double slack);

std::vector<CloudRecord> parse_manifest(std::string_view text);
std::string write_manifest(const std::vector<CloudRecord>& records);

cloud::PointCloud parse_cloud(std::string_view text, double timestamp);
std::string write_cloud(const cloud::PointCloud& cloud);

/// Groups lines by frame index; the set timestamp is that of its first line.
std::vector<DetectionSet> parse_detections(std::string_view text);
std::string write_detections(const std::vector<DetectionSet>& sets);

std::vector<OrientationRecord> parse_orientations(std::string_view text);
std::string write_orientations(const std::vector<OrientationRecord>& records);

/// Box files in detection layout with an optional trailing track id. Used for
/// both predictions and 2D ground truth.
std::vector<metrics::PredictionFrame> parse_prediction_frames(std::string_view text);
std::vector<metrics::GroundTruthFrame> parse_ground_truth_frames(std::string_view text);

struct GroundTruth3D {
    std::int64_t frame_index = 0;
    std::uint64_t gt_track_id = 0;
    ObjectClass class_id = ObjectClass::boat;
    cloud::OrientedBox box;
};

std::vector<GroundTruth3D> parse_ground_truth_3d(std::string_view text);

struct Dataset {
    fs::path root;
    geometry::CalibrationModel calibration;
    std::vector<SyncedFrame> frames;
    bool has_detections = false;
};

/// Reads the metadata of a dataset directory and synchronizes its streams.
/// Cloud files are read lazily by load_bundle. Missing calibration or
/// manifest throws ErrorCode::configuration.
Dataset open_dataset(const fs::path& root, double sync_slack);

fusion::FrameBundle load_bundle(const Dataset& dataset, const SyncedFrame& frame);

/// Writes a simulated scenario in the layout above.
void write_dataset(const sim::Scenario& scenario, const fs::path& root);

}  // namespace usv::app
