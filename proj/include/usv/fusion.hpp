#pragma once

// Camera-LiDAR fusion: frustum point extraction, obstacle cluster selection,
// tracking-by-distance in 3D and hybrid labeling of the all-cloud map.

#include "usv/cloud.hpp"
#include "usv/common.hpp"
#include "usv/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace usv::fusion {

using cloud::Cluster;
using cloud::OrientedBox;
using cloud::PointCloud;

enum class ObstacleSource { camera_fused, lidar_only };

std::string_view source_name(ObstacleSource s);

struct Obstacle3D {
    std::uint64_t track_id = 0;
    OrientedBox box;
    std::optional<ObjectClass> label;
    ObstacleSource source = ObstacleSource::lidar_only;
    Vec3 centroid = Vec3::Zero();
    std::int64_t frame_index = 0;
};

struct Track3D {
    std::uint64_t id = 0;
    Vec3 last_centroid = Vec3::Zero();
    int misses = 0;
    std::optional<ObjectClass> label;
    std::uint32_t color_seed = 0;
};

enum class SelectionStrategy { largest, nearest };

struct FusionConfig {
    double track_distance_threshold = 5.0;
    int max_misses_3d = 10;
    SelectionStrategy selection_strategy = SelectionStrategy::largest;
    double hybrid_match_distance = 3.0;

    void validate() const;
};

struct Observation3D {
    Vec3 centroid = Vec3::Zero();
    OrientedBox box;
    std::optional<ObjectClass> label;
};

/// Indices of points for which the frustum's containment test holds.
std::vector<std::size_t> extract_frustum_points(const PointCloud& cloud,
                                                const geometry::Frustum& frustum);

/// largest: most points, ties to the centroid nearest the apex.
/// nearest: centroid nearest the apex.
std::optional<Cluster> select_obstacle_cluster(const std::vector<Cluster>& clusters,
                                               SelectionStrategy strategy, const Vec3& apex);

/// Tracking by centroid distance with greedy ascending-distance matching.
class DistanceTracker {
public:
    explicit DistanceTracker(FusionConfig config = {});

    /// One call per frame with strictly increasing frame indices; returns one
    /// obstacle per observation, in observation order. `source` tags the output.
    std::vector<Obstacle3D> step(std::int64_t frame_index,
                                 const std::vector<Observation3D>& observations,
                                 ObstacleSource source);

    const std::vector<Track3D>& tracks() const { return tracks_; }
    /// Overwrites the stored label of a live track (sticky labels).
    void set_label(std::uint64_t id, ObjectClass label);

private:
    FusionConfig config_;
    std::vector<Track3D> tracks_;
    std::uint64_t next_id_ = 1;
    std::optional<std::int64_t> last_frame_;
};

/// Free-function form operating on an explicit tracker.
inline std::vector<Obstacle3D> track_by_distance(DistanceTracker& tracker, std::int64_t frame_index,
                                                 const std::vector<Observation3D>& observations,
                                                 ObstacleSource source) {
    return tracker.step(frame_index, observations, source);
}

/// Returns `all_cloud` with labels adopted from camera-fused obstacles whose
/// centroid lies within hybrid_match_distance (nearest first, one-to-one).
/// Unmatched obstacles are lidar_only with no label.
std::vector<Obstacle3D> hybrid_label(const std::vector<Obstacle3D>& all_cloud,
                                     const std::vector<Obstacle3D>& camera_fused,
                                     const FusionConfig& config);

}  // namespace usv::fusion
