#pragma once

// Point-cloud conditioning: accumulation window, range filtration, sea-plane
// projection, Euclidean clustering and PCA box fitting.

#include "usv/common.hpp"

#include <Eigen/Geometry>

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

namespace usv::cloud {

struct PointCloud {
    double timestamp = 0.0;
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Keeps the `window` most recent clouds and merges them.
class CloudAccumulator {
public:
    explicit CloudAccumulator(std::size_t window = 3);

    /// Pushes `cloud`, evicts the oldest beyond the window and returns the
    /// concatenation of the history, oldest first, stamped with the newest
    /// timestamp. Throws ErrorCode::sequencing on timestamp regression.
    PointCloud accumulate(PointCloud cloud);

    std::size_t window() const { return window_; }
    const std::deque<PointCloud>& history() const { return history_; }
    void clear() { history_.clear(); }

private:
    std::size_t window_;
    std::deque<PointCloud> history_;
};

/// Keeps points with r_min <= sqrt(x^2 + y^2) <= r_max, preserving order.
PointCloud filter_cloud(const PointCloud& cloud, double r_min, double r_max);

/// Rotates each point by `orientation` (identity when absent), then zeroes z.
/// Throws ErrorCode::invalid_orientation if the quaternion norm is off by more than 1e-6.
PointCloud project_to_sea_plane(const PointCloud& cloud,
                                const std::optional<Eigen::Quaterniond>& orientation = std::nullopt);

/// Rotation only; z is kept.
PointCloud rotate_cloud(const PointCloud& cloud,
                        const std::optional<Eigen::Quaterniond>& orientation);

struct ClusterParams {
    double tolerance = 3.0;
    std::size_t min_size = 30;
    std::size_t max_size = 10000;

    void validate() const;
};

struct Cluster {
    std::vector<std::size_t> point_indices;  // ascending
    Vec3 centroid = Vec3::Zero();

    std::size_t size() const { return point_indices.size(); }
};

/// Single-linkage connected components under distance <= tolerance, found
/// with a k-d tree. Components outside [min_size, max_size] are dropped.
/// Ordered by descending size, ties by smallest member index.
std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, const ClusterParams& params);

/// Same as above restricted to `subset` (indices into `cloud`); returned
/// clusters index into `cloud`.
std::vector<Cluster> euclidean_cluster(const PointCloud& cloud,
                                       const std::vector<std::size_t>& subset,
                                       const ClusterParams& params);

struct OrientedBox {
    Vec3 center = Vec3::Zero();
    double yaw = 0.0;  // [0, pi)
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
};

/// 2D PCA over the member (x, y) coordinates. Height is the z-extent of the
/// members as given. Throws ErrorCode::invalid_cluster on an empty cluster.
OrientedBox fit_oriented_box(const PointCloud& cloud, const Cluster& cluster);

/// Folds an angle into [0, pi).
double fold_yaw(double yaw);

}  // namespace usv::cloud
