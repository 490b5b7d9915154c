#pragma once

#include "usv/common.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace usv::cloud {

/// Squared Euclidean distance, summed x, y, z in that order.
inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

/// Static 3D k-d tree over a borrowed point array; answers fixed-radius queries.
/// The point storage must outlive the tree.
class KdTree {
public:
    explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 16);

    /// Appends to `out` every index i with |points[i] - query| <= radius.
    void radius_search(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const;

    /// Per-query-sequence bookkeeping for radius_consume.
    struct Consumption {
        std::vector<std::uint32_t> remaining;  // unclaimed points per node
        std::vector<char> taken;               // per point
    };

    Consumption start_consuming() const;

    /// Like radius_search, but each point is reported at most once over the
    /// lifetime of `state`; reported points are marked taken. Drained subtrees
    /// are skipped, so a full flood fill costs about one visit per point.
    void radius_consume(const Vec3& query, double radius, Consumption& state,
                        std::vector<std::uint32_t>& out) const;

    std::size_t size() const { return order_.size(); }

private:
    struct Node {
        // leaf: [begin, end) into order_; inner: split dim/value and children
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int dim = -1;
        double split = 0.0;
        Eigen::Vector3d lo;
        Eigen::Vector3d hi;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    std::uint32_t consume(std::int32_t id, const Vec3& query, double r2, Consumption& state,
                          std::vector<std::uint32_t>& out) const;

    std::span<const Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

}  // namespace usv::cloud
