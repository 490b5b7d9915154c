#include "usv/cloud.hpp"

#include "usv/kdtree.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace usv::cloud {

CloudAccumulator::CloudAccumulator(std::size_t window) : window_(window) {
    if (window == 0) throw Error(ErrorCode::configuration, "accumulation window must be >= 1");
}

PointCloud CloudAccumulator::accumulate(PointCloud cloud) {
    if (!history_.empty() && cloud.timestamp < history_.back().timestamp) {
        throw Error(ErrorCode::sequencing, "cloud timestamp regressed");
    }
    history_.push_back(std::move(cloud));
    while (history_.size() > window_) history_.pop_front();

    PointCloud merged;
    merged.timestamp = history_.back().timestamp;
    std::size_t total = 0;
    for (const auto& c : history_) total += c.size();
    merged.points.reserve(total);
    for (const auto& c : history_) {
        merged.points.insert(merged.points.end(), c.points.begin(), c.points.end());
    }
    return merged;
}

PointCloud filter_cloud(const PointCloud& cloud, double r_min, double r_max) {
    PointCloud out;
    out.timestamp = cloud.timestamp;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        const double r = std::hypot(p.x(), p.y());
        if (r >= r_min && r <= r_max) out.points.push_back(p);
    }
    return out;
}

PointCloud rotate_cloud(const PointCloud& cloud,
                        const std::optional<Eigen::Quaterniond>& orientation) {
    PointCloud out = cloud;
    if (!orientation) return out;
    if (std::abs(orientation->norm() - 1.0) > 1e-6) {
        throw Error(ErrorCode::invalid_orientation, "orientation quaternion is not unit length");
    }
    const Eigen::Matrix3d rot = orientation->normalized().toRotationMatrix();
    for (auto& p : out.points) p = rot * p;
    return out;
}

PointCloud project_to_sea_plane(const PointCloud& cloud,
                                const std::optional<Eigen::Quaterniond>& orientation) {
    PointCloud out = rotate_cloud(cloud, orientation);
    for (auto& p : out.points) p.z() = 0.0;
    return out;
}

void ClusterParams::validate() const {
    if (!(tolerance > 0.0)) throw Error(ErrorCode::configuration, "cluster tolerance must be > 0");
    if (min_size == 0 || min_size > max_size) {
        throw Error(ErrorCode::configuration, "cluster sizes must satisfy 0 < min_size <= max_size");
    }
}

namespace {

std::vector<Cluster> cluster_points(const std::vector<Vec3>& pts,
                                    const std::vector<std::size_t>* index_map,
                                    const ClusterParams& params) {
    params.validate();
    std::vector<Cluster> clusters;
    if (pts.empty()) return clusters;

    const KdTree tree(pts);
    auto state = tree.start_consuming();
    std::vector<std::uint32_t> frontier;

    for (std::uint32_t seed = 0; seed < pts.size(); ++seed) {
        if (state.taken[seed]) continue;
        frontier.clear();
        // the seed is its own neighbour, so the first query claims it
        tree.radius_consume(pts[seed], params.tolerance, state, frontier);
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            tree.radius_consume(pts[frontier[head]], params.tolerance, state, frontier);
        }
        if (frontier.size() < params.min_size || frontier.size() > params.max_size) continue;

        Cluster c;
        c.point_indices.reserve(frontier.size());
        Vec3 sum = Vec3::Zero();
        for (auto i : frontier) {
            sum += pts[i];
            c.point_indices.push_back(index_map ? (*index_map)[i] : i);
        }
        std::sort(c.point_indices.begin(), c.point_indices.end());
        c.centroid = sum / static_cast<double>(frontier.size());
        clusters.push_back(std::move(c));
    }

    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.point_indices.front() < b.point_indices.front();
    });
    return clusters;
}

}  // namespace

std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, const ClusterParams& params) {
    return cluster_points(cloud.points, nullptr, params);
}

std::vector<Cluster> euclidean_cluster(const PointCloud& cloud,
                                       const std::vector<std::size_t>& subset,
                                       const ClusterParams& params) {
    std::vector<Vec3> pts;
    pts.reserve(subset.size());
    for (auto i : subset) {
        if (i >= cloud.size()) throw Error(ErrorCode::dimension, "subset index out of range");
        pts.push_back(cloud.points[i]);
    }
    return cluster_points(pts, &subset, params);
}

double fold_yaw(double yaw) {
    double y = std::fmod(yaw, std::numbers::pi);
    if (y < 0.0) y += std::numbers::pi;
    // values within round-off of pi belong to 0
    if (y >= std::numbers::pi - 1e-12) y = 0.0;
    return y;
}

OrientedBox fit_oriented_box(const PointCloud& cloud, const Cluster& cluster) {
    if (cluster.point_indices.empty()) throw Error(ErrorCode::invalid_cluster, "cluster is empty");
    for (auto i : cluster.point_indices) {
        if (i >= cloud.size()) throw Error(ErrorCode::invalid_cluster, "cluster index out of range");
    }

    const double n = static_cast<double>(cluster.size());
    Vec2 mean = Vec2::Zero();
    double z_lo = std::numeric_limits<double>::infinity();
    double z_hi = -z_lo;
    for (auto i : cluster.point_indices) {
        const auto& p = cloud.points[i];
        mean += p.head<2>();
        z_lo = std::min(z_lo, p.z());
        z_hi = std::max(z_hi, p.z());
    }
    mean /= n;

    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (auto i : cluster.point_indices) {
        const Vec2 d = cloud.points[i].head<2>() - mean;
        cov += d * d.transpose();
    }
    cov /= n;

    double yaw = 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const auto& values = eig.eigenvalues();  // ascending
    if (std::abs(values(1) - values(0)) > 1e-9 * std::max(1.0, std::abs(values(1)))) {
        const Vec2 major = eig.eigenvectors().col(1);
        yaw = fold_yaw(std::atan2(major.y(), major.x()));
    }

    const Vec2 axis(std::cos(yaw), std::sin(yaw));
    const Vec2 perp(-axis.y(), axis.x());
    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
    double b_lo = a_lo, b_hi = -a_lo;
    for (auto i : cluster.point_indices) {
        const Vec2 d = cloud.points[i].head<2>() - mean;
        const double a = d.dot(axis);
        const double b = d.dot(perp);
        a_lo = std::min(a_lo, a);
        a_hi = std::max(a_hi, a);
        b_lo = std::min(b_lo, b);
        b_hi = std::max(b_hi, b);
    }

    OrientedBox box;
    box.yaw = yaw;
    box.length = a_hi - a_lo;
    box.width = b_hi - b_lo;
    const Vec2 center2 = mean + axis * (0.5 * (a_lo + a_hi)) + perp * (0.5 * (b_lo + b_hi));
    box.center = Vec3(center2.x(), center2.y(), 0.0);
    if (box.width > box.length) {
        // only reachable through the equal-eigenvalue tie-break
        std::swap(box.length, box.width);
        box.yaw = fold_yaw(yaw + std::numbers::pi / 2.0);
    }
    box.height = z_hi - z_lo;
    return box;
}

}  // namespace usv::cloud
