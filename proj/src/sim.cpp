#include "usv/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace usv::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::array<Vec2, 4> footprint(const BoatActor& boat, const BoatPose& pose) {
    const Vec2 ax(std::cos(pose.yaw), std::sin(pose.yaw));
    const Vec2 perp(-ax.y(), ax.x());
    const Vec2 hl = ax * (0.5 * boat.length);
    const Vec2 hw = perp * (0.5 * boat.width);
    return {pose.position + hl + hw, pose.position - hl + hw, pose.position - hl - hw,
            pose.position + hl - hw};
}

bool footprint_contains(const BoatActor& boat, const BoatPose& pose, const Vec2& p) {
    const Vec2 d = p - pose.position;
    const Vec2 ax(std::cos(pose.yaw), std::sin(pose.yaw));
    const Vec2 perp(-ax.y(), ax.x());
    return std::abs(d.dot(ax)) <= 0.5 * boat.length && std::abs(d.dot(perp)) <= 0.5 * boat.width;
}

std::vector<double> channel_elevations(const LidarModel& lidar) {
    std::vector<double> out;
    if (lidar.channels == 1) {
        out.push_back(lidar.min_elevation_deg * kDeg);
        return out;
    }
    for (int c = 0; c < lidar.channels; ++c) {
        const double f = static_cast<double>(c) / (lidar.channels - 1);
        out.push_back((lidar.min_elevation_deg +
                       f * (lidar.max_elevation_deg - lidar.min_elevation_deg)) * kDeg);
    }
    return out;
}

}  // namespace

std::size_t ScenarioConfig::frame_count() const {
    return static_cast<std::size_t>(std::llround(duration * frame_rate));
}

void ScenarioConfig::validate() const {
    if (!(frame_rate > 0.0)) throw Error(ErrorCode::invalid_scenario, "frame_rate must be > 0");
    if (!(duration >= 0.0)) throw Error(ErrorCode::invalid_scenario, "duration must be >= 0");
    if (detector.dropout < 0.0 || detector.dropout > 1.0) {
        throw Error(ErrorCode::invalid_scenario, "dropout probability must be in [0, 1]");
    }
    if (detector.confidence_min < 0.0 || detector.confidence_max > 1.0 ||
        detector.confidence_min > detector.confidence_max) {
        throw Error(ErrorCode::invalid_scenario, "confidence bounds must satisfy 0 <= min <= max <= 1");
    }
    if (detector.pixel_jitter_sigma < 0.0 || lidar.range_noise_sigma < 0.0) {
        throw Error(ErrorCode::invalid_scenario, "noise levels must be >= 0");
    }
    if (!(lidar.azimuth_resolution_deg > 0.0) || lidar.channels < 1 || !(lidar.max_range > 0.0)) {
        throw Error(ErrorCode::invalid_scenario, "invalid LiDAR model");
    }
    for (const auto& b : boats) {
        if (!(b.length > 0.0) || !(b.width > 0.0) || !(b.height > 0.0)) {
            throw Error(ErrorCode::invalid_scenario, "boat " + std::to_string(b.gt_track_id) +
                                                         " has non-positive hull dimensions");
        }
        if (footprint_contains(b, {b.position, b.yaw}, Vec2::Zero())) {
            throw Error(ErrorCode::invalid_scenario,
                        "boat " + std::to_string(b.gt_track_id) + " overlaps the sensor origin");
        }
    }
}

BoatPose pose_at(const BoatActor& boat, double t) {
    return {boat.position + boat.velocity * t + 0.5 * boat.acceleration * t * t, boat.yaw};
}

Eigen::Quaterniond orientation_at(const SeaState& sea, double t) {
    if (sea.roll_amplitude_deg == 0.0 && sea.pitch_amplitude_deg == 0.0) {
        return Eigen::Quaterniond::Identity();
    }
    const double phase = 2.0 * std::numbers::pi * t / sea.period;
    const double roll = sea.roll_amplitude_deg * kDeg * std::sin(phase);
    const double pitch = sea.pitch_amplitude_deg * kDeg * std::cos(phase);
    return Eigen::Quaterniond(Eigen::AngleAxisd(roll, Vec3::UnitX()) *
                              Eigen::AngleAxisd(pitch, Vec3::UnitY()));
}

geometry::CalibrationModel camera_calibration(const CameraModel& camera) {
    return geometry::make_pinhole(camera.focal, 0.5 * camera.width, 0.5 * camera.height,
                                  camera.width, camera.height, camera.position, Vec3::UnitX(),
                                  Vec3::UnitZ());
}

std::vector<Vec3> hull_corners(const BoatActor& boat, const BoatPose& pose, double sensor_height) {
    std::vector<Vec3> out;
    const double z_lo = -sensor_height;
    const double z_hi = z_lo + boat.height;
    for (const auto& c : footprint(boat, pose)) {
        out.emplace_back(c.x(), c.y(), z_lo);
        out.emplace_back(c.x(), c.y(), z_hi);
    }
    return out;
}

std::vector<Vec3> sample_hull_points(const std::vector<BoatActor>& boats,
                                     const std::vector<BoatPose>& poses, const LidarModel& lidar,
                                     const Eigen::Quaterniond& orientation,
                                     std::mt19937_64* noise) {
    std::vector<Vec3> points;
    const auto elevations = channel_elevations(lidar);
    const auto steps =
        static_cast<std::size_t>(std::llround(360.0 / lidar.azimuth_resolution_deg));
    const Eigen::Matrix3d to_level = orientation.normalized().toRotationMatrix();

    std::vector<std::array<Vec2, 4>> feet;
    for (std::size_t b = 0; b < boats.size(); ++b) feet.push_back(footprint(boats[b], poses[b]));

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double az = static_cast<double>(k) * lidar.azimuth_resolution_deg * kDeg;
        for (double el : elevations) {
            const Vec3 dir_lidar(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                 std::sin(el));
            const Vec3 d = to_level * dir_lidar;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < boats.size(); ++b) {
                const double z_lo = -lidar.sensor_height;
                const double z_hi = z_lo + boats[b].height;
                for (int f = 0; f < 4; ++f) {
                    const Vec2& a = feet[b][f];
                    const Vec2 e = feet[b][(f + 1) % 4] - a;
                    const double det = d.y() * e.x() - d.x() * e.y();
                    if (std::abs(det) < 1e-15) continue;
                    const double t = (a.y() * e.x() - a.x() * e.y()) / det;
                    const double s = (d.x() * a.y() - d.y() * a.x()) / det;
                    if (!(t > 0.0) || s < 0.0 || s > 1.0) continue;
                    const double z = t * d.z();
                    if (z < z_lo || z > z_hi) continue;
                    best = std::min(best, t);
                }
            }
            if (!(best <= lidar.max_range)) continue;
            double range = best;
            if (lidar.range_noise_sigma > 0.0 && noise != nullptr) {
                range += lidar.range_noise_sigma * gauss(*noise);
            }
            points.push_back(dir_lidar * range);
        }
    }
    return points;
}

std::vector<Vec3> sample_hull_points(const BoatActor& boat, const BoatPose& pose,
                                     const LidarModel& lidar) {
    return sample_hull_points({boat}, {pose}, lidar, Eigen::Quaterniond::Identity(), nullptr);
}

Scenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    Scenario scenario{camera_calibration(config.camera), {}};
    const auto& calib = scenario.calibration;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const bool has_sea_motion =
        config.sea.roll_amplitude_deg != 0.0 || config.sea.pitch_amplitude_deg != 0.0;

    const std::size_t n = config.frame_count();
    scenario.frames.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / config.frame_rate;
        const Eigen::Quaterniond q = orientation_at(config.sea, t);
        const Eigen::Matrix3d to_lidar = q.normalized().toRotationMatrix().transpose();

        std::vector<BoatPose> poses;
        for (const auto& b : config.boats) poses.push_back(pose_at(b, t));

        ScenarioFrame frame;
        auto& bundle = frame.bundle;
        bundle.frame_index = static_cast<std::int64_t>(k);
        bundle.cloud_timestamp = t;
        bundle.cloud.timestamp = t;
        bundle.cloud.points = sample_hull_points(config.boats, poses, config.lidar, q, &rng);
        bundle.detection_timestamp = t;
        if (has_sea_motion) {
            bundle.orientation = q;
            bundle.orientation_timestamp = t;
        }

        for (std::size_t b = 0; b < config.boats.size(); ++b) {
            const auto& boat = config.boats[b];
            GroundTruthBoat gt;
            gt.gt_track_id = boat.gt_track_id;
            gt.class_id = boat.class_id;
            gt.box3d.center = Vec3(poses[b].position.x(), poses[b].position.y(), 0.0);
            gt.box3d.length = std::max(boat.length, boat.width);
            gt.box3d.width = std::min(boat.length, boat.width);
            gt.box3d.yaw = cloud::fold_yaw(boat.length >= boat.width
                                               ? poses[b].yaw
                                               : poses[b].yaw + std::numbers::pi / 2.0);
            gt.box3d.height = boat.height;

            bool in_front = true;
            geometry::BBox2D rect{std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity()};
            for (const auto& corner : hull_corners(boat, poses[b], config.lidar.sensor_height)) {
                const auto px = geometry::project_to_image(calib, to_lidar * corner);
                if (!px) {
                    in_front = false;
                    break;
                }
                rect.x_min = std::min(rect.x_min, px->u);
                rect.y_min = std::min(rect.y_min, px->v);
                rect.x_max = std::max(rect.x_max, px->u);
                rect.y_max = std::max(rect.y_max, px->v);
            }
            // per-boat draws happen unconditionally so the random stream does
            // not depend on visibility
            const double drop = unit(rng);
            const double conf = config.detector.confidence_min +
                                unit(rng) * (config.detector.confidence_max -
                                             config.detector.confidence_min);
            std::array<double, 4> jitter{};
            for (auto& j : jitter) j = config.detector.pixel_jitter_sigma * gauss(rng);

            if (in_front) {
                geometry::BBox2D clipped{std::max(rect.x_min, 0.0), std::max(rect.y_min, 0.0),
                                         std::min(rect.x_max, static_cast<double>(calib.image_width())),
                                         std::min(rect.y_max, static_cast<double>(calib.image_height()))};
                if (clipped.valid()) gt.box2d = clipped;
            }
            if (gt.box2d && drop >= config.detector.dropout) {
                tracking::Detection2D det;
                det.box = {gt.box2d->x_min + jitter[0], gt.box2d->y_min + jitter[1],
                           gt.box2d->x_max + jitter[2], gt.box2d->y_max + jitter[3]};
                if (det.box.x_min > det.box.x_max) std::swap(det.box.x_min, det.box.x_max);
                if (det.box.y_min > det.box.y_max) std::swap(det.box.y_min, det.box.y_max);
                det.class_id = boat.class_id;
                det.confidence = conf;
                det.frame_index = bundle.frame_index;
                det.timestamp = t;
                if (det.box.valid()) bundle.detections.push_back(det);
            }
            frame.truth.push_back(gt);
        }
        scenario.frames.push_back(std::move(frame));
    }
    return scenario;
}

}  // namespace usv::sim
