#include "usv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <utility>

namespace usv::fusion {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    StageTimer(TimingRow& row, Stage stage) : row_(row), stage_(stage), start_(Clock::now()) {}
    ~StageTimer() {
        const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start_;
        row_.stage_ms[static_cast<std::size_t>(stage_)] += elapsed.count();
    }
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    TimingRow& row_;
    Stage stage_;
    Clock::time_point start_;
};

Observation3D make_observation(const PointCloud& projected, const PointCloud& rotated,
                               const Cluster& cluster, std::optional<ObjectClass> label) {
    Observation3D obs;
    obs.centroid = cluster.centroid;
    obs.box = cloud::fit_oriented_box(projected, cluster);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto i : cluster.point_indices) {
        lo = std::min(lo, rotated.points[i].z());
        hi = std::max(hi, rotated.points[i].z());
    }
    obs.box.height = hi - lo;
    obs.label = label;
    return obs;
}

}  // namespace

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::accumulate: return "accumulate";
        case Stage::filter: return "filter";
        case Stage::project: return "project";
        case Stage::frustum_build: return "frustum_build";
        case Stage::frustum_extract: return "frustum_extract";
        case Stage::frustum_cluster: return "frustum_cluster";
        case Stage::camera_tracking: return "camera_tracking";
        case Stage::cloud_cluster: return "cloud_cluster";
        case Stage::cloud_tracking: return "cloud_tracking";
        case Stage::hybrid_label: return "hybrid_label";
        case Stage::count: break;
    }
    return "unknown";
}

void PipelineConfig::validate() const {
    if (accumulation_window == 0) {
        throw Error(ErrorCode::configuration, "accumulation_window must be >= 1");
    }
    if (!(r_min >= 0.0) || !(r_max > r_min)) {
        throw Error(ErrorCode::configuration, "range filter requires 0 <= r_min < r_max");
    }
    cluster.validate();
    if (frustum_min_size == 0 || frustum_min_size > cluster.max_size) {
        throw Error(ErrorCode::configuration, "frustum_min_size must be in [1, cluster_max_size]");
    }
    fusion.validate();
    tracker.validate();
    if (!(sync_slack >= 0.0)) throw Error(ErrorCode::configuration, "sync_slack must be >= 0");
    if (!(frame_rate > 0.0)) throw Error(ErrorCode::configuration, "frame_rate must be > 0");
    if (detection_min_confidence < 0.0 || detection_min_confidence > 1.0) {
        throw Error(ErrorCode::configuration, "detection_min_confidence must be in [0, 1]");
    }
}

Pipeline::Pipeline(PipelineConfig config, geometry::CalibrationModel calibration)
    : config_((config.validate(), config)),
      calib_(std::move(calibration)),
      accumulator_(config_.accumulation_window),
      tracker2d_(config_.tracker),
      camera_tracker_(config_.fusion),
      cloud_tracker_(config_.fusion) {}

std::vector<Obstacle3D> Pipeline::camera_path(const FrameBundle& bundle,
                                              const std::vector<tracking::Detection2D>& detections,
                                              const PointCloud& conditioned,
                                              const PointCloud& rotated,
                                              const PointCloud& projected, TimingRow& timing) {
    cloud::ClusterParams params = config_.cluster;
    params.min_size = config_.frustum_min_size;

    // apex expressed in the same sea-plane frame as the cluster centroids
    Vec3 apex = calib_.camera_center();
    if (bundle.orientation) apex = bundle.orientation->normalized() * apex;
    apex.z() = 0.0;

    std::vector<Observation3D> observations;
    for (const auto& det : detections) {
        std::optional<geometry::Frustum> frustum;
        {
            StageTimer t(timing, Stage::frustum_build);
            frustum = geometry::build_frustum(calib_, det.box);
        }
        std::vector<std::size_t> inside;
        {
            StageTimer t(timing, Stage::frustum_extract);
            inside = extract_frustum_points(conditioned, *frustum);
        }
        StageTimer t(timing, Stage::frustum_cluster);
        if (inside.empty()) continue;
        const auto clusters = cloud::euclidean_cluster(projected, inside, params);
        const auto chosen = select_obstacle_cluster(clusters, config_.fusion.selection_strategy, apex);
        if (!chosen) continue;
        observations.push_back(make_observation(projected, rotated, *chosen, det.class_id));
    }

    StageTimer t(timing, Stage::camera_tracking);
    return camera_tracker_.step(bundle.frame_index, observations, ObstacleSource::camera_fused);
}

ObstacleMap Pipeline::step(const FrameBundle& bundle) {
    const auto start = Clock::now();
    ObstacleMap map;
    map.frame_index = bundle.frame_index;
    TimingRow& timing = map.timing;
    timing.frame_index = bundle.frame_index;

    // filters are per point, so filtering each incoming cloud gives the same
    // accumulated result at a fraction of the work
    PointCloud filtered;
    {
        StageTimer t(timing, Stage::filter);
        filtered = cloud::filter_cloud(bundle.cloud, config_.r_min, config_.r_max);
    }
    PointCloud conditioned;
    {
        StageTimer t(timing, Stage::accumulate);
        conditioned = accumulator_.accumulate(std::move(filtered));
    }
    PointCloud rotated;
    PointCloud projected;
    {
        StageTimer t(timing, Stage::project);
        rotated = cloud::rotate_cloud(conditioned, bundle.orientation);
        projected = rotated;
        for (auto& p : projected.points) p.z() = 0.0;
    }

    std::vector<tracking::Detection2D> detections;
    for (const auto& det : bundle.detections) {
        if (det.confidence >= config_.detection_min_confidence) detections.push_back(det);
    }
    if (config_.smooth_detections) {
        StageTimer t(timing, Stage::frustum_build);
        for (auto& det : detections) det.frame_index = bundle.frame_index;
        const auto tracks = tracker2d_.step(bundle.frame_index, detections);
        detections.clear();
        for (const auto& tr : tracks) {
            if (!tr.box.valid()) continue;
            tracking::Detection2D d;
            d.box = tr.box;
            d.class_id = tr.class_id;
            d.confidence = 1.0;
            d.frame_index = bundle.frame_index;
            detections.push_back(d);
        }
    }

    if (config_.camera_path) {
        map.camera_obstacles =
            camera_path(bundle, detections, conditioned, rotated, projected, timing);
    }

    if (config_.lidar_path) {
        std::vector<Observation3D> observations;
        {
            StageTimer t(timing, Stage::cloud_cluster);
            for (const auto& c : cloud::euclidean_cluster(projected, config_.cluster)) {
                observations.push_back(make_observation(projected, rotated, c, std::nullopt));
            }
        }
        std::vector<Obstacle3D> all_cloud;
        {
            StageTimer t(timing, Stage::cloud_tracking);
            all_cloud = cloud_tracker_.step(bundle.frame_index, observations,
                                            ObstacleSource::lidar_only);
        }
        StageTimer t(timing, Stage::hybrid_label);
        map.obstacles = hybrid_label(all_cloud, map.camera_obstacles, config_.fusion);
        for (auto& ob : map.obstacles) {
            if (ob.source == ObstacleSource::camera_fused) {
                cloud_tracker_.set_label(ob.track_id, *ob.label);
            } else if (config_.sticky_labels) {
                for (const auto& tr : cloud_tracker_.tracks()) {
                    if (tr.id == ob.track_id) ob.label = tr.label;
                }
            }
        }
    } else {
        map.obstacles = map.camera_obstacles;
    }

    const std::chrono::duration<double, std::milli> total = Clock::now() - start;
    timing.total_ms = total.count();
    return map;
}

}  // namespace usv::fusion
