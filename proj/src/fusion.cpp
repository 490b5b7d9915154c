#include "usv/fusion.hpp"

#include <algorithm>
#include <string>
#include <tuple>

namespace usv::fusion {

std::string_view source_name(ObstacleSource s) {
    return s == ObstacleSource::camera_fused ? "camera_fused" : "lidar_only";
}

void FusionConfig::validate() const {
    if (!(track_distance_threshold > 0.0) || max_misses_3d <= 0 || !(hybrid_match_distance > 0.0)) {
        throw Error(ErrorCode::configuration, "fusion thresholds must be positive");
    }
}

std::vector<std::size_t> extract_frustum_points(const PointCloud& cloud,
                                                const geometry::Frustum& frustum) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (frustum.contains(cloud.points[i])) out.push_back(i);
    }
    return out;
}

std::optional<Cluster> select_obstacle_cluster(const std::vector<Cluster>& clusters,
                                               SelectionStrategy strategy, const Vec3& apex) {
    if (clusters.empty()) return std::nullopt;
    auto dist = [&](const Cluster& c) { return (c.centroid - apex).norm(); };
    const auto best = std::min_element(
        clusters.begin(), clusters.end(), [&](const Cluster& a, const Cluster& b) {
            if (strategy == SelectionStrategy::largest && a.size() != b.size()) {
                return a.size() > b.size();
            }
            return dist(a) < dist(b);
        });
    return *best;
}

DistanceTracker::DistanceTracker(FusionConfig config) : config_(config) { config_.validate(); }

void DistanceTracker::set_label(std::uint64_t id, ObjectClass label) {
    for (auto& t : tracks_) {
        if (t.id == id) t.label = label;
    }
}

std::vector<Obstacle3D> DistanceTracker::step(std::int64_t frame_index,
                                              const std::vector<Observation3D>& observations,
                                              ObstacleSource source) {
    if (last_frame_ && frame_index <= *last_frame_) {
        throw Error(ErrorCode::sequencing, "3D tracker frame " + std::to_string(frame_index) +
                                               " does not follow " + std::to_string(*last_frame_));
    }
    last_frame_ = frame_index;

    struct Candidate {
        double distance;
        std::size_t track;
        std::size_t obs;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
        for (std::size_t o = 0; o < observations.size(); ++o) {
            const double d = (tracks_[t].last_centroid - observations[o].centroid).norm();
            if (d <= config_.track_distance_threshold) candidates.push_back({d, t, o});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.track, a.obs) < std::tie(b.distance, b.track, b.obs);
    });

    std::vector<char> track_used(tracks_.size(), 0);
    std::vector<std::optional<std::size_t>> obs_track(observations.size());
    for (const auto& c : candidates) {
        if (track_used[c.track] || obs_track[c.obs]) continue;
        track_used[c.track] = 1;
        obs_track[c.obs] = c.track;
    }

    for (std::size_t t = 0; t < tracks_.size(); ++t) {
        if (!track_used[t]) ++tracks_[t].misses;
    }

    std::vector<Obstacle3D> out;
    out.reserve(observations.size());
    for (std::size_t o = 0; o < observations.size(); ++o) {
        const auto& obs = observations[o];
        std::uint64_t id = 0;
        if (obs_track[o]) {
            Track3D& track = tracks_[*obs_track[o]];
            track.last_centroid = obs.centroid;
            track.misses = 0;
            if (obs.label) track.label = obs.label;
            id = track.id;
        } else {
            Track3D track;
            track.id = next_id_++;
            track.last_centroid = obs.centroid;
            track.label = obs.label;
            track.color_seed = static_cast<std::uint32_t>(track.id * 2654435761u);
            tracks_.push_back(track);
            id = track.id;
        }
        Obstacle3D ob;
        ob.track_id = id;
        ob.box = obs.box;
        ob.label = obs.label;
        ob.source = source;
        ob.centroid = obs.centroid;
        ob.frame_index = frame_index;
        out.push_back(ob);
    }

    std::erase_if(tracks_, [&](const Track3D& t) { return t.misses >= config_.max_misses_3d; });
    return out;
}

std::vector<Obstacle3D> hybrid_label(const std::vector<Obstacle3D>& all_cloud,
                                     const std::vector<Obstacle3D>& camera_fused,
                                     const FusionConfig& config) {
    struct Candidate {
        double distance;
        std::size_t all;
        std::size_t cam;
    };
    std::vector<Candidate> candidates;
    for (std::size_t a = 0; a < all_cloud.size(); ++a) {
        for (std::size_t c = 0; c < camera_fused.size(); ++c) {
            if (!camera_fused[c].label) continue;
            const double d = (all_cloud[a].centroid - camera_fused[c].centroid).norm();
            if (d <= config.hybrid_match_distance) candidates.push_back({d, a, c});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(x.distance, x.all, x.cam) < std::tie(y.distance, y.all, y.cam);
    });

    std::vector<Obstacle3D> out = all_cloud;
    for (auto& ob : out) {
        ob.label.reset();
        ob.source = ObstacleSource::lidar_only;
    }
    std::vector<char> all_used(all_cloud.size(), 0), cam_used(camera_fused.size(), 0);
    for (const auto& c : candidates) {
        if (all_used[c.all] || cam_used[c.cam]) continue;
        all_used[c.all] = cam_used[c.cam] = 1;
        out[c.all].label = camera_fused[c.cam].label;
        out[c.all].source = ObstacleSource::camera_fused;
    }
    return out;
}

}  // namespace usv::fusion
