#include "usv/tracking/tracker2d.hpp"

#include <algorithm>
#include <string>

namespace usv::tracking {

namespace {

BBox2D box_from_state(const StateVector& s) { return {s(0), s(1), s(2), s(3)}; }

MeasVector measurement(const BBox2D& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

}  // namespace

void TrackerConfig::validate() const {
    if (confirm_frames <= 0 || max_misses <= 0 || kalman_warmup <= 0) {
        throw Error(ErrorCode::configuration, "tracker frame counts must be positive");
    }
    if (add_confidence < 0.0 || descriptor_delete_threshold < 0.0 || gate < 0.0) {
        throw Error(ErrorCode::configuration, "tracker thresholds must be non-negative");
    }
    if (process_noise < 0.0 || measurement_noise <= 0.0 || initial_covariance <= 0.0) {
        throw Error(ErrorCode::configuration, "tracker noise parameters out of range");
    }
}

BBox2D Track2D::predicted_box() const { return box_from_state(filter.state); }

double jaccard_distance(const BBox2D& a, const BBox2D& b) {
    const double area_a = std::max(0.0, a.width()) * std::max(0.0, a.height());
    const double area_b = std::max(0.0, b.width()) * std::max(0.0, b.height());
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = area_a + area_b - inter;
    if (!(uni > 0.0)) return 1.0;
    return std::clamp((uni - inter) / uni, 0.0, 1.0);
}

double confidence_penalty(double confidence, PenaltyMode mode) {
    if (confidence >= 0.5) return 1.0;
    const double uncertainty = 1.0 - confidence;
    return mode == PenaltyMode::amplify ? 1.0 + uncertainty : uncertainty;
}

double matching_cost(const Track2D& track, const Detection2D& det,
                     const AppearanceDescriptor* det_descriptor, bool use_appearance,
                     PenaltyMode mode) {
    double dist = jaccard_distance(track.predicted_box(), det.box);
    if (use_appearance && det_descriptor != nullptr && track.descriptor) {
        dist += descriptor_distance(*track.descriptor, *det_descriptor);
    }
    return confidence_penalty(det.confidence, mode) * dist;
}

Tracker2D::Tracker2D(TrackerConfig config)
    : config_(config),
      model_(KalmanModel::constant_acceleration(1.0, config.process_noise,
                                                config.measurement_noise,
                                                config.initial_covariance)) {
    config_.validate();
}

std::vector<Track2D> Tracker2D::step(std::int64_t frame_index,
                                     const std::vector<Detection2D>& detections,
                                     const std::vector<GrayPatch>* patches) {
    if (last_frame_ && frame_index <= *last_frame_) {
        throw Error(ErrorCode::sequencing, "frame " + std::to_string(frame_index) +
                                               " does not follow frame " +
                                               std::to_string(*last_frame_));
    }
    for (const auto& det : detections) {
        if (det.frame_index != frame_index) {
            throw Error(ErrorCode::sequencing, "detection frame index " +
                                                   std::to_string(det.frame_index) +
                                                   " differs from step frame " +
                                                   std::to_string(frame_index));
        }
    }
    if (patches != nullptr && patches->size() != detections.size()) {
        throw Error(ErrorCode::dimension, "patch count does not match detection count");
    }
    last_frame_ = frame_index;

    std::vector<std::optional<AppearanceDescriptor>> det_desc(detections.size());
    if (config_.use_appearance && patches != nullptr) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            det_desc[d] = compute_descriptor((*patches)[d]);
        }
    }

    for (auto& t : tracks_) {
        t.filter = kalman_predict(t.filter, model_);
        ++t.age;
    }

    CostMatrix cost(static_cast<Eigen::Index>(tracks_.size()),
                    static_cast<Eigen::Index>(detections.size()));
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const auto* desc = det_desc[d] ? &*det_desc[d] : nullptr;
            cost(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = matching_cost(
                tracks_[t], detections[d], desc, config_.use_appearance, config_.penalty_mode);
        }
    }
    const Assignment assignment = associate(cost, config_.gate);

    std::vector<char> det_consumed(detections.size(), 0);
    std::vector<char> track_matched(tracks_.size(), 0);
    for (const auto& [ti, di] : assignment.pairs) {
        Track2D& track = tracks_[ti];
        const Detection2D& det = detections[di];
        track_matched[ti] = 1;

        if (config_.use_appearance && track.descriptor && det_desc[di] &&
            descriptor_distance(*track.descriptor, *det_desc[di]) >
                config_.descriptor_delete_threshold) {
            // appearance changed too much: the detection belongs to something else
            track.status = TrackStatus::deleted;
            continue;
        }
        det_consumed[di] = 1;
        track.filter = kalman_update(track.filter, measurement(det.box), model_);
        track.box = track.age >= config_.kalman_warmup ? track.predicted_box() : det.box;
        if (det_desc[di]) track.descriptor = det_desc[di];
        track.class_id = det.class_id;
        ++track.hits;
        track.misses = 0;
    }

    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        if (track_matched[ti]) continue;
        Track2D& track = tracks_[ti];
        ++track.misses;
        track.hits = 0;
        if (track.age >= config_.kalman_warmup) track.box = track.predicted_box();
    }

    for (std::size_t di = 0; di < detections.size(); ++di) {
        if (det_consumed[di] || !(detections[di].confidence > config_.add_confidence)) continue;
        Track2D track;
        track.id = next_id_++;
        track.class_id = detections[di].class_id;
        track.filter = kalman_init(model_, measurement(detections[di].box));
        track.box = detections[di].box;
        track.descriptor = det_desc[di];
        track.hits = 1;
        track.age = 1;
        tracks_.push_back(std::move(track));
    }

    for (auto& t : tracks_) {
        if (t.status == TrackStatus::tentative && t.hits >= config_.confirm_frames) {
            t.status = TrackStatus::confirmed;
        }
        if (t.misses >= config_.max_misses) t.status = TrackStatus::deleted;
    }
    std::erase_if(tracks_, [](const Track2D& t) { return t.status == TrackStatus::deleted; });

    std::vector<Track2D> confirmed;
    for (const auto& t : tracks_) {
        if (t.status == TrackStatus::confirmed) confirmed.push_back(t);
    }
    return confirmed;
}

}  // namespace usv::tracking
